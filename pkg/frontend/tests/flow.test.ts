// @vitest-environment happy-dom
//
// Scripted UI flow against a mocked service: create a session, draw a
// two-point stroke, receive overlay frames, scrub from cache, export.

import { readFileSync } from 'node:fs';
import { dirname, join } from 'node:path';
import { fileURLToPath } from 'node:url';
import { beforeEach, describe, expect, it, vi } from 'vitest';

import { ApiClient } from '../src/api.js';
import { createApp, type AppHandles } from '../src/app.js';

const here = dirname(fileURLToPath(import.meta.url));
const indexHtml = readFileSync(join(here, '..', 'index.html'), 'utf-8');

// 1x1 grayscale PNG, value 255
const TINY_PNG_B64 =
    'iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAAAAAA6fptVAAAACklEQVR4nGP6DwABBQECz6AuzQAAAABJRU5ErkJggg==';

interface MockLog {
    calls: { url: string; method: string }[];
}

function previewPayload(frames: number, magnitude = 0.5) {
    return {
        session: 'sess-1',
        frames,
        traj3d: Array.from({ length: frames }, (_, i) => [20 + i, 24, 2.0]),
        depth_profile: Array.from({ length: frames }, () => 2.0),
        camera_path: Array.from(
            { length: frames },
            (_, i) => [(i / (frames - 1)) * magnitude, 0, 0],
        ),
        masks: Array.from({ length: frames }, () => TINY_PNG_B64),
    };
}

function mockService(log: MockLog): typeof fetch {
    return async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
        const url = String(input);
        const method = init?.method ?? 'GET';
        log.calls.push({ url, method });
        if (url.endsWith('/api/session') && method === 'POST') {
            return jsonResponse({ session: 'sess-1' });
        }
        if (url.includes('/trajectory') && method === 'POST') {
            const body = JSON.parse(String(init?.body));
            const xs = body.points.map((p: number[]) => p[0]);
            if (Math.max(...xs) >= 576) {
                return jsonResponse(
                    { error: 'stroke_out_of_bounds', message: 'stroke outside image' },
                    422,
                );
            }
            return jsonResponse(previewPayload(body.options?.frames ?? 14));
        }
        if (url.includes('/preset') && method === 'POST') {
            const body = JSON.parse(String(init?.body));
            return jsonResponse(previewPayload(body.options?.frames ?? 14, body.magnitude));
        }
        if (url.endsWith('/bundle')) {
            return new Response(new Blob([new Uint8Array([0x50, 0x4b, 3, 4])]), {
                status: 200,
                headers: { 'Content-Type': 'application/zip' },
            });
        }
        return jsonResponse({ error: 'unknown', message: `no route ${url}` }, 404);
    };
}

function jsonResponse(body: unknown, status = 200): Response {
    return new Response(JSON.stringify(body), {
        status,
        headers: { 'Content-Type': 'application/json' },
    });
}

function mountDom(): void {
    const bodyInner = indexHtml
        .replace(/^[\s\S]*<body>/, '')
        .replace(/<\/body>[\s\S]*$/, '')
        .replace(/<script[\s\S]*?<\/script>/g, '');
    document.body.innerHTML = bodyInner;
}

function attachFiles(): void {
    for (const id of ['file-image', 'file-depth', 'file-mask']) {
        const input = document.getElementById(id) as HTMLInputElement;
        const file = new File([new Uint8Array([137, 80, 78, 71])], `${id}.png`, {
            type: 'image/png',
        });
        Object.defineProperty(input, 'files', { value: [file], configurable: true });
    }
    (document.getElementById('depth-min') as HTMLInputElement).value = '1.0';
    (document.getElementById('depth-max') as HTMLInputElement).value = '3.0';
}

function pointer(type: string, x: number, y: number): MouseEvent {
    return new MouseEvent(type, { clientX: x, clientY: y, bubbles: true });
}

describe('authoring flow (mocked service)', () => {
    let handles: AppHandles;
    let log: MockLog;

    beforeEach(() => {
        if (!URL.createObjectURL) {
            (URL as unknown as { createObjectURL: () => string }).createObjectURL = () => 'blob:stub';
        }
        mountDom();
        attachFiles();
        log = { calls: [] };
        handles = createApp(document, new ApiClient('', mockService(log)));
    });

    it('runs the full draw-preview-scrub-export loop', async () => {
        (document.getElementById('btn-session') as HTMLButtonElement).click();
        await vi.waitFor(() => expect(handles.session()).toBe('sess-1'));

        // draw a two-point stroke on the canvas
        const view = document.getElementById('view') as HTMLCanvasElement;
        view.dispatchEvent(pointer('pointerdown', 20, 24));
        view.dispatchEvent(pointer('pointerup', 140, 30));
        await vi.waitFor(() => expect(handles.store.state).not.toBeNull());

        const state = handles.store.state!;
        expect(state.frames).toBe(14);
        expect(state.overlays).toHaveLength(14);
        expect(handles.recorder.points()).toEqual([
            [20, 24],
            [140, 30],
        ]);

        // scrubbing never re-requests: overlays are cached per submission
        const callsBefore = log.calls.length;
        const scrubber = document.getElementById('scrubber') as HTMLInputElement;
        for (const i of [3, 7, 13, 0, 5]) {
            scrubber.value = String(i);
            scrubber.dispatchEvent(new Event('input', { bubbles: true }));
            expect(handles.store.state!.frameIndex).toBe(i);
        }
        expect(log.calls.length).toBe(callsBefore);

        // export downloads the bundle zip
        const blob = await handles.exportBundle();
        const head = new Uint8Array(await blob.arrayBuffer());
        expect(head[0]).toBe(0x50); // 'P'
        expect(head[1]).toBe(0x4b); // 'K'
    });

    it('preset pan_right camera path moves monotonically in +x', async () => {
        await handles.createSession();
        (document.getElementById('preset-kind') as HTMLSelectElement).value = 'pan_right';
        (document.getElementById('preset-mag') as HTMLInputElement).value = '0.5';
        (document.getElementById('btn-preset') as HTMLButtonElement).click();
        await vi.waitFor(() => expect(handles.store.state).not.toBeNull());
        const xs = handles.store.state!.cameraPath.map((t) => t[0]);
        expect(xs).toHaveLength(14);
        for (let i = 1; i < xs.length; i++) expect(xs[i]).toBeGreaterThan(xs[i - 1]);
    });

    it('server rejection is surfaced inline and keeps the stroke', async () => {
        await handles.createSession();
        handles.recorder.begin(10, 10);
        handles.recorder.end(575.5, 10); // clamped to 575, in bounds for default canvas
        // force an out-of-bounds point through the recorder bounds
        handles.recorder.samples[1].x = 700;
        const applied = await handles.submitStroke();
        expect(applied).toBe(false);
        expect(document.getElementById('status')!.textContent).toContain('stroke_out_of_bounds');
        expect(handles.recorder.points()).toHaveLength(2); // stroke retained
    });

    it('stale responses are discarded by sequence number', async () => {
        await handles.createSession();

        let release: (() => void) | null = null;
        const gate = new Promise<void>((resolve) => (release = resolve));
        const slowFetch: typeof fetch = async (input, init) => {
            const url = String(input);
            if (url.includes('/trajectory')) {
                await gate; // hold the first submission until the second lands
                return jsonResponse({ ...previewPayload(5), masks: ['OLD', 'OLD', 'OLD', 'OLD', 'OLD'] });
            }
            return mockService({ calls: [] })(input, init);
        };
        const slowApp = createApp(document, new ApiClient('', slowFetch));
        await slowApp.createSession();

        slowApp.recorder.begin(10, 10);
        slowApp.recorder.end(50, 10);
        const first = slowApp.submitStroke();

        // supersede with a preset preview, then release the stale response
        await slowApp.selectPreset('pan_left', 0.2);
        const overlayAfterPreset = slowApp.store.currentOverlay();
        release!();
        expect(await first).toBe(false);
        expect(slowApp.store.currentOverlay()).toBe(overlayAfterPreset);
    });
});
