// Controller: wires the DOM to the API client, stroke recorder, and preview
// store. All geometry shown on screen originates from service responses.

import { ApiClient, ApiError, type PreviewOptions } from './api.js';
import { colormapDepth, drawCameraPath, drawDepthProfile } from './charts.js';
import { PreviewStore } from './state.js';
import { StrokeRecorder } from './stroke.js';

export type ImageLayer = 'image' | 'depth';

export interface AppHandles {
    store: PreviewStore;
    recorder: StrokeRecorder;
    session(): string | null;
    createSession(): Promise<string>;
    submitStroke(): Promise<boolean>;
    selectPreset(kind: string, magnitude: number, pivotDepth?: number): Promise<boolean>;
    setFrame(index: number): void;
    setLayer(layer: ImageLayer): void;
    exportBundle(): Promise<Blob>;
    notifyStatus(text: string, isError?: boolean): void;
}

interface Elements {
    view: HTMLCanvasElement | null;
    scrubber: HTMLInputElement | null;
    status: HTMLElement | null;
    sessionLabel: HTMLElement | null;
    chartDepth: HTMLCanvasElement | null;
    chartPath: HTMLCanvasElement | null;
    frameLabel: HTMLElement | null;
}

const DEFAULT_SIZE = { width: 576, height: 320 };

export function createApp(doc: Document, api: ApiClient): AppHandles {
    const els: Elements = {
        view: doc.getElementById('view') as HTMLCanvasElement | null,
        scrubber: doc.getElementById('scrubber') as HTMLInputElement | null,
        status: doc.getElementById('status'),
        sessionLabel: doc.getElementById('session-label'),
        chartDepth: doc.getElementById('chart-depth') as HTMLCanvasElement | null,
        chartPath: doc.getElementById('chart-path') as HTMLCanvasElement | null,
        frameLabel: doc.getElementById('frame-label'),
    };

    const store = new PreviewStore();
    const recorder = new StrokeRecorder(DEFAULT_SIZE.width, DEFAULT_SIZE.height);
    let sessionId: string | null = null;
    let layer: ImageLayer = 'image';
    const backgrounds: Record<ImageLayer, HTMLImageElement | null> = { image: null, depth: null };
    let depthColormap: HTMLCanvasElement | null = null;
    const overlayCache = new Map<string, HTMLImageElement>();
    let playTimer: ReturnType<typeof setInterval> | null = null;

    function notifyStatus(text: string, isError = false): void {
        if (els.status) {
            els.status.textContent = text;
            els.status.classList.toggle('error', isError);
        }
    }

    function inputValue(id: string): string {
        const el = doc.getElementById(id) as HTMLInputElement | null;
        return el ? el.value : '';
    }

    function fileOf(id: string): File | null {
        const el = doc.getElementById(id) as HTMLInputElement | null;
        return el?.files?.[0] ?? null;
    }

    function options(): PreviewOptions {
        const frames = parseInt(inputValue('opt-frames'), 10);
        const theta = parseFloat(inputValue('opt-theta'));
        const out: PreviewOptions = {};
        if (Number.isFinite(frames) && frames >= 2) out.frames = frames;
        if (Number.isFinite(theta) && theta > 0) out.theta = theta;
        return out;
    }

    function canvasPoint(event: PointerEvent): { x: number; y: number } {
        const view = els.view!;
        const rect = view.getBoundingClientRect();
        const scaleX = rect.width > 0 ? view.width / rect.width : 1;
        const scaleY = rect.height > 0 ? view.height / rect.height : 1;
        return { x: (event.clientX - rect.left) * scaleX, y: (event.clientY - rect.top) * scaleY };
    }

    function loadBackground(which: ImageLayer, file: File | Blob): void {
        const img = doc.createElement('img') as HTMLImageElement;
        img.onload = () => {
            if (which === 'image' && els.view) {
                els.view.width = img.naturalWidth || DEFAULT_SIZE.width;
                els.view.height = img.naturalHeight || DEFAULT_SIZE.height;
                recorder.resize(els.view.width, els.view.height);
            }
            if (which === 'depth') depthColormap = colormapDepth(img, doc);
            render();
        };
        img.src = URL.createObjectURL(file);
        backgrounds[which] = img;
    }

    function overlayImage(url: string): HTMLImageElement {
        let img = overlayCache.get(url);
        if (!img) {
            img = doc.createElement('img') as HTMLImageElement;
            img.onload = () => render();
            img.src = url;
            overlayCache.set(url, img);
        }
        return img;
    }

    function render(): void {
        const view = els.view;
        const ctx = view?.getContext('2d');
        if (!view || !ctx) return;
        ctx.clearRect(0, 0, view.width, view.height);
        ctx.fillStyle = '#000';
        ctx.fillRect(0, 0, view.width, view.height);

        if (layer === 'depth' && depthColormap) {
            ctx.drawImage(depthColormap, 0, 0, view.width, view.height);
        } else {
            const bg = backgrounds[layer];
            if (bg && bg.complete && bg.naturalWidth > 0) {
                ctx.drawImage(bg, 0, 0, view.width, view.height);
            }
        }

        const url = store.currentOverlay();
        if (url) {
            const img = overlayImage(url);
            if (img.complete && img.naturalWidth > 0) {
                ctx.globalAlpha = 0.45;
                ctx.drawImage(img, 0, 0, view.width, view.height);
                ctx.globalAlpha = 1.0;
            }
        }

        if (recorder.samples.length > 0) {
            ctx.strokeStyle = '#ff5555';
            ctx.lineWidth = 2;
            ctx.beginPath();
            recorder.samples.forEach((p, i) => {
                if (i === 0) ctx.moveTo(p.x, p.y);
                else ctx.lineTo(p.x, p.y);
            });
            ctx.stroke();
            // start point highlighted, matching the preview convention
            ctx.fillStyle = '#3fb950';
            ctx.beginPath();
            ctx.arc(recorder.samples[0].x, recorder.samples[0].y, 4, 0, Math.PI * 2);
            ctx.fill();
        }

        if (els.frameLabel && store.state) {
            els.frameLabel.textContent = `${store.state.frameIndex + 1} / ${store.state.frames}`;
        }
    }

    function applyPreview(): void {
        const state = store.state;
        if (!state) return;
        if (els.scrubber) {
            els.scrubber.max = String(state.frames - 1);
            els.scrubber.value = String(state.frameIndex);
        }
        if (els.chartDepth) drawDepthProfile(els.chartDepth, state.depthProfile);
        if (els.chartPath) drawCameraPath(els.chartPath, state.cameraPath);
        render();
    }

    store.subscribe(() => applyPreview());

    async function createSession(): Promise<string> {
        const image = fileOf('file-image');
        const depth = fileOf('file-depth');
        const mask = fileOf('file-mask');
        if (!image || !depth || !mask) {
            notifyStatus('select image, depth, and mask files first', true);
            throw new Error('missing uploads');
        }
        const depthMin = parseFloat(inputValue('depth-min'));
        const depthMax = parseFloat(inputValue('depth-max'));
        try {
            sessionId = await api.createSession({
                image, depth, mask,
                depthMin: Number.isFinite(depthMin) ? depthMin : undefined,
                depthMax: Number.isFinite(depthMax) ? depthMax : undefined,
            });
        } catch (err) {
            notifyStatus(describe(err), true);
            throw err;
        }
        loadBackground('image', image);
        loadBackground('depth', depth);
        if (els.sessionLabel) els.sessionLabel.textContent = sessionId;
        notifyStatus('session ready; draw a trajectory on the image');
        return sessionId;
    }

    async function submitStroke(): Promise<boolean> {
        if (!sessionId) {
            notifyStatus('create a session first', true);
            return false;
        }
        if (!recorder.canSubmit()) {
            notifyStatus('stroke needs at least two points', true);
            return false;
        }
        const seq = store.beginRequest();
        try {
            const payload = await api.postTrajectory(sessionId, recorder.points(), options());
            const applied = store.commit(seq, payload);
            if (applied) notifyStatus(`preview ready: ${payload.frames} frames`);
            return applied;
        } catch (err) {
            // surfaced inline; the drawn stroke is retained for editing
            notifyStatus(describe(err), true);
            return false;
        }
    }

    async function selectPreset(kind: string, magnitude: number, pivotDepth?: number): Promise<boolean> {
        if (!sessionId) {
            notifyStatus('create a session first', true);
            return false;
        }
        const seq = store.beginRequest();
        try {
            const payload = await api.postPreset(
                sessionId,
                { kind, magnitude, pivot_depth: pivotDepth },
                options(),
            );
            const applied = store.commit(seq, payload);
            if (applied) notifyStatus(`preset ${kind} preview ready`);
            return applied;
        } catch (err) {
            notifyStatus(describe(err), true);
            return false;
        }
    }

    async function exportBundle(): Promise<Blob> {
        if (!sessionId) {
            notifyStatus('create a session first', true);
            throw new Error('no session');
        }
        const blob = await api.fetchBundle(sessionId);
        const anchor = doc.createElement('a') as HTMLAnchorElement;
        anchor.href = URL.createObjectURL(blob);
        anchor.download = 'control_bundle.zip';
        anchor.click();
        notifyStatus('bundle exported');
        return blob;
    }

    function setFrame(index: number): void {
        store.setFrame(index);
    }

    function setLayer(next: ImageLayer): void {
        layer = next;
        render();
    }

    // ── DOM wiring (ids may be absent in tests; every hook is optional) ──
    doc.getElementById('btn-session')?.addEventListener('click', () => {
        void createSession().catch(() => undefined);
    });
    doc.getElementById('btn-export')?.addEventListener('click', () => {
        void exportBundle().catch(() => undefined);
    });
    doc.getElementById('btn-preset')?.addEventListener('click', () => {
        const kind = inputValue('preset-kind') || 'pan_right';
        const mag = parseFloat(inputValue('preset-mag')) || 0;
        const pivot = parseFloat(inputValue('preset-pivot'));
        void selectPreset(kind, mag, Number.isFinite(pivot) ? pivot : undefined);
    });
    doc.getElementById('btn-clear')?.addEventListener('click', () => {
        recorder.clear();
        render();
    });
    els.scrubber?.addEventListener('input', () => {
        setFrame(parseInt(els.scrubber!.value, 10) || 0);
    });
    doc.getElementById('btn-play')?.addEventListener('click', () => {
        if (playTimer !== null) {
            clearInterval(playTimer);
            playTimer = null;
            return;
        }
        playTimer = setInterval(() => {
            const state = store.state;
            if (!state) return;
            store.setFrame((state.frameIndex + 1) % state.frames);
            if (els.scrubber) els.scrubber.value = String(store.state!.frameIndex);
        }, 120);
    });
    for (const which of ['image', 'depth'] as const) {
        doc.getElementById(`layer-${which}`)?.addEventListener('change', () => setLayer(which));
    }
    if (els.view) {
        let drawing = false;
        els.view.addEventListener('pointerdown', (ev) => {
            drawing = true;
            const p = canvasPoint(ev as PointerEvent);
            recorder.begin(p.x, p.y);
            render();
        });
        els.view.addEventListener('pointermove', (ev) => {
            if (!drawing) return;
            const p = canvasPoint(ev as PointerEvent);
            recorder.extend(p.x, p.y);
            render();
        });
        els.view.addEventListener('pointerup', (ev) => {
            if (!drawing) return;
            drawing = false;
            const p = canvasPoint(ev as PointerEvent);
            recorder.end(p.x, p.y);
            render();
            void submitStroke();
        });
    }

    return {
        store,
        recorder,
        session: () => sessionId,
        createSession,
        submitStroke,
        selectPreset,
        setFrame,
        setLayer,
        exportBundle,
        notifyStatus,
    };
}

function describe(err: unknown): string {
    if (err instanceof ApiError) return `${err.code}: ${err.message}`;
    return err instanceof Error ? err.message : String(err);
}
