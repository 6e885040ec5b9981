// Typed client for the preview service. The UI never computes geometry:
// every number it renders comes out of one of these responses.

export interface PreviewResponse {
    session: string;
    frames: number;
    traj3d: number[][] | null;
    depth_profile: number[] | null;
    camera_path: number[][];
    masks: string[]; // base64 PNGs, one per frame
}

export interface SessionUploads {
    image: Blob;
    depth: Blob;
    mask: Blob;
    depthMin?: number;
    depthMax?: number;
}

export interface PreviewOptions {
    frames?: number;
    theta?: number;
}

export interface PresetRequest {
    kind: string;
    magnitude: number;
    pivot_depth?: number;
}

export class ApiError extends Error {
    constructor(public status: number, public code: string, message: string) {
        super(message);
    }
}

async function parseError(resp: Response): Promise<never> {
    let code = 'unknown';
    let message = resp.statusText;
    try {
        const body = await resp.json();
        code = body.error ?? code;
        message = body.message ?? message;
    } catch {
        // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, code, message);
}

export class ApiClient {
    constructor(
        private base: string = '',
        private fetchFn: typeof fetch = (...args) => fetch(...args),
    ) {}

    async createSession(uploads: SessionUploads): Promise<string> {
        const form = new FormData();
        form.append('image', uploads.image, 'image.png');
        form.append('depth', uploads.depth, 'depth.png');
        form.append('mask', uploads.mask, 'mask.png');
        if (uploads.depthMin !== undefined) form.append('depth_min', String(uploads.depthMin));
        if (uploads.depthMax !== undefined) form.append('depth_max', String(uploads.depthMax));
        const resp = await this.fetchFn(`${this.base}/api/session`, {
            method: 'POST',
            body: form,
        });
        if (!resp.ok) await parseError(resp);
        const body = await resp.json();
        return body.session as string;
    }

    async postTrajectory(
        session: string,
        points: number[][],
        options: PreviewOptions = {},
    ): Promise<PreviewResponse> {
        const resp = await this.fetchFn(`${this.base}/api/session/${session}/trajectory`, {
            method: 'POST',
            headers: { 'Content-Type': 'application/json' },
            body: JSON.stringify({ points, options }),
        });
        if (!resp.ok) await parseError(resp);
        return (await resp.json()) as PreviewResponse;
    }

    async postPreset(
        session: string,
        preset: PresetRequest,
        options: PreviewOptions = {},
    ): Promise<PreviewResponse> {
        const resp = await this.fetchFn(`${this.base}/api/session/${session}/preset`, {
            method: 'POST',
            headers: { 'Content-Type': 'application/json' },
            body: JSON.stringify({ ...preset, options }),
        });
        if (!resp.ok) await parseError(resp);
        return (await resp.json()) as PreviewResponse;
    }

    async fetchBundle(session: string): Promise<Blob> {
        const resp = await this.fetchFn(`${this.base}/api/session/${session}/bundle`);
        if (!resp.ok) await parseError(resp);
        return await resp.blob();
    }
}
