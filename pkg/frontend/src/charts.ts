// Small canvas charts: depth profile (d_i vs frame) and the camera path
// polyline projected onto the x/z plane. Pure drawing; all numbers come from
// the service response.

// Blue(near) -> yellow(far) ramp for the depth layer toggle. Presentation
// only: the actual depth values live on the server.
export function colormapDepth(img: HTMLImageElement, doc: Document): HTMLCanvasElement | null {
    const canvas = doc.createElement('canvas') as HTMLCanvasElement;
    canvas.width = img.naturalWidth;
    canvas.height = img.naturalHeight;
    const ctx = canvas.getContext('2d');
    if (!ctx || canvas.width === 0) return null;
    ctx.drawImage(img, 0, 0);
    let data: ImageData;
    try {
        data = ctx.getImageData(0, 0, canvas.width, canvas.height);
    } catch {
        return null; // no pixel access in this environment
    }
    const px = data.data;
    for (let i = 0; i < px.length; i += 4) {
        const t = px[i] / 255; // grayscale, any channel works
        px[i] = Math.round(32 + 200 * t);
        px[i + 1] = Math.round(48 + 160 * t);
        px[i + 2] = Math.round(160 - 120 * t);
    }
    ctx.putImageData(data, 0, 0);
    return canvas;
}

export function drawDepthProfile(canvas: HTMLCanvasElement, depths: number[] | null): void {
    const ctx = canvas.getContext('2d');
    if (!ctx) return;
    const { width, height } = canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = '#14161a';
    ctx.fillRect(0, 0, width, height);
    if (!depths || depths.length === 0) return;

    const lo = Math.min(...depths);
    const hi = Math.max(...depths);
    const span = hi - lo || 1;
    const pad = 8;
    const xAt = (i: number) => pad + (i / Math.max(depths.length - 1, 1)) * (width - 2 * pad);
    const yAt = (d: number) => height - pad - ((d - lo) / span) * (height - 2 * pad);

    ctx.strokeStyle = '#58a6ff';
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    depths.forEach((d, i) => {
        if (i === 0) ctx.moveTo(xAt(i), yAt(d));
        else ctx.lineTo(xAt(i), yAt(d));
    });
    ctx.stroke();

    ctx.fillStyle = '#3fb950';
    ctx.beginPath();
    ctx.arc(xAt(0), yAt(depths[0]), 3, 0, Math.PI * 2);
    ctx.fill();

    ctx.fillStyle = '#8b949e';
    ctx.font = '10px sans-serif';
    ctx.fillText(hi.toFixed(2), 2, 10);
    ctx.fillText(lo.toFixed(2), 2, height - 2);
}

export function drawCameraPath(canvas: HTMLCanvasElement, path: number[][]): void {
    const ctx = canvas.getContext('2d');
    if (!ctx) return;
    const { width, height } = canvas;
    ctx.clearRect(0, 0, width, height);
    ctx.fillStyle = '#14161a';
    ctx.fillRect(0, 0, width, height);
    if (path.length === 0) return;

    const xs = path.map((t) => t[0]);
    const zs = path.map((t) => t[2]);
    const spanX = Math.max(...xs) - Math.min(...xs) || 1e-6;
    const spanZ = Math.max(...zs) - Math.min(...zs) || 1e-6;
    const span = Math.max(spanX, spanZ);
    const pad = 10;
    const scale = (Math.min(width, height) - 2 * pad) / span;
    const cx = (Math.max(...xs) + Math.min(...xs)) / 2;
    const cz = (Math.max(...zs) + Math.min(...zs)) / 2;
    const px = (x: number) => width / 2 + (x - cx) * scale;
    const pz = (z: number) => height / 2 - (z - cz) * scale;

    ctx.strokeStyle = '#d29922';
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    path.forEach((t, i) => {
        if (i === 0) ctx.moveTo(px(t[0]), pz(t[2]));
        else ctx.lineTo(px(t[0]), pz(t[2]));
    });
    ctx.stroke();

    ctx.fillStyle = '#3fb950';
    ctx.beginPath();
    ctx.arc(px(path[0][0]), pz(path[0][2]), 3, 0, Math.PI * 2);
    ctx.fill();
}
