// Stroke capture in image coordinates.
//
// Samples are clamped to the image rectangle (the service rejects anything
// outside [0, W) x [0, H)), and a stroke needs at least two samples before
// it can be submitted. Strokes can be drawn anywhere on the image or depth
// layer; they only describe motion, not the object position.

export interface StrokePoint {
    x: number;
    y: number;
}

export class StrokeRecorder {
    samples: StrokePoint[] = [];
    private active = false;

    constructor(
        private width: number,
        private height: number,
        private minDistance = 2.0,
    ) {}

    /** Adjust the clamping rectangle (e.g. when the image loads); clears any
     *  stroke drawn against the old bounds. */
    resize(width: number, height: number): void {
        this.width = width;
        this.height = height;
        this.clear();
    }

    begin(x: number, y: number): void {
        this.samples = [this.clamp(x, y)];
        this.active = true;
    }

    extend(x: number, y: number): void {
        if (!this.active) return;
        const p = this.clamp(x, y);
        const last = this.samples[this.samples.length - 1];
        if (Math.hypot(p.x - last.x, p.y - last.y) >= this.minDistance) {
            this.samples.push(p);
        }
    }

    end(x: number, y: number): void {
        if (!this.active) return;
        const p = this.clamp(x, y);
        const last = this.samples[this.samples.length - 1];
        if (p.x !== last.x || p.y !== last.y) this.samples.push(p);
        this.active = false;
    }

    clear(): void {
        this.samples = [];
        this.active = false;
    }

    canSubmit(): boolean {
        return this.samples.length >= 2;
    }

    points(): number[][] {
        return this.samples.map((p) => [p.x, p.y]);
    }

    private clamp(x: number, y: number): StrokePoint {
        return {
            x: Math.min(Math.max(x, 0), this.width - 1),
            y: Math.min(Math.max(y, 0), this.height - 1),
        };
    }
}
