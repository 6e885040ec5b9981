// Preview state: overlays, scrub position, and the stale-response guard.
//
// Overlays are cached per submission; scrubbing only changes the frame index
// and never touches the network. At most one submission is considered live:
// responses to superseded submissions are discarded by sequence number.

import type { PreviewResponse } from './api.js';

export interface PreviewState {
    frames: number;
    frameIndex: number;
    overlays: string[]; // data: URLs, one per frame
    cameraPath: number[][];
    depthProfile: number[] | null;
    traj3d: number[][] | null;
}

export type StateListener = (state: PreviewState | null) => void;

export class PreviewStore {
    private seq = 0;
    private appliedSeq = 0;
    private listeners: StateListener[] = [];
    state: PreviewState | null = null;

    beginRequest(): number {
        return ++this.seq;
    }

    /** Apply a server response; returns false (and changes nothing) when a
     *  newer submission is already in flight or applied. */
    commit(seq: number, payload: PreviewResponse): boolean {
        if (seq < this.seq || seq <= this.appliedSeq) return false;
        this.appliedSeq = seq;
        this.state = {
            frames: payload.frames,
            frameIndex: 0,
            overlays: payload.masks.map((b64) => `data:image/png;base64,${b64}`),
            cameraPath: payload.camera_path,
            depthProfile: payload.depth_profile,
            traj3d: payload.traj3d,
        };
        this.emit();
        return true;
    }

    setFrame(index: number): void {
        if (!this.state) return;
        const clamped = Math.min(Math.max(index, 0), this.state.frames - 1);
        if (clamped !== this.state.frameIndex) {
            this.state.frameIndex = clamped;
            this.emit();
        }
    }

    currentOverlay(): string | null {
        if (!this.state) return null;
        return this.state.overlays[this.state.frameIndex] ?? null;
    }

    subscribe(listener: StateListener): void {
        this.listeners.push(listener);
    }

    private emit(): void {
        for (const listener of this.listeners) listener(this.state);
    }
}
