// Client-side frame cache: contiguous pushes, fixed-rate pops, hold-last on
// underrun. The console renders only frames already delivered and never
// extrapolates.
export class CacheSequenceError extends Error {
}
export class FrameCache {
    constructor() {
        this.frames = [];
        this.nextPush = null;
        this.last = null;
        this.lastIndex = -1;
    }
    push(firstFrameIndex, frames) {
        if (frames.length === 0)
            return;
        if (this.nextPush !== null && firstFrameIndex !== this.nextPush) {
            throw new CacheSequenceError(`expected frame index ${this.nextPush}, got ${firstFrameIndex}`);
        }
        if (this.nextPush === null)
            this.nextPush = firstFrameIndex;
        for (const frame of frames) {
            this.frames.push([this.nextPush, frame]);
            this.nextPush += 1;
        }
    }
    pop() {
        const head = this.frames.shift();
        if (head === undefined) {
            return { frame: this.last, index: this.lastIndex, held: true };
        }
        this.last = head[1];
        this.lastIndex = head[0];
        return { frame: head[1], index: head[0], held: false };
    }
    buffered() {
        return this.frames.length;
    }
    reset() {
        this.frames = [];
        this.nextPush = null;
        this.last = null;
        this.lastIndex = -1;
    }
}
