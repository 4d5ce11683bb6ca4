// Short synthesized sound cues for edits, scores, and leadership shifts.

import { CueKind } from './session.js';

const TONES: Record<CueKind, [number, number]> = {
    create: [660, 0.08],
    link: [520, 0.1],
    delete: [240, 0.12],
    score: [880, 0.09],
    leadership: [980, 0.25],
    reject: [180, 0.15],
};

export class AudioCues {
    muted = false;
    private ctx: AudioContext | null = null;

    toggleMute(): boolean {
        this.muted = !this.muted;
        return this.muted;
    }

    play(kind: CueKind): void {
        if (this.muted || typeof AudioContext === 'undefined') return;
        if (!this.ctx) this.ctx = new AudioContext();
        const [freq, duration] = TONES[kind];
        const osc = this.ctx.createOscillator();
        const gain = this.ctx.createGain();
        osc.frequency.value = freq;
        osc.type = kind === 'leadership' ? 'triangle' : 'sine';
        gain.gain.setValueAtTime(0.12, this.ctx.currentTime);
        gain.gain.exponentialRampToValueAtTime(0.001, this.ctx.currentTime + duration);
        osc.connect(gain).connect(this.ctx.destination);
        osc.start();
        osc.stop(this.ctx.currentTime + duration);
    }
}
