/**
 * Cue playback. The console synthesizes locally from the CueSpec parameters
 * it fetches with get_profile, so what the operator hears in the browser is
 * built from the same pitches, durations and envelopes as the engine's WAV
 * export. The schedule computation is pure; only `playCue` touches WebAudio.
 */

export interface CueSpecDoc {
  name: string;
  segments: [number, number][]; // [freq_hz, dur_ms]; freq 0 is a rest
  amplitude: number;
  attack_ms: number;
  release_ms: number;
}

export const BUILTIN_CUES: Record<string, CueSpecDoc> = {
  error: {
    name: "error",
    segments: [
      [660, 150],
      [440, 250],
    ],
    amplitude: 0.3,
    attack_ms: 10,
    release_ms: 10,
  },
  suspense: {
    name: "suspense",
    segments: [
      [392, 150],
      [0, 80],
      [392, 150],
    ],
    amplitude: 0.3,
    attack_ms: 10,
    release_ms: 10,
  },
  confirmation: {
    name: "confirmation",
    segments: [
      [523, 120],
      [784, 120],
    ],
    amplitude: 0.3,
    attack_ms: 10,
    release_ms: 10,
  },
  victory: {
    name: "victory",
    segments: [
      [523, 120],
      [659, 120],
      [784, 120],
      [1047, 120],
    ],
    amplitude: 0.3,
    attack_ms: 10,
    release_ms: 10,
  },
};

export interface ToneEvent {
  startS: number;
  durS: number;
  freqHz: number;
  amplitude: number;
  attackS: number;
  releaseS: number;
}

/** Voiced tones with absolute start offsets; rests only advance the clock. */
export function toneSchedule(spec: CueSpecDoc): ToneEvent[] {
  const tones: ToneEvent[] = [];
  let t = 0;
  for (const [freq, durMs] of spec.segments) {
    const durS = durMs / 1000;
    if (freq > 0) {
      tones.push({
        startS: t,
        durS,
        freqHz: freq,
        amplitude: spec.amplitude,
        attackS: spec.attack_ms / 1000,
        releaseS: spec.release_ms / 1000,
      });
    }
    t += durS;
  }
  return tones;
}

export class CuePlayer {
  private ctx: AudioContext | null = null;
  /** cue name -> spec, refreshed from get_profile so playback always matches
   * the engine's current configuration */
  specs: Record<string, CueSpecDoc> = { ...BUILTIN_CUES };

  private context(): AudioContext {
    if (this.ctx === null) this.ctx = new AudioContext();
    return this.ctx;
  }

  playCue(name: string): void {
    const spec = this.specs[name];
    if (!spec) return;
    const ctx = this.context();
    const base = ctx.currentTime + 0.02;
    for (const tone of toneSchedule(spec)) {
      const osc = ctx.createOscillator();
      osc.type = "sine";
      osc.frequency.value = tone.freqHz;
      const gain = ctx.createGain();
      const start = base + tone.startS;
      const end = start + tone.durS;
      gain.gain.setValueAtTime(0, start);
      gain.gain.linearRampToValueAtTime(tone.amplitude, start + tone.attackS);
      gain.gain.setValueAtTime(tone.amplitude, Math.max(start + tone.attackS, end - tone.releaseS));
      gain.gain.linearRampToValueAtTime(0, end);
      osc.connect(gain).connect(ctx.destination);
      osc.start(start);
      osc.stop(end + 0.01);
    }
  }
}
