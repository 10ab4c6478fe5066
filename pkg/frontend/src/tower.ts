/**
 * The virtual LED tower. Rendering is split into a pure cell-state function
 * (testable, and exported for parity checks against the engine's terminal
 * renderer) and a thin DOM layer that paints those states.
 */

import type { FrameMsg } from "./protocol.js";

export interface CellState {
  col: number;
  row: number;
  r: number;
  g: number;
  b: number;
  lit: boolean;
}

/** Row-major cell states, row 0 first (the top of the tower). */
export function cellStates(frame: FrameMsg): CellState[] {
  const cells: CellState[] = [];
  for (let row = 0; row < frame.h; row++) {
    for (let col = 0; col < frame.w; col++) {
      const i = (row * frame.w + col) * 3;
      const r = frame.px[i];
      const g = frame.px[i + 1];
      const b = frame.px[i + 2];
      cells.push({ col, row, r, g, b, lit: r !== 0 || g !== 0 || b !== 0 });
    }
  }
  return cells;
}

/** Binarized view of a frame: one string per row, block for lit, dot for dark.
 * Matches the engine's terminal renderer glyph for glyph. */
export function asciiRows(frame: FrameMsg): string[] {
  const rows: string[] = [];
  const cells = cellStates(frame);
  for (let row = 0; row < frame.h; row++) {
    let line = "";
    for (let col = 0; col < frame.w; col++) {
      line += cells[row * frame.w + col].lit ? "█" : ".";
    }
    rows.push(line);
  }
  return rows;
}

export class TowerView {
  private cells: HTMLElement[] = [];
  private w = 0;
  private h = 0;

  constructor(private root: HTMLElement) {}

  private rebuild(w: number, h: number): void {
    this.root.innerHTML = "";
    this.root.style.display = "grid";
    this.root.style.gridTemplateColumns = `repeat(${w}, 1fr)`;
    this.cells = [];
    for (let i = 0; i < w * h; i++) {
      const cell = document.createElement("div");
      cell.className = "led";
      this.root.appendChild(cell);
      this.cells.push(cell);
    }
    this.w = w;
    this.h = h;
  }

  render(frame: FrameMsg): void {
    if (frame.w !== this.w || frame.h !== this.h) this.rebuild(frame.w, frame.h);
    for (const cell of cellStates(frame)) {
      const el = this.cells[cell.row * this.w + cell.col];
      el.style.background = cell.lit ? `rgb(${cell.r},${cell.g},${cell.b})` : "#111";
      el.style.boxShadow = cell.lit ? `0 0 6px rgb(${cell.r},${cell.g},${cell.b})` : "none";
    }
  }
}
