/** Test utilities: fixture-backed loaders and recording canvas stubs. */

import { readFile } from "node:fs/promises";
import { fileURLToPath } from "node:url";
import path from "node:path";

const FIXTURES = path.join(path.dirname(fileURLToPath(import.meta.url)),
                           "fixtures", "static");

export async function loadFixture(name: string): Promise<unknown> {
  const raw = await readFile(path.join(FIXTURES, name), "utf-8");
  return JSON.parse(raw);
}

export interface RectCall {
  kind: "fill" | "stroke" | "clear";
  x: number;
  y: number;
  w: number;
  h: number;
  style: string;
}

/** Records fillRect/strokeRect calls so tests can count drawn points. */
export class RecordingCanvas {
  fillStyle = "";
  strokeStyle = "";
  lineWidth = 1;
  calls: RectCall[] = [];

  clearRect(x: number, y: number, w: number, h: number): void {
    this.calls.push({ kind: "clear", x, y, w, h, style: "" });
  }

  fillRect(x: number, y: number, w: number, h: number): void {
    this.calls.push({ kind: "fill", x, y, w, h, style: this.fillStyle });
  }

  strokeRect(x: number, y: number, w: number, h: number): void {
    this.calls.push({ kind: "stroke", x, y, w, h, style: this.strokeStyle });
  }

  /** Point draws: every fill except the full-canvas background wash. */
  pointCalls(width: number, height: number): RectCall[] {
    return this.calls.filter((c) => c.kind === "fill" &&
      !(c.x === 0 && c.y === 0 && c.w === width && c.h === height));
  }
}

export class RecordingPathCanvas {
  strokeStyle = "";
  lineWidth = 1;
  ops: string[] = [];
  strokes = 0;

  clearRect(): void { this.ops.push("clear"); }
  beginPath(): void { this.ops.push("begin"); }
  moveTo(x: number, y: number): void { this.ops.push(`move:${x},${y}`); }
  lineTo(x: number, y: number): void { this.ops.push(`line:${x},${y}`); }
  stroke(): void { this.ops.push("stroke"); this.strokes += 1; }
}
