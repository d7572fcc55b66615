// region-spec/v1 document builders and validation.
//
// Builders emit the exact JSON shape the service parses; validateRegionDoc
// mirrors the server's schema rules and is exercised against the shared
// conformance vectors in docs/region-spec-v1.vectors.json.

import type { Point } from "./coords.js";

export const SCHEMA_VERSION = "region-spec/v1";

export type Box = [number, number, number, number];

export type RegionDoc =
  | { version?: string; kind: "image" }
  | { version?: string; kind: "patch"; row: number; col: number }
  | { version?: string; kind: "box"; box: Box }
  | { version?: string; kind: "box_set"; boxes: Box[] }
  | { version?: string; kind: "trace"; points: [number, number][] };

export interface TimedPoint extends Point {
  timeMs: number;
}

export function imageRegion(): RegionDoc {
  return { version: SCHEMA_VERSION, kind: "image" };
}

export function patchRegion(row: number, col: number): RegionDoc {
  return { version: SCHEMA_VERSION, kind: "patch", row, col };
}

// corners may come from any drag direction; normalize so x0 < x1, y0 < y1.
// Returns null while the drag is still degenerate (zero width or height).
export function boxFromCorners(a: Point, b: Point): Box | null {
  const x0 = Math.min(a.x, b.x);
  const x1 = Math.max(a.x, b.x);
  const y0 = Math.min(a.y, b.y);
  const y1 = Math.max(a.y, b.y);
  if (!(x0 < x1 && y0 < y1)) {
    return null;
  }
  return [x0, y0, x1, y1];
}

export function boxRegion(box: Box): RegionDoc {
  return { version: SCHEMA_VERSION, kind: "box", box };
}

export function boxSetRegion(boxes: Box[]): RegionDoc {
  return { version: SCHEMA_VERSION, kind: "box_set", boxes };
}

export function traceRegion(points: Point[]): RegionDoc {
  return {
    version: SCHEMA_VERSION,
    kind: "trace",
    points: points.map((p) => [p.x, p.y] as [number, number]),
  };
}

// Pointer events fire far faster than mouse-trace data was ever recorded;
// keep at most maxPerSecond points so traces stay comparable.
export function downsampleStroke(points: TimedPoint[], maxPerSecond = 60): Point[] {
  if (points.length === 0) {
    return [];
  }
  const minGapMs = 1000 / maxPerSecond;
  const kept: Point[] = [{ x: points[0].x, y: points[0].y }];
  let lastTime = points[0].timeMs;
  for (const p of points.slice(1)) {
    if (p.timeMs - lastTime >= minGapMs) {
      kept.push({ x: p.x, y: p.y });
      lastTime = p.timeMs;
    }
  }
  return kept;
}

// Returns null when the document is valid, else a reason string.
export function validateRegionDoc(doc: unknown): string | null {
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    return "region must be a JSON object";
  }
  const obj = doc as Record<string, unknown>;
  if ("version" in obj && obj.version !== SCHEMA_VERSION) {
    return `unsupported version ${String(obj.version)}`;
  }
  switch (obj.kind) {
    case "image":
      return null;
    case "patch": {
      if (!isNonNegativeInt(obj.row) || !isNonNegativeInt(obj.col)) {
        return "patch needs integer row and col >= 0";
      }
      return null;
    }
    case "box":
      return validBox(obj.box);
    case "box_set": {
      if (!Array.isArray(obj.boxes) || obj.boxes.length === 0) {
        return "box_set needs a nonempty boxes list";
      }
      for (const b of obj.boxes) {
        const err = validBox(b);
        if (err) {
          return err;
        }
      }
      return null;
    }
    case "trace": {
      if (!Array.isArray(obj.points) || obj.points.length === 0) {
        return "trace needs a nonempty points list";
      }
      for (const p of obj.points) {
        if (!Array.isArray(p) || p.length !== 2 || !p.every(isFiniteNumber)) {
          return "trace points must be [x, y] number pairs";
        }
      }
      return null;
    }
    case undefined:
      return "missing kind";
    default:
      return `unknown kind ${String(obj.kind)}`;
  }
}

function validBox(b: unknown): string | null {
  if (!Array.isArray(b) || b.length !== 4 || !b.every(isFiniteNumber)) {
    return "box must be [x0, y0, x1, y1] numbers";
  }
  const [x0, y0, x1, y1] = b as number[];
  if (!(x0 < x1 && y0 < y1)) {
    return "degenerate box: need x0 < x1 and y0 < y1";
  }
  return null;
}

function isFiniteNumber(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function isNonNegativeInt(v: unknown): boolean {
  return typeof v === "number" && Number.isInteger(v) && v >= 0;
}
