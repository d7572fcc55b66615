import { describe, expect, it } from "vitest";

import { CanvasView } from "../src/coords.js";

const IMAGES = [
  { width: 640, height: 480 },
  { width: 1920, height: 1080 },
  { width: 33, height: 777 },
];
const CANVASES = [
  { width: 800, height: 600 },
  { width: 301, height: 1203 },
];
const ZOOMS = [0.1, 0.5, 1, 1.75, 3, 8, 16];

describe("canvas/image coordinate mapping", () => {
  it("round-trips canvas -> image -> canvas within 0.5 px at any zoom", () => {
    for (const image of IMAGES) {
      for (const canvas of CANVASES) {
        for (const zoom of ZOOMS) {
          const view = new CanvasView(image, canvas, zoom, 13.5, -7.25);
          for (let i = 0; i <= 20; i++) {
            const p = {
              x: (canvas.width * i) / 20,
              y: (canvas.height * (20 - i)) / 20,
            };
            const back = view.toCanvas(view.toImage(p));
            expect(Math.abs(back.x - p.x)).toBeLessThanOrEqual(0.5);
            expect(Math.abs(back.y - p.y)).toBeLessThanOrEqual(0.5);
          }
        }
      }
    }
  });

  it("round-trips image -> canvas -> image within 0.5 px", () => {
    const view = new CanvasView({ width: 640, height: 480 }, { width: 800, height: 600 }, 2.5);
    for (let i = 0; i <= 10; i++) {
      const p = { x: 64 * i, y: 48 * i };
      const back = view.toImage(view.toCanvas(p));
      expect(Math.abs(back.x - p.x)).toBeLessThanOrEqual(0.5);
      expect(Math.abs(back.y - p.y)).toBeLessThanOrEqual(0.5);
    }
  });

  it("fit scale letterboxes and centers", () => {
    const view = new CanvasView({ width: 100, height: 50 }, { width: 200, height: 200 });
    expect(view.scale).toBe(2); // limited by width
    expect(view.toCanvas({ x: 0, y: 0 })).toEqual({ x: 0, y: 50 });
    expect(view.toCanvas({ x: 100, y: 50 })).toEqual({ x: 200, y: 150 });
  });

  it("clamps stray points into the image", () => {
    const view = new CanvasView({ width: 100, height: 50 }, { width: 100, height: 50 });
    expect(view.clampToImage({ x: -5, y: 999 })).toEqual({ x: 0, y: 50 });
  });

  it("rejects bad parameters", () => {
    expect(() => new CanvasView({ width: 0, height: 5 }, { width: 10, height: 10 })).toThrow();
    expect(
      () => new CanvasView({ width: 5, height: 5 }, { width: 10, height: 10 }, 0)
    ).toThrow();
  });
});
