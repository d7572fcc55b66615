// Canvas <-> original-image coordinate mapping.
//
// The image is drawn letterboxed into the canvas at a fit scale times the
// user zoom; regions are always emitted in original-image pixels, so every
// pointer event goes through the inverse of this transform.

export interface Point {
  x: number;
  y: number;
}

export interface Size {
  width: number;
  height: number;
}

export class CanvasView {
  readonly scale: number;
  readonly offsetX: number;
  readonly offsetY: number;

  constructor(
    readonly image: Size,
    readonly canvas: Size,
    readonly zoom: number = 1,
    panX: number = 0,
    panY: number = 0
  ) {
    if (image.width <= 0 || image.height <= 0) {
      throw new Error(`bad image size ${image.width}x${image.height}`);
    }
    if (zoom <= 0) {
      throw new Error(`zoom must be positive, got ${zoom}`);
    }
    const fit = Math.min(canvas.width / image.width, canvas.height / image.height);
    this.scale = fit * zoom;
    this.offsetX = (canvas.width - image.width * this.scale) / 2 + panX;
    this.offsetY = (canvas.height - image.height * this.scale) / 2 + panY;
  }

  toCanvas(p: Point): Point {
    return { x: p.x * this.scale + this.offsetX, y: p.y * this.scale + this.offsetY };
  }

  toImage(p: Point): Point {
    return { x: (p.x - this.offsetX) / this.scale, y: (p.y - this.offsetY) / this.scale };
  }

  // stray pointer positions are clamped into the image, mirroring how the
  // server clamps trace points rather than dropping them
  clampToImage(p: Point): Point {
    return {
      x: Math.min(Math.max(p.x, 0), this.image.width),
      y: Math.min(Math.max(p.y, 0), this.image.height),
    };
  }
}
