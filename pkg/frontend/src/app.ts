// Application controller: pointer input -> region documents -> captions.
//
// Deliberately DOM-free: the browser layer (main.ts) forwards pointer
// events in canvas coordinates and renders whatever the hooks receive, so
// the whole drawing/captioning state machine is testable headlessly.

import type { CaptionResult, ServiceClient, UploadInfo } from "./api.js";
import { ApiError } from "./api.js";
import { CanvasView, Point, Size } from "./coords.js";
import {
  Box,
  RegionDoc,
  TimedPoint,
  boxFromCorners,
  boxRegion,
  boxSetRegion,
  downsampleStroke,
  imageRegion,
  patchRegion,
  traceRegion,
} from "./regions.js";

export type Mode = "trace" | "box" | "box-set" | "whole-image" | "patch";

export interface HistoryEntry {
  region: RegionDoc;
  caption: string;
  error: string | null;
}

export interface OverlayCell {
  x0: number;
  y0: number;
  x1: number;
  y1: number;
  alpha: number; // 0..1, relative to the heaviest cell
}

export interface DrawingState {
  mode: Mode;
  strokePoints: Point[]; // image coords, current stroke
  boxes: Box[]; // accumulated boxes (box-set) or the single pending box
  pendingRegion: RegionDoc | null;
}

export interface ViewHooks {
  imageReady(info: UploadInfo): void;
  drawingChanged(state: DrawingState): void;
  historyChanged(history: HistoryEntry[]): void;
  submitEnabled(on: boolean): void;
  busyChanged(busy: boolean): void;
  weightsChanged(cells: OverlayCell[] | null): void;
  toast(message: string): void;
}

export class AppController {
  private info: UploadInfo | null = null;
  private view: CanvasView | null = null;
  private canvasSize: Size = { width: 800, height: 600 };
  private zoom = 1;
  private mode: Mode = "trace";
  private stroke: TimedPoint[] = [];
  private strokeActive = false;
  private boxAnchor: Point | null = null;
  private boxes: Box[] = [];
  private pending: RegionDoc | null = null;
  private busy = false;
  private history: HistoryEntry[] = [];

  constructor(
    private readonly client: ServiceClient,
    private readonly hooks: ViewHooks,
    private aggregation: string | null = null
  ) {}

  get pendingRegion(): RegionDoc | null {
    return this.pending;
  }

  get imageInfo(): UploadInfo | null {
    return this.info;
  }

  get currentView(): CanvasView | null {
    return this.view;
  }

  async loadImage(blob: Blob): Promise<void> {
    try {
      const info = await this.client.upload(blob);
      this.info = info;
      this.rebuildView();
      this.clearDrawing();
      this.hooks.imageReady(info);
    } catch (e) {
      this.hooks.toast(e instanceof ApiError ? e.detail : String(e));
      throw e;
    }
  }

  setCanvasSize(size: Size): void {
    this.canvasSize = size;
    this.rebuildView();
  }

  setZoom(zoom: number): void {
    this.zoom = zoom;
    this.rebuildView();
  }

  setAggregation(aggregation: string | null): void {
    this.aggregation = aggregation;
  }

  setMode(mode: Mode): void {
    this.mode = mode;
    this.clearDrawing();
    if (mode === "whole-image") {
      this.pending = imageRegion();
      this.emitDrawing();
    }
  }

  clearDrawing(): void {
    this.stroke = [];
    this.strokeActive = false;
    this.boxAnchor = null;
    this.boxes = [];
    this.pending = this.mode === "whole-image" ? imageRegion() : null;
    this.emitDrawing();
  }

  pointerDown(canvasPoint: Point, timeMs: number): void {
    if (!this.view) {
      return;
    }
    const p = this.view.clampToImage(this.view.toImage(canvasPoint));
    if (this.mode === "trace") {
      this.strokeActive = true;
      this.stroke = [{ ...p, timeMs }];
    } else if (this.mode === "box" || this.mode === "box-set") {
      this.boxAnchor = p;
    } else if (this.mode === "patch") {
      this.pending = this.patchAt(p);
    }
    this.emitDrawing();
  }

  pointerMove(canvasPoint: Point, timeMs: number): void {
    if (!this.view) {
      return;
    }
    if (this.mode === "trace" && this.strokeActive) {
      const p = this.view.clampToImage(this.view.toImage(canvasPoint));
      this.stroke.push({ ...p, timeMs });
      this.emitDrawing();
    }
  }

  pointerUp(canvasPoint: Point, timeMs: number): void {
    if (!this.view) {
      return;
    }
    const p = this.view.clampToImage(this.view.toImage(canvasPoint));
    if (this.mode === "trace" && this.strokeActive) {
      this.strokeActive = false;
      this.stroke.push({ ...p, timeMs });
      const points = downsampleStroke(this.stroke);
      this.pending = points.length > 0 ? traceRegion(points) : null;
    } else if ((this.mode === "box" || this.mode === "box-set") && this.boxAnchor) {
      const box = boxFromCorners(this.boxAnchor, p);
      this.boxAnchor = null;
      if (box) {
        if (this.mode === "box") {
          this.boxes = [box];
          this.pending = boxRegion(box);
        } else {
          this.boxes.push(box); // accumulate until submit
          this.pending = boxSetRegion([...this.boxes]);
        }
      }
    }
    this.emitDrawing();
  }

  async submit(): Promise<void> {
    if (!this.info || !this.pending) {
      return;
    }
    if (this.busy) {
      return; // one in-flight caption request per submission
    }
    const region = this.pending;
    this.busy = true;
    this.hooks.busyChanged(true);
    try {
      const result = await this.client.caption(this.info.image_id, region, this.aggregation);
      this.history.push({ region, caption: result.caption, error: null });
      this.hooks.historyChanged([...this.history]);
      this.hooks.weightsChanged(this.overlayCells(result));
      if (this.mode === "box-set") {
        this.boxes = [];
        this.pending = null;
        this.emitDrawing();
      }
    } catch (e) {
      const message = e instanceof ApiError ? e.detail : String(e);
      this.history.push({ region, caption: "", error: message });
      this.hooks.historyChanged([...this.history]);
      this.hooks.toast(message);
    } finally {
      this.busy = false;
      this.hooks.busyChanged(false);
    }
  }

  private patchAt(imagePoint: Point): RegionDoc | null {
    if (!this.info) {
      return null;
    }
    const cellW = this.info.width / this.info.grid_cols;
    const cellH = this.info.height / this.info.grid_rows;
    const col = Math.min(this.info.grid_cols - 1, Math.floor(imagePoint.x / cellW));
    const row = Math.min(this.info.grid_rows - 1, Math.floor(imagePoint.y / cellH));
    return patchRegion(row, col);
  }

  private overlayCells(result: CaptionResult): OverlayCell[] | null {
    if (!result.weights || !this.info) {
      return null;
    }
    const { indices, weights } = result.weights;
    const cellW = this.info.width / this.info.grid_cols;
    const cellH = this.info.height / this.info.grid_rows;
    // duplicated indices (traces, overlapping boxes) accumulate mass
    const mass = new Map<number, number>();
    indices.forEach((idx, k) => {
      mass.set(idx, (mass.get(idx) ?? 0) + weights[k]);
    });
    const peak = Math.max(...mass.values());
    if (!(peak > 0)) {
      return null;
    }
    return [...mass.entries()].map(([idx, w]) => {
      const row = Math.floor(idx / this.info!.grid_cols);
      const col = idx % this.info!.grid_cols;
      return {
        x0: col * cellW,
        y0: row * cellH,
        x1: (col + 1) * cellW,
        y1: (row + 1) * cellH,
        alpha: w / peak,
      };
    });
  }

  private rebuildView(): void {
    if (this.info) {
      this.view = new CanvasView(
        { width: this.info.width, height: this.info.height },
        this.canvasSize,
        this.zoom
      );
    }
  }

  private emitDrawing(): void {
    this.hooks.drawingChanged({
      mode: this.mode,
      strokePoints: this.stroke.map((p) => ({ x: p.x, y: p.y })),
      boxes: [...this.boxes],
      pendingRegion: this.pending,
    });
    this.hooks.submitEnabled(this.pending !== null && this.info !== null && !this.busy);
  }
}
