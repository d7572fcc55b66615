// Browser bootstrap: wires the DOM to the controller and paints the canvas.

import { ServiceClient, UploadInfo } from "./api.js";
import { AppController, DrawingState, HistoryEntry, Mode, OverlayCell } from "./app.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("service") ?? "http://127.0.0.1:8000";

const canvas = document.getElementById("canvas") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
const fileInput = document.getElementById("file") as HTMLInputElement;
const submitButton = document.getElementById("submit") as HTMLButtonElement;
const clearButton = document.getElementById("clear") as HTMLButtonElement;
const historyList = document.getElementById("history") as HTMLUListElement;
const toastBox = document.getElementById("toast") as HTMLDivElement;
const aggregationSelect = document.getElementById("aggregation") as HTMLSelectElement;
const gridToggle = document.getElementById("show-grid") as HTMLInputElement;

let image: HTMLImageElement | null = null;
let drawing: DrawingState | null = null;
let overlay: OverlayCell[] | null = null;
let info: UploadInfo | null = null;

function repaint(): void {
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const view = controller.currentView;
  if (!image || !view) {
    return;
  }
  const origin = view.toCanvas({ x: 0, y: 0 });
  ctx.drawImage(
    image,
    origin.x,
    origin.y,
    view.image.width * view.scale,
    view.image.height * view.scale
  );
  if (gridToggle.checked && info) {
    ctx.strokeStyle = "rgba(255,255,255,0.25)";
    ctx.lineWidth = 1;
    const cellW = info.width / info.grid_cols;
    const cellH = info.height / info.grid_rows;
    for (let c = 0; c <= info.grid_cols; c++) {
      const a = view.toCanvas({ x: c * cellW, y: 0 });
      const b = view.toCanvas({ x: c * cellW, y: info.height });
      ctx.beginPath();
      ctx.moveTo(a.x, a.y);
      ctx.lineTo(b.x, b.y);
      ctx.stroke();
    }
    for (let r = 0; r <= info.grid_rows; r++) {
      const a = view.toCanvas({ x: 0, y: r * cellH });
      const b = view.toCanvas({ x: info.width, y: r * cellH });
      ctx.beginPath();
      ctx.moveTo(a.x, a.y);
      ctx.lineTo(b.x, b.y);
      ctx.stroke();
    }
  }
  if (overlay) {
    for (const cell of overlay) {
      const a = view.toCanvas({ x: cell.x0, y: cell.y0 });
      const b = view.toCanvas({ x: cell.x1, y: cell.y1 });
      ctx.fillStyle = `rgba(255, 96, 32, ${0.45 * cell.alpha})`;
      ctx.fillRect(a.x, a.y, b.x - a.x, b.y - a.y);
    }
  }
  if (drawing) {
    ctx.strokeStyle = "#27e2a4";
    ctx.lineWidth = 2;
    if (drawing.strokePoints.length > 1) {
      ctx.beginPath();
      drawing.strokePoints.forEach((p, i) => {
        const c = view.toCanvas(p);
        if (i === 0) {
          ctx.moveTo(c.x, c.y);
        } else {
          ctx.lineTo(c.x, c.y);
        }
      });
      ctx.stroke();
    }
    for (const [x0, y0, x1, y1] of drawing.boxes) {
      const a = view.toCanvas({ x: x0, y: y0 });
      const b = view.toCanvas({ x: x1, y: y1 });
      ctx.strokeRect(a.x, a.y, b.x - a.x, b.y - a.y);
    }
  }
}

function toast(message: string): void {
  toastBox.textContent = message;
  toastBox.classList.add("visible");
  setTimeout(() => toastBox.classList.remove("visible"), 4000);
}

const controller = new AppController(new ServiceClient(baseUrl), {
  imageReady(uploadInfo) {
    info = uploadInfo;
    overlay = null;
    repaint();
  },
  drawingChanged(state) {
    drawing = state;
    repaint();
  },
  historyChanged(history: HistoryEntry[]) {
    historyList.replaceChildren(
      ...history
        .slice()
        .reverse()
        .map((entry) => {
          const li = document.createElement("li");
          li.textContent = entry.error
            ? `error: ${entry.error}`
            : entry.caption;
          li.className = entry.error ? "error" : "caption";
          return li;
        })
    );
  },
  submitEnabled(on) {
    submitButton.disabled = !on;
  },
  busyChanged(busy) {
    submitButton.disabled = busy || controller.pendingRegion === null;
    submitButton.textContent = busy ? "captioning…" : "caption region";
  },
  weightsChanged(cells) {
    overlay = cells;
    repaint();
  },
  toast,
});

controller.setCanvasSize({ width: canvas.width, height: canvas.height });

fileInput.addEventListener("change", async () => {
  const file = fileInput.files?.[0];
  if (!file) {
    return;
  }
  try {
    await controller.loadImage(file);
    image = new Image();
    image.onload = repaint;
    image.src = URL.createObjectURL(file);
  } catch {
    // toast already shown by the controller
  }
});

for (const radio of document.querySelectorAll<HTMLInputElement>("input[name=mode]")) {
  radio.addEventListener("change", () => {
    overlay = null;
    controller.setMode(radio.value as Mode);
  });
}

aggregationSelect.addEventListener("change", () => {
  controller.setAggregation(aggregationSelect.value || null);
});

canvas.addEventListener("pointerdown", (e) => {
  canvas.setPointerCapture(e.pointerId);
  controller.pointerDown(eventPoint(e), e.timeStamp);
});
canvas.addEventListener("pointermove", (e) => controller.pointerMove(eventPoint(e), e.timeStamp));
canvas.addEventListener("pointerup", (e) => controller.pointerUp(eventPoint(e), e.timeStamp));

function eventPoint(e: PointerEvent): { x: number; y: number } {
  const rect = canvas.getBoundingClientRect();
  return {
    x: ((e.clientX - rect.left) * canvas.width) / rect.width,
    y: ((e.clientY - rect.top) * canvas.height) / rect.height,
  };
}

submitButton.addEventListener("click", () => void controller.submit());
clearButton.addEventListener("click", () => {
  overlay = null;
  controller.clearDrawing();
});
gridToggle.addEventListener("change", repaint);
