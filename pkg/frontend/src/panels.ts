/**
 * The movable, resizable panel grid.
 *
 * Panels live on a fixed 12x8 CSS grid.  Dragging a panel header moves it
 * by whole cells; the corner handle resizes it.  Geometry changes route
 * through AppState so they clamp to the grid and persist immediately.
 */

import { AppState, PanelName, PANELS, GRID_COLS, GRID_ROWS } from "./state.js";

export interface PanelElements {
  root: HTMLElement;
  body: HTMLElement;
}

function applyRect(state: AppState, name: PanelName, el: HTMLElement): void {
  const r = state.layout[name];
  el.style.gridColumn = `${r.x + 1} / span ${r.w}`;
  el.style.gridRow = `${r.y + 1} / span ${r.h}`;
}

export function mountPanels(
  container: HTMLElement,
  state: AppState,
): Record<PanelName, PanelElements> {
  container.classList.add("panel-grid");
  container.style.display = "grid";
  container.style.gridTemplateColumns = `repeat(${GRID_COLS}, 1fr)`;
  container.style.gridTemplateRows = `repeat(${GRID_ROWS}, 1fr)`;

  const mounted = {} as Record<PanelName, PanelElements>;
  for (const name of PANELS) {
    const panel = document.createElement("section");
    panel.className = "panel";
    panel.dataset.panel = name;

    const header = document.createElement("header");
    header.textContent = name;
    panel.appendChild(header);

    const body = document.createElement("div");
    body.className = "panel-body";
    panel.appendChild(body);

    const grip = document.createElement("div");
    grip.className = "panel-resize";
    panel.appendChild(grip);

    applyRect(state, name, panel);
    attachDrag(header, (dx, dy) => {
      state.movePanel(name, dx, dy);
      applyRect(state, name, panel);
    }, () => cellSize(container));
    attachDrag(grip, (dw, dh) => {
      state.resizePanel(name, dw, dh);
      applyRect(state, name, panel);
    }, () => cellSize(container));

    container.appendChild(panel);
    mounted[name] = { root: panel, body };
  }
  return mounted;
}

function cellSize(container: HTMLElement): { w: number; h: number } {
  const rect = container.getBoundingClientRect();
  return {
    w: Math.max(1, rect.width / GRID_COLS),
    h: Math.max(1, rect.height / GRID_ROWS),
  };
}

function attachDrag(
  handle: HTMLElement,
  apply: (dx: number, dy: number) => void,
  cell: () => { w: number; h: number },
): void {
  handle.addEventListener("pointerdown", (down: PointerEvent) => {
    down.preventDefault();
    const { w, h } = cell();
    let lastX = 0;
    let lastY = 0;
    const onMove = (move: PointerEvent) => {
      const cellsX = Math.round((move.clientX - down.clientX) / w);
      const cellsY = Math.round((move.clientY - down.clientY) / h);
      if (cellsX !== lastX || cellsY !== lastY) {
        apply(cellsX - lastX, cellsY - lastY);
        lastX = cellsX;
        lastY = cellsY;
      }
    };
    const onUp = () => {
      window.removeEventListener("pointermove", onMove);
      window.removeEventListener("pointerup", onUp);
    };
    window.addEventListener("pointermove", onMove);
    window.addEventListener("pointerup", onUp);
  });
}
