import { MapApi } from "./api.js";
import { buildHoverCard } from "./hover.js";
import { buildScene, buildStaleBanner, mapExtents } from "./scene.js";
import { buildSettingsModal, defaultSettings, DisplaySettings } from "./settings.js";
import { MapView } from "./types.js";
import {
  clampPan,
  initialViewport,
  panBy,
  ViewportState,
  zoomAround,
} from "./viewport.js";

interface AppState {
  settings: DisplaySettings;
  student: string | null;
  viewport: ViewportState;
  view: MapView | null;
}

export function startApp(rootId = "app", api?: MapApi): void {
  const root = document.getElementById(rootId);
  if (!root) throw new Error(`missing #${rootId} container`);

  const query = new URLSearchParams(location.search);
  // ?api=http://localhost:8000 points a statically served UI at the backend.
  const client = api ?? new MapApi(query.get("api") ?? "");

  const state: AppState = {
    settings: defaultSettings(),
    student: query.get("student"),
    viewport: initialViewport(),
    view: null,
  };

  const toolbar = document.createElement("div");
  toolbar.className = "toolbar";
  const settingsButton = document.createElement("button");
  settingsButton.textContent = "Display settings";
  toolbar.append(settingsButton);

  const mapHost = document.createElement("div");
  mapHost.className = "map-host";
  const overlay = document.createElement("div");
  overlay.className = "overlay";
  root.append(toolbar, mapHost, overlay);

  const render = () => {
    mapHost.innerHTML = "";
    if (!state.view) return;
    mapHost.append(buildScene(state.view, state.viewport, state.settings.layers));
  };

  const refetch = async () => {
    const view = await client.fetchMapView(state.settings, state.student);
    if (view === null) return; // superseded by a newer request
    state.view = view;
    render();
  };

  settingsButton.addEventListener("click", () => {
    overlay.innerHTML = "";
    const modal = buildSettingsModal(state.settings, (next) => {
      overlay.innerHTML = "";
      state.settings = next;
      void refetch();
    });
    overlay.append(modal);
  });

  const viewSize = () => ({
    width: mapHost.clientWidth || 1200,
    height: mapHost.clientHeight || 800,
  });

  mapHost.addEventListener("wheel", (event) => {
    if (!state.view) return;
    event.preventDefault();
    const factor = Math.exp(-event.deltaY / 400);
    const { width, height } = viewSize();
    const bounds = mapHost.getBoundingClientRect();
    state.viewport = zoomAround(
      state.viewport,
      factor,
      event.clientX - bounds.left,
      event.clientY - bounds.top,
      mapExtents(state.view),
      width,
      height,
    );
    render();
  });

  let dragging: { x: number; y: number } | null = null;
  mapHost.addEventListener("mousedown", (event) => {
    dragging = { x: event.clientX, y: event.clientY };
  });
  window.addEventListener("mouseup", () => {
    dragging = null;
  });
  window.addEventListener("mousemove", (event) => {
    if (!dragging || !state.view) return;
    const { width, height } = viewSize();
    state.viewport = panBy(
      state.viewport,
      event.clientX - dragging.x,
      event.clientY - dragging.y,
      mapExtents(state.view),
      width,
      height,
    );
    dragging = { x: event.clientX, y: event.clientY };
    render();
  });

  let hoverToken = 0;
  mapHost.addEventListener("mouseover", async (event) => {
    const blockEl = (event.target as Element).closest("[data-course-id]");
    if (!blockEl || !state.view) return;
    const courseId = blockEl.getAttribute("data-course-id")!;
    const token = ++hoverToken;
    try {
      const card = await client.fetchCourse(courseId, state.settings, state.student);
      if (token !== hoverToken) return;
      overlay.innerHTML = "";
      if (state.view && card.snapshot_id !== state.view.snapshot_id) {
        overlay.append(buildStaleBanner(state.view.snapshot_id, card.snapshot_id));
      }
      overlay.append(buildHoverCard(card));
    } catch {
      // hover is best-effort; the map itself stays interactive
    }
  });
  mapHost.addEventListener("mouseout", () => {
    hoverToken++;
    overlay.innerHTML = "";
  });

  window.addEventListener("resize", () => {
    if (!state.view) return;
    const { width, height } = viewSize();
    state.viewport = clampPan(state.viewport, mapExtents(state.view), width, height);
    render();
  });

  void refetch();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  startApp();
}
