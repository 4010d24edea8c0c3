// Pure pan/zoom state: zoom clamped to [0.25, 4], pan bounded so the map
// can overscroll past its extents by at most the margin.

export interface ViewportState {
  panX: number;
  panY: number;
  zoom: number;
}

export interface Extents {
  width: number; // map units == px at zoom 1
  height: number;
}

export const MIN_ZOOM = 0.25;
export const MAX_ZOOM = 4;
export const PAN_MARGIN = 120;

export const initialViewport = (): ViewportState => ({ panX: 0, panY: 0, zoom: 1 });

export function clampZoom(zoom: number): number {
  return Math.min(MAX_ZOOM, Math.max(MIN_ZOOM, zoom));
}

function clampAxis(pan: number, contentSize: number, viewSize: number): number {
  const lo = Math.min(0, viewSize - contentSize) - PAN_MARGIN;
  const hi = Math.max(0, viewSize - contentSize) + PAN_MARGIN;
  return Math.min(hi, Math.max(lo, pan));
}

export function clampPan(
  state: ViewportState,
  extents: Extents,
  viewWidth: number,
  viewHeight: number,
): ViewportState {
  return {
    ...state,
    panX: clampAxis(state.panX, extents.width * state.zoom, viewWidth),
    panY: clampAxis(state.panY, extents.height * state.zoom, viewHeight),
  };
}

export function panBy(
  state: ViewportState,
  dx: number,
  dy: number,
  extents: Extents,
  viewWidth: number,
  viewHeight: number,
): ViewportState {
  return clampPan(
    { ...state, panX: state.panX + dx, panY: state.panY + dy },
    extents,
    viewWidth,
    viewHeight,
  );
}

// Zoom by a factor while keeping the screen point (pivotX, pivotY) fixed.
export function zoomAround(
  state: ViewportState,
  factor: number,
  pivotX: number,
  pivotY: number,
  extents: Extents,
  viewWidth: number,
  viewHeight: number,
): ViewportState {
  const zoom = clampZoom(state.zoom * factor);
  const scale = zoom / state.zoom;
  const next = {
    zoom,
    panX: pivotX - (pivotX - state.panX) * scale,
    panY: pivotY - (pivotY - state.panY) * scale,
  };
  return clampPan(next, extents, viewWidth, viewHeight);
}
