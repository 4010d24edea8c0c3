import { Block, LayerName, MapView } from "./types.js";
import { ViewportState } from "./viewport.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface SceneOptions {
  cellWidth: number;
  cellHeight: number;
  gap: number;
  // Numeric value labels appear above this zoom so the shading stays
  // readable for users who cannot separate the color ramps.
  labelZoomThreshold: number;
}

export const DEFAULT_SCENE_OPTIONS: SceneOptions = {
  cellWidth: 150,
  cellHeight: 90,
  gap: 18,
  labelZoomThreshold: 1.5,
};

export interface BlockGeometry {
  x: number;
  y: number;
  width: number;
  height: number;
}

function cellOccupancy(blocks: Block[]): Map<string, number> {
  const counts = new Map<string, number>();
  for (const block of blocks) {
    const key = `${block.objective_row}:${block.semester_index}`;
    counts.set(key, (counts.get(key) ?? 0) + 1);
  }
  return counts;
}

export function blockGeometry(
  block: Block,
  occupancy: Map<string, number>,
  opts: SceneOptions,
): BlockGeometry {
  const key = `${block.objective_row}:${block.semester_index}`;
  const sharing = occupancy.get(key) ?? 1;
  const height = (opts.cellHeight - (sharing - 1) * 4) / sharing;
  const slot = block.cell_order ?? 0;
  return {
    x: block.semester_index * (opts.cellWidth + opts.gap),
    y: block.objective_row * (opts.cellHeight + opts.gap) + slot * (height + 4),
    width: opts.cellWidth,
    height,
  };
}

export function mapExtents(view: MapView, opts: SceneOptions = DEFAULT_SCENE_OPTIONS) {
  return {
    width: view.base.columns.length * (opts.cellWidth + opts.gap),
    height: view.base.rows.length * (opts.cellHeight + opts.gap),
  };
}

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string | number>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [name, value] of Object.entries(attrs)) {
    el.setAttribute(name, String(value));
  }
  return el;
}

function text(content: string, attrs: Record<string, string | number>): SVGTextElement {
  const el = svgElement("text", attrs);
  el.textContent = content;
  return el;
}

/**
 * Build the full map scene: base blocks, relevance lines with
 * thickness-scaled width, blue/orange half-block engagement shading with
 * opacity equal to the composite value, and grade pins. Layers render only
 * when listed in `layers` and present in the payload, so toggling a layer
 * adds or removes exactly that layer's nodes.
 */
export function buildScene(
  view: MapView,
  viewport: ViewportState,
  layers: LayerName[] = view.settings.layers,
  opts: SceneOptions = DEFAULT_SCENE_OPTIONS,
): SVGSVGElement {
  const svg = svgElement("svg", { class: "curriculum-map", role: "img" });
  const root = svgElement("g", {
    class: "viewport",
    transform: `translate(${viewport.panX},${viewport.panY}) scale(${viewport.zoom})`,
  });
  svg.append(root);

  const occupancy = cellOccupancy(view.base.blocks);
  const geometry = new Map<string, BlockGeometry>();
  for (const block of view.base.blocks) {
    geometry.set(block.course_id, blockGeometry(block, occupancy, opts));
  }

  // Layer 1 under the blocks so lines do not obscure titles.
  if (layers.includes("relevance") && view.relevance) {
    const lines = svgElement("g", { class: "layer-relevance" });
    for (const edge of view.relevance.edges) {
      const from = geometry.get(edge.a);
      const to = geometry.get(edge.b);
      if (!from || !to) continue;
      lines.append(
        svgElement("line", {
          class: "relevance-edge",
          "data-layer": "relevance",
          "data-edge": `${edge.a}~${edge.b}`,
          x1: from.x + from.width / 2,
          y1: from.y + from.height / 2,
          x2: to.x + to.width / 2,
          y2: to.y + to.height / 2,
          "stroke-width": 1 + 5 * edge.thickness,
        }),
      );
    }
    root.append(lines);
  }

  const showLabels = viewport.zoom > opts.labelZoomThreshold;
  const blocksGroup = svgElement("g", { class: "layer-base" });
  for (const block of view.base.blocks) {
    const geo = geometry.get(block.course_id)!;
    const g = svgElement("g", {
      class: "course-block",
      "data-course-id": block.course_id,
    });
    g.append(
      svgElement("rect", {
        class: "block-frame",
        x: geo.x,
        y: geo.y,
        width: geo.width,
        height: geo.height,
      }),
    );

    const individual = layers.includes("individual")
      ? view.individual?.values[block.course_id]
      : undefined;
    if (individual && individual.value !== null) {
      g.append(
        svgElement("rect", {
          class: "shade-individual",
          "data-layer": "individual",
          x: geo.x,
          y: geo.y,
          width: geo.width / 2,
          height: geo.height,
          opacity: individual.value,
        }),
      );
      if (showLabels) {
        g.append(
          text(individual.value.toFixed(2), {
            class: "metric-label metric-label-individual",
            "data-layer": "individual",
            x: geo.x + geo.width / 4,
            y: geo.y + geo.height - 6,
          }),
        );
      }
    }

    const cohort = layers.includes("cohort")
      ? view.cohort?.values[block.course_id]
      : undefined;
    if (cohort && cohort.value !== null) {
      g.append(
        svgElement("rect", {
          class: "shade-cohort",
          "data-layer": "cohort",
          x: geo.x + geo.width / 2,
          y: geo.y,
          width: geo.width / 2,
          height: geo.height,
          opacity: cohort.value,
        }),
      );
      if (showLabels) {
        g.append(
          text(cohort.value.toFixed(2), {
            class: "metric-label metric-label-cohort",
            "data-layer": "cohort",
            x: geo.x + (3 * geo.width) / 4,
            y: geo.y + geo.height - 6,
          }),
        );
      }
    }

    g.append(
      text(block.title, {
        class: "block-title",
        x: geo.x + 6,
        y: geo.y + 16,
      }),
    );
    blocksGroup.append(g);
  }
  root.append(blocksGroup);

  if (layers.includes("grades") && view.grades && view.grades.mode !== "none") {
    const pins = svgElement("g", { class: "layer-grades" });
    for (const [courseId, value] of Object.entries(view.grades.pins)) {
      const geo = geometry.get(courseId);
      if (!geo) continue;
      const pin = svgElement("g", {
        class: "grade-pin",
        "data-layer": "grades",
        "data-course-id": courseId,
      });
      pin.append(
        svgElement("circle", {
          class: "pin-head",
          cx: geo.x + geo.width - 10,
          cy: geo.y + 10,
          r: 9,
        }),
      );
      pin.append(
        text(String(value), {
          class: "pin-label",
          x: geo.x + geo.width - 10,
          y: geo.y + 14,
          "text-anchor": "middle",
        }),
      );
      pins.append(pin);
    }
    root.append(pins);
  }

  return svg;
}

// Shown when a hover card answers for a different snapshot than the map on
// screen: the render is kept but flagged as degraded.
export function buildStaleBanner(mapSnapshot: string, payloadSnapshot: string): HTMLElement {
  const banner = document.createElement("div");
  banner.className = "stale-warning";
  banner.setAttribute("role", "alert");
  banner.textContent =
    `Data refreshed on the server (snapshot ${payloadSnapshot.slice(0, 8)}… != ` +
    `${mapSnapshot.slice(0, 8)}…). Reload to see the latest map.`;
  return banner;
}
