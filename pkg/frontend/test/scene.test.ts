import { describe, expect, it } from "vitest";

import { buildScene, buildStaleBanner, DEFAULT_SCENE_OPTIONS, mapExtents } from "../src/scene.js";
import { LayerName, MapView } from "../src/types.js";
import { initialViewport } from "../src/viewport.js";

import mapviewFixture from "./fixtures/mapview.json";

const view = mapviewFixture as unknown as MapView;
const ALL: LayerName[] = ["relevance", "individual", "cohort", "grades"];

const count = (scene: SVGSVGElement, selector: string) =>
  scene.querySelectorAll(selector).length;

describe("scene counts match the payload", () => {
  const scene = buildScene(view, initialViewport(), ALL);

  it("renders one block per course", () => {
    expect(count(scene, ".course-block")).toBe(view.base.blocks.length);
  });

  it("renders one line per retained edge", () => {
    expect(count(scene, ".relevance-edge")).toBe(view.relevance!.edges.length);
  });

  it("renders one pin per grade entry", () => {
    expect(count(scene, ".grade-pin")).toBe(Object.keys(view.grades!.pins).length);
  });

  it("renders shading only for non-missing composites", () => {
    const individualWithValue = Object.values(view.individual!.values).filter(
      (cell) => cell.value !== null,
    ).length;
    expect(count(scene, ".shade-individual")).toBe(individualWithValue);
    const cohortWithValue = Object.values(view.cohort!.values).filter(
      (cell) => cell.value !== null,
    ).length;
    expect(count(scene, ".shade-cohort")).toBe(cohortWithValue);
  });

  it("total scene nodes = blocks + edges + pins", () => {
    const total =
      count(scene, ".course-block") +
      count(scene, ".relevance-edge") +
      count(scene, ".grade-pin");
    expect(total).toBe(
      view.base.blocks.length +
        view.relevance!.edges.length +
        Object.keys(view.grades!.pins).length,
    );
  });
});

describe("layer toggles", () => {
  const selectors: Record<LayerName, string> = {
    relevance: "[data-layer=relevance]",
    individual: "[data-layer=individual]",
    cohort: "[data-layer=cohort]",
    grades: "[data-layer=grades]",
  };

  for (const layer of ALL) {
    it(`toggling ${layer} off removes exactly that layer's nodes`, () => {
      const full = buildScene(view, initialViewport(), ALL);
      const without = buildScene(
        view,
        initialViewport(),
        ALL.filter((l) => l !== layer),
      );
      expect(count(without, selectors[layer])).toBe(0);
      expect(count(full, selectors[layer])).toBeGreaterThan(0);
      for (const other of ALL) {
        if (other === layer) continue;
        expect(count(without, selectors[other])).toBe(count(full, selectors[other]));
      }
      // base map is never affected
      expect(count(without, ".course-block")).toBe(view.base.blocks.length);
    });
  }

  it("re-applying the same layers restores the identical scene", () => {
    const before = buildScene(view, initialViewport(), ALL).outerHTML;
    buildScene(view, initialViewport(), ["relevance"]);
    const after = buildScene(view, initialViewport(), ALL).outerHTML;
    expect(after).toBe(before);
  });
});

describe("visual encodings", () => {
  it("shading opacity equals the composite value", () => {
    const scene = buildScene(view, initialViewport(), ALL);
    for (const rect of scene.querySelectorAll(".shade-individual")) {
      const courseId = rect.closest(".course-block")!.getAttribute("data-course-id")!;
      const expected = view.individual!.values[courseId]!.value!;
      expect(Number(rect.getAttribute("opacity"))).toBeCloseTo(expected, 12);
    }
  });

  it("line width grows with thickness", () => {
    const scene = buildScene(view, initialViewport(), ALL);
    const widths = new Map<string, number>();
    for (const line of scene.querySelectorAll(".relevance-edge")) {
      widths.set(line.getAttribute("data-edge")!, Number(line.getAttribute("stroke-width")));
    }
    for (const edge of view.relevance!.edges) {
      expect(widths.get(`${edge.a}~${edge.b}`)).toBeCloseTo(1 + 5 * edge.thickness, 12);
    }
  });

  it("zero and full composites get visibly distinct opacities", () => {
    const synthetic: MapView = JSON.parse(JSON.stringify(view));
    const [first, second] = synthetic.base.blocks;
    synthetic.individual!.values = {
      [first!.course_id]: { value: 0, parts: { attendance: 0 } },
      [second!.course_id]: { value: 1, parts: { attendance: 1 } },
    };
    const scene = buildScene(synthetic, initialViewport(), ALL);
    const opacities = Array.from(scene.querySelectorAll(".shade-individual")).map((r) =>
      Number(r.getAttribute("opacity")),
    );
    expect(Math.min(...opacities)).toBe(0);
    expect(Math.max(...opacities)).toBe(1);
  });

  it("numeric labels appear only beyond the zoom threshold", () => {
    const zoomedOut = buildScene(view, { panX: 0, panY: 0, zoom: 1 }, ALL);
    expect(count(zoomedOut, ".metric-label")).toBe(0);
    const zoomedIn = buildScene(view, { panX: 0, panY: 0, zoom: 1.6 }, ALL);
    expect(count(zoomedIn, ".metric-label")).toBeGreaterThan(0);
  });

  it("grade mode none renders no pins", () => {
    const synthetic: MapView = JSON.parse(JSON.stringify(view));
    synthetic.grades = { mode: "none", pins: {} };
    const scene = buildScene(synthetic, initialViewport(), ALL);
    expect(count(scene, ".grade-pin")).toBe(0);
  });

  it("empty layers leave a plain grid of titled blocks", () => {
    const synthetic: MapView = JSON.parse(JSON.stringify(view));
    synthetic.relevance = null;
    synthetic.individual = null;
    synthetic.cohort = null;
    synthetic.grades = null;
    const scene = buildScene(synthetic, initialViewport(), ALL);
    expect(count(scene, ".course-block")).toBe(view.base.blocks.length);
    expect(count(scene, "[data-layer]")).toBe(0);
    expect(count(scene, ".block-title")).toBe(view.base.blocks.length);
  });
});

describe("geometry", () => {
  it("extents cover the full grid", () => {
    const extents = mapExtents(view);
    const opts = DEFAULT_SCENE_OPTIONS;
    expect(extents.width).toBe(view.base.columns.length * (opts.cellWidth + opts.gap));
    expect(extents.height).toBe(view.base.rows.length * (opts.cellHeight + opts.gap));
  });

  it("viewport transform reflects pan and zoom", () => {
    const scene = buildScene(view, { panX: 40, panY: -12, zoom: 2 }, ALL);
    expect(scene.querySelector(".viewport")!.getAttribute("transform")).toBe(
      "translate(40,-12) scale(2)",
    );
  });
});

describe("stale banner", () => {
  it("names both snapshots", () => {
    const banner = buildStaleBanner("aaaaaaaaaaaa", "bbbbbbbbbbbb");
    expect(banner.textContent).toContain("aaaaaaaa");
    expect(banner.textContent).toContain("bbbbbbbb");
    expect(banner.getAttribute("role")).toBe("alert");
  });
});
