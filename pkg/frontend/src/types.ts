// Wire types mirroring the /api/v1 JSON payloads.

export type GradeMode = "letter" | "grade_point" | "none";
export type LayerName = "relevance" | "individual" | "cohort" | "grades";
export type MetricName = "attendance" | "quiz" | "assignment";

export const ALL_LAYERS: LayerName[] = ["relevance", "individual", "cohort", "grades"];
export const ALL_METRICS: MetricName[] = ["attendance", "quiz", "assignment"];

export interface Block {
  course_id: string;
  title: string;
  objective_row: number;
  semester_index: number;
  credits: number;
  cell_order: number | null;
}

export interface Edge {
  a: string;
  b: string;
  similarity: number;
  thickness: number;
}

export interface CompositeCell {
  value: number | null;
  parts: Record<string, number | null>;
}

export interface CohortCell extends CompositeCell {
  n_contributors: number;
}

export interface MapView {
  snapshot_id: string;
  curriculum_id: string;
  student_id: string | null;
  settings: { layers: LayerName[]; metrics: MetricName[]; grade_mode: GradeMode };
  base: { rows: string[]; columns: string[]; blocks: Block[] };
  relevance: {
    policy: { min_similarity: number; top_k: number | null };
    edges: Edge[];
  } | null;
  individual: { values: Record<string, CompositeCell> } | null;
  cohort: { values: Record<string, CohortCell> } | null;
  grades: { mode: GradeMode; pins: Record<string, string | number> } | null;
}

export interface NeighborLink {
  course_id: string;
  title: string;
  similarity: number;
}

export interface HoverCard {
  snapshot_id: string;
  course_id: string;
  title: string;
  objective_row: number;
  semester_index: number;
  objective_label: string;
  semester_label: string;
  credits: number;
  individual: CompositeCell | null;
  cohort: CohortCell;
  grade: string | number | null;
  neighbors: NeighborLink[];
  // Served once the backend exposes per-course grade distributions; the
  // hover card keeps a stub panel for it until then.
  grade_distribution?: Record<string, number>;
}
