import {
  ALL_LAYERS,
  ALL_METRICS,
  GradeMode,
  LayerName,
  MetricName,
} from "./types.js";

export interface DisplaySettings {
  layers: LayerName[];
  metrics: MetricName[];
  gradeMode: GradeMode;
}

export const defaultSettings = (): DisplaySettings => ({
  layers: [...ALL_LAYERS],
  metrics: [...ALL_METRICS],
  gradeMode: "letter",
});

const GRADE_MODE_CYCLE: GradeMode[] = ["letter", "grade_point", "none"];

export function cycleGradeMode(mode: GradeMode): GradeMode {
  const index = GRADE_MODE_CYCLE.indexOf(mode);
  const next = GRADE_MODE_CYCLE[(index + 1) % GRADE_MODE_CYCLE.length];
  return next ?? "letter";
}

export function toggleLayer(settings: DisplaySettings, layer: LayerName): DisplaySettings {
  const layers = settings.layers.includes(layer)
    ? settings.layers.filter((l) => l !== layer)
    : ALL_LAYERS.filter((l) => settings.layers.includes(l) || l === layer);
  return { ...settings, layers };
}

export function toggleMetric(settings: DisplaySettings, metric: MetricName): DisplaySettings {
  const metrics = settings.metrics.includes(metric)
    ? settings.metrics.filter((m) => m !== metric)
    : ALL_METRICS.filter((m) => settings.metrics.includes(m) || m === metric);
  return { ...settings, metrics };
}

export function toQueryParams(settings: DisplaySettings, student: string | null): URLSearchParams {
  const params = new URLSearchParams();
  params.set("layers", settings.layers.join(","));
  params.set("metrics", settings.metrics.join(","));
  params.set("grade_mode", settings.gradeMode);
  if (student) params.set("student", student);
  return params;
}

// The display-settings modal: layer and metric checkboxes plus the grade
// mode cycle button. Calls onApply with the new settings; Cancel restores
// whatever was passed in.
export function buildSettingsModal(
  current: DisplaySettings,
  onApply: (settings: DisplaySettings) => void,
): HTMLElement {
  let draft: DisplaySettings = {
    layers: [...current.layers],
    metrics: [...current.metrics],
    gradeMode: current.gradeMode,
  };

  const modal = document.createElement("div");
  modal.className = "settings-modal";

  const layerSection = document.createElement("fieldset");
  layerSection.className = "layer-toggles";
  const layerLegend = document.createElement("legend");
  layerLegend.textContent = "Layers";
  layerSection.append(layerLegend);
  for (const layer of ALL_LAYERS) {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = draft.layers.includes(layer);
    box.dataset.layerToggle = layer;
    box.addEventListener("change", () => {
      draft = toggleLayer(draft, layer);
    });
    label.append(box, ` ${layer}`);
    layerSection.append(label);
  }

  const metricSection = document.createElement("fieldset");
  metricSection.className = "metric-toggles";
  const metricLegend = document.createElement("legend");
  metricLegend.textContent = "Engagement metrics";
  metricSection.append(metricLegend);
  for (const metric of ALL_METRICS) {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.checked = draft.metrics.includes(metric);
    box.dataset.metricToggle = metric;
    box.addEventListener("change", () => {
      draft = toggleMetric(draft, metric);
    });
    label.append(box, ` ${metric}`);
    metricSection.append(label);
  }

  const gradeButton = document.createElement("button");
  gradeButton.className = "grade-mode-cycle";
  gradeButton.textContent = `Grades: ${draft.gradeMode}`;
  gradeButton.addEventListener("click", () => {
    draft = { ...draft, gradeMode: cycleGradeMode(draft.gradeMode) };
    gradeButton.textContent = `Grades: ${draft.gradeMode}`;
  });

  const apply = document.createElement("button");
  apply.className = "apply";
  apply.textContent = "Apply";
  apply.addEventListener("click", () => onApply(draft));

  const cancel = document.createElement("button");
  cancel.className = "cancel";
  cancel.textContent = "Cancel";
  cancel.addEventListener("click", () => onApply(current));

  modal.append(layerSection, metricSection, gradeButton, apply, cancel);
  return modal;
}
