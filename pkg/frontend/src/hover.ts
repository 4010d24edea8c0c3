import { CompositeCell, HoverCard } from "./types.js";

function metricRow(name: string, value: number | null): HTMLElement {
  const row = document.createElement("div");
  row.className = "metric-row";
  row.dataset.metric = name;
  const label = document.createElement("span");
  label.textContent = name;
  const amount = document.createElement("span");
  amount.className = "metric-value";
  amount.textContent = value === null ? "no data" : value.toFixed(2);
  row.append(label, amount);
  return row;
}

function compositeSection(title: string, cell: CompositeCell, extra?: string): HTMLElement {
  const section = document.createElement("section");
  section.className = `composite ${title.toLowerCase().replace(/\s+/g, "-")}`;
  const heading = document.createElement("h4");
  heading.textContent = extra ? `${title} (${extra})` : title;
  section.append(heading);
  for (const [metric, value] of Object.entries(cell.parts)) {
    section.append(metricRow(metric, value));
  }
  section.append(metricRow("composite", cell.value));
  return section;
}

/** Detail popup for one course block, populated from GET /courses/{id}. */
export function buildHoverCard(card: HoverCard): HTMLElement {
  const el = document.createElement("div");
  el.className = "hover-card";
  el.dataset.courseId = card.course_id;

  const title = document.createElement("h3");
  title.className = "course-title";
  title.textContent = card.title;

  const meta = document.createElement("p");
  meta.className = "course-meta";
  meta.textContent =
    `${card.objective_label} / ${card.semester_label} / ${card.credits} credits`;
  el.append(title, meta);

  if (card.individual) {
    el.append(compositeSection("My engagement", card.individual));
  }
  el.append(
    compositeSection(
      "Past takers",
      card.cohort,
      card.cohort.n_contributors < 3
        ? "hidden: fewer than 3 students"
        : `${card.cohort.n_contributors} students`,
    ),
  );

  const grade = document.createElement("p");
  grade.className = "grade";
  grade.textContent = card.grade === null ? "Grade: not shown" : `Grade: ${card.grade}`;
  el.append(grade);

  // Requested feature, pending backend support: render real data when the
  // payload carries it, otherwise keep the placeholder panel.
  const distribution = document.createElement("section");
  distribution.className = "grade-distribution";
  const distHeading = document.createElement("h4");
  distHeading.textContent = "Grade distribution";
  distribution.append(distHeading);
  if (card.grade_distribution) {
    for (const [letter, share] of Object.entries(card.grade_distribution)) {
      const row = document.createElement("div");
      row.className = "distribution-row";
      row.textContent = `${letter}: ${(share * 100).toFixed(0)}%`;
      distribution.append(row);
    }
  } else {
    distribution.classList.add("stub");
    const placeholder = document.createElement("p");
    placeholder.textContent = "Not available yet.";
    distribution.append(placeholder);
  }
  el.append(distribution);

  const neighbors = document.createElement("ul");
  neighbors.className = "neighbors";
  for (const link of card.neighbors) {
    const item = document.createElement("li");
    item.dataset.courseId = link.course_id;
    item.textContent = `${link.title} (${link.similarity.toFixed(2)})`;
    neighbors.append(item);
  }
  el.append(neighbors);
  return el;
}
