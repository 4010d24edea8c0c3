import { describe, expect, it } from "vitest";

import { buildHoverCard } from "../src/hover.js";
import { HoverCard } from "../src/types.js";

import hovercardFixture from "./fixtures/hovercard.json";

const card = hovercardFixture as unknown as HoverCard;

describe("hover card", () => {
  const el = buildHoverCard(card);

  it("shows title, position labels, and credits", () => {
    expect(el.querySelector(".course-title")!.textContent).toBe(card.title);
    const meta = el.querySelector(".course-meta")!.textContent!;
    expect(meta).toContain(card.objective_label);
    expect(meta).toContain(card.semester_label);
    expect(meta).toContain(String(card.credits));
  });

  it("lists every metric part for individual and cohort", () => {
    const individual = el.querySelector(".my-engagement")!;
    for (const metric of Object.keys(card.individual!.parts)) {
      expect(individual.querySelector(`[data-metric=${metric}]`)).not.toBeNull();
    }
    const cohort = el.querySelector(".past-takers")!;
    expect(cohort.textContent).toContain(`${card.cohort.n_contributors} students`);
  });

  it("formats missing metric values as 'no data'", () => {
    const withMissing: HoverCard = {
      ...card,
      individual: { value: 0.5, parts: { attendance: 0.5, quiz: null } },
    };
    const rendered = buildHoverCard(withMissing);
    const quizRow = rendered.querySelector(".my-engagement [data-metric=quiz]")!;
    expect(quizRow.textContent).toContain("no data");
  });

  it("shows the grade per the formatted payload", () => {
    expect(el.querySelector(".grade")!.textContent).toContain(String(card.grade));
    const without = buildHoverCard({ ...card, grade: null });
    expect(without.querySelector(".grade")!.textContent).toContain("not shown");
  });

  it("lists neighbors in payload order", () => {
    const items = el.querySelectorAll(".neighbors li");
    expect(items.length).toBe(card.neighbors.length);
    expect(items[0]!.getAttribute("data-course-id")).toBe(card.neighbors[0]!.course_id);
  });

  it("marks a small cohort as hidden", () => {
    const masked = buildHoverCard({
      ...card,
      cohort: { value: null, parts: { attendance: null }, n_contributors: 2 },
    });
    expect(masked.querySelector(".past-takers")!.textContent).toContain(
      "fewer than 3 students",
    );
  });

  it("keeps the grade-distribution panel as a stub until data arrives", () => {
    expect(el.querySelector(".grade-distribution.stub")).not.toBeNull();
    const withData = buildHoverCard({
      ...card,
      grade_distribution: { A: 0.4, B: 0.6 },
    });
    expect(withData.querySelector(".grade-distribution.stub")).toBeNull();
    expect(withData.querySelectorAll(".distribution-row").length).toBe(2);
  });
});
