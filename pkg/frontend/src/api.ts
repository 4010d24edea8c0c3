import { HoverCard, MapView } from "./types.js";
import { DisplaySettings, toQueryParams } from "./settings.js";

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/**
 * Thin client for the /api/v1 endpoints. Map-view loads are latest-wins:
 * when a newer request starts before an older one resolves, the older
 * response is dropped (resolved as null) so the UI never renders stale
 * settings over fresh ones.
 */
export class MapApi {
  private seq = 0;

  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  async fetchMapView(
    settings: DisplaySettings,
    student: string | null,
  ): Promise<MapView | null> {
    const token = ++this.seq;
    const params = toQueryParams(settings, student);
    const response = await this.fetchFn(`${this.baseUrl}/api/v1/map?${params}`);
    if (!response.ok) {
      throw new Error(`map request failed: ${response.status}`);
    }
    const body = (await response.json()) as MapView;
    return token === this.seq ? body : null;
  }

  async fetchCourse(
    courseId: string,
    settings: DisplaySettings,
    student: string | null,
  ): Promise<HoverCard> {
    const params = new URLSearchParams();
    params.set("metrics", settings.metrics.join(","));
    params.set("grade_mode", settings.gradeMode);
    if (student) params.set("student", student);
    const response = await this.fetchFn(
      `${this.baseUrl}/api/v1/courses/${encodeURIComponent(courseId)}?${params}`,
    );
    if (!response.ok) {
      throw new Error(`course request failed: ${response.status}`);
    }
    return (await response.json()) as HoverCard;
  }
}
