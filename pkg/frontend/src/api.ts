/** Typed client for the cascom session API. No business logic lives here:
 * every decision (filtering, planning, costing) is the server's. */

export interface PropertyRefView {
  property_id: string;
  unit: string;
}

export interface QuestionView {
  facet: string;
  text: string;
  options: string[];
}

export interface QuestionResponse {
  question: QuestionView | null;
  remaining: number;
}

export interface TaskView {
  id: string;
  label: string;
  produces: PropertyRefView;
  location: string | null;
  facets: Record<string, string>;
}

export type EdgeView = [string, number, string];

export interface SolutionView {
  index: number;
  cost: number;
  root: string;
  nodes: string[];
  edges: EdgeView[];
}

export interface MissingSpecView extends PropertyRefView {
  location: string | null;
}

export interface RecommendationView {
  missing: MissingSpecView[];
  present_cost: number;
  partial: { root: string; nodes: string[]; edges: EdgeView[] };
}

export interface SessionView {
  id: string;
  phase: string;
  answers: Record<string, string>;
  task: TaskView | null;
  extras: PropertyRefView[];
  model: string;
}

export type Bundle = Record<string, string>;

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function parseBody(response: Response): Promise<any> {
  try {
    return await response.json();
  } catch {
    return {};
  }
}

export class ApiClient {
  constructor(private readonly baseUrl: string) {}

  private async request(method: string, path: string, body?: unknown): Promise<any> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const data = await parseBody(response);
    if (!response.ok) {
      throw new ApiError(response.status, data.error ?? `HTTP ${response.status}`);
    }
    return data;
  }

  createSession(): Promise<{ id: string; phase: string }> {
    return this.request("POST", "/sessions");
  }

  session(id: string): Promise<SessionView> {
    return this.request("GET", `/sessions/${id}`);
  }

  question(id: string): Promise<QuestionResponse> {
    return this.request("GET", `/sessions/${id}/question`);
  }

  answer(id: string, facet: string, value: string): Promise<{ remaining: number }> {
    return this.request("POST", `/sessions/${id}/answers`, { facet, value });
  }

  tasks(id: string): Promise<{ tasks: TaskView[] }> {
    return this.request("GET", `/sessions/${id}/tasks`);
  }

  selectTask(id: string, taskId: string): Promise<{ phase: string; solutions: SolutionView[] }> {
    return this.request("POST", `/sessions/${id}/task`, { taskId });
  }

  recommendations(id: string): Promise<{ recommendations: RecommendationView[] }> {
    return this.request("GET", `/sessions/${id}/recommendations`);
  }

  extras(id: string): Promise<{ extras: PropertyRefView[] }> {
    return this.request("GET", `/sessions/${id}/extras`);
  }

  selectExtras(id: string, properties: string[]): Promise<{ phase: string }> {
    return this.request("POST", `/sessions/${id}/extras`, { properties });
  }

  solutions(id: string, model: string): Promise<{ model: string; solutions: SolutionView[] }> {
    return this.request("GET", `/sessions/${id}/solutions?model=${encodeURIComponent(model)}`);
  }

  select(id: string, index: number, model: string): Promise<{ phase: string; cost: number }> {
    return this.request("POST", `/sessions/${id}/select`, { index, model });
  }

  bundle(id: string): Promise<Bundle> {
    return this.request("GET", `/sessions/${id}/bundle`);
  }
}
