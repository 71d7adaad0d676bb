/** Minimal observable store holding the wizard view state.
 * The state mirrors the server's session after every request; the client
 * never computes filtering, planning, or costs on its own. */

import type {
  Bundle,
  QuestionView,
  RecommendationView,
  SolutionView,
  TaskView,
} from "./api.js";

export interface WizardViewState {
  sessionId: string | null;
  phase: string;
  question: QuestionView | null;
  remaining: number;
  skipQuestions: boolean;
  tasks: TaskView[];
  task: TaskView | null;
  model: string;
  /** per-model costs keyed by a solution identity, for the comparison table */
  costsByModel: Record<string, Record<string, number>>;
  solutions: SolutionView[];
  recommendations: RecommendationView[];
  extrasAvailable: { property_id: string; unit: string }[];
  extrasChecked: string[];
  bundle: Bundle | null;
  error: string | null;
}

export function initialState(): WizardViewState {
  return {
    sessionId: null,
    phase: "ANSWERING",
    question: null,
    remaining: 0,
    skipQuestions: false,
    tasks: [],
    task: null,
    model: "lowest-total",
    costsByModel: {},
    solutions: [],
    recommendations: [],
    extrasAvailable: [],
    extrasChecked: [],
    bundle: null,
    error: null,
  };
}

export class Store {
  private state = initialState();
  private listeners: Array<(state: WizardViewState) => void> = [];

  get(): WizardViewState {
    return this.state;
  }

  set(patch: Partial<WizardViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  reset(): void {
    this.state = initialState();
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  subscribe(listener: (state: WizardViewState) => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }
}

/** Identity key for joining per-model rankings of the same solution. */
export function solutionKey(solution: SolutionView): string {
  return `${solution.root}|${JSON.stringify(solution.edges)}`;
}
