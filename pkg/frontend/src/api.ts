/** Typed client for the experiment service JSON API. */

export type Treatment = "closed" | "open";

export type Phase =
  | "instructions"
  | "quiz"
  | "flying"
  | "mpl"
  | "questionnaire"
  | "done";

export interface CreatedSession {
  session_id: string;
  treatment: Treatment;
  phase: Phase;
}

export interface ClosedMissionView {
  junction: number;
  rounds_flown: number;
  sigma: number;
  intact: boolean;
  banked_info: number;
  can_fly: boolean;
  mission_finished: boolean;
}

export interface SessionState {
  session_id: string;
  participant_code: string;
  treatment: Treatment;
  phase: Phase;
  mission?: ClosedMissionView;
  plan_submitted?: boolean;
}

export interface QuizQuestion {
  id: string;
  prompt: string;
}

export interface MplRow {
  row: number;
  safe_eur: number;
  lottery_high_eur: number;
  lottery_win_prob: number;
}

export interface Instructions {
  session_id: string;
  treatment: Treatment;
  phase: Phase;
  text: string;
  parameters: Record<string, unknown>;
  quiz: QuizQuestion[];
  mpl_rows: MplRow[];
}

export interface QuizResult {
  passed: boolean;
  wrong: string[];
  phase: Phase;
}

export interface DecisionView extends ClosedMissionView {
  phase: Phase;
  last_outcome?: { increased: boolean; crashed: boolean; sigma: number };
}

export interface PlanAck {
  accepted: boolean;
  phase: Phase;
}

export interface MplOutcome {
  row: number;
  chose_lottery: boolean;
  lottery_won: boolean | null;
  amount_eur: number;
}

export interface SessionResult {
  session_id: string;
  treatment: Treatment;
  phase: Phase;
  information_value: number;
  drone_intact: boolean;
  drone_sale: number;
  total_value: number;
  junction_infos: number[];
  participant_index: number;
  mpl_paid: boolean;
  mpl_outcome: MplOutcome | null;
  payoff_eur: number;
}

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: { "Content-Type": "application/json" } };
    if (body !== undefined) {
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchImpl(`${this.base}/api${path}`, init);
    const payload = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      const error = (payload["error"] ?? {}) as { code?: string; message?: string };
      throw new ApiError(error.code ?? "internal", error.message ?? "request failed", response.status);
    }
    return payload as T;
  }

  createSession(participantCode: string, treatment?: Treatment, seed?: number): Promise<CreatedSession> {
    const body: Record<string, unknown> = { participant_code: participantCode };
    if (treatment !== undefined) body["treatment"] = treatment;
    if (seed !== undefined) body["seed"] = seed;
    return this.request("POST", "/sessions", body);
  }

  state(sessionId: string): Promise<SessionState> {
    return this.request("GET", `/sessions/${sessionId}/state`);
  }

  instructions(sessionId: string): Promise<Instructions> {
    return this.request("GET", `/sessions/${sessionId}/instructions`);
  }

  ackInstructions(sessionId: string): Promise<{ phase: Phase }> {
    return this.request("POST", `/sessions/${sessionId}/instructions-ack`);
  }

  submitQuiz(sessionId: string, answers: Record<string, number>): Promise<QuizResult> {
    return this.request("POST", `/sessions/${sessionId}/quiz`, { answers });
  }

  decide(sessionId: string, fly: boolean): Promise<DecisionView> {
    return this.request("POST", `/sessions/${sessionId}/decision`, { fly });
  }

  submitPlan(sessionId: string, plan: number[]): Promise<PlanAck> {
    return this.request("POST", `/sessions/${sessionId}/plan`, { plan });
  }

  submitMpl(sessionId: string, choices: boolean[]): Promise<{ phase: Phase }> {
    return this.request("POST", `/sessions/${sessionId}/mpl`, { choices });
  }

  submitQuestionnaire(
    sessionId: string,
    fields: { age?: number | null; gender?: string | null; difficulty?: number | null; strategy?: string | null },
  ): Promise<{ phase: Phase; ready_to_finalize: boolean }> {
    return this.request("POST", `/sessions/${sessionId}/questionnaire`, fields);
  }

  finalize(sessionId: string): Promise<SessionResult> {
    return this.request("POST", `/sessions/${sessionId}/finalize`);
  }

  result(sessionId: string): Promise<SessionResult> {
    return this.request("GET", `/sessions/${sessionId}/result`);
  }
}
