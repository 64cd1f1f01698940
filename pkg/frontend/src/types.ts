/** Wire types for the /v1 clarification service. */

export interface ApiFault {
  code: string;
  message: string;
}

export interface Envelope<T> {
  status: "OK" | "ERROR";
  payload?: T;
  error?: ApiFault;
}

export interface CandidateRow {
  id: string;
  sql: string;
  probability: number;
  rank: number;
}

export interface QuestionOption {
  value: string;
  display: string;
}

export interface PendingQuestion {
  variable_id: string;
  text: string;
  options: QuestionOption[];
}

export interface FinalResult {
  sql: string;
  candidate_id: string;
  stop_reason: string;
}

export interface TranscriptTurn {
  question: {
    variable_id: string;
    text: string;
    options: ReadonlyArray<ReadonlyArray<string>>; // [value, display] pairs
  };
  answer: string | null;
  post_entropy: number | null;
  post_top_id: string | null;
  post_top_probability: number | null;
  survivor_count: number | null;
}

export interface Transcript {
  question: string;
  config: Record<string, unknown>;
  entropy_trace: number[];
  turns: TranscriptTurn[];
  final_sql: string | null;
  final_candidate_id: string | null;
  stop_reason: string | null;
}

export type SessionStatus = "AWAITING_ANSWER" | "FINISHED" | "FAILED";

export interface SessionPayload {
  session_id: string;
  status: SessionStatus;
  question: string;
  turn: number;
  candidates: CandidateRow[];
  entropy: number;
  entropy_trace: number[];
  pending_question: PendingQuestion | null;
  final: FinalResult | null;
  failure_reason?: string | null;
  transcript: Transcript;
}

export interface InstanceSummary {
  instance_id: string;
  question: string;
  candidates: number;
  difficulty: string;
}

export interface ExplainRow {
  variable_id: string;
  marginal: Record<string, number>;
  conditional_entropy: number;
  eig: number;
  fast_path_eig: number | null;
  selected: boolean;
}

export interface ExplainPayload {
  session_id: string;
  entropy: number;
  selected_variable: string | null;
  rows: ExplainRow[];
  note: string | null;
}

export interface SessionConfig {
  strategy?: string;
  tau?: number;
  max_turns?: number;
  mode?: string;
  seed?: number;
}
