/** Wire types for the annotation service JSON API. */

export interface Highlight {
  start: number; // byte offsets into the UTF-8 encoding of post_text
  end: number;
}

export interface TaskView {
  match_id: string;
  post_text: string;
  highlight: Highlight;
  child_term: string;
  parent_term: string;
  category: string;
  guideline_hint: string;
}

export type Verdict = "TruePositive" | "FalsePositive" | "Unclear";
export type ConsensusLabel = "Match" | "Mismatch" | "Uncertain";

export interface SessionSummary {
  session_id: string;
  sample_id: string;
  status: "open" | "complete" | "adjudicated";
  annotators: string[];
  labels_recorded: number;
  labels_expected: number;
}

export interface SessionStats extends SessionSummary {
  per_annotator: Record<string, { assigned: number; remaining: number }>;
  kappa?: number;
  consensus_counts?: Record<string, number>;
}

export interface DisagreementRow {
  match_id: string;
  task: TaskView;
  verdicts: Record<string, string>;
  adjudicated: string | null;
}

export interface LabelSubmission {
  match_id: string;
  annotator_id: string;
  verdict: Verdict;
  note?: string;
}

export interface ProblemDetail {
  error: string;
  detail: string;
}
