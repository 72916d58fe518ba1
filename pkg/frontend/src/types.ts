/**
 * Wire types mirroring the gateway's JSON encodings (snake_case).
 */

export type QAFormat = "extractive" | "multiple_choice" | "abstractive" | "boolean";
export type StrategyName = "selection" | "early_fusion" | "late_fusion";
export type AnswerStatusName = "ok" | "timeout" | "error";

export interface SkillDescriptor {
  skill_id: string;
  endpoint: string;
  format: QAFormat;
  trained_on: string[];
  display_name: string;
  registered_at: string;
}

export interface MetaSkillParams {
  router_model_id?: string;
  score_threshold?: number;
  fused_tensor_path?: string;
  weights?: number[];
  aggregator?: string;
  timeout_ms?: number;
  max_concurrency?: number;
  [key: string]: unknown;
}

export interface MetaSkillConfig {
  meta_id: string;
  strategy: StrategyName;
  member_skill_ids: string[];
  params: MetaSkillParams;
}

export interface AgentAnswer {
  skill_id: string;
  answer_text: string;
  confidence: number;
  latency_ms: number;
  status: AnswerStatusName;
  error_message?: string;
}

export interface RouteDecision {
  predicted_dataset: string;
  score: number;
  ranked: [string, number][];
  selected_skills: SkillDescriptor[];
  fallback_used: boolean;
}

export interface QueryTimings {
  total_ms: number;
  routing_ms?: number;
  fan_out_ms?: number;
  aggregate_ms?: number;
}

export interface QueryResponse {
  request_id: string;
  final_answer: string;
  strategy: string;
  member_answers: AgentAnswer[];
  timings: QueryTimings;
  route?: RouteDecision;
  vote_table?: Record<string, number>;
}

export interface GatewayErrorBody {
  error: string;
  violations?: string[];
  detail?: string;
  member_answers?: AgentAnswer[];
  meta_ids?: string[];
  [key: string]: unknown;
}

export interface SeedStats {
  seed: number;
  latency_mean_ms: number;
  f1: number;
}

export interface SystemReport {
  mean_latency_ms: number;
  std_latency_ms: number;
  f1_mean: number;
  per_seed: SeedStats[];
  failures: number;
}

export interface BenchReport {
  systems: Record<string, SystemReport>;
  environment: string;
}
