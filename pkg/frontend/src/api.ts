/**
 * Thin typed client over the gateway's JSON API. The UI is stateless with
 * respect to the gateway: every list renders from these GETs alone.
 */

import type {
  BenchReport,
  GatewayErrorBody,
  MetaSkillConfig,
  QueryResponse,
  SkillDescriptor,
} from "./types.js";

/** A non-2xx response, carrying the gateway's structured error body. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: GatewayErrorBody,
  ) {
    super(`HTTP ${status}: ${body.error ?? "unknown error"}`);
  }
}

async function parseOrThrow<T>(res: Response): Promise<T> {
  let body: unknown = {};
  try {
    body = await res.json();
  } catch {
    body = { error: `HTTP ${res.status} with unreadable body` };
  }
  if (!res.ok) {
    throw new ApiError(res.status, body as GatewayErrorBody);
  }
  return body as T;
}

export interface GatewayClient {
  listSkills(): Promise<SkillDescriptor[]>;
  listMetaSkills(): Promise<MetaSkillConfig[]>;
  createMetaSkill(config: MetaSkillConfig): Promise<MetaSkillConfig>;
  deleteSkill(skillId: string): Promise<void>;
  deleteMetaSkill(metaId: string): Promise<void>;
  query(targetId: string, request: Record<string, unknown>): Promise<QueryResponse>;
  health(): Promise<{ status: string; skills: number; meta_skills: number }>;
  fetchBenchReport(url: string): Promise<BenchReport>;
}

export function createClient(baseUrl = ""): GatewayClient {
  const base = baseUrl.replace(/\/$/, "");
  const json = { "Content-Type": "application/json" };

  return {
    async listSkills() {
      const body = await parseOrThrow<{ skills: SkillDescriptor[] }>(
        await fetch(`${base}/skills`),
      );
      return body.skills;
    },

    async listMetaSkills() {
      const body = await parseOrThrow<{ meta_skills: MetaSkillConfig[] }>(
        await fetch(`${base}/meta-skills`),
      );
      return body.meta_skills;
    },

    async createMetaSkill(config) {
      const body = await parseOrThrow<{ meta_skill: MetaSkillConfig }>(
        await fetch(`${base}/meta-skills`, {
          method: "POST",
          headers: json,
          body: JSON.stringify(config),
        }),
      );
      return body.meta_skill;
    },

    async deleteSkill(skillId) {
      await parseOrThrow(await fetch(`${base}/skills/${encodeURIComponent(skillId)}`, {
        method: "DELETE",
      }));
    },

    async deleteMetaSkill(metaId) {
      await parseOrThrow(await fetch(`${base}/meta-skills/${encodeURIComponent(metaId)}`, {
        method: "DELETE",
      }));
    },

    async query(targetId, request) {
      return parseOrThrow<QueryResponse>(
        await fetch(`${base}/query/${encodeURIComponent(targetId)}`, {
          method: "POST",
          headers: json,
          body: JSON.stringify(request),
        }),
      );
    },

    async health() {
      return parseOrThrow(await fetch(`${base}/health`));
    },

    async fetchBenchReport(url) {
      return parseOrThrow<BenchReport>(await fetch(url));
    },
  };
}
