/** Typed client for the annotation service HTTP contract. */

export interface SubScores {
  s_emo: number;
  s_pros: number;
  s_spon: number;
}

export interface ClipInfo {
  clip_id: string;
  audio_url: string;
  rated_by: string[];
  ratings: Record<string, number>;
  subscores: SubScores | null;
}

export interface Progress {
  rated: number;
  total: number;
}

export interface ClipsPayload {
  instructions: string;
  clips: ClipInfo[];
  progress: Record<string, Progress>;
}

export interface AgreementPayload {
  alpha: number | null;
  reason?: string;
  n_annotators?: number;
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private base: string = "",
    private fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  async clips(): Promise<ClipsPayload> {
    const res = await this.fetchImpl(`${this.base}/clips`);
    if (!res.ok) throw new Error(`GET /clips failed: ${res.status}`);
    return (await res.json()) as ClipsPayload;
  }

  /** Raw response so callers can distinguish rejection (4xx) from transport failure. */
  rate(annotator: string, clipId: string, score: number): Promise<Response> {
    return this.fetchImpl(`${this.base}/ratings`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ annotator, clip_id: clipId, score }),
    });
  }

  async agreement(): Promise<AgreementPayload> {
    const res = await this.fetchImpl(`${this.base}/agreement`);
    if (!res.ok) throw new Error(`GET /agreement failed: ${res.status}`);
    return (await res.json()) as AgreementPayload;
  }

  async exportCsv(): Promise<string> {
    const res = await this.fetchImpl(`${this.base}/export`);
    if (!res.ok) {
      const body = await res.json().catch(() => ({ error: `HTTP ${res.status}` }));
      throw new Error((body as { error?: string }).error ?? `HTTP ${res.status}`);
    }
    return res.text();
  }

  exportUrl(): string {
    return `${this.base}/export`;
  }

  audioUrl(clip: ClipInfo): string {
    return `${this.base}${clip.audio_url}`;
  }
}
