/** Session state machine, kept DOM-free so it is testable headless.
 *
 * Invariants: displayed ratings always mirror the server (every submit is
 * followed by a /clips refresh); a transport failure keeps the selection
 * queued for retry; a server rejection (400/404) surfaces the message and
 * drops the queued submit.
 */

import { ApiClient, ClipInfo, ClipsPayload } from "./api.js";
import { seededShuffle } from "./seeded.js";

export interface PendingSubmit {
  clipId: string;
  score: number;
}

export interface SubmitOutcome {
  ok: boolean;
  retryable: boolean;
  error?: string;
}

export class Session {
  order: string[] = [];
  currentIndex = 0;
  payload: ClipsPayload | null = null;
  pending: PendingSubmit | null = null;
  connected = true;
  showSubScores = false;

  constructor(
    readonly annotator: string,
    readonly api: ApiClient,
  ) {}

  async load(): Promise<void> {
    this.payload = await this.api.clips();
    this.order = seededShuffle(
      this.payload.clips.map((c) => c.clip_id),
      this.annotator,
    );
    this.connected = true;
    this.advanceToUnrated(0);
  }

  clip(clipId: string): ClipInfo | undefined {
    return this.payload?.clips.find((c) => c.clip_id === clipId);
  }

  get currentClipId(): string | null {
    return this.order.length ? this.order[this.currentIndex] : null;
  }

  get currentClip(): ClipInfo | undefined {
    const id = this.currentClipId;
    return id ? this.clip(id) : undefined;
  }

  /** The annotator's stored rating for a clip; null until the server has one. */
  myRating(clipId: string): number | null {
    const clip = this.clip(clipId);
    const value = clip?.ratings?.[this.annotator];
    return value === undefined ? null : value;
  }

  ratedCount(): number {
    return this.payload?.progress?.[this.annotator]?.rated ?? 0;
  }

  totalCount(): number {
    return this.order.length;
  }

  progressPercent(): number {
    const total = this.totalCount();
    return total === 0 ? 0 : Math.round((100 * this.ratedCount()) / total);
  }

  complete(): boolean {
    return this.totalCount() > 0 && this.ratedCount() >= this.totalCount();
  }

  advanceToUnrated(from: number): void {
    const n = this.order.length;
    if (n === 0) return;
    for (let step = 0; step < n; step++) {
      const idx = (from + step) % n;
      if (this.myRating(this.order[idx]) === null) {
        this.currentIndex = idx;
        return;
      }
    }
    this.currentIndex = Math.min(Math.max(from, 0), n - 1) % n;
  }

  goto(delta: number): void {
    const n = this.order.length;
    if (n === 0) return;
    this.currentIndex = (this.currentIndex + delta + n) % n;
  }

  /** Queue the current clip's rating and push it to the server. */
  async submit(score: number): Promise<SubmitOutcome> {
    const clipId = this.currentClipId;
    if (clipId === null) {
      return { ok: false, retryable: false, error: "no clip loaded" };
    }
    this.pending = { clipId, score };
    return this.flush();
  }

  /** Push the queued submit, mirror server state, auto-advance on success. */
  async flush(): Promise<SubmitOutcome> {
    if (!this.pending) return { ok: true, retryable: false };
    const { clipId, score } = this.pending;
    let res: Response;
    try {
      res = await this.api.rate(this.annotator, clipId, score);
    } catch (err) {
      this.connected = false;
      return { ok: false, retryable: true, error: String(err) };
    }
    this.connected = true;
    if (!res.ok) {
      const body = (await res.json().catch(() => ({}))) as { error?: string };
      this.pending = null; // server said no: retrying the same payload cannot help
      return { ok: false, retryable: false, error: body.error ?? `HTTP ${res.status}` };
    }
    this.pending = null;
    this.payload = await this.api.clips(); // never trust local echo
    this.advanceToUnrated(this.order.indexOf(clipId) + 1);
    return { ok: true, retryable: false };
  }
}
