// Rating session state machine: an ordered image queue, a cursor that only
// moves forward, and a single in-flight submission at a time.

import { ApiClient, SessionImage, SessionInfo } from "./api.js";

export type SubmitOutcome =
  | "accepted"
  | "duplicate"
  | "rejected"
  | "network_error"
  | "not_ready";

export class RatingSession {
  readonly raterId: string;
  readonly scaleLabels: Record<string, string>;
  private readonly queue: SessionImage[];
  private cursor: number;
  private submitted: number;
  private busy = false;

  constructor(info: SessionInfo) {
    this.raterId = info.rater_id;
    this.scaleLabels = info.scale_labels;
    this.queue = info.images.slice();
    // resume: skip everything the server has already acknowledged
    const rated = new Set(info.rated);
    this.submitted = 0;
    let cursor = 0;
    while (
      cursor < this.queue.length &&
      rated.has(ratedKey(this.queue[cursor] as SessionImage))
    ) {
      cursor += 1;
      this.submitted += 1;
    }
    this.cursor = cursor;
  }

  get length(): number {
    return this.queue.length;
  }

  get position(): number {
    return this.cursor;
  }

  get submittedCount(): number {
    return this.submitted;
  }

  get inFlight(): boolean {
    return this.busy;
  }

  get done(): boolean {
    return this.cursor >= this.queue.length;
  }

  get current(): SessionImage | null {
    return this.done ? null : (this.queue[this.cursor] as SessionImage);
  }

  /** POST the score for the current image; the cursor advances only when the
   * server acknowledged (201) or reported the rating already exists (409). */
  async submit(score: number, api: ApiClient): Promise<SubmitOutcome> {
    const current = this.current;
    if (current === null || this.busy) return "not_ready";
    this.busy = true;
    try {
      const status = await api.submitRating({
        rater_id: this.raterId,
        image_id: current.image_id,
        method_id: current.method_id,
        score,
      });
      if (status === "accepted") {
        this.cursor += 1;
        this.submitted += 1;
        return "accepted";
      }
      if (status === "duplicate") {
        this.cursor += 1; // already stored server-side, never re-ask
        return "duplicate";
      }
      return "rejected";
    } catch {
      return "network_error";
    } finally {
      this.busy = false;
    }
  }
}

function ratedKey(image: SessionImage): string {
  return `${image.image_id}:${image.method_id}`;
}
