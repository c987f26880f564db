// DOM shell: rater sign-in, one candidate image at a time, 1-5 score
// buttons, completion screen.  At most one candidate image exists in the
// document at any moment, and there is no way to navigate backwards.

import { ApiClient } from "./api.js";
import { RatingSession } from "./session.js";

const SCORES = [1, 2, 3, 4, 5] as const;

export class MosApp {
  private session: RatingSession | null = null;
  private pendingScore: number | null = null;
  private keyHandler: ((ev: KeyboardEvent) => void) | null = null;

  constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    private readonly doc: Document,
  ) {}

  start(): void {
    this.renderSignIn();
  }

  private clear(): void {
    this.root.textContent = "";
  }

  private renderSignIn(error?: string): void {
    this.clear();
    const form = el(this.doc, "form", "signin");
    const label = el(this.doc, "label");
    label.textContent = "Rater id";
    const input = el(this.doc, "input") as HTMLInputElement;
    input.type = "text";
    input.id = "rater-id";
    input.autofocus = true;
    const button = el(this.doc, "button") as HTMLButtonElement;
    button.type = "submit";
    button.textContent = "Start rating";
    form.append(label, input, button);
    if (error) {
      const msg = el(this.doc, "p", "error");
      msg.textContent = error;
      form.append(msg);
    }
    form.addEventListener("submit", (ev) => {
      ev.preventDefault();
      const raterId = input.value.trim();
      if (raterId) void this.loadSession(raterId);
    });
    this.root.append(form);
  }

  async loadSession(raterId: string): Promise<void> {
    try {
      const info = await this.api.loadSession(raterId);
      this.session = new RatingSession(info);
    } catch {
      this.renderSignIn("Server unreachable; check the connection and retry.");
      return;
    }
    this.bindKeys();
    this.renderCurrent();
  }

  private bindKeys(): void {
    if (this.keyHandler) return;
    this.keyHandler = (ev: KeyboardEvent) => {
      const score = Number(ev.key);
      if (SCORES.includes(score as (typeof SCORES)[number])) {
        void this.submit(score);
      }
    };
    this.doc.addEventListener("keydown", this.keyHandler);
  }

  private renderCurrent(status?: string): void {
    const session = this.session;
    if (!session) return;
    if (session.done) {
      this.renderComplete();
      return;
    }
    this.clear();
    const current = session.current!;

    const progress = el(this.doc, "p", "progress");
    progress.textContent = `Image ${session.position + 1} of ${session.length}`;

    // exactly one candidate image, full viewport, no reference alongside
    const stage = el(this.doc, "div", "stage");
    const img = el(this.doc, "img", "candidate") as HTMLImageElement;
    img.src = this.api.imageUrl(current.image_id);
    img.alt = "image under evaluation";
    stage.append(img);

    const prompt = el(this.doc, "p", "prompt");
    prompt.textContent = "Rate the quality of this image";

    const buttons = el(this.doc, "div", "scores");
    for (const score of SCORES) {
      const button = el(this.doc, "button", "score") as HTMLButtonElement;
      button.type = "button";
      button.dataset.score = String(score);
      const label = session.scaleLabels[String(score)] ?? "";
      button.textContent = label ? `${score} ${label}` : String(score);
      button.addEventListener("click", () => void this.submit(score));
      buttons.append(button);
    }

    const statusLine = el(this.doc, "p", "status");
    statusLine.id = "status";
    statusLine.textContent = status ?? "";

    this.root.append(progress, stage, prompt, buttons, statusLine);

    if (this.pendingScore !== null) {
      const retry = el(this.doc, "button", "retry") as HTMLButtonElement;
      retry.type = "button";
      retry.textContent = `Retry score ${this.pendingScore}`;
      const pending = this.pendingScore;
      retry.addEventListener("click", () => void this.submit(pending));
      this.root.append(retry);
    }
  }

  private renderComplete(): void {
    this.clear();
    if (this.keyHandler) {
      this.doc.removeEventListener("keydown", this.keyHandler);
      this.keyHandler = null;
    }
    const done = el(this.doc, "div", "complete");
    const h = el(this.doc, "h1");
    h.textContent = "Session complete";
    const p = el(this.doc, "p");
    p.id = "submitted-count";
    p.textContent = `Thank you! Ratings submitted: ${this.session?.submittedCount ?? 0}`;
    done.append(h, p);
    this.root.append(done);
  }

  private setButtonsDisabled(disabled: boolean): void {
    for (const b of this.root.querySelectorAll("button.score")) {
      (b as HTMLButtonElement).disabled = disabled;
    }
  }

  async submit(score: number): Promise<void> {
    const session = this.session;
    if (!session || session.done || session.inFlight) return;
    this.setButtonsDisabled(true);
    const statusLine = this.doc.getElementById("status");
    if (statusLine) statusLine.textContent = "Submitting...";
    const outcome = await session.submit(score, this.api);
    switch (outcome) {
      case "accepted":
        this.pendingScore = null;
        this.renderCurrent();
        break;
      case "duplicate":
        this.pendingScore = null;
        this.renderCurrent("Already rated; moving on.");
        break;
      case "rejected":
        this.setButtonsDisabled(false);
        if (statusLine) statusLine.textContent = "The server rejected that rating; try again.";
        break;
      case "network_error":
        this.pendingScore = score;
        this.renderCurrent("Network problem; your score is kept, retry when ready.");
        break;
      case "not_ready":
        break;
    }
  }
}

function el(doc: Document, tag: string, className?: string): HTMLElement {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  return node;
}
