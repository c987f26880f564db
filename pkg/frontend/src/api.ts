// Typed client for the rating service JSON API.

export interface SessionImage {
  image_id: string;
  method_id: string;
}

export interface SessionInfo {
  session_id: string;
  rater_id: string;
  images: SessionImage[];
  rated: string[]; // "image_id:method_id" pairs already acknowledged server-side
  scale_labels: Record<string, string>;
}

export interface RatingPayload {
  rater_id: string;
  image_id: string;
  method_id: string;
  score: number;
}

export type SubmitStatus = "accepted" | "duplicate" | "rejected";

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  async loadSession(raterId: string): Promise<SessionInfo> {
    const url = `${this.baseUrl}/api/session?rater_id=${encodeURIComponent(raterId)}`;
    const resp = await fetch(url);
    if (!resp.ok) {
      throw new ApiError(`session request failed (${resp.status})`, resp.status);
    }
    return (await resp.json()) as SessionInfo;
  }

  imageUrl(imageId: string): string {
    return `${this.baseUrl}/api/image/${encodeURIComponent(imageId)}`;
  }

  /** Resolves to the server's verdict; throws only on transport failure. */
  async submitRating(payload: RatingPayload): Promise<SubmitStatus> {
    const resp = await fetch(`${this.baseUrl}/api/rating`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (resp.status === 201) return "accepted";
    if (resp.status === 409) return "duplicate";
    return "rejected";
  }

  async exportCsv(): Promise<string> {
    const resp = await fetch(`${this.baseUrl}/api/export`);
    if (!resp.ok) {
      throw new ApiError(`export failed (${resp.status})`, resp.status);
    }
    return await resp.text();
  }
}
