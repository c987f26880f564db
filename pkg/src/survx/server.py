"""HTTP service collecting mean-opinion-score ratings.

Raters fetch a per-rater shuffled image queue, view one image at a time,
and POST 1-5 scores.  Every accepted rating is appended to ratings.jsonl
and fsynced before the request is acknowledged, so an acknowledged rating
survives a crash.  Duplicate (rater, image, method) submissions get 409.

JSON API:
    GET  /api/session?rater_id=R -> {session_id, rater_id, images, scale_labels}
    GET  /api/image/{image_id}   -> image bytes
    POST /api/rating             -> 201 on append, 400 invalid, 409 duplicate
    GET  /api/export             -> ratings as the MOS CSV schema
Static UI assets are served from ui_dir (fallback: a minimal built-in page).
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .errors import BadManifest, PortInUse
from .harness.mos import HEADER as MOS_HEADER
from .harness.mos import SCORE_MAX, SCORE_MIN

SCALE_LABELS = {1: "Bad", 2: "Poor", 3: "Fair", 4: "Good", 5: "Excellent"}

_CONTENT_TYPES = {
    ".png": "image/png",
    ".ppm": "image/x-portable-pixmap",
    ".pgm": "image/x-portable-graymap",
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
}

_FALLBACK_PAGE = """<!doctype html>
<html><head><title>MOS rating service</title></head>
<body><h1>MOS rating service</h1>
<p>No UI bundle is installed. The JSON API is live:</p>
<ul>
<li>GET /api/session?rater_id=...</li>
<li>GET /api/image/{image_id}</li>
<li>POST /api/rating {rater_id, image_id, method_id, score}</li>
<li>GET /api/export</li>
</ul></body></html>
"""


@dataclass
class SessionStore:
    """Manifest contents plus the durable rating log."""

    data_dir: Path
    seed: int = 0
    images: list = field(default_factory=list)   # [{image_id, method_id, path}]
    ratings_path: Path = None
    _seen: set = field(default_factory=set)
    _lock: threading.Lock = field(default_factory=threading.Lock)

    def __post_init__(self):
        self.data_dir = Path(self.data_dir)
        manifest = self.data_dir / "manifest.csv"
        if not manifest.exists():
            raise BadManifest(f"no manifest.csv in {self.data_dir}")
        with open(manifest, newline="") as fh:
            reader = csv.DictReader(fh)
            required = {"image_id", "method_id", "path"}
            if reader.fieldnames is None or not required <= set(reader.fieldnames):
                raise BadManifest(f"manifest needs columns {sorted(required)}")
            for row in reader:
                path = self.data_dir / row["path"]
                if not path.exists():
                    raise BadManifest(f"missing image file {row['path']}")
                self.images.append({
                    "image_id": row["image_id"].strip(),
                    "method_id": row["method_id"].strip(),
                    "path": path,
                })
        if not self.images:
            raise BadManifest("manifest lists no images")
        ids = [im["image_id"] for im in self.images]
        if len(set(ids)) != len(ids):
            raise BadManifest("duplicate image_id in manifest")
        self.ratings_path = self.data_dir / "ratings.jsonl"
        if self.ratings_path.exists():
            for line in self.ratings_path.read_text().splitlines():
                if line.strip():
                    r = json.loads(line)
                    self._seen.add((r["rater_id"], r["image_id"], r["method_id"]))

    def image(self, image_id: str):
        for im in self.images:
            if im["image_id"] == image_id:
                return im
        return None

    def shuffled_queue(self, rater_id: str) -> list:
        """Deterministic per-rater order so methods interleave differently
        for every rater."""
        digest = hashlib.sha256(f"{self.seed}:{rater_id}".encode()).digest()
        rater_seed = int.from_bytes(digest[:8], "little")
        import numpy as np

        order = np.random.default_rng(rater_seed).permutation(len(self.images))
        return [
            {"image_id": self.images[i]["image_id"],
             "method_id": self.images[i]["method_id"]}
            for i in order
        ]

    def already_rated(self, rater_id: str) -> set:
        with self._lock:
            return {(r, i, m) for (r, i, m) in self._seen if r == rater_id}

    def append_rating(self, rating: dict) -> bool:
        """Durable append; returns False on duplicate (file untouched)."""
        key = (rating["rater_id"], rating["image_id"], rating["method_id"])
        with self._lock:
            if key in self._seen:
                return False
            line = json.dumps(rating, sort_keys=True) + "\n"
            with open(self.ratings_path, "a", encoding="utf-8") as fh:
                fh.write(line)
                fh.flush()
                os.fsync(fh.fileno())
            self._seen.add(key)
            return True

    def export_csv(self) -> str:
        rows = []
        if self.ratings_path.exists():
            for line in self.ratings_path.read_text().splitlines():
                if line.strip():
                    rows.append(json.loads(line))
        out = [",".join(MOS_HEADER)]
        for r in rows:
            out.append(f"{r['rater_id']},{r['image_id']},{r['method_id']},{r['score']}")
        return "\n".join(out) + "\n"


class MosRequestHandler(BaseHTTPRequestHandler):
    server_version = "survx-mos/0.1"

    @property
    def store(self) -> SessionStore:
        return self.server.store

    def log_message(self, fmt, *args):
        if self.server.verbose:
            super().log_message(fmt, *args)

    def _send(self, status: int, body: bytes, content_type: str, extra=None):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        for k, v in (extra or {}).items():
            self.send_header(k, v)
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, doc: dict):
        self._send(status, json.dumps(doc).encode(), "application/json")

    def do_GET(self):
        url = urlparse(self.path)
        if url.path == "/api/session":
            params = parse_qs(url.query)
            rater = params.get("rater_id", [""])[0].strip()
            if not rater:
                return self._send_json(400, {"error": "rater_id query parameter required"})
            queue = self.store.shuffled_queue(rater)
            rated = {(i, m) for (_, i, m) in self.store.already_rated(rater)}
            session_id = hashlib.sha256(f"{self.store.seed}:{rater}".encode()).hexdigest()[:16]
            return self._send_json(200, {
                "session_id": session_id,
                "rater_id": rater,
                "images": queue,
                "rated": sorted(f"{i}:{m}" for (i, m) in rated),
                "scale_labels": {str(k): v for k, v in SCALE_LABELS.items()},
            })
        if url.path.startswith("/api/image/"):
            image_id = url.path[len("/api/image/"):]
            entry = self.store.image(image_id)
            if entry is None:
                return self._send_json(404, {"error": f"unknown image {image_id!r}"})
            data = entry["path"].read_bytes()
            ctype = _CONTENT_TYPES.get(entry["path"].suffix.lower(), "application/octet-stream")
            return self._send(200, data, ctype)
        if url.path == "/api/export":
            return self._send(200, self.store.export_csv().encode(), "text/csv; charset=utf-8")
        return self._serve_static(url.path)

    def _serve_static(self, path: str):
        if path == "/":
            path = "/index.html"
        ui_dir = self.server.ui_dir
        if ui_dir is not None:
            target = (ui_dir / path.lstrip("/")).resolve()
            if str(target).startswith(str(ui_dir.resolve())) and target.is_file():
                ctype = _CONTENT_TYPES.get(target.suffix.lower(), "application/octet-stream")
                return self._send(200, target.read_bytes(), ctype)
        if path == "/index.html":
            return self._send(200, _FALLBACK_PAGE.encode(), "text/html; charset=utf-8")
        return self._send_json(404, {"error": "not found"})

    def do_POST(self):
        url = urlparse(self.path)
        if url.path != "/api/rating":
            return self._send_json(404, {"error": "not found"})
        try:
            length = int(self.headers.get("Content-Length", "0"))
            doc = json.loads(self.rfile.read(length) or b"{}")
        except (ValueError, json.JSONDecodeError):
            return self._send_json(400, {"error": "body must be JSON"})
        problems = []
        for key in ("rater_id", "image_id", "method_id"):
            if not isinstance(doc.get(key), str) or not doc.get(key).strip():
                problems.append(f"missing {key}")
        score = doc.get("score")
        if not isinstance(score, int) or isinstance(score, bool) \
                or not SCORE_MIN <= score <= SCORE_MAX:
            problems.append(f"score must be an integer in [{SCORE_MIN}, {SCORE_MAX}]")
        if problems:
            return self._send_json(400, {"error": "; ".join(problems)})
        entry = self.store.image(doc["image_id"])
        if entry is None or entry["method_id"] != doc["method_id"]:
            return self._send_json(400, {"error": "unknown image/method pair"})
        rating = {k: doc[k] for k in ("rater_id", "image_id", "method_id", "score")}
        if not self.store.append_rating(rating):
            return self._send_json(409, {"error": "duplicate rating"})
        return self._send_json(201, {"status": "recorded"})


def make_server(data_dir, port: int = 8080, seed: int = 0, ui_dir=None,
                host: str = "127.0.0.1", verbose: bool = False) -> ThreadingHTTPServer:
    """Build (but do not start) the rating server; caller runs serve_forever."""
    store = SessionStore(Path(data_dir), seed=seed)
    if ui_dir is None:
        candidate = Path(data_dir) / "ui"
        ui_dir = candidate if candidate.is_dir() else None
    try:
        httpd = ThreadingHTTPServer((host, port), MosRequestHandler)
    except OSError as exc:
        if getattr(exc, "errno", None) in (48, 98):
            raise PortInUse(f"port {port} already bound") from exc
        raise
    httpd.store = store
    httpd.ui_dir = Path(ui_dir) if ui_dir else None
    httpd.verbose = verbose
    return httpd


def serve_mos(data_dir, port: int = 8080, seed: int = 0, ui_dir=None,
              host: str = "127.0.0.1") -> None:
    httpd = make_server(data_dir, port, seed, ui_dir, host, verbose=True)
    try:
        httpd.serve_forever()
    finally:
        httpd.server_close()
