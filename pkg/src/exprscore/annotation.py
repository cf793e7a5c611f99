"""Local annotation service: collect 1-5 expressiveness ratings over HTTP.

State is a roster (immutable) plus a ratings store persisted as an
append-only line log, compacted on restart. Endpoints:

    GET  /clips            roster, per-annotator progress, instructions
    GET  /clips/{id}/audio WAV bytes for playback
    POST /ratings          {"annotator", "clip_id", "score"} upsert
    GET  /agreement        Krippendorff's alpha over the current matrix
    GET  /export           CSV clip_id,s_emo,s_pros,s_spon,target

The service also serves the annotation UI as static files when a static
root is configured. It binds localhost by default; it is a lab tool.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np

from .scorers import SubScores
from .stats import InsufficientCoincidences, krippendorff_alpha

RATING_VALUES = (1, 2, 3, 4, 5)


@dataclass(frozen=True)
class Rating:
    annotator: str
    clip_id: str
    score: int
    timestamp: float


@dataclass
class RosterClip:
    clip_id: str
    audio_path: str
    subscores: SubScores | None = None


def load_roster(path) -> tuple[list[RosterClip], str]:
    """Roster JSON: {"instructions": str, "clips": [{clip_id, audio_path, s_emo?, s_pros?, s_spon?}]}"""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    clips = []
    for item in payload["clips"]:
        scores = None
        if all(k in item for k in ("s_emo", "s_pros", "s_spon")):
            scores = SubScores(
                s_emo=float(item["s_emo"]),
                s_pros=float(item["s_pros"]),
                s_spon=float(item["s_spon"]),
            )
        clips.append(
            RosterClip(clip_id=item["clip_id"], audio_path=item["audio_path"], subscores=scores)
        )
    return clips, payload.get("instructions", DEFAULT_INSTRUCTIONS)


DEFAULT_INSTRUCTIONS = (
    "Listen to the full clip, then rate how vocally expressive the speaker "
    "sounds on a 1-5 scale: 1 = flat and robotic, 3 = ordinary read speech, "
    "5 = vivid, emotionally engaged, natural delivery. Judge the voice, not "
    "the words. Edit this text in the roster file to match your protocol."
)


class RatingsStore:
    """Append-log of ratings with last-write-wins per (annotator, clip)."""

    def __init__(self, path=None):
        self._path = Path(path) if path else None
        self._lock = threading.Lock()
        self._ratings: dict[tuple[str, str], Rating] = {}
        if self._path and self._path.exists():
            self._replay()
            self._compact()

    def _replay(self):
        with open(self._path, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                row = json.loads(line)
                rating = Rating(
                    annotator=row["annotator"],
                    clip_id=row["clip_id"],
                    score=int(row["score"]),
                    timestamp=float(row["timestamp"]),
                )
                self._ratings[(rating.annotator, rating.clip_id)] = rating

    def _compact(self):
        tmp = self._path.with_suffix(self._path.suffix + ".tmp")
        with open(tmp, "w", encoding="utf-8") as fh:
            for rating in self._ratings.values():
                fh.write(self._encode(rating) + "\n")
        tmp.replace(self._path)

    @staticmethod
    def _encode(rating: Rating) -> str:
        return json.dumps(
            {
                "annotator": rating.annotator,
                "clip_id": rating.clip_id,
                "score": rating.score,
                "timestamp": rating.timestamp,
            },
            sort_keys=True,
        )

    def upsert(self, rating: Rating):
        with self._lock:
            self._ratings[(rating.annotator, rating.clip_id)] = rating
            if self._path:
                with open(self._path, "a", encoding="utf-8") as fh:
                    fh.write(self._encode(rating) + "\n")

    def snapshot(self) -> dict[tuple[str, str], Rating]:
        with self._lock:
            return dict(self._ratings)


class AnnotationSession:
    def __init__(self, roster: list[RosterClip], store: RatingsStore, instructions: str = ""):
        self.roster = {c.clip_id: c for c in roster}
        self.order = [c.clip_id for c in roster]
        self.store = store
        self.instructions = instructions or DEFAULT_INSTRUCTIONS

    # ---- endpoint logic, kept HTTP-free so it is unit-testable ----

    def clips_payload(self) -> dict:
        ratings = self.store.snapshot()
        per_annotator: dict[str, int] = {}
        rated_by: dict[str, list[str]] = {cid: [] for cid in self.order}
        scores: dict[str, dict[str, int]] = {cid: {} for cid in self.order}
        for (annotator, clip_id), rating in ratings.items():
            if clip_id not in self.roster:
                continue
            per_annotator[annotator] = per_annotator.get(annotator, 0) + 1
            rated_by[clip_id].append(annotator)
            scores[clip_id][annotator] = rating.score
        def subscores_field(cid):
            s = self.roster[cid].subscores
            if s is None:
                return None
            return {"s_emo": s.s_emo, "s_pros": s.s_pros, "s_spon": s.s_spon}

        return {
            "instructions": self.instructions,
            "clips": [
                {
                    "clip_id": cid,
                    "audio_url": f"/clips/{cid}/audio",
                    "rated_by": sorted(rated_by[cid]),
                    "ratings": scores[cid],
                    "subscores": subscores_field(cid),
                }
                for cid in self.order
            ],
            "progress": {
                annotator: {"rated": count, "total": len(self.order)}
                for annotator, count in sorted(per_annotator.items())
            },
        }

    def submit(self, annotator: str, clip_id: str, score) -> Rating:
        if clip_id not in self.roster:
            raise KeyError(clip_id)
        if isinstance(score, bool) or not isinstance(score, (int, float)):
            raise ValueError(f"score must be an integer 1-5, got {score!r}")
        if isinstance(score, float) and not score.is_integer():
            raise ValueError(f"score must be an integer 1-5, got {score}")
        score = int(score)
        if score not in RATING_VALUES:
            raise ValueError(f"score must be an integer 1-5, got {score}")
        if not annotator or not isinstance(annotator, str):
            raise ValueError("annotator id must be a non-empty string")
        rating = Rating(annotator=annotator, clip_id=clip_id, score=score, timestamp=time.time())
        self.store.upsert(rating)
        return rating

    def agreement(self) -> dict:
        ratings = self.store.snapshot()
        annotators = sorted({a for (a, _) in ratings})
        if len(annotators) < 2 or len(self.order) < 2:
            return {"alpha": None, "reason": "need at least 2 annotators and 2 clips"}
        grid = np.full((len(annotators), len(self.order)), np.nan)
        for (annotator, clip_id), rating in ratings.items():
            if clip_id in self.roster:
                grid[annotators.index(annotator), self.order.index(clip_id)] = rating.score
        try:
            alpha = krippendorff_alpha(grid)
        except InsufficientCoincidences as exc:
            return {"alpha": None, "reason": str(exc)}
        return {"alpha": alpha, "n_annotators": len(annotators)}

    def export_csv(self) -> str:
        """Fusion training rows: mean rating mapped from 1-5 onto 0-100."""
        ratings = self.store.snapshot()
        by_clip: dict[str, list[int]] = {}
        for (_, clip_id), rating in ratings.items():
            by_clip.setdefault(clip_id, []).append(rating.score)
        missing = [cid for cid in by_clip if self.roster[cid].subscores is None]
        if missing:
            raise LookupError(f"roster clips missing sub-scores: {sorted(missing)}")
        lines = ["clip_id,s_emo,s_pros,s_spon,target"]
        for clip_id in sorted(by_clip):
            s = self.roster[clip_id].subscores
            target = (sum(by_clip[clip_id]) / len(by_clip[clip_id]) - 1.0) / 4.0 * 100.0
            lines.append(f"{clip_id},{s.s_emo!r},{s.s_pros!r},{s.s_spon!r},{target!r}")
        return "\n".join(lines) + "\n"


class _Handler(BaseHTTPRequestHandler):
    session: AnnotationSession = None
    static_root: Path | None = None

    def log_message(self, *args):  # quiet by default
        pass

    def _send(self, status: int, body: bytes, content_type: str):
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, payload: dict):
        self._send(status, json.dumps(payload).encode("utf-8"), "application/json")

    def do_GET(self):
        path = self.path.split("?", 1)[0]
        if path == "/clips":
            self._send_json(200, self.session.clips_payload())
        elif path.startswith("/clips/") and path.endswith("/audio"):
            clip_id = path[len("/clips/") : -len("/audio")]
            clip = self.session.roster.get(clip_id)
            if clip is None:
                self._send_json(404, {"error": f"unknown clip {clip_id!r}"})
                return
            try:
                data = Path(clip.audio_path).read_bytes()
            except OSError:
                self._send_json(404, {"error": f"audio file missing for {clip_id!r}"})
                return
            self._send(200, data, "audio/wav")
        elif path == "/agreement":
            self._send_json(200, self.session.agreement())
        elif path == "/export":
            try:
                csv_text = self.session.export_csv()
            except LookupError as exc:
                self._send_json(409, {"error": str(exc)})
                return
            self._send(200, csv_text.encode("utf-8"), "text/csv")
        else:
            self._serve_static(path)

    def do_POST(self):
        path = self.path.split("?", 1)[0]
        if path != "/ratings":
            self._send_json(404, {"error": "unknown endpoint"})
            return
        length = int(self.headers.get("Content-Length", 0))
        try:
            payload = json.loads(self.rfile.read(length) or b"{}")
        except json.JSONDecodeError:
            self._send_json(400, {"error": "body is not JSON"})
            return
        try:
            rating = self.session.submit(
                payload.get("annotator"), payload.get("clip_id"), payload.get("score")
            )
        except KeyError as exc:
            self._send_json(404, {"error": f"unknown clip {exc.args[0]!r}"})
            return
        except ValueError as exc:
            self._send_json(400, {"error": str(exc)})
            return
        self._send_json(
            200,
            {"annotator": rating.annotator, "clip_id": rating.clip_id, "score": rating.score},
        )

    def _serve_static(self, path: str):
        if self.static_root is None:
            self._send_json(404, {"error": "unknown endpoint"})
            return
        rel = path.lstrip("/") or "index.html"
        target = (self.static_root / rel).resolve()
        if not str(target).startswith(str(self.static_root.resolve())) or not target.is_file():
            self._send_json(404, {"error": "not found"})
            return
        content_types = {
            ".html": "text/html",
            ".js": "application/javascript",
            ".css": "text/css",
            ".map": "application/json",
        }
        self._send(
            200, target.read_bytes(), content_types.get(target.suffix, "application/octet-stream")
        )


def make_server(
    session: AnnotationSession,
    host: str = "127.0.0.1",
    port: int = 0,
    static_root=None,
) -> ThreadingHTTPServer:
    handler = type(
        "BoundHandler",
        (_Handler,),
        {"session": session, "static_root": Path(static_root) if static_root else None},
    )
    return ThreadingHTTPServer((host, port), handler)


def serve_forever(session: AnnotationSession, host="127.0.0.1", port=8765, static_root=None):
    server = make_server(session, host=host, port=port, static_root=static_root)
    print(f"annotation service listening on http://{host}:{server.server_address[1]}/")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
