"""Clients for pluggable external services.

Three attachment points: a generic per-dimension scorer (neural models
plug in here), an LMM annotator for prosody ratings, and an ASR service
for transcripts. All are optional; the native proxies and heuristic cover
every dimension without them.
"""

from __future__ import annotations

import json
import os
import re
import selectors
import subprocess
import time
from dataclasses import dataclass, field

import requests

DIMENSIONS = ("emotion", "prosody", "spontaneity")

_NUMBER_RE = re.compile(r"-?\d+(?:\.\d+)?")


class ScorerUnavailable(RuntimeError):
    pass


class ProtocolViolation(RuntimeError):
    pass


class ScoreOutOfRange(ValueError):
    pass


class AnnotatorUnavailable(RuntimeError):
    pass


class UnparseableResponse(ValueError):
    pass


class RatingOutOfScale(ValueError):
    pass


class AsrUnavailable(RuntimeError):
    pass


def _validate_score_payload(payload: dict, request_id: str) -> float:
    if not isinstance(payload, dict) or "id" not in payload or "score" not in payload:
        raise ProtocolViolation(f"response missing id/score fields: {payload!r}")
    if str(payload["id"]) != str(request_id):
        raise ProtocolViolation(
            f"response id {payload['id']!r} does not match request id {request_id!r}"
        )
    try:
        score = float(payload["score"])
    except (TypeError, ValueError) as exc:
        raise ProtocolViolation(f"non-numeric score {payload['score']!r}") from exc
    if not (0.0 <= score <= 100.0):
        raise ScoreOutOfRange(f"score {score} outside [0, 100]")
    return score


class ProcessScorer:
    """Line-delimited JSON scorer over a child process's stdin/stdout."""

    def __init__(self, argv: list[str], timeout_s: float = 10.0):
        self.timeout_s = timeout_s
        try:
            self._proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise ScorerUnavailable(f"cannot spawn scorer {argv[0]!r}: {exc}") from exc
        self._selector = selectors.DefaultSelector()
        self._selector.register(self._proc.stdout, selectors.EVENT_READ)

    def score(self, clip_id: str, audio_path: str, dimension: str) -> float:
        if dimension not in DIMENSIONS:
            raise ValueError(f"unknown dimension {dimension!r}")
        if self._proc.poll() is not None:
            raise ScorerUnavailable("scorer process has exited")
        request = {"id": clip_id, "audio_path": str(audio_path), "dimension": dimension}
        try:
            self._proc.stdin.write(json.dumps(request) + "\n")
            self._proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ScorerUnavailable("scorer process closed its pipe") from exc

        deadline = time.monotonic() + self.timeout_s
        if not self._selector.select(timeout=max(0.0, deadline - time.monotonic())):
            raise ScorerUnavailable(f"no response within {self.timeout_s}s")
        line = self._proc.stdout.readline()
        if not line:
            raise ScorerUnavailable("scorer process closed stdout")
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolViolation(f"response is not JSON: {line!r}") from exc
        return _validate_score_payload(payload, clip_id)

    def close(self):
        if self._proc.poll() is None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=2)
            except subprocess.TimeoutExpired:
                self._proc.kill()

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()


class HttpScorer:
    """Same request/response contract as ProcessScorer, over HTTP POST."""

    def __init__(self, url: str, timeout_s: float = 10.0):
        self.url = url
        self.timeout_s = timeout_s

    def score(self, clip_id: str, audio_path: str, dimension: str) -> float:
        if dimension not in DIMENSIONS:
            raise ValueError(f"unknown dimension {dimension!r}")
        request = {"id": clip_id, "audio_path": str(audio_path), "dimension": dimension}
        try:
            resp = requests.post(self.url, json=request, timeout=self.timeout_s)
        except requests.RequestException as exc:
            raise ScorerUnavailable(f"scorer endpoint unreachable: {exc}") from exc
        if resp.status_code != 200:
            raise ScorerUnavailable(f"scorer returned HTTP {resp.status_code}")
        try:
            payload = resp.json()
        except ValueError as exc:
            raise ProtocolViolation("response body is not JSON") from exc
        return _validate_score_payload(payload, clip_id)


def score_via_external(scorer, clip_id: str, audio_path: str, dimension: str) -> float:
    """Route one scoring request through a Process/Http scorer."""
    return scorer.score(clip_id, audio_path, dimension)


@dataclass
class PromptTemplate:
    """Rating prompt with a declared numeric scale (``scale: lo..hi`` header)."""

    scale_lo: float
    scale_hi: float
    body: str

    @classmethod
    def from_text(cls, text: str) -> "PromptTemplate":
        lines = text.splitlines()
        if not lines:
            raise ValueError("empty prompt template")
        match = re.match(r"\s*scale:\s*(-?\d+(?:\.\d+)?)\s*\.\.\s*(-?\d+(?:\.\d+)?)\s*$", lines[0])
        if not match:
            raise ValueError("prompt template must start with a 'scale: lo..hi' line")
        lo, hi = float(match.group(1)), float(match.group(2))
        if hi <= lo:
            raise ValueError(f"degenerate scale {lo}..{hi}")
        return cls(scale_lo=lo, scale_hi=hi, body="\n".join(lines[1:]).strip())

    @classmethod
    def from_file(cls, path) -> "PromptTemplate":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def default_prompt_template() -> PromptTemplate:
    from importlib import resources

    text = resources.files("exprscore.data").joinpath("prosody_prompt.txt").read_text("utf-8")
    return PromptTemplate.from_text(text)


@dataclass
class LmmAnnotatorConfig:
    url: str
    template: PromptTemplate
    api_key_env: str = "LMM_API_KEY"
    timeout_s: float = 30.0
    retries: int = 2


class LmmAnnotator:
    """Posts audio plus a rating prompt to an LMM endpoint.

    The response text is scanned for the first number, validated against
    the template's scale, and mapped affinely onto 0-100. Raw responses are
    kept in ``audit_log`` so ratings can be reviewed later.
    """

    def __init__(self, config: LmmAnnotatorConfig):
        self.config = config
        self.audit_log: list[dict] = []

    def score_prosody(self, clip_id: str, audio_bytes: bytes) -> float:
        cfg = self.config
        headers = {}
        key = os.environ.get(cfg.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"

        last_error = None
        for _attempt in range(cfg.retries + 1):
            try:
                resp = requests.post(
                    cfg.url,
                    headers=headers,
                    data={
                        "prompt": cfg.template.body,
                        "scale": f"{cfg.template.scale_lo:g}..{cfg.template.scale_hi:g}",
                    },
                    files={"audio": (f"{clip_id}.wav", audio_bytes, "audio/wav")},
                    timeout=cfg.timeout_s,
                )
            except requests.RequestException as exc:
                last_error = exc
                continue
            if resp.status_code != 200:
                last_error = RuntimeError(f"HTTP {resp.status_code}")
                continue
            text = resp.text
            self.audit_log.append({"clip_id": clip_id, "response": text})
            return self._parse_rating(text)
        raise AnnotatorUnavailable(f"annotator unreachable: {last_error}")

    def _parse_rating(self, text: str) -> float:
        match = _NUMBER_RE.search(text)
        if not match:
            raise UnparseableResponse(f"no numeric rating in response: {text!r}")
        rating = float(match.group(0))
        lo, hi = self.config.template.scale_lo, self.config.template.scale_hi
        if not (lo <= rating <= hi):
            raise RatingOutOfScale(f"rating {rating} outside declared scale {lo}..{hi}")
        return (rating - lo) / (hi - lo) * 100.0


@dataclass
class AsrConfig:
    url: str
    timeout_s: float = 30.0


def transcribe_via_asr(clip_id: str, audio_bytes: bytes, config: AsrConfig) -> str:
    """POST audio to the ASR endpoint; returns the transcript (may be empty)."""
    try:
        resp = requests.post(
            config.url,
            files={"audio": (f"{clip_id}.wav", audio_bytes, "audio/wav")},
            timeout=config.timeout_s,
        )
    except requests.RequestException as exc:
        raise AsrUnavailable(f"ASR endpoint unreachable: {exc}") from exc
    if resp.status_code != 200:
        raise AsrUnavailable(f"ASR returned HTTP {resp.status_code}")
    try:
        payload = resp.json()
    except ValueError as exc:
        raise AsrUnavailable("ASR response is not JSON") from exc
    if "text" not in payload:
        raise AsrUnavailable("ASR response missing 'text' field")
    return str(payload["text"])
