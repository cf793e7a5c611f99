import json
import sys
import textwrap

import pytest

from exprscore.clients import (
    AnnotatorUnavailable,
    AsrConfig,
    AsrUnavailable,
    HttpScorer,
    LmmAnnotator,
    LmmAnnotatorConfig,
    ProcessScorer,
    PromptTemplate,
    ProtocolViolation,
    RatingOutOfScale,
    ScoreOutOfRange,
    ScorerUnavailable,
    UnparseableResponse,
    default_prompt_template,
    score_via_external,
    transcribe_via_asr,
)

from conftest import json_response


def scorer_script(tmp_path, body):
    path = tmp_path / "scorer.py"
    path.write_text(
        textwrap.dedent(
            """
            import json, sys, time
            for line in sys.stdin:
                req = json.loads(line)
            """
        ).strip()
        + "\n"
        + textwrap.indent(textwrap.dedent(body).strip(), "    ")
        + "\n"
    )
    return [sys.executable, "-u", str(path)]


class TestProcessScorer:
    def test_echo_score(self, tmp_path):
        argv = scorer_script(
            tmp_path,
            'print(json.dumps({"id": req["id"], "score": 42.0}), flush=True)',
        )
        with ProcessScorer(argv, timeout_s=10.0) as scorer:
            assert score_via_external(scorer, "c1", "/tmp/a.wav", "emotion") == 42.0
            # second request over the same process
            assert scorer.score("c2", "/tmp/b.wav", "prosody") == 42.0

    def test_out_of_range(self, tmp_path):
        argv = scorer_script(
            tmp_path, 'print(json.dumps({"id": req["id"], "score": 130}), flush=True)'
        )
        with ProcessScorer(argv, timeout_s=10.0) as scorer:
            with pytest.raises(ScoreOutOfRange):
                scorer.score("c1", "a.wav", "emotion")

    def test_id_mismatch(self, tmp_path):
        argv = scorer_script(
            tmp_path, 'print(json.dumps({"id": "other", "score": 10}), flush=True)'
        )
        with ProcessScorer(argv, timeout_s=10.0) as scorer:
            with pytest.raises(ProtocolViolation):
                scorer.score("c1", "a.wav", "emotion")

    def test_missing_fields(self, tmp_path):
        argv = scorer_script(tmp_path, 'print(json.dumps({"id": req["id"]}), flush=True)')
        with ProcessScorer(argv, timeout_s=10.0) as scorer:
            with pytest.raises(ProtocolViolation):
                scorer.score("c1", "a.wav", "emotion")

    def test_timeout(self, tmp_path):
        argv = scorer_script(tmp_path, "time.sleep(30)")
        with ProcessScorer(argv, timeout_s=0.3) as scorer:
            with pytest.raises(ScorerUnavailable):
                scorer.score("c1", "a.wav", "emotion")

    def test_unknown_dimension_rejected_locally(self, tmp_path):
        argv = scorer_script(tmp_path, "pass")
        with ProcessScorer(argv, timeout_s=5.0) as scorer:
            with pytest.raises(ValueError):
                scorer.score("c1", "a.wav", "sentiment")


class TestHttpScorer:
    def test_passthrough(self, mock_endpoint):
        def respond(handler, body):
            req = json.loads(body)
            return json_response({"id": req["id"], "score": 55.5})

        ep = mock_endpoint(respond)
        assert HttpScorer(ep.url).score("x", "a.wav", "spontaneity") == 55.5

    def test_unreachable(self):
        scorer = HttpScorer("http://127.0.0.1:9/", timeout_s=0.5)
        with pytest.raises(ScorerUnavailable):
            scorer.score("x", "a.wav", "emotion")

    def test_http_error_status(self, mock_endpoint):
        ep = mock_endpoint(lambda h, b: json_response({"error": "boom"}, status=500))
        with pytest.raises(ScorerUnavailable):
            HttpScorer(ep.url).score("x", "a.wav", "emotion")


class TestPromptTemplate:
    def test_parse(self):
        template = PromptTemplate.from_text("scale: 1..10\nRate the melody.")
        assert template.scale_lo == 1.0
        assert template.scale_hi == 10.0
        assert template.body == "Rate the melody."

    def test_default_ships(self):
        template = default_prompt_template()
        assert (template.scale_lo, template.scale_hi) == (1.0, 10.0)
        assert "prosodic" in template.body.lower() or "rhythm" in template.body.lower()

    def test_rejects_missing_header(self):
        with pytest.raises(ValueError):
            PromptTemplate.from_text("Rate it 1-10.")


def annotator(url):
    return LmmAnnotator(
        LmmAnnotatorConfig(url=url, template=default_prompt_template(), timeout_s=3.0, retries=1)
    )


class TestLmmAnnotator:
    def test_mid_scale_rating(self, mock_endpoint):
        ep = mock_endpoint(lambda h, b: (200, "text/plain", b"7"))
        score = annotator(ep.url).score_prosody("c1", b"RIFFfake")
        assert score == pytest.approx((7 - 1) / 9 * 100)

    def test_top_of_scale(self, mock_endpoint):
        ep = mock_endpoint(lambda h, b: (200, "text/plain", b"10"))
        assert annotator(ep.url).score_prosody("c1", b"x") == 100.0

    def test_unparseable(self, mock_endpoint):
        ep = mock_endpoint(lambda h, b: (200, "text/plain", b"expressive!"))
        with pytest.raises(UnparseableResponse):
            annotator(ep.url).score_prosody("c1", b"x")

    def test_out_of_scale(self, mock_endpoint):
        ep = mock_endpoint(lambda h, b: (200, "text/plain", b"11"))
        with pytest.raises(RatingOutOfScale):
            annotator(ep.url).score_prosody("c1", b"x")

    def test_unavailable_after_retries(self):
        client = annotator("http://127.0.0.1:9/")
        client.config.timeout_s = 0.3
        with pytest.raises(AnnotatorUnavailable):
            client.score_prosody("c1", b"x")

    def test_audit_log_records_raw(self, mock_endpoint):
        ep = mock_endpoint(lambda h, b: (200, "text/plain", b"8 out of 10"))
        client = annotator(ep.url)
        client.score_prosody("clip-7", b"x")
        assert client.audit_log == [{"clip_id": "clip-7", "response": "8 out of 10"}]

    def test_credential_header_sent(self, mock_endpoint, monkeypatch):
        monkeypatch.setenv("LMM_API_KEY", "sekret")
        ep = mock_endpoint(lambda h, b: (200, "text/plain", b"5"))
        annotator(ep.url).score_prosody("c1", b"x")
        assert ep.requests[0]["headers"].get("Authorization") == "Bearer sekret"


class TestAsr:
    def test_passthrough(self, mock_endpoint):
        ep = mock_endpoint(lambda h, b: json_response({"text": "hello"}))
        assert transcribe_via_asr("c1", b"x", AsrConfig(url=ep.url)) == "hello"

    def test_empty_transcript_accepted(self, mock_endpoint):
        ep = mock_endpoint(lambda h, b: json_response({"text": ""}))
        assert transcribe_via_asr("c1", b"x", AsrConfig(url=ep.url)) == ""

    def test_down(self):
        with pytest.raises(AsrUnavailable):
            transcribe_via_asr("c1", b"x", AsrConfig(url="http://127.0.0.1:9/", timeout_s=0.3))
