import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from exprscore.audio import AudioClip
from exprscore.quality import (
    DuplicateId,
    MissingColumn,
    OutOfRange,
    QualityMetrics,
    estimate_quality,
    is_hyper_clean,
    load_sidecar,
    mean_quality,
)

from conftest import SR, silence, tone

metric = st.floats(min_value=1.0, max_value=5.0, allow_nan=False)


class TestMeanQuality:
    def test_uniform(self):
        assert mean_quality(QualityMetrics(3, 3, 3, 3)) == 3.0

    def test_mixed(self):
        assert mean_quality(QualityMetrics(4.0, 3.8, 3.6, 4.2)) == pytest.approx(3.9)

    def test_extremes(self):
        assert mean_quality(QualityMetrics(1, 5, 1, 5)) == 3.0

    @given(metric, metric, metric, metric)
    def test_permutation_invariant(self, a, b, c, d):
        base = mean_quality(QualityMetrics(a, b, c, d))
        assert mean_quality(QualityMetrics(d, c, b, a)) == pytest.approx(base)


class TestHyperClean:
    def test_all_above(self):
        assert is_hyper_clean(QualityMetrics(4, 4, 4, 4), 3.5)

    def test_boundary_is_strict(self):
        assert not is_hyper_clean(QualityMetrics(4, 4, 3.5, 4), 3.5)

    def test_one_below(self):
        assert not is_hyper_clean(QualityMetrics(3.6, 3.6, 3.6, 3.4), 3.5)

    @given(metric, metric, metric, metric, st.floats(min_value=0.0, max_value=1.0))
    def test_monotone_raising_never_flips_true_to_false(self, a, b, c, d, bump):
        q = QualityMetrics(a, b, c, d)
        if is_hyper_clean(q):
            raised = QualityMetrics(
                min(5.0, a + bump), min(5.0, b + bump), min(5.0, c + bump), min(5.0, d + bump)
            )
            assert is_hyper_clean(raised)


class TestQualityMetricsType:
    def test_rejects_out_of_range(self):
        with pytest.raises(OutOfRange):
            QualityMetrics(5.7, 3, 3, 3)
        with pytest.raises(OutOfRange):
            QualityMetrics(3, 0.5, 3, 3)


class TestSidecar:
    def test_parse_identity(self, tmp_path):
        path = tmp_path / "q.csv"
        path.write_text("id,ovrl,sig,bak,p808\na,3.1,3.4,4.0,3.0\n")
        table = load_sidecar(path)
        assert table["a"] == QualityMetrics(3.1, 3.4, 4.0, 3.0, source="sidecar")

    def test_out_of_range_rejected(self, tmp_path):
        path = tmp_path / "q.csv"
        path.write_text("id,ovrl,sig,bak,p808\na,5.7,3.4,4.0,3.0\n")
        with pytest.raises(OutOfRange):
            load_sidecar(path)

    def test_header_only(self, tmp_path):
        path = tmp_path / "q.csv"
        path.write_text("id,ovrl,sig,bak,p808\n")
        assert load_sidecar(path) == {}

    def test_missing_column(self, tmp_path):
        path = tmp_path / "q.csv"
        path.write_text("id,ovrl,sig,bak\na,3,3,3\n")
        with pytest.raises(MissingColumn):
            load_sidecar(path)

    def test_duplicate_id(self, tmp_path):
        path = tmp_path / "q.csv"
        path.write_text("id,ovrl,sig,bak,p808\na,3,3,3,3\na,4,4,4,4\n")
        with pytest.raises(DuplicateId):
            load_sidecar(path)


class TestEstimator:
    def test_clean_tone_with_silence_context_bak_5(self):
        # tone surrounded by silence: p10 sits at the floor, SNR proxy > 40 dB
        t = np.arange(SR) / SR
        samples = np.concatenate(
            [np.zeros(SR // 2), 0.5 * np.sin(2 * np.pi * 220 * t), np.zeros(SR // 2)]
        )
        q = estimate_quality(AudioClip(samples, SR, "clean"))
        assert q.bak == 5.0

    def test_tone_plus_equal_power_noise_bak_floor(self):
        rng = np.random.default_rng(7)
        t = np.arange(2 * SR) / SR
        sine = 0.3 * np.sin(2 * np.pi * 220 * t)
        noise = rng.standard_normal(2 * SR) * (0.3 / np.sqrt(2))  # equal power
        clip = AudioClip(np.clip(sine + noise, -1, 1), SR, "noisy")
        q = estimate_quality(clip)
        assert q.bak == pytest.approx(1.0, abs=0.2)

    def test_silence_clamps_to_one(self):
        q = estimate_quality(silence(1.0))
        assert q.as_tuple() == (1.0, 1.0, 1.0, 1.0)

    def test_output_always_valid(self):
        for seed in range(5):
            rng = np.random.default_rng(seed)
            clip = AudioClip(np.clip(rng.standard_normal(SR) * 0.3, -1, 1), SR, "x")
            q = estimate_quality(clip)
            for value in q.as_tuple():
                assert 1.0 <= value <= 5.0
        assert estimate_quality(tone()).source == "estimated"
