import itertools

import numpy as np
import pytest

from hbdiag import kernels
from hbdiag.core import HeartbeatSequence, HeartRateSeries, WindowConfig
from hbdiag.errors import (
    DegenerateReferenceError,
    DegenerateTimingError,
    EmptyInputError,
    FeatureError,
    InfeasibleBandError,
    InsufficientDataError,
    LengthMismatchError,
    ValidationError,
)
from hbdiag.features import (
    FeatureVector,
    dtw_distance,
    envelope,
    extract_features,
    global_heartbeat_ratio,
    global_time_ratio,
    lb_keogh,
    local_heartbeat_ratio,
    local_time_ratio,
)
from hbdiag.synth import WorkloadProfile, gen_normal
from oracles import brute_dtw, envelope_spans, windowed_rate_ratio, windowed_time_ratio

S = 1_000_000_000


def seq(ts, tid=0):
    return HeartbeatSequence(tid, np.asarray(ts, dtype=np.int64))


def series(y):
    y = np.asarray(y, float)
    return HeartRateSeries(np.arange(1.0, y.size + 1), y)


class TestGlobalTimeRatio:
    def test_identical_is_one(self):
        a = seq([0, 10, 20])
        assert global_time_ratio(a, a) == pytest.approx(1.0)

    def test_direct_ratio(self):
        c = seq([0, 10 * S, 20 * S])
        q = seq([0, 5 * S, 10 * S])
        assert global_time_ratio(c, q) == pytest.approx(2.0)

    def test_zero_reference_completion(self):
        with pytest.raises(DegenerateReferenceError):
            global_time_ratio(seq([0, 5]), seq([0]))


class TestLocalTimeRatio:
    def test_identical_is_one(self):
        a = seq(np.cumsum(np.random.default_rng(0).integers(1, 100, 40)))
        for w in (1, 3, 7):
            assert local_time_ratio(a, a, WindowConfig(w)) == pytest.approx(1.0)

    def test_doubled_timestamps_give_two(self):
        base = np.cumsum(np.random.default_rng(1).integers(1, 100, 40))
        a = seq(base)
        b = seq(base * 2)
        assert local_time_ratio(b, a, WindowConfig(5)) == pytest.approx(2.0)

    def test_matches_loop_oracle(self):
        rng = np.random.default_rng(2)
        tq = np.cumsum(rng.integers(1, 1000, 83))
        tc = np.cumsum(rng.integers(1, 1000, 90))
        got = local_time_ratio(seq(tc), seq(tq), WindowConfig(5))
        want = windowed_time_ratio(tc.tolist(), tq.tolist(), 5, 5)
        assert got == pytest.approx(want, rel=1e-12)

    def test_insufficient_windows(self):
        with pytest.raises(InsufficientDataError):
            local_time_ratio(seq([0, 1, 2]), seq([0, 1, 2]), WindowConfig(5))

    def test_zero_reference_window(self):
        q = seq([0, 0, 5])  # non-decreasing but flat first window
        c = seq([0, 2, 5])
        with pytest.raises(DegenerateTimingError):
            local_time_ratio(c, q, WindowConfig(1))


class TestGlobalHeartbeatRatio:
    def test_identical(self):
        a = series([3.0, 4.0, 5.0])
        assert global_heartbeat_ratio(a, a) == pytest.approx(1.0)

    def test_half_rate(self):
        assert global_heartbeat_ratio(
            series([50.0] * 5), series([100.0] * 5)
        ) == pytest.approx(0.5)

    def test_empty(self):
        with pytest.raises(EmptyInputError):
            global_heartbeat_ratio(series([]), series([1.0]))


class TestLocalHeartbeatRatio:
    def test_identical_nonconstant(self):
        y = np.array([10.0, 12.0, 9.0, 14.0, 11.0, 13.0, 10.0])
        a = series(y)
        assert local_heartbeat_ratio(a, a, WindowConfig(2)) == pytest.approx(1.0)

    def test_pointwise_doubling(self):
        y = np.array([10.0, 12.0, 9.0, 14.0, 11.0, 13.0, 10.0])
        assert local_heartbeat_ratio(
            series(2 * y), series(y), WindowConfig(2)
        ) == pytest.approx(2.0)

    def test_matches_loop_oracle_with_skips(self):
        rng = np.random.default_rng(3)
        qr = rng.uniform(1.0, 2.0, 61)
        qr[10:16] = 1.5  # flat stretch to exercise the skip path
        cr = rng.uniform(1.0, 2.0, 61)
        got = local_heartbeat_ratio(series(cr), series(qr), WindowConfig(5), eps=1e-6)
        want = windowed_rate_ratio(cr.tolist(), qr.tolist(), 5, 5, 1e-6)
        assert got == pytest.approx(want, rel=1e-12)

    def test_constant_reference_rejected(self):
        flat = series([5.0] * 12)
        wavy = series(np.linspace(1, 2, 12))
        with pytest.raises(DegenerateReferenceError):
            local_heartbeat_ratio(wavy, flat, WindowConfig(3))


class TestDtwDistance:
    def test_self_distance_zero(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            x = rng.normal(size=rng.integers(1, 30))
            assert dtw_distance(x, x, "absolute") == 0.0

    def test_spec_examples(self):
        assert dtw_distance([1, 2, 3], [1, 2, 2, 3], "absolute") == 0.0
        assert dtw_distance([0, 0], [1, 1], "absolute") == 2.0

    def test_brute_force_small_integers(self):
        values = [0, 1, 2]
        for n, m in itertools.product(range(1, 4), repeat=2):
            for q in itertools.product(values, repeat=n):
                for c in itertools.product(values, repeat=m):
                    for cost, sq in (("absolute", False), ("squared", True)):
                        got = dtw_distance(list(q), list(c), cost)
                        want = brute_dtw(q, c, squared=sq)
                        assert got == want, (q, c, cost)

    def test_brute_force_random_real(self):
        rng = np.random.default_rng(5)
        for _ in range(60):
            q = rng.normal(size=rng.integers(1, 9))
            c = rng.normal(size=rng.integers(1, 9))
            for cost, sq in (("absolute", False), ("squared", True)):
                got = dtw_distance(q, c, cost)
                want = brute_dtw(q, c, squared=sq)
                assert got == pytest.approx(want, rel=1e-9)

    def test_banded_matches_banded_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(40):
            n = int(rng.integers(2, 9))
            m = int(rng.integers(max(1, n - 2), min(9, n + 3)))
            q = rng.normal(size=n)
            c = rng.normal(size=m)
            band = int(rng.integers(abs(n - m) if abs(n - m) > 0 else 1, 9))
            got = dtw_distance(q, c, "squared", band=band)
            want = brute_dtw(q, c, squared=True, band=band)
            assert got == pytest.approx(want, rel=1e-9)

    def test_symmetry(self):
        rng = np.random.default_rng(7)
        for cost in ("absolute", "squared"):
            for _ in range(25):
                q = rng.normal(size=rng.integers(1, 20))
                c = rng.normal(size=rng.integers(1, 20))
                assert dtw_distance(q, c, cost) == pytest.approx(
                    dtw_distance(c, q, cost), rel=1e-12
                )

    def test_zero_iff_equal_after_alignment(self):
        # absolute cost: zero distance implies a path of exact matches
        assert dtw_distance([1, 1, 2], [1, 2, 2], "absolute") == 0.0
        assert dtw_distance([1, 2], [1, 3], "absolute") > 0.0

    def test_empty_rejected(self):
        with pytest.raises(EmptyInputError):
            dtw_distance([], [1.0], "absolute")

    def test_infeasible_band(self):
        with pytest.raises(InfeasibleBandError):
            dtw_distance([1, 2, 3, 4, 5], [1], "absolute", band=2)

    def test_bad_cost_mode(self):
        with pytest.raises(ValueError):
            dtw_distance([1], [1], "euclidean")


class TestEnvelope:
    def test_constant_sequence(self):
        env = envelope([5.0] * 7, 2)
        assert np.all(env.upper == 5.0)
        assert np.all(env.lower == 5.0)

    def test_hand_oracle_example(self):
        env = envelope([1.0, 2.0, 3.0], 1)
        assert env.upper.tolist() == [2.0, 3.0, 3.0]
        assert env.lower.tolist() == [1.0, 1.0, 2.0]

    def test_window_wider_than_series(self):
        rng = np.random.default_rng(8)
        x = rng.normal(size=9)
        env = envelope(x, 20)
        assert np.all(env.upper == x.max())
        assert np.all(env.lower == x.min())

    def test_matches_span_oracle(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            x = rng.normal(size=rng.integers(1, 60))
            w = int(rng.integers(1, 12))
            env = envelope(x, w)
            want_u, want_l = envelope_spans(x, w)
            assert env.upper.tolist() == want_u
            assert env.lower.tolist() == want_l

    def test_sandwich_and_monotone_widening(self):
        rng = np.random.default_rng(10)
        x = rng.normal(size=50)
        prev = envelope(x, 1)
        assert np.all(prev.lower <= x) and np.all(x <= prev.upper)
        for w in (2, 4, 8, 16):
            env = envelope(x, w)
            assert np.all(env.upper >= prev.upper)
            assert np.all(env.lower <= prev.lower)
            prev = env

    def test_validation(self):
        with pytest.raises(EmptyInputError):
            envelope([], 1)
        with pytest.raises(ValidationError):
            envelope([1.0], 0)


class TestLbKeogh:
    def test_inside_envelope_is_zero(self):
        q = np.sin(np.linspace(0, 6, 40)) * 5
        assert lb_keogh(q, q, 3) == 0.0

    def test_flat_reference_squared_excursions(self):
        assert lb_keogh([0.0, 0.0], [2.0, -3.0], 5) == pytest.approx(13.0)

    def test_lower_bounds_banded_squared_dtw(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            q = rng.normal(size=50)
            c = rng.normal(size=50)
            for w in (2, 5, 10):
                lb = lb_keogh(q, c, w)
                d = dtw_distance(q, c, "squared", band=w)
                assert lb <= d

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            lb_keogh([1.0, 2.0], [1.0], 1)


class TestKernelBackends:
    def test_both_backends_agree(self):
        backends = kernels.available_backends()
        if len(backends) < 2:
            pytest.skip("compiled backend not built")
        rng = np.random.default_rng(12)
        py = backends["python"]
        cy = backends["compiled"]
        for _ in range(50):
            q = rng.normal(size=rng.integers(1, 40))
            c = rng.normal(size=rng.integers(1, 40))
            for sq in (False, True):
                assert cy.dtw(q, c, sq, -1) == pytest.approx(
                    py.dtw(q, c, sq, -1), rel=1e-12
                )
            band = int(rng.integers(abs(len(q) - len(c)) + 1, 45))
            assert cy.dtw(q, c, True, band) == pytest.approx(
                py.dtw(q, c, True, band), rel=1e-12
            )
            w = int(rng.integers(1, 10))
            u1, l1 = py.envelope(q, w)
            u2, l2 = cy.envelope(q, w)
            assert np.allclose(u1, u2) and np.allclose(l1, l2)
            if len(q) == len(c):
                assert cy.lb_keogh_value(c, u2, l2) == pytest.approx(
                    py.lb_keogh_value(c, u1, l1), rel=1e-12
                )


@pytest.fixture(scope="module")
def normal_pair():
    profile = WorkloadProfile("t", base_rate=100.0, num_threads=1,
                              duration_s=4.0, jitter=0.05)
    q = gen_normal(profile, 101)[0]
    c = gen_normal(profile, 202)[0]
    return q, c


class TestExtractFeatures:
    def test_self_comparison(self, normal_pair):
        q, _ = normal_pair
        fv = extract_features(q, q, WindowConfig(5))
        assert fv.gtr == pytest.approx(1.0, abs=1e-6)
        assert fv.ltr == pytest.approx(1.0, abs=1e-6)
        assert fv.ghr == pytest.approx(1.0, abs=1e-6)
        assert fv.lhr == pytest.approx(1.0, abs=1e-6)
        assert fv.dtw == pytest.approx(0.0, abs=1e-6)
        assert fv.lb == pytest.approx(0.0, abs=1e-6)

    def test_normal_vs_normal_is_mild(self, normal_pair):
        q, c = normal_pair
        fv = extract_features(c, q, WindowConfig(5))
        assert 0.9 < fv.gtr < 1.1
        assert 0.9 < fv.ghr < 1.1

    def test_errors_name_the_feature(self):
        a = seq([0, 10, 20])
        b = seq([0])
        with pytest.raises(FeatureError) as err:
            extract_features(a, b, WindowConfig(5))
        assert err.value.feature == "gtr"

    def test_scale_equivariance(self, normal_pair):
        q, c = normal_pair
        fv = extract_features(c, q, WindowConfig(5))
        scaled = HeartbeatSequence(c.thread_id, c.timestamps_ns * 3)
        fv3 = extract_features(scaled, q, WindowConfig(5))
        assert fv3.gtr == pytest.approx(3 * fv.gtr, rel=1e-9)


class TestFeatureVector:
    def test_rejects_non_finite(self):
        with pytest.raises(ValidationError):
            FeatureVector(gtr=1.0, ltr=float("nan"), ghr=1.0, lhr=1.0, dtw=0.0, lb=0.0)

    def test_rejects_nonpositive_ratios(self):
        with pytest.raises(ValidationError):
            FeatureVector(gtr=0.0, ltr=1.0, ghr=1.0, lhr=1.0, dtw=0.0, lb=0.0)

    def test_rejects_negative_distance(self):
        with pytest.raises(ValidationError):
            FeatureVector(gtr=1.0, ltr=1.0, ghr=1.0, lhr=1.0, dtw=-1.0, lb=0.0)


class TestFeatureCsv:
    def test_roundtrip(self, tmp_path):
        from hbdiag.features import read_features_csv, write_features_csv

        entries = [
            ("run_a", 0, FeatureVector(gtr=1.01, ltr=0.99, ghr=1.0,
                                       lhr=-2.5, dtw=12.75, lb=3.125)),
            ("run_a", 1, FeatureVector(gtr=1.3, ltr=1.2, ghr=0.8,
                                       lhr=0.9, dtw=100.0, lb=50.0)),
        ]
        path = tmp_path / "features.csv"
        write_features_csv(entries, path)
        header = path.read_text().splitlines()[0]
        assert header == "run,thread_id,gtr,ltr,ghr,lhr,dtw,lb"
        back = read_features_csv(path)
        assert back == entries

    def test_bad_header_rejected(self, tmp_path):
        from hbdiag.features import read_features_csv

        path = tmp_path / "bad.csv"
        path.write_text("nope\n")
        with pytest.raises(ValidationError):
            read_features_csv(path)
