import json
import math

import numpy as np
import pytest

from ktmix.alphabet import Alphabet, DataError, MultiSample, Sequence, diamond_concat
from ktmix.coding import BuiltinCode, CodeMeasure
from ktmix.measures import KTMixture, Krichevsky, Laplace, mixture_log2
from ktmix.prediction import (
    PairSequence,
    cesaro_error_curve,
    cesaro_error_exact,
    kl_divergence,
    online_predict,
    pinsker_check,
    side_info_predict,
    variation_distance,
)
from ktmix.processes import BernoulliSource, MarkovSource

BIN = Alphabet.binary()


def seq(text):
    return Sequence.from_text(text, BIN)


class TestKLDivergence:
    def test_identity_is_zero(self):
        assert kl_divergence([0.5, 0.5], [0.5, 0.5]) == 0.0

    def test_point_mass_against_uniform(self):
        assert kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(1.0)

    def test_closed_form_value(self):
        # 0.75*log2(3/2) + 0.25*log2(1/2) = 0.75*log2(3) - 1
        want = 0.75 * math.log2(3) - 1
        assert want == pytest.approx(0.18872, abs=1e-5)
        assert kl_divergence([0.75, 0.25], [0.5, 0.5]) == pytest.approx(want, rel=1e-12)

    def test_infinite_when_support_not_covered(self):
        assert math.isinf(kl_divergence([0.5, 0.5], [1.0, 0.0]))

    def test_shape_mismatch(self):
        with pytest.raises(DataError):
            kl_divergence([1.0], [0.5, 0.5])


class TestVariationAndPinsker:
    def test_identical(self):
        assert variation_distance([0.3, 0.7], [0.3, 0.7]) == 0.0
        assert pinsker_check([0.3, 0.7], [0.3, 0.7])

    def test_disjoint_support(self):
        assert variation_distance([1.0, 0.0], [0.0, 1.0]) == 2.0

    def test_pinsker_on_many_random_pairs(self):
        rng = np.random.default_rng(0)
        for _ in range(10_000):
            k = int(rng.integers(2, 6))
            p = rng.dirichlet(np.ones(k))
            q = rng.dirichlet(np.ones(k))
            assert pinsker_check(p, q)


class TestOnlinePredict:
    def test_mixture_first_steps(self):
        trace = online_predict(KTMixture(), seq("01"))
        assert tuple(trace.steps[0].dist) == pytest.approx((0.5, 0.5), abs=1e-12)
        want = 2.0 ** (mixture_log2(seq("01")) - mixture_log2(seq("0")))
        assert trace.steps[1].dist[1] == pytest.approx(want, rel=1e-12)
        # numerically: R(01)/R(0) = 0.2038.../0.5
        assert trace.steps[1].dist[1] == pytest.approx(0.40773, abs=1e-4)

    def test_add_half_final_conditional(self):
        trace = online_predict(Krichevsky(0), seq("01010"))
        assert trace.next_dist[0] == 7 / 12
        assert trace.next_dist[1] == 5 / 12

    def test_trace_reconstruction_invariant(self):
        rng = np.random.default_rng(1)
        for predictor in (Laplace(1), Krichevsky(2), KTMixture(), KTMixture(max_order=3)):
            x = Sequence(BIN, rng.integers(0, 2, 60))
            trace = online_predict(predictor, x)
            assert trace.total_log2_loss == pytest.approx(-predictor.log2(x), abs=1e-9)

    def test_priming_matches_boundary_conditional(self):
        priming = MultiSample((seq("0101"),))
        x = seq("101")
        trace = online_predict(KTMixture(), x, priming=priming)
        want = mixture_log2(diamond_concat([seq("0101"), seq("101")])) \
            - mixture_log2(seq("0101"))
        assert trace.total_log2_loss == pytest.approx(-want, abs=1e-12)

    def test_priming_stepwise_matches_quotients(self):
        priming = MultiSample((seq("0101"),))
        trace = online_predict(KTMixture(), seq("10"), priming=priming)
        r_base = mixture_log2(diamond_concat([seq("0101"), seq("1")])) \
            - mixture_log2(seq("0101"))
        assert trace.steps[0].dist[1] == pytest.approx(2.0 ** r_base, rel=1e-12)

    def test_distributions_valid_throughout(self):
        rng = np.random.default_rng(2)
        x = Sequence(BIN, rng.integers(0, 2, 40))
        trace = online_predict(KTMixture(), x)
        for step in trace.steps:
            assert step.dist.sum() == pytest.approx(1.0, abs=1e-12)
            assert (step.dist > 0).all()

    def test_code_backed_predictor_runs(self):
        trace = online_predict(CodeMeasure(BuiltinCode()), seq("0101"))
        assert len(trace.steps) == 4
        assert trace.total_log2_loss > 0

    def test_exports(self):
        trace = online_predict(Krichevsky(0), seq("010"))
        lines = trace.to_jsonl().strip().splitlines()
        assert len(lines) == 3
        rec = json.loads(lines[0])
        assert rec["step"] == 1 and rec["realized"] == "0"
        csv_text = trace.summary_csv()
        assert csv_text.startswith("step,realized,log2_loss,cumulative_log2_loss")
        assert len(csv_text.strip().splitlines()) == 4


class TestSideInformation:
    def test_empty_history_uniform(self):
        hist = PairSequence(BIN, BIN)
        dist = side_info_predict(KTMixture(), hist, y=0)
        assert dist == pytest.approx([0.5, 0.5], abs=1e-12)

    def test_degenerate_x(self):
        xa = Alphabet(("only",))
        hist = PairSequence(xa, BIN, ((0, 0), (0, 1)))
        assert tuple(side_info_predict(KTMixture(), hist, y=1)) == (1.0,)

    def test_matches_brute_force_ratio_exhaustive(self):
        # all 2x2 histories of length <= 3, every y: compare against direct
        # evaluation of joint extensions
        import itertools

        mix = KTMixture()
        for t in range(4):
            for pairs in itertools.product(itertools.product((0, 1), repeat=2), repeat=t):
                hist = PairSequence(BIN, BIN, tuple(pairs))
                joint = hist.joint_sequence()
                for y in (0, 1):
                    got = side_info_predict(mix, hist, y)
                    want = np.array([
                        2.0 ** mixture_log2(joint.append(hist.joint_index(ix, y)))
                        for ix in (0, 1)
                    ])
                    want = want / want.sum()
                    assert got == pytest.approx(want, abs=1e-12)

    def test_bad_y_rejected(self):
        hist = PairSequence(BIN, BIN)
        with pytest.raises(DataError):
            side_info_predict(KTMixture(), hist, y=5)

    def test_uninformative_side_channel_converges_to_plain_predictor(self):
        # y independent of x: the side-information estimate over X should
        # approach the X-only predictor's output as the history grows.
        mix = KTMixture(max_order=6)
        hist0 = PairSequence(BIN, BIN)
        product = hist0.product_alphabet()
        joint_scorer = mix.scorer(product)
        x_scorer = mix.scorer(BIN)
        rng = np.random.default_rng(7)
        gaps = []
        for step in range(10_000):
            y = int(rng.integers(0, 2))
            x = int(rng.integers(0, 2))
            if step >= 9_900:
                dj = joint_scorer.cond_dist()
                picks = np.array([dj[ix * 2 + y] for ix in (0, 1)])
                side = picks / picks.sum()
                gaps.append(np.abs(side - x_scorer.cond_dist()).sum())
            joint_scorer.push(x * 2 + y)
            x_scorer.push(x)
        assert float(np.mean(gaps)) < 0.05


class TestCesaro:
    def test_true_source_as_predictor_gives_zero(self):
        src = BernoulliSource(0.5)

        class Truth:
            def log2(self, x):
                return src.log2_prob(x)

        pts = cesaro_error_curve(src, Truth(), [10, 50], runs=20, seed=3)
        for p in pts:
            assert p.mean == pytest.approx(0.0, abs=1e-12)

    def test_monte_carlo_matches_exhaustive_oracle(self):
        src = BernoulliSource(0.3)
        predictor = Krichevsky(0)
        exact = cesaro_error_exact(src, predictor, 8, BIN)
        pts = cesaro_error_curve(src, predictor, [8], runs=4000, seed=4)
        assert pts[0].mean == pytest.approx(exact, abs=4 * pts[0].stderr)

    def test_add_half_bound_smoke(self):
        src = BernoulliSource(0.5)
        pts = cesaro_error_curve(src, Krichevsky(0), [100], runs=100, seed=5)
        assert pts[0].mean <= (math.log2(100) + 4) / (2 * 100)

    def test_mixture_error_decreases_on_markov_chain(self):
        src = MarkovSource(((0.85, 0.15), (0.3, 0.7)))
        pts = cesaro_error_curve(src, KTMixture(max_order=4), [100, 2000],
                                 runs=30, seed=6)
        assert pts[1].mean < pts[0].mean

    def test_bad_checkpoints(self):
        with pytest.raises(DataError):
            cesaro_error_curve(BernoulliSource(0.5), Krichevsky(0), [0], runs=1)


class TestInfiniteLossTracking:
    def test_zero_assigning_predictor_reports_inf(self):
        class Spiky:
            def scorer(self, alphabet, priming=None, continue_last=False):
                class Sc:
                    log2_total = 0.0

                    def cond_dist(self):
                        return np.array([1.0, 0.0])

                    def push(self, a):
                        d = self.cond_dist()[a]
                        return math.log2(d) if d > 0 else -math.inf

                return Sc()

        trace = online_predict(Spiky(), seq("01"))
        assert math.isinf(trace.total_log2_loss)
        assert math.isinf(kl_divergence([0.0, 1.0], [1.0, 0.0]))
