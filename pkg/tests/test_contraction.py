import json

import numpy as np
import pytest

from coupledfp.contraction import (
    ConditionKind,
    ConditionSpec,
    CoupledMap,
    IncomparableTupleError,
    TupleKind,
    TupleSampler,
    Verdict,
    certify,
    check_mixed_monotone,
    constant_map,
    evaluate_condition,
    example_map,
    linear_map,
    parse_map,
    replay,
    tuple_kind,
)
from coupledfp.control import identity, linear, psi_bhaskar, psi_remark
from coupledfp.order import Metric

from oracles import brute_force_example_rhs_gap

F1 = example_map()
PHI = identity()
PSI = linear(0.25)


class TestMixedMonotone:
    def test_example(self):
        assert check_mixed_monotone(F1).verdict is Verdict.CERTIFIED

    def test_product_on_positive_scalars(self):
        F = CoupledMap(lambda x, y: x * y, 1, "xy")
        rep = check_mixed_monotone(F, TupleSampler(1, low=0.1, high=10.0), budget=100)
        assert rep.verdict is Verdict.FALSIFIED
        w = rep.witness
        assert w.x == w.u and w.y[0] < w.v[0]  # failure is in the second argument
        assert w.lhs > w.rhs

    def test_constant(self):
        assert check_mixed_monotone(constant_map(3.0)).certified

    def test_nonfinite_output_falsifies(self):
        F = CoupledMap(lambda x, y: np.log(x), 1)
        with np.errstate(invalid="ignore"):
            rep = check_mixed_monotone(F, budget=50)
        assert rep.verdict is Verdict.FALSIFIED

    def test_vector_map(self):
        assert check_mixed_monotone(linear_map(0.3, 0.2, dimension=4), budget=2000).certified


class TestEvaluateCondition:
    def test_berinde_equality_at_example_tuple(self):
        # F(1,0) = 0.25, F(0,1) = -0.5; both distances 0.75
        lhs, rhs = evaluate_condition(ConditionSpec.berinde(PHI, PSI), F1, 1, 0, 0, 1)
        assert lhs == pytest.approx(0.75, abs=1e-15)
        assert rhs == pytest.approx(0.75, abs=1e-15)

    def test_luong_violated(self):
        lhs, rhs = evaluate_condition(ConditionSpec.luong(PHI, PSI), F1, 0, 0, 0, 1)
        assert (lhs, rhs) == (0.5, 0.25)

    def test_bhaskar_violated(self):
        lhs, rhs = evaluate_condition(ConditionSpec.bhaskar(0.9), F1, 0, 0, 0, 1)
        assert lhs == 0.5 and rhs == pytest.approx(0.45)

    def test_berinde_cor(self):
        # D = 0.75 + 0.75; s = 2; rhs = 2 - 2 * (1/4) = 1.5
        lhs, rhs = evaluate_condition(ConditionSpec.berinde_cor(PSI), F1, 1, 0, 0, 1)
        assert lhs == pytest.approx(1.5) and rhs == pytest.approx(1.5)

    def test_incomparable_tuple_rejected(self):
        with pytest.raises(IncomparableTupleError):
            evaluate_condition(ConditionSpec.bhaskar(0.5), F1, 0, 0, 1, 1)  # x < u
        with pytest.raises(IncomparableTupleError):
            evaluate_condition(ConditionSpec.bhaskar(0.5), F1, 1, 1, 0, 0)  # y > v

    def test_berinde_matches_hand_algebra(self):
        spec = ConditionSpec.berinde(PHI, PSI)
        for idx, x, y, u, v in TupleSampler(1).stream(2000, seed=3):
            lhs, rhs = evaluate_condition(spec, F1, x, y, u, v)
            gap = brute_force_example_rhs_gap(x[0], y[0], u[0], v[0])
            assert rhs - lhs == pytest.approx(gap, abs=1e-12)


@pytest.mark.parametrize("k", [-0.1, 1.0, None])
def test_bhaskar_k_range(k):
    with pytest.raises(ValueError):
        ConditionSpec.bhaskar(k)


def test_spec_needs_psi():
    with pytest.raises(ValueError):
        ConditionSpec(ConditionKind.LUONG, phi=PHI)


class TestSampler:
    def test_comparable_and_deterministic(self):
        s = TupleSampler(3)
        a = list(s.stream(500, 7))
        b = list(s.stream(500, 7))
        for (i, x, y, u, v), (_, x2, y2, u2, v2) in zip(a, b):
            assert np.all(x >= u) and np.all(y <= v)
            assert np.array_equal(x, x2) and np.array_equal(v, v2)

    def test_mix(self):
        kinds = [tuple_kind(i) for i in range(800)]
        boundary = sum(k in (TupleKind.X_EQUALS_U, TupleKind.Y_EQUALS_V) for k in kinds)
        assert boundary == 200
        assert kinds[0] is TupleKind.X_EQUALS_U
        for i, x, y, u, v in TupleSampler(2).stream(16, 0):
            if tuple_kind(i) is TupleKind.X_EQUALS_U:
                assert np.array_equal(x, u)
            if tuple_kind(i) is TupleKind.Y_EQUALS_V:
                assert np.array_equal(y, v)

    def test_chunking_does_not_change_stream(self):
        a = [t[1] for t in TupleSampler(2, chunk=1024).stream(100, 5)]
        b = [t[1] for t in TupleSampler(2, chunk=1024).stream(100, 5)]
        assert all(np.array_equal(p, q) for p, q in zip(a, b))


class TestCertify:
    def test_berinde_certified(self):
        rep = certify(ConditionSpec.berinde(PHI, PSI), F1, 10_000, 42)
        assert rep.verdict is Verdict.CERTIFIED and rep.tuples_tested == 10_000 and rep.witness is None

    def test_luong_falsified_on_x_equals_u(self):
        rep = certify(ConditionSpec.luong(PHI, PSI), F1, 10_000, 42)
        assert rep.verdict is Verdict.FALSIFIED
        assert rep.witness.x == rep.witness.u

    @pytest.mark.parametrize("k", [0.0, 0.5, 0.99])
    def test_bhaskar_falsified(self, k):
        rep = certify(ConditionSpec.bhaskar(k), F1, 10_000, 42)
        assert rep.verdict is Verdict.FALSIFIED

    def test_witness_replays(self):
        for spec in (ConditionSpec.luong(PHI, PSI), ConditionSpec.bhaskar(0.7)):
            rep = certify(spec, F1, 1000, 1)
            lhs, rhs = replay(rep, F1)
            assert lhs > rhs + 1e-12
            assert (lhs, rhs) == (rep.witness.lhs, rep.witness.rhs)

    def test_deterministic(self):
        spec = ConditionSpec.bhaskar(0.3)
        F = linear_map(0.1, 0.1, 2)
        a = certify(spec, F, 3000, 11)
        b = certify(spec, F, 3000, 11)
        assert a.to_json() == b.to_json()

    def test_budget_validation(self):
        with pytest.raises(ValueError):
            certify(ConditionSpec.bhaskar(0.5), F1, 0)

    def test_witness_record(self):
        rep = certify(ConditionSpec.luong(PHI, PSI), F1, 100, 42)
        rec = json.loads(rep.to_json())
        assert rec["condition"] == "luong(phi=identity, psi=linear:0.25)"
        assert rec["seed"] == 42 and rec["verdict"] == "falsified"
        assert {"x", "y", "u", "v", "lhs", "rhs"} <= rec.keys()

    def test_linear_map_certifies_bhaskar(self):
        # |F(x,y) - F(u,v)| = 0.2 (p + q) <= 0.4 (p + q)
        F = linear_map(0.2, 0.2, 3)
        assert certify(ConditionSpec.bhaskar(0.8), F, 3000, 0).certified


class TestReductions:
    @pytest.mark.parametrize("k", [0.0, 0.3, 0.9])
    def test_luong_reduces_to_bhaskar(self, k):
        luong = ConditionSpec.luong(PHI, psi_bhaskar(k))
        bhaskar = ConditionSpec.bhaskar(k)
        for _, x, y, u, v in TupleSampler(1).stream(2000, 9):
            l1, r1 = evaluate_condition(luong, F1, x, y, u, v)
            l2, r2 = evaluate_condition(bhaskar, F1, x, y, u, v)
            assert l1 == l2 and abs(r1 - r2) <= 1e-12

    @pytest.mark.parametrize("k", [0.2, 0.6])
    def test_bhaskar_implies_corollary_form(self, k):
        # (1) at (x,y,u,v) and at the mirrored tuple (v,u,y,x) bound both summands by k s / 2
        maps = [linear_map(k / 4, k / 4), linear_map(k / 2, 0.0), F1, CoupledMap(lambda x, y: k / 2 * np.tanh(x - y), 1)]
        bh = ConditionSpec.bhaskar(k)
        cor = ConditionSpec.berinde_cor(psi_bhaskar(k))
        for F in maps:
            for _, x, y, u, v in TupleSampler(1).stream(2000, 4):
                holds = all(
                    (lambda lr: lr[0] <= lr[1] + 1e-12)(evaluate_condition(bh, F, *t)) for t in ((x, y, u, v), (v, u, y, x))
                )
                if holds:
                    lhs, rhs = evaluate_condition(cor, F, x, y, u, v)
                    assert rhs - lhs >= -1e-12

    def test_remark_scaling_is_not_implied(self):
        # F = k/2 (x - y) meets (1) with equality, but the summed condition with
        # psi(t) = (1 - k/2) t would need D <= k s / 2 while D = k s.
        k = 0.5
        F = linear_map(k / 2, k / 2)
        assert certify(ConditionSpec.bhaskar(k), F, 2000, 0).certified
        assert not certify(ConditionSpec.berinde_cor(psi_remark(k)), F, 2000, 0).certified
        assert certify(ConditionSpec.berinde_cor(psi_bhaskar(k)), F, 2000, 0).certified


@pytest.mark.parametrize(
    "name, x, y, expected",
    [("example1", 1.0, 0.0, 0.25), ("linear:0.5,0.25", 2.0, 4.0, 0.0), ("constant:3", 9.0, 9.0, 3.0), ("first", 7.0, 1.0, 7.0)],
)
def test_parse_map(name, x, y, expected):
    assert parse_map(name)(x, y).tolist() == [expected]


@pytest.mark.parametrize("bad, exc", [("nope", KeyError), ("linear:1", ValueError), ("constant:a", ValueError)])
def test_parse_map_errors(bad, exc):
    with pytest.raises(exc):
        parse_map(bad)


def test_metric_choice_matters_for_vectors():
    F = linear_map(0.3, 0.1, 2)
    for m in (Metric.SUP_NORM, Metric.EUCLIDEAN):
        spec = ConditionSpec.berinde(PHI, linear(0.1), m)
        assert certify(spec, F, 2000, 0).certified
