import numpy as np
import pytest

from coupledfp.contraction import ConditionSpec, CoupledMap, certify, constant_map, example_map, first_argument_map, linear_map
from coupledfp.control import identity, linear
from coupledfp.order import Metric, OrderedVector, PairPoint, d2, distance, pair_leq
from coupledfp.solver import (
    CoupledFixedPoint,
    DivergenceError,
    InitialCondition,
    InvalidStartError,
    NonConvergenceError,
    NonFiniteIterateError,
    SolverConfig,
    StopReason,
    apply_T,
    classify_initial,
    diagonal_check,
    solve,
    uniqueness_probe,
)

F1 = example_map()


def test_apply_T():
    Z = apply_T(F1, ((-2.0,), (3.0,)))
    assert Z.first.tolist() == [-2.0] and Z.second.tolist() == [1.75]
    assert apply_T(constant_map(4.0), ([1.0], [9.0])) == PairPoint([4.0], [4.0])
    assert apply_T(F1, ([0.0], [0.0])) == PairPoint([0.0], [0.0])


def test_apply_T_nonfinite():
    F = CoupledMap(lambda x, y: x / y, 1)
    with np.errstate(divide="ignore"):
        with pytest.raises(NonFiniteIterateError):
            apply_T(F, ([1.0], [0.0]))


@pytest.mark.parametrize(
    "x0, y0, expected",
    [(-2, 3, InitialCondition.MIC), (3, -2, InitialCondition.MARE), (1, 0, InitialCondition.NEITHER), (0, 0, InitialCondition.MIC)],
)
def test_classify_initial(x0, y0, expected):
    assert classify_initial(F1, x0, y0) is expected


class TestSolve:
    def test_example(self):
        fp, tr = solve(F1, -2.0, 3.0, SolverConfig(tolerance=1e-8))
        assert tr.stop_reason is StopReason.CONVERGED
        assert tr.iterations <= 200
        assert abs(fp.x.values[0]) < 1e-7 and abs(fp.y.values[0]) < 1e-7
        assert fp.diagonal
        assert tr.initial_condition is InitialCondition.MIC

    def test_constant(self):
        fp, tr = solve(constant_map(2.5), 0.0, 5.0)
        assert tr.iterations <= 2
        assert fp.point == PairPoint([2.5], [2.5])

    def test_ignoring_second_argument(self):
        F = CoupledMap(lambda x, y: x / 2, 1)
        assert classify_initial(F, 0.0, 1.0) is InitialCondition.MIC
        fp, tr = solve(F, 0.0, 1.0)
        # x stays 0, y halves each step
        assert fp.x.tolist() == [0.0] and fp.y.values[0] <= 1e-9
        assert [Z.second.values[0] for Z in tr.points[:4]] == [1.0, 0.5, 0.25, 0.125]

    def test_invalid_start(self):
        with pytest.raises(InvalidStartError):
            solve(F1, 1.0, 0.0)

    def test_max_iterations(self):
        with pytest.raises(NonConvergenceError) as info:
            solve(F1, -2.0, 3.0, SolverConfig(max_iterations=5))
        assert info.value.trace.stop_reason is StopReason.MAX_ITERATIONS
        assert info.value.trace.iterations == 5

    def test_divergence(self):
        F = CoupledMap(lambda x, y: 3 * x - 2 * y, 1)
        with pytest.raises(DivergenceError):
            solve(F, -1.0, 1.0)

    def test_strict_monotone_stops_on_violation(self):
        # F = 1.1 x - 0.1 is mixed monotone but expanding: steps grow from n = 2
        F = CoupledMap(lambda x, y: 1.1 * x - 0.1, 1)
        assert classify_initial(F, 2.0, 0.0) is InitialCondition.MIC
        with pytest.raises(NonConvergenceError) as info:
            solve(F, 2.0, 0.0, SolverConfig(strict_monotone=True))
        tr = info.value.trace
        assert tr.stop_reason is StopReason.INVARIANT_VIOLATION
        assert tr.iterations == 2 and tr.monotone_chain_ok and not tr.delta_nonincreasing_ok

    def test_lenient_mode_records_violation(self):
        F = CoupledMap(lambda x, y: 1.1 * x - 0.1, 1)
        with pytest.raises(NonConvergenceError) as info:
            solve(F, 2.0, 0.0, SolverConfig(max_iterations=20))
        tr = info.value.trace
        assert tr.stop_reason is StopReason.MAX_ITERATIONS and not tr.delta_nonincreasing_ok

    def test_trace_deltas_recompute(self):
        _, tr = solve(F1, -2.0, 3.0)
        assert len(tr.deltas) == len(tr.points) - 1
        for i, delta in enumerate(tr.deltas):
            assert abs(d2(Metric.SUP_NORM, tr.points[i + 1], tr.points[i]) - delta) <= 1e-12

    def test_converged_invariants(self):
        cfg = SolverConfig()
        fp, tr = solve(F1, -10.0, 10.0, cfg)
        assert tr.deltas[-1] <= cfg.tolerance
        assert fp.residual <= cfg.tolerance
        x, y = fp.x, fp.y
        assert distance(cfg.metric, x, F1(x, y)) <= 2 * cfg.tolerance
        assert distance(cfg.metric, y, F1(y, x)) <= 2 * cfg.tolerance

    def test_mic_chain_non_decreasing(self):
        _, tr = solve(F1, -2.0, 3.0)
        assert tr.monotone_chain_ok and tr.delta_nonincreasing_ok
        for a, b in zip(tr.points, tr.points[1:]):
            assert pair_leq(a, b)

    def test_mare_chain_non_increasing(self):
        fp, tr = solve(F1, 3.0, -2.0)
        assert tr.initial_condition is InitialCondition.MARE
        assert tr.monotone_chain_ok and tr.delta_nonincreasing_ok
        for a, b in zip(tr.points, tr.points[1:]):
            assert pair_leq(b, a)

    def test_swap_symmetry(self):
        cfg = SolverConfig()
        fp, _ = solve(F1, -2.0, 3.0, cfg)
        fs, _ = solve(F1, 3.0, -2.0, cfg)
        assert abs(fs.x.values[0] - fp.y.values[0]) <= cfg.tolerance
        assert abs(fs.y.values[0] - fp.x.values[0]) <= cfg.tolerance

    def test_vector_map(self):
        F = linear_map(0.4, 0.3, dimension=5)
        x0 = -np.arange(1.0, 6.0)
        fp, tr = solve(F, x0, -x0)
        assert np.max(np.abs(fp.x.values)) < 1e-8
        assert tr.monotone_chain_ok

    def test_certified_berinde_gives_nonincreasing_deltas(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            a, b = rng.uniform(0, 0.45, size=2)
            F = linear_map(a, b)
            spec = ConditionSpec.berinde(identity(), linear((1 - a - b) / 2))
            if certify(spec, F, 2000, 0).certified:
                _, tr = solve(F, -3.0, 3.0)
                assert tr.delta_nonincreasing_ok

    def test_csv(self):
        _, tr = solve(F1, -2.0, 3.0)
        text = tr.to_csv()
        lines = text.splitlines()
        assert lines[0] == "n,x0,y0,delta_n,chain_ok"
        assert lines[1] == "0,-2.0,3.0,,"
        assert lines[2] == f"1,-2.0,1.75,{tr.deltas[0]!r},true"
        assert len(lines) == tr.iterations + 2
        assert text == solve(F1, -2.0, 3.0)[1].to_csv()


class TestDiagonal:
    def test_comparable_start(self):
        cfg = SolverConfig()
        fp, tr = solve(F1, -2.0, 3.0, cfg)
        check = diagonal_check(fp, tr, cfg)
        assert check.ok and check.applicable

    def test_incomparable_start_vacuous(self):
        F = first_argument_map(2)
        fp, tr = solve(F, [0.0, 5.0], [3.0, 1.0])
        check = diagonal_check(fp, tr)
        assert check.ok and not check.applicable

    def test_violation_flagged(self):
        fp, tr = solve(first_argument_map(), 0.0, 1.0)  # comparable, never diagonal
        check = diagonal_check(fp, tr)
        assert not check.ok and check.applicable
        assert "fails" in check.message


class TestUniqueness:
    def test_example_two_runs(self):
        cfg = SolverConfig()
        fps = [solve(F1, -2.0, 3.0, cfg)[0], solve(F1, -10.0, 10.0, cfg)[0]]
        rep = uniqueness_probe(F1, fps, cfg)
        assert rep.status == "corroborated" and rep.corroborated
        assert len(rep.pairs) == 1 and rep.pairs[0].agree

    def test_single_fixed_point(self):
        fp, _ = solve(F1, -2.0, 3.0)
        rep = uniqueness_probe(F1, [fp])
        assert rep.status == "trivial" and rep.corroborated

    def test_alternate_starts(self):
        fp, _ = solve(F1, -2.0, 3.0)
        rep = uniqueness_probe(F1, [fp], starts=[(-5.0, 5.0), (3.0, -2.0)])
        assert rep.status == "corroborated" and len(rep.fixed_points) == 3

    def test_first_argument_map_coexisting(self):
        F = first_argument_map()
        fps = [solve(F, 0.0, 1.0)[0], solve(F, 2.0, 5.0)[0]]
        assert fps[0].point != fps[1].point
        rep = uniqueness_probe(F, fps)
        assert rep.status == "coexisting" and not rep.corroborated
        bound = rep.pairs[0].bound
        assert pair_leq(fps[0].point, bound) and pair_leq(fps[1].point, bound)
