import json
import math

import numpy as np
import pytest

import conic_palm as cp


def test_registry_lists_benchmarks():
    names = cp.registry_names()
    assert names[0] == "nlp-degenerate"
    assert len(names) == 5
    with pytest.raises(cp.UnknownProblemError):
        cp.registry_get("foo")


def test_cone_projection():
    soc = cp.ConeSpec([cp.PrimitiveCone(cp.ConeKind.SOC, 2)])
    np.testing.assert_allclose(cp.project(soc, np.array([0.0, 2.0])), [1.0, 1.0])
    assert cp.dist_sq(soc, np.array([0.0, 2.0])) == pytest.approx(2.0)
    with pytest.raises(cp.InputError):
        cp.project(soc, np.zeros(3))


def test_residual_and_lagrangian():
    p1 = cp.registry_get("nlp-degenerate")
    assert cp.kkt_residual(p1, np.zeros(2), np.array([0.5, 0.5])) == 0.0
    r = cp.kkt_residual(p1, np.array([0.1, 0.2]), np.array([0.5, 0.5]))
    assert r == pytest.approx(0.4 + 0.1 * math.sqrt(2.0))
    ev = cp.aug_lagrangian(p1, np.zeros(2), np.array([0.5, 0.5]), 10.0)
    assert ev.value == pytest.approx(0.0)


def test_subproblem_scalar_solution():
    toy = cp.parse_problem(json.dumps({
        "n": 1,
        "f": {"Q": [[1]], "q": [0], "r0": 0},
        "constraints": [{"map": {"A": [[1]], "b": [0]}, "cone": {"kind": "zero", "dim": 1}}],
    }))
    res = cp.solve_subproblem(toy, np.array([1.0]), 1.0, np.zeros(1), 1e-10)
    assert res.status == "converged"
    assert res.x[0] == pytest.approx(-1.0 / 3.0, abs=1e-9)


def test_palm_run_converges_into_multiplier_set():
    p1 = cp.registry_get("nlp-degenerate")
    trace = cp.run_palm(p1, np.array([0.1, 0.1]), np.array([0.3, 0.3]), schedule="constant", c=10.0)
    assert trace.status == "converged"
    last = trace.records[-1]
    assert last.r <= 1e-10
    assert last.dist_dual <= 1e-7
    rates = cp.estimate_rates(trace)
    assert rates["q_max_tail"] < 1.0
    assert trace.to_csv().splitlines()[0].startswith("k,c,eps,r,step_norm")


def test_unbounded_schedule_is_superlinear():
    p2 = cp.registry_get("eq-quadratic")
    trace = cp.run_palm(p2, p2.default_x0, p2.default_lam0, schedule="unbounded", rho=4.0)
    assert cp.estimate_rates(trace)["superlinear_flag"]


def test_property_checks():
    p1 = cp.registry_get("nlp-degenerate")
    assert cp.check_error_bound(p1, samples=100)["passed"]
    assert cp.check_quadratic_growth(p1, [10.0, 100.0], samples=100)["violations"] == 0


def test_problem_round_trip():
    p3 = cp.registry_get("soc-degenerate")
    back = cp.parse_problem(json.dumps(p3.to_dict()))
    x = np.array([0.3, -0.7])
    assert back.f(x) == pytest.approx(p3.f(x), abs=1e-12)
    np.testing.assert_allclose(back.g(x), p3.g(x), atol=1e-12)


def test_cli_entry_point():
    code, out, _ = cp.run_cli(["solve", "--problem", "nlp-degenerate", "--x0", "0,0", "--lam0", "0.5,0.5"])
    assert code == 0
    assert out.splitlines()[0] == "k,c,eps,r,step_norm,accepted,inner_iters,dist_primal,dist_dual,dist_pd"
    assert cp.run_cli(["solve", "--problem", "nosuch"])[0] == 1
