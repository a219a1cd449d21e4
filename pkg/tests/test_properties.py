"""Randomized invariants of the solvers, models and I/O."""

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from ddfracture.core import TABLE1, nondimensionalize
from ddfracture.harness import DEFAULT_PROGRAM, make_dataset, run_trace
from ddfracture.resistance import (STABLE_BIMATERIAL, UNSTABLE_BIMATERIAL, GriffithModel, RCurveModel,
                                   ResistanceDataSet, dataset_to_csv_text, read_dataset, write_dataset)
from ddfracture.solvers import SolverState, consistency_step, cpp_step, global_step, project_distance
from ddfracture.specimen import MachineCoupling, StandardDCB, energy_release_rate, equilibrium_split
from oracles import argmin_scan, dense_projection, energy, release_rate_closed

P, _ = nondimensionalize(TABLE1)
DCB = StandardDCB(P)
CPL = MachineCoupling.from_params(P)
MODELS = [GriffithModel(), RCurveModel(), STABLE_BIMATERIAL, UNSTABLE_BIMATERIAL]
SETTINGS = settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def instances(draw, min_size=1):
    n = draw(st.integers(min_size, 60))
    a = draw(st.lists(st.floats(0.01, 1.1), min_size=n, max_size=n))
    g = draw(st.lists(st.floats(0.05, 6.0), min_size=n, max_size=n))
    f = draw(st.lists(st.floats(0.0, 0.3), min_size=n, max_size=n))
    a_k = draw(st.floats(0.01, 1.0))
    D = draw(st.floats(0.0, 2e-2))
    G_R_k = draw(st.floats(0.0, 6.0))
    return ResistanceDataSet(a, f, g), a_k, D, G_R_k


@SETTINGS
@given(instances())
def test_irreversibility_and_membership(inst):
    d, a_k, D, G_R_k = inst
    results = []
    if np.any(d.a >= a_k):
        results.append(global_step(SolverState(a_k), D, d, DCB, CPL))
    results.append(cpp_step(SolverState(a_k, G_R_k), D, d, DCB, CPL))
    results.append(consistency_step(SolverState(a_k), D, d, DCB, CPL))
    for r in results:
        assert r.a_next >= a_k
        if r.dissipative:
            assert r.a_next in set(d.a.tolist())
        assert r.Delta + CPL.CMbar * r.P == pytest.approx(D, abs=1e-15)


@SETTINGS
@given(instances())
def test_elastic_step_purity(inst):
    d, a_k, D, _ = inst
    g = energy_release_rate(DCB, CPL, D, a_k)
    state = SolverState(a_k, g + 0.5)
    r1 = cpp_step(state, D, d, DCB, CPL)
    r2 = cpp_step(state, D, ResistanceDataSet([0.5], [0.0], [1.0]), DCB, CPL)
    assert r1 == r2 and not r1.dissipative and r1.a_next == a_k


@SETTINGS
@given(instances())
def test_consistency_never_picks_inadmissible_point(inst):
    d, a_k, D, _ = inst
    r = consistency_step(SolverState(a_k), D, d, DCB, CPL)
    if r.failed or r.a_next == a_k and a_k not in set(d.a.tolist()):
        return
    i = int(np.flatnonzero(d.a == r.a_next)[0])
    assert d.G_R[i] >= energy_release_rate(DCB, CPL, D, r.a_next) or r.a_next == a_k


def _random_instance(rng):
    n = int(rng.integers(1, 80))
    a = rng.uniform(0.0, 1.1, n)
    if rng.random() < 0.2:
        a[: n // 2] = np.round(a[: n // 2], 2)  # provoke repeated abscissae
    f = rng.uniform(0.0, 0.2, n)
    g = rng.uniform(0.1, 5.0, n)
    a_k = float(rng.uniform(0.01, 1.0))
    D = float(rng.uniform(0.0, 1.5e-2))
    return ResistanceDataSet(a, f, g), a_k, D


def test_global_step_matches_exhaustive_scan():
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 1000:
        d, a_k, D = _random_instance(rng)
        mask = d.a >= a_k
        if not mask.any():
            continue
        a = d.a[mask]
        phi = [float(energy(D, x, P.Ybar, P.bbar, P.hbar, P.CMbar)) + float(f) for x, f in zip(a, d.F_R[mask])]
        i = argmin_scan(phi, list(a))
        r = global_step(SolverState(a_k), D, d, DCB, CPL)
        j = int(np.flatnonzero((d.a == r.a_next) & mask)[0])
        phi_r = float(energy(D, r.a_next, P.Ybar, P.bbar, P.hbar, P.CMbar)) + float(d.F_R[j])
        assert r.a_next == a[i] or phi_r == pytest.approx(phi[i], rel=1e-14)
        checked += 1


def test_consistency_step_matches_exhaustive_scan():
    rng = np.random.default_rng(77)
    for _ in range(1000):
        d, a_k, D = _random_instance(rng)
        cand, obj = [], []
        for x, g in zip(d.a, d.G_R):
            if x < a_k or x <= 0.0:
                continue
            gt = float(release_rate_closed(D, x, P.Ybar, P.bbar, P.hbar, P.CMbar))
            if g >= gt:
                cand.append(float(x))
                obj.append(abs((gt - g) * (a_k - x)))
        r = consistency_step(SolverState(a_k), D, d, DCB, CPL)
        if not cand:
            assert r.failed
            continue
        i = argmin_scan(obj, cand)
        if r.a_next != cand[i]:
            k = cand.index(r.a_next)
            assert obj[k] == pytest.approx(obj[i], rel=1e-12, abs=1e-300)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 1.1), st.floats(0.0, 6.0), st.floats(0.02, 1.0), st.floats(0.0, 1.5e-2))
def test_projection_never_worse_than_dense_grid(a_hat, g_hat, a_min, D):
    def g(a):
        return release_rate_closed(D, a, P.Ybar, P.bbar, P.hbar, P.CMbar)

    d_ref, _ = dense_projection((a_hat, g_hat), a_min, 1.1, g)
    d, x = project_distance((a_hat, g_hat), D, a_min, DCB, CPL)
    assert d <= d_ref + 1e-6
    assert a_min <= x <= 1.1


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(MODELS), st.floats(0.01, 1.09))
def test_energy_derivative_is_thickness_times_rate(model, a):
    h = 1e-7
    if any(abs(a - b) < 2 * h for b in getattr(model, "breaks", ())):
        return
    fd = (model.F_R(a + h, P.bbar) - model.F_R(a - h, P.bbar)) / (2 * h)
    assert fd == pytest.approx(P.bbar * model.G_R(a), rel=1e-5)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 1.1), st.floats(0.0, 5e-2))
def test_equilibrium_identity(a, D):
    Delta, Pl = equilibrium_split(DCB, CPL, D, a)
    assert abs(Delta + CPL.CMbar * Pl - D) <= 1e-12


@pytest.mark.parametrize("solver", ["global", "cpp", "consistency"])
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_trace_invariants(solver, seed):
    d = make_dataset(RCurveModel(), 150, 0.025, seed, 0, P.bbar)
    t = run_trace(solver, DEFAULT_PROGRAM, d, DCB, CPL, G_R0_rule="auto")
    members = set(d.a.tolist())
    prev = P.abar0
    for s in t:
        assert s.a >= prev
        if s.dissipative:
            assert s.a in members
        assert abs(s.Delta + CPL.CMbar * s.P - s.DeltaT) <= 1e-12
        prev = s.a


@settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture])
@given(st.lists(st.tuples(st.floats(0.0, 1.1), st.floats(0.0, 1e3), st.floats(-1e3, 1e3)), min_size=1, max_size=30))
def test_dataset_csv_round_trip(tmp_path, rows):
    a, f, g = (list(c) for c in zip(*rows))
    d = ResistanceDataSet(a, f, g, {"N": len(a)})
    path = str(tmp_path / "d.csv")
    write_dataset(d, path)
    back = read_dataset(path)
    assert dataset_to_csv_text(back) == dataset_to_csv_text(d)
    np.testing.assert_array_equal(back.G_R, d.G_R)
