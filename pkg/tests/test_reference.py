import numpy as np
import pytest

from ddfracture.core import InvalidParameterError
from ddfracture.harness import DEFAULT_PROGRAM, run_trace
from ddfracture.reference import (ReferenceConfig, reduced_functional, reference_global_step,
                                  reference_local_step)
from ddfracture.resistance import STABLE_BIMATERIAL, GriffithModel, RCurveModel
from ddfracture.specimen import energy_release_rate
from oracles import argmin_scan, energy

G = GriffithModel()


def test_config_validation():
    with pytest.raises(InvalidParameterError):
        ReferenceConfig(grid_size=1)
    with pytest.raises(InvalidParameterError):
        ReferenceConfig(root_tol=0.0)
    with pytest.raises(InvalidParameterError):
        ReferenceConfig(jump_rule="farthest")
    g = ReferenceConfig().grid()
    assert g.size == 1000 and g[0] == 0.0 and g[-1] == 1.0


def test_global_unloaded_stays(dcb, coupling):
    for a_k in (0.1, 0.2345, 0.6):
        assert reference_global_step(a_k, 0.0, G, dcb, coupling) == a_k


def test_global_matches_duplicate_scan(table1, dcb, coupling, rng):
    p = table1[0]
    grid = np.linspace(0.0, 1.0, 1000)
    for _ in range(50):
        a_k = float(rng.uniform(0.05, 0.9))
        D = float(rng.uniform(0.0, 1.2e-2))
        cand = [a_k] + [float(x) for x in grid if x >= a_k]
        phi = [float(energy(D, a, p.Ybar, p.bbar, p.hbar, p.CMbar)) + p.bbar * a for a in cand]
        assert reference_global_step(a_k, D, G, dcb, coupling) == cand[argmin_scan(phi, cand)]


def test_reduced_functional(table1, dcb, coupling):
    p = table1[0]
    a = np.linspace(0, 1, 7)
    np.testing.assert_allclose(reduced_functional(G, dcb, coupling, 2e-3, a),
                               energy(2e-3, a, p.Ybar, p.bbar, p.hbar, p.CMbar) + p.bbar * a, rtol=1e-13)


def test_local_arrest_below_threshold(dcb, coupling):
    assert reference_local_step(0.1, 1e-3, G, dcb, coupling) == 0.1
    assert reference_local_step(0.3, 0.0, G, dcb, coupling) == 0.3


def test_local_steady_growth_satisfies_griffith(dcb, coupling):
    a_k, D = 0.5, 8e-3
    assert energy_release_rate(dcb, coupling, D, a_k) > 1.0
    a = reference_local_step(a_k, D, G, dcb, coupling)
    assert a > a_k
    assert abs(energy_release_rate(dcb, coupling, D, a) - 1.0) <= 1e-8


def _phi(model, dcb, coupling, D, a):
    return float(reduced_functional(model, dcb, coupling, D, a))


def test_local_jump_lands_on_local_minimum(dcb, coupling):
    # the first load step past the critical value makes the crack jump
    t = run_trace("ref-local", DEFAULT_PROGRAM, G, dcb, coupling)
    i = next(i for i, s in enumerate(t) if s.a > 0.1)
    s = t[i]
    assert s.a - 0.1 > 0.2
    assert energy_release_rate(dcb, coupling, s.DeltaT, s.a) <= 1.0 + 1e-8
    for da in (-1e-3, 1e-3):
        assert _phi(G, dcb, coupling, s.DeltaT, s.a) <= _phi(G, dcb, coupling, s.DeltaT, s.a + da)


def test_kt_residual_along_trace(dcb, coupling):
    t = run_trace("ref-local", DEFAULT_PROGRAM, RCurveModel(), dcb, coupling)
    prev = dcb.abar0
    m = RCurveModel()
    for s in t:
        if s.failed:
            break
        r = energy_release_rate(dcb, coupling, s.DeltaT, s.a) - m.G_R(s.a)
        if s.a == prev:
            assert r <= 1e-8
        else:
            assert abs(r) <= 1e-8 or r <= 1e-8
        prev = s.a


def test_global_trace_dominates_local(dcb, coupling):
    tg = run_trace("ref-global", DEFAULT_PROGRAM, G, dcb, coupling)
    tl = run_trace("ref-local", DEFAULT_PROGRAM, G, dcb, coupling)
    n = min(len(tg), len(tl))
    # grid resolution of the global search is 1/999
    assert all(g.a >= l.a - 1.0 / 999 for g, l in zip(tg.steps[:n], tl.steps[:n]))
    assert sum(g.a > l.a for g, l in zip(tg.steps[:n], tl.steps[:n])) >= 10


def test_local_bimaterial_interface_arrest(dcb, coupling):
    from ddfracture.harness import LoadProgram
    t = run_trace("ref-local", LoadProgram.ramp(400, 5e-5), STABLE_BIMATERIAL, dcb, coupling)
    at = [s for s in t if s.a == 0.5]
    assert len(at) >= 10


def test_local_reports_end_of_specimen(dcb, coupling):
    assert reference_local_step(0.9, 0.1, G, dcb, coupling) == 1.0
