import dataclasses
import math

import numpy as np
import pytest

from molcool import constants as C
from molcool.estimates import (PhysicalInputs, deceleration_estimates, deceleration_time,
                               drift_argmax, drift_distance, estimate_report, jmax, round_sig1,
                               rovib_populations, selection_estimates)

BASE = PhysicalInputs()


@pytest.mark.parametrize("n", [1, 7, 100, 10_000])
def test_deceleration_time_closed_form_equals_sum(n):
    tau2 = 1e-8
    explicit = math.fsum(k * tau2 for k in range(1, n + 1))
    assert deceleration_time(n, tau2) == pytest.approx(explicit, rel=1e-14)


def test_deceleration_time_default_exact():
    assert deceleration_time(1000, 1e-8) == pytest.approx(5.005e-3, rel=1e-14)


@pytest.mark.parametrize("x,expected", [(969.5, 1000), (1, 1), (14, 10), (151, 200), (0, 0)])
def test_round_sig1(x, expected):
    assert round_sig1(x) == expected


def test_rovib_ratio_j1_over_j0():
    pops = rovib_populations(BASE, n_levels=1, j_levels=5)[0]
    x = C.HC_CM * BASE.rot_const_cm / (C.K_B * BASE.t_initial)
    assert pops[1] / pops[0] == pytest.approx(3 * math.exp(-2 * x), rel=1e-10)
    assert pops[1] / pops[0] == pytest.approx(2.2498350741845936, rel=1e-9)


def test_jmax_and_most_populated_level():
    jm = jmax(BASE)
    assert jm.value == pytest.approx(1.3641818587333794, rel=1e-9)
    pops = rovib_populations(BASE, n_levels=1, j_levels=20)[0]
    assert jm.candidates == (1, 2)
    assert int(np.argmax(pops)) in jm.candidates


def test_vibrational_levels_frozen_out():
    pops = rovib_populations(BASE)
    assert pops[0].sum() > 0.999


def test_selection_scaling_laws():
    a = selection_estimates(BASE)
    heavy = selection_estimates(dataclasses.replace(BASE, mass_amu=400.0))
    assert heavy.tau1 / a.tau1 == pytest.approx(4.0, rel=1e-12)
    assert heavy.t_vs / a.t_vs == pytest.approx(0.25, rel=1e-12)
    assert heavy.p_max_hk / a.p_max_hk == pytest.approx(2.0, rel=1e-12)
    far = selection_estimates(dataclasses.replace(BASE, detuning=-2e9))
    assert far.rabi0 / a.rabi0 == pytest.approx(2.0, rel=1e-12)
    # at dp = 2 hbar k the pulse length is 15/(4 omega_r)
    assert a.tau1 == pytest.approx(15 / (4 * a.omega_r), rel=1e-12)


def test_selection_counts():
    s = selection_estimates(BASE)
    assert s.n_max_nearest == 969 and s.n_max_sig1 == 1000
    assert s.t1 == pytest.approx(1000 * s.tau1)
    assert selection_estimates(BASE, 969).t1 == pytest.approx(969 * s.tau1)


def test_positive_detuning_rejected():
    with pytest.raises(ValueError, match="detuning"):
        selection_estimates(dataclasses.replace(BASE, detuning=5e8))


def test_inputs_validation():
    with pytest.raises(ValueError, match="mass_amu"):
        PhysicalInputs(mass_amu=-1.0)
    with pytest.raises(ValueError, match="epsilon"):
        PhysicalInputs(epsilon=1.5)


def test_compound_efficiency_and_adiabaticity():
    d = deceleration_estimates(BASE, 1000)
    assert d.eps_n == pytest.approx(0.9995 ** 1000, rel=1e-12)
    assert d.adiabaticity == pytest.approx(50.0)
    assert d.adiabatic


def test_drift_endpoints_and_argmax_oracle():
    n = 1000
    assert drift_distance(n, BASE, n) == 0.0
    with pytest.raises(ValueError):
        drift_distance(0, BASE, n)
    # exhaustive scalar scan as the oracle for the vectorized argmax
    vals = [drift_distance(k, BASE, n) for k in range(1, n + 1)]
    best = max(range(n), key=vals.__getitem__) + 1
    assert drift_argmax(BASE, n) == (best, pytest.approx(vals[best - 1], rel=1e-14))


def test_drift_is_unimodal():
    L = drift_distance(np.arange(1, 1001), BASE, 1000)
    d = np.sign(np.diff(L))
    changes = np.count_nonzero(np.diff(d[d != 0]))
    assert changes == 1


def test_unit_roundtrip():
    p = 3.7e-24
    assert C.from_recoil_units(C.to_recoil_units(p, 300e-9), 300e-9) == pytest.approx(p, rel=1e-15)
    assert C.recoil_momentum(300e-9) == pytest.approx(C.HBAR * 2 * math.pi / 300e-9, rel=1e-15)


def test_report_rounding_modes():
    sig1 = estimate_report()
    nearest = estimate_report(rounding="nearest")
    assert sig1.n_max == 1000 and nearest.n_max == 969
    assert nearest.t2 == pytest.approx(deceleration_time(969, 1e-8))
    with pytest.raises(ValueError):
        estimate_report(rounding="up")
    d = sig1.to_dict()
    assert set(d) == {"values", "reference_check"}
    assert d["values"]["tau1"]["unit"] == "s"
