import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import shifted_slice

from molcool.engine import (CoolingConfig, CoolingModel, DecayLadder, ModelError, SamplingPolicy,
                            State, accumulated_width, acc_row, build_schedule, final_center,
                            logarithmic_fractions, run_process, substep_count)

SMALL = CoolingConfig(sigma=5.0, dp_vs=2.0, p_start=3.0, acc_states=3, resolution=10)


@pytest.fixture(scope="module")
def model():
    return CoolingModel(CoolingConfig())


def _through_step1(m, n, field):
    return m.step1_evolve(field, n, m.config.tau1)


def _through_step2(m, n, field):
    for sub in range(1, m.schedule[n].n_max + 1):
        field = m.step2_evolve(field, n, sub, m.config.tau2)
    return field


# --- schedule ----------------------------------------------------------------

@pytest.mark.parametrize("p,n", [(21, 10), (-21, 10), (2, 0), (3, 1), (29, 14), (1, 0), (4, 1)])
def test_substep_count(p, n):
    assert substep_count(p) == n


def test_substep_count_zero_momentum_warns():
    with pytest.warns(UserWarning):
        assert substep_count(0) == 0


@settings(max_examples=60, deadline=None)
@given(p=st.integers(-200, 200).filter(bool))
def test_substep_count_minimizes_residual(p):
    n = substep_count(p)
    r = abs(final_center(p, n))
    assert all(r <= abs(abs(p) - 1 - 2 * j) + 1e-12 for j in range(0, abs(p) + 1))
    assert n == 0 or abs(final_center(p, n - 1)) > r


@pytest.mark.parametrize("s,k,expected", [(1.0, 1.0, 1.5), (1.0, 0.0, 1.0), (0.5, 2.0, 1.5)])
def test_accumulated_width(s, k, expected):
    assert accumulated_width(s, k) == pytest.approx(expected, rel=1e-15)


@pytest.mark.parametrize("s,k", [(0.0, 1.0), (1.0, -1.0)])
def test_accumulated_width_rejects(s, k):
    with pytest.raises(ValueError):
        accumulated_width(s, k)


def test_schedule_small_example():
    assert build_schedule(SMALL).centers == [3.0, -3.0, 1.0, -1.0]
    assert [s.n_max for s in build_schedule(SMALL).slices] == [1, 1, 0, 0]


def test_default_schedule():
    sched = build_schedule(CoolingConfig())
    assert len(sched) == 30
    assert sched.centers[:4] == [29.0, -29.0, 27.0, -27.0]
    assert sched.centers[-2:] == [1.0, -1.0]
    assert sched[1].alpha == 1 and sched[2].alpha == -1
    with pytest.raises(ModelError):
        sched[31]


def test_schedule_empty_and_single_cycle():
    assert len(build_schedule(CoolingConfig(p_start=0.0))) == 0
    with pytest.warns(UserWarning):
        one = build_schedule(CoolingConfig(p_start=3.0, dp_vs=6.0))
    assert one.centers == [3.0, -3.0]
    assert len(build_schedule(CoolingConfig(max_cycles=3))) == 3


def test_logarithmic_fractions():
    f = logarithmic_fractions(10)
    assert f.sum() == pytest.approx(1.0, abs=1e-15)
    assert f[0] / f[-1] == pytest.approx(100.0, rel=1e-12)
    assert np.all(np.diff(f) < 0)
    assert logarithmic_fractions(1).tolist() == [1.0]


def test_decay_ladder_validation():
    with pytest.raises(ValueError):
        DecayLadder((0.5, 0.4), (1e7, 1e7))
    with pytest.raises(ValueError):
        DecayLadder((0.5, 0.5), (1e7, 0.0))
    with pytest.raises(ValueError):
        DecayLadder((1.0,), (1e7, 1e7))


@pytest.mark.parametrize("kw", [{"sigma": 0.0}, {"sigma_vsel": -1.0}, {"acc_states": 0},
                                {"fractions": (1.0,)}, {"tau2": -1e-9}, {"samples_step1": 1}])
def test_config_rejects(kw):
    with pytest.raises(ValueError):
        CoolingConfig(**kw)


# --- step 1 ------------------------------------------------------------------

def test_step1_endpoints(model):
    f0 = model.initial_field()
    same = model.step1_evolve(f0, 1, 0.0)
    np.testing.assert_array_equal(same.populations, f0.populations)
    f1 = _through_step1(model, 1, f0)
    assert f1.time == pytest.approx(model.config.tau1)
    gplus = f1.state("GPlus")
    spec = model.schedule[1]
    # selected mass: W(P_N) times the discrete Gaussian sum of the slice
    P = model.grid.points
    expected = model.weight(spec.center) * np.exp(-((P - spec.center) / model.sigma_vsel) ** 2).sum()
    assert gplus.mass == pytest.approx(expected, rel=1e-12)
    assert gplus.mean() == pytest.approx(spec.center - 1.0, abs=1e-9)
    assert f1.trace() == pytest.approx(1.0 + f1.overdraft(), abs=1e-14)


def test_step1_half_time_moves_half(model):
    f0 = model.initial_field()
    full = _through_step1(model, 1, f0).state("GPlus").mass
    half = model.step1_evolve(f0, 1, model.config.tau1 / 2).state("GPlus").mass
    assert half == pytest.approx(0.5 * full, rel=1e-12)


def test_step1_domain_errors(model):
    f0 = model.initial_field()
    with pytest.raises(ModelError):
        model.step1_evolve(f0, 1, 2 * model.config.tau1)
    with pytest.raises(ModelError):
        model.step1_evolve(f0, 0, 0.0)
    f1 = _through_step1(model, 1, f0)
    with pytest.raises(ModelError):
        model.step1_evolve(f1, 2, 0.0)


# --- step 2 ------------------------------------------------------------------

def test_step2_half_split(model):
    f1 = _through_step1(model, 1, model.initial_field())
    mid = model.step2_evolve(f1, 1, 1, model.config.tau2 / 2)
    a, b = mid.state("GMinus").mass, mid.state("GPlus").mass
    assert a == pytest.approx(b, rel=1e-12)
    assert a + b == pytest.approx(f1.state("GPlus").mass, rel=1e-12)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 30), frac=st.floats(0.0, 1.0), data=st.data())
def test_step2_matches_index_shift_oracle(model, n, frac, data):
    spec = model.schedule[n]
    if spec.n_max == 0:
        return
    sub = data.draw(st.integers(1, spec.n_max))
    f = _through_step1(model, n, model.initial_field())
    for k in range(1, sub):
        f = model.step2_evolve(f, n, k, model.config.tau2)
    t = frac * model.config.tau2
    g = model.step2_evolve(f, n, sub, t)
    h = math.sin(math.pi * frac / 2) ** 2
    a, b = (State.GMINUS, State.GPLUS) if sub % 2 else (State.GPLUS, State.GMINUS)
    np.testing.assert_allclose(g.populations[a], h * shifted_slice(model, n, 1 + 2 * sub),
                               rtol=0, atol=1e-12)
    np.testing.assert_allclose(g.populations[b], (1 - h) * shifted_slice(model, n, 2 * sub - 1),
                               rtol=0, atol=1e-12)


def test_step2_decelerates_to_near_zero(model):
    cfg = CoolingConfig(p_start=21.0, max_cycles=1)
    m = CoolingModel(cfg)
    assert m.schedule[1].n_max == 10
    f = _through_step2(m, 1, _through_step1(m, 1, m.initial_field()))
    slice_ = f.state("GPlus")      # an even number of inversions ends back in GPlus
    assert f.state("GMinus").mass == 0.0
    assert slice_.mean() == pytest.approx(0.0, abs=1e-9)


def test_step2_preserves_slice_width(model):
    f = _through_step1(model, 1, model.initial_field())
    w0 = f.state("GPlus").variance()
    means = [f.state("GPlus").mean()]
    for sub in range(1, model.schedule[1].n_max + 1):
        f = model.step2_evolve(f, 1, sub, model.config.tau2)
        d = f.state("GMinus" if sub % 2 else "GPlus")
        assert d.variance() == pytest.approx(w0, rel=1e-9)
        means.append(d.mean())
    assert np.all(np.diff(means) == pytest.approx(-2.0, abs=1e-9))


def test_step2_substep_bounds(model):
    f = _through_step1(model, 1, model.initial_field())
    with pytest.raises(ModelError):
        model.step2_evolve(f, 1, 0, 0.0)
    with pytest.raises(ModelError):
        model.step2_evolve(f, 1, model.schedule[1].n_max + 1, 0.0)


# --- step 3 ------------------------------------------------------------------

def _end_of_step2(model, n=1):
    return _through_step2(model, n, _through_step1(model, n, model.initial_field()))


def test_step3_decay_and_mass_balance(model):
    f2 = _end_of_step2(model)
    slice_mass = f2.raman_mass()
    f3 = model.step3_evolve(f2, 1, model.config.tau3)
    d = f3.state("D").mass
    assert d == pytest.approx(math.exp(-10.0) * slice_mass, rel=1e-12)
    gained = f3.acc_mass() - f2.acc_mass()
    assert abs(gained + d - slice_mass) <= 1e-12
    assert f3.raman_mass() == 0.0
    assert f3.time == pytest.approx(f2.time + model.config.tau3)


def test_step3_at_zero_moves_slice_into_d(model):
    f2 = _end_of_step2(model)
    f3 = model.step3_evolve(f2, 1, 0.0)
    assert f3.state("D").mass == pytest.approx(f2.raman_mass(), rel=1e-14)
    assert f3.acc_mass() == 0.0


def test_step3_acc_profile_centered_at_residual(model):
    f3 = model.step3_evolve(_end_of_step2(model), 1, model.config.tau3)
    acc = f3.populations[acc_row(1):].sum(axis=0)
    from molcool.momentum import Distribution
    d = Distribution(model.grid, acc)
    assert d.mean() == pytest.approx(model.schedule[1].residual, abs=1e-9)
    assert d.variance() == pytest.approx(model.sigma_acc ** 2 / 2, rel=1e-6)


def test_single_acc_state_receives_everything_after_complete_cycle():
    cfg = CoolingConfig(sigma=5.0, p_start=3.0, acc_states=1, max_cycles=2)
    m = CoolingModel(cfg)
    f = m.initial_field()
    total = 0.0
    for n in (1, 2):
        f2 = _through_step2(m, n, _through_step1(m, n, f))
        total += f2.raman_mass()
        f = m.complete_cycle(m.step3_evolve(f2, n, cfg.tau3), n, f2.time + cfg.tau3)
        assert f.state("D").mass == 0.0
    assert f.acc_mass() == pytest.approx(total, rel=1e-12)


# --- orchestration -------------------------------------------------------------

def test_run_process_zero_cycles_yields_initial_only():
    samples = list(run_process(CoolingConfig(p_start=0.0)))
    assert len(samples) == 1
    s = samples[0]
    assert s.step == 0 and s.record.S_I == 0.0
    assert s.record.S_tot == pytest.approx(s.record.S_cm, rel=1e-15)


def test_run_process_sample_layout():
    pol = SamplingPolicy(3, 4, 5)
    samples = list(run_process(SMALL, pol))
    n_max = [s.n_max for s in build_schedule(SMALL).slices]
    assert len(samples) == 1 + sum(3 + 4 * k + 5 for k in n_max)
    phases = [s.phase for s in samples]
    assert np.all(np.diff(phases) >= 0)
    assert phases[-1] == pytest.approx(len(n_max))
    times = [s.record.time for s in samples]
    assert np.all(np.diff(times) >= 0)
    assert sum(s.step_end for s in samples) == 1 + 2 * 4 + 2   # step-2 ends only with substeps


def test_run_process_one_cycle_bookkeeping():
    cfg = CoolingConfig(sigma=5.0, p_start=3.0, acc_states=3, max_cycles=1)
    samples = list(run_process(cfg, SamplingPolicy(2, 2, 2)))
    last = samples[-1]
    m = CoolingModel(cfg)
    f2 = _end_of_step2(m)
    assert last.field.acc_mass() + last.field.state("D").mass == pytest.approx(f2.raman_mass(),
                                                                               rel=1e-12)
