"""Closed-form populations of the three-step cooling cycle and the cycle scheduler.

Each cycle processes one momentum slice centred at ``P_N``:

1. velocity selection moves ``V_N(P) = W(P_N) exp(-(P-P_N)^2/s^2)`` from
   ``G0`` into ``GPlus`` with a one-recoil kick toward zero;
2. ``n_max`` Raman inversions between ``GPlus`` and ``GMinus``, each adding a
   two-recoil kick;
3. the decelerated slice is handed to ``D``, which decays into the
   accumulation states with a slightly broadened momentum profile.

Only diagonal populations ``rho_aa(P, P, t)`` are tracked. Momenta are in
units of hbar*k, times in seconds.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Iterator, Sequence

import numpy as np

from . import entropy as ent
from .momentum import Distribution, MomentumGrid, build_grid, gibbs_weights

log = logging.getLogger(__name__)


class ModelError(RuntimeError):
    """Scheduling, domain or conservation failure inside the cooling model."""


class TraceViolation(ModelError):
    pass


class State(IntEnum):
    G0 = 0
    GPLUS = 1
    GMINUS = 2
    E = 3
    D = 4


N_FIXED = len(State)


def state_labels(n_acc: int) -> tuple[str, ...]:
    return ("G0", "GPlus", "GMinus", "E", "D") + tuple(f"Acc{j}" for j in range(1, n_acc + 1))


def acc_row(j: int) -> int:
    """Row of accumulation state ``j`` (1-based) in a population array."""
    return N_FIXED + j - 1


# --- configuration ---------------------------------------------------------

def logarithmic_fractions(n: int, decades: float = 2.0) -> np.ndarray:
    """Branching fractions falling geometrically over ``decades``, normalized to one."""
    if n < 1:
        raise ValueError(f"need at least one accumulation state, got {n}")
    f = np.logspace(0.0, -decades, n) if n > 1 else np.ones(1)
    return f / f.sum()


@dataclass(frozen=True)
class DecayLadder:
    fractions: tuple[float, ...]
    rates: tuple[float, ...]          # 1/s
    k_a: float = 1.0                  # emitted photon wavenumber, units of k

    def __post_init__(self):
        F = np.asarray(self.fractions, dtype=float)
        G = np.asarray(self.rates, dtype=float)
        if F.ndim != 1 or F.size == 0 or F.shape != G.shape:
            raise ValueError("fractions and rates must be equal-length non-empty sequences")
        if np.any(F < 0):
            raise ValueError("branching fractions must be non-negative")
        if abs(F.sum() - 1.0) > 1e-12:
            raise ValueError(f"branching fractions must sum to 1, got {F.sum()!r}")
        if np.any(G <= 0):
            raise ValueError("decay rates must be positive")
        if self.k_a < 0:
            raise ValueError("k_a must be non-negative")

    @property
    def size(self) -> int:
        return len(self.fractions)

    @classmethod
    def logarithmic(cls, n: int, rate: float, k_a: float = 1.0) -> "DecayLadder":
        return cls(tuple(logarithmic_fractions(n)), (rate,) * n, k_a)


@dataclass(frozen=True)
class CoolingConfig:
    """Physical and numerical parameters of a simulated cooling run.

    Momentum widths are in hbar*k; ``sigma_vsel`` defaults to ``dp_vs/2`` and
    ``p_start`` to the outermost slice centre within ``2*sigma``.
    """

    sigma: float = 15.0
    dp_vs: float = 2.0
    sigma_vsel: float | None = None
    p_start: float | None = None
    max_cycles: int | None = None
    acc_states: int = 10
    fractions: tuple[float, ...] | None = None
    decay_rate: float = 1.0e7
    k_a: float = 1.0
    tau1: float = 27e-6
    tau2: float = 1e-8
    tau3: float = 1e-6
    resolution: int = 10
    half_span: float | None = None
    samples_step1: int = 32
    samples_step2: int = 32
    samples_step3: int = 64
    theta_nodes: int = 181
    trace_tol: float = 1e-6
    overdraft_budget: float = 0.02

    def __post_init__(self):
        for name in ("sigma", "dp_vs", "decay_rate", "tau1", "tau2", "tau3"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.sigma_vsel is not None and not self.sigma_vsel > 0:
            raise ValueError(f"sigma_vsel must be positive, got {self.sigma_vsel!r}")
        if self.p_start is not None and self.p_start < 0:
            raise ValueError(f"p_start must be >= 0, got {self.p_start!r}")
        if self.acc_states < 1:
            raise ValueError(f"acc_states must be >= 1, got {self.acc_states!r}")
        if self.fractions is not None and len(self.fractions) != self.acc_states:
            raise ValueError("fractions must have one entry per accumulation state")
        if self.k_a < 0:
            raise ValueError(f"k_a must be >= 0, got {self.k_a!r}")
        if self.resolution < 1:
            raise ValueError(f"resolution must be >= 1, got {self.resolution!r}")
        for name in ("samples_step1", "samples_step2", "samples_step3"):
            if getattr(self, name) < 2:
                raise ValueError(f"{name} must be >= 2, got {getattr(self, name)!r}")

    @property
    def vsel(self) -> float:
        return self.sigma_vsel if self.sigma_vsel is not None else self.dp_vs / 2.0

    @property
    def start(self) -> float:
        if self.p_start is not None:
            return self.p_start
        half = self.dp_vs / 2.0
        return half + self.dp_vs * math.floor((2.0 * self.sigma - half) / self.dp_vs + 1e-9)

    def ladder(self) -> DecayLadder:
        if self.fractions is not None:
            F = np.asarray(self.fractions, dtype=float)
            F = F / F.sum()
        else:
            F = logarithmic_fractions(self.acc_states)
        return DecayLadder(tuple(F), (self.decay_rate,) * self.acc_states, self.k_a)


def accumulated_width(sigma_vsel: float, k_a: float) -> float:
    """Slice width after one spontaneous emission: ``sigma_vsel + k_a/2`` (hbar*k units)."""
    if not sigma_vsel > 0:
        raise ValueError(f"sigma_vsel must be positive, got {sigma_vsel}")
    if k_a < 0:
        raise ValueError(f"k_a must be non-negative, got {k_a}")
    return sigma_vsel * (1.0 + 0.5 * k_a / sigma_vsel)


# --- schedule --------------------------------------------------------------

def substep_count(p_n: float) -> int:
    """Number of two-recoil inversions that brings a slice at ``p_n`` closest to zero.

    After velocity selection the slice sits at ``|p_n| - 1``; each inversion
    removes two more recoils. Ties go to fewer inversions.
    """
    if p_n == 0:
        warnings.warn("slice centred at zero momentum needs no deceleration", stacklevel=2)
        return 0
    x = (abs(p_n) - 1.0) / 2.0
    lo = max(0, math.floor(x))
    hi = max(0, math.ceil(x))
    r_lo = abs(abs(p_n) - 1.0 - 2.0 * lo)
    r_hi = abs(abs(p_n) - 1.0 - 2.0 * hi)
    return hi if r_hi < r_lo - 1e-12 else lo


def final_center(p_n: float, n: int) -> float:
    """Slice centre after velocity selection and ``n`` inversions."""
    alpha = float(np.sign(p_n))
    return p_n - alpha * (1.0 + 2.0 * n)


@dataclass(frozen=True)
class SliceSpec:
    center: float
    alpha: int
    n_max: int

    @property
    def residual(self) -> float:
        return final_center(self.center, self.n_max)


@dataclass(frozen=True)
class CycleSchedule:
    slices: tuple[SliceSpec, ...]

    def __len__(self):
        return len(self.slices)

    def __getitem__(self, n: int) -> SliceSpec:
        """Slice of cycle ``n`` (1-based)."""
        if not 1 <= n <= len(self.slices):
            raise ModelError(f"cycle {n} outside schedule of {len(self.slices)} cycles")
        return self.slices[n - 1]

    @property
    def centers(self) -> list[float]:
        return [s.center for s in self.slices]


def build_schedule(config: CoolingConfig) -> CycleSchedule:
    """Mirrored slice pairs from the fastest class inward: ``+P, -P, +(P-dP), ...``."""
    p0, dp = config.start, config.dp_vs
    if p0 <= 0:
        return CycleSchedule(())
    if dp >= 2.0 * p0:
        warnings.warn(f"dp_vs={dp} >= 2*p_start={2 * p0}: single-cycle schedule", stacklevel=2)
        levels = [p0]
    else:
        levels = []
        c = p0
        while c >= dp / 2.0 - 1e-9 and c > 0:
            levels.append(c)
            c = p0 - len(levels) * dp
    slices = []
    for c in levels:
        for p in (c, -c):
            slices.append(SliceSpec(p, int(np.sign(p)), substep_count(p)))
    if config.max_cycles is not None:
        slices = slices[: config.max_cycles]
    return CycleSchedule(tuple(slices))


# --- populations -----------------------------------------------------------

@dataclass(frozen=True)
class PopulationField:
    """Diagonal populations ``rho_aa(P, P, t)``, one row per internal state.

    ``g0_raw`` is the unclamped ``W - sum_j V_j`` carried for the closed form;
    the ``G0`` row is its positive part and the difference is the overdraft.
    """

    grid: MomentumGrid
    labels: tuple[str, ...]
    populations: np.ndarray
    g0_raw: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        for name in ("populations", "g0_raw"):
            a = np.array(getattr(self, name), dtype=float)
            a.flags.writeable = False
            object.__setattr__(self, name, a)
        if self.populations.shape != (len(self.labels), self.grid.size):
            raise ValueError("population array does not match labels x grid")
        if np.any(self.populations < 0):
            raise ValueError("populations must be non-negative")

    @property
    def n_acc(self) -> int:
        return len(self.labels) - N_FIXED

    def state(self, label: str | int) -> Distribution:
        row = self.labels.index(label) if isinstance(label, str) else int(label)
        return Distribution(self.grid, self.populations[row])

    def trace(self) -> float:
        return float(self.populations.sum())

    def overdraft(self) -> float:
        return float(np.sum(self.populations[State.G0] - self.g0_raw))

    def raman_mass(self) -> float:
        return float(self.populations[State.GPLUS].sum() + self.populations[State.GMINUS].sum())

    def acc_mass(self) -> float:
        return float(self.populations[N_FIXED:].sum())

    def with_rows(self, time: float, rows: dict[int, np.ndarray], g0_raw=None) -> "PopulationField":
        pops = self.populations.copy()
        for r, v in rows.items():
            pops[r] = v
        return replace(self, populations=pops, time=time,
                       g0_raw=self.g0_raw if g0_raw is None else g0_raw)


def initial_field(grid: MomentumGrid, sigma: float, n_acc: int) -> PopulationField:
    """Gibbs momentum distribution entirely in ``G0``."""
    w = gibbs_weights(grid, sigma).values
    pops = np.zeros((N_FIXED + n_acc, grid.size))
    pops[State.G0] = w
    return PopulationField(grid, state_labels(n_acc), pops, w.copy(), 0.0)


def _h(t: float, tau: float) -> float:
    return math.sin(math.pi * t / (2.0 * tau)) ** 2


def _check_time(t: float, tau: float, name: str):
    if not 0.0 <= t <= tau * (1.0 + 1e-12):
        raise ModelError(f"{name}={t!r} outside [0, {tau!r}]")


class CoolingModel:
    """Closed-form cooling dynamics for one configuration."""

    def __init__(self, config: CoolingConfig):
        self.config = config
        self.schedule = build_schedule(config)
        self.ladder = config.ladder()
        self.sigma_vsel = config.vsel
        self.sigma_acc = accumulated_width(self.sigma_vsel, config.k_a)
        m = config.resolution
        span = config.half_span
        if span is None:
            need = max(5.0 * config.sigma, config.start + 5.0 * self.sigma_vsel,
                       5.0 * self.sigma_acc)
            span = math.ceil(need * m - 1e-9) / m
        self.grid = build_grid(span, m)
        if self.grid.half_span < config.start + 5.0 * self.sigma_vsel:
            raise ModelError(f"grid half_span {self.grid.half_span} cannot hold slices up to "
                             f"{config.start} + 5*sigma_vsel")
        self.P = self.grid.points
        self._Z = float(np.exp(-(self.P / config.sigma) ** 2).sum())
        if config.tau3 < 10.0 / max(self.ladder.rates) * (1 - 1e-12):
            warnings.warn(f"tau3={config.tau3} < 10/Gamma: D is not emptied before the next cycle",
                          stacklevel=2)

    # closed-form building blocks
    def weight(self, p: float) -> float:
        """Discrete Gibbs weight ``W(p)``."""
        return math.exp(-(p / self.config.sigma) ** 2) / self._Z

    def slice_profile(self, n: int, kick: float = 0.0) -> np.ndarray:
        """``W(P_N) exp(-(P + alpha*kick - P_N)^2 / sigma_vsel^2)`` for cycle ``n``."""
        s = self.schedule[n]
        return self.weight(s.center) * np.exp(
            -((self.P + s.alpha * kick - s.center) / self.sigma_vsel) ** 2)

    def acc_profile(self, center: float) -> np.ndarray:
        g = np.exp(-((self.P - center) / self.sigma_acc) ** 2)
        return g / g.sum()

    def initial_field(self) -> PopulationField:
        return initial_field(self.grid, self.config.sigma, self.ladder.size)

    # steps
    def step1_evolve(self, field: PopulationField, n: int, t1: float) -> PopulationField:
        """Velocity selection of cycle ``n`` at time ``t1`` from the cycle-start field."""
        _check_time(t1, self.config.tau1, "t1")
        if field.raman_mass() > 0 or field.populations[State.D].any():
            raise ModelError("step 1 needs a cycle-boundary field (Raman states and D empty)")
        h = _h(t1, self.config.tau1)
        raw = field.g0_raw - h * self.slice_profile(n)
        return field.with_rows(
            field.time + t1,
            {State.G0: np.maximum(raw, 0.0), State.GPLUS: h * self.slice_profile(n, 1.0)},
            g0_raw=raw,
        )

    def step2_evolve(self, field: PopulationField, n: int, sub: int, t2: float) -> PopulationField:
        """Inversion ``sub`` of cycle ``n`` at time ``t2`` from the substep-start field."""
        s = self.schedule[n]
        if not 1 <= sub <= s.n_max:
            raise ModelError(f"substep {sub} outside 1..{s.n_max} for cycle {n}")
        _check_time(t2, self.config.tau2, "t2")
        h = _h(t2, self.config.tau2)
        a, b = (State.GMINUS, State.GPLUS) if sub % 2 else (State.GPLUS, State.GMINUS)
        return field.with_rows(field.time + t2, {
            a: h * self.slice_profile(n, 1.0 + 2.0 * sub),
            b: (1.0 - h) * self.slice_profile(n, 1.0 + 2.0 * (sub - 1)),
        })

    def step3_evolve(self, field: PopulationField, n: int, t3: float) -> PopulationField:
        """Accumulation of cycle ``n`` at time ``t3`` from the end-of-deceleration field."""
        _check_time(t3, self.config.tau3, "t3")
        return self._decay(field, n, t3)

    def _decay(self, field: PopulationField, n: int, t3: float) -> PopulationField:
        if field.populations[State.D].any():
            raise ModelError("step 3 needs the end-of-deceleration field (D empty)")
        s = self.schedule[n]
        d0 = field.populations[State.GPLUS] + field.populations[State.GMINUS]
        mass = float(d0.sum())
        F = np.asarray(self.ladder.fractions)
        G = np.asarray(self.ladder.rates)
        surv = np.exp(-G * t3) if math.isfinite(t3) else np.zeros_like(G)
        zero = np.zeros(self.grid.size)
        rows = {State.GPLUS: zero, State.GMINUS: zero, State.D: float(np.dot(F, surv)) * d0}
        prof = self.acc_profile(s.residual)
        for j in range(1, self.ladder.size + 1):
            r = acc_row(j)
            rows[r] = field.populations[r] + F[j - 1] * mass * (1.0 - surv[j - 1]) * prof
        return field.with_rows(field.time + (t3 if math.isfinite(t3) else 0.0), rows)

    def complete_cycle(self, field: PopulationField, n: int, t_end: float) -> PopulationField:
        """Field at the end of cycle ``n`` with ``D`` fully drained into the accumulation states."""
        d = field.populations[State.D]
        rows = {State.D: np.zeros(self.grid.size)}
        if d.any():
            F = np.asarray(self.ladder.fractions)
            G = np.asarray(self.ladder.rates)
            left = F * np.exp(-G * self.config.tau3)
            mass = float(d.sum()) / float(left.sum())
            prof = self.acc_profile(self.schedule[n].residual)
            for j in range(1, self.ladder.size + 1):
                r = acc_row(j)
                rows[r] = field.populations[r] + left[j - 1] * mass * prof
        return field.with_rows(t_end, rows)


# --- orchestration ---------------------------------------------------------

@dataclass(frozen=True)
class SamplingPolicy:
    step1: int = 32
    step2: int = 32
    step3: int = 64

    @classmethod
    def from_config(cls, config: CoolingConfig) -> "SamplingPolicy":
        return cls(config.samples_step1, config.samples_step2, config.samples_step3)


@dataclass(frozen=True)
class Sample:
    cycle: int
    step: int          # 0 for the initial state
    substep: int       # 0 outside step 2
    t_local: float
    phase: float       # cycle-relative abscissa: each step spans 1/3 of a cycle
    field: PopulationField
    record: ent.EntropyRecord
    step_end: bool = False
    segment_end: bool = False   # last sample of a step-1/3 interval or of one inversion
    overdraft: float = 0.0
    trace: float = 1.0


@dataclass
class _Tracker:
    model: CoolingModel
    s_photon: float
    s_tot: float
    violations: list = field(default_factory=list)

    def sample(self, f: PopulationField, cycle: int, step: int, sub: int, t: float,
               phase: float, step_end: bool = False, segment_end: bool = False) -> Sample:
        C = ent.internal_distribution(f)
        s_i = ent.shannon(C)
        s_cm = ent.shannon(ent.cm_distribution(f).values)
        if step in (0, 3):
            self.s_tot = ent.total_entropy_step3(f)
        s_r = f.acc_mass() * self.s_photon
        rec = ent.EntropyRecord(f.time, cycle, step, s_i, s_cm, self.s_tot, s_r)
        tr, od = f.trace(), f.overdraft()
        cfg = self.model.config
        if abs(tr - 1.0) > cfg.trace_tol + od or od > cfg.overdraft_budget:
            raise TraceViolation(
                f"cycle {cycle} step {step}: trace {tr:.12g}, overdraft {od:.3g} "
                f"(tol {cfg.trace_tol}, budget {cfg.overdraft_budget})")
        return Sample(cycle, step, sub, t, phase, f, rec, step_end, segment_end, od, tr)


def run_process(config: CoolingConfig, sampler: SamplingPolicy | None = None,
                model: CoolingModel | None = None) -> Iterator[Sample]:
    """Deterministic stream of samples through every cycle of the schedule.

    The first sample is the initial Gibbs state. Within steps 1 and 2 the
    total entropy is held at its value from the end of the previous
    accumulation step.
    """
    sampler = sampler or SamplingPolicy.from_config(config)
    model = model or CoolingModel(config)
    cfg = model.config
    s_photon = ent.radiation_entropy(model.ladder.fractions, cfg.theta_nodes)
    field = model.initial_field()
    tr = _Tracker(model, s_photon, 0.0)
    yield tr.sample(field, 0, 0, 0, 0.0, 0.0, step_end=True, segment_end=True)

    for n in range(1, len(model.schedule) + 1):
        spec = model.schedule[n]
        base = float(n - 1)
        start = field
        ts = np.linspace(0.0, cfg.tau1, sampler.step1)
        for i, t in enumerate(ts):
            f = model.step1_evolve(start, n, float(t))
            last = i == len(ts) - 1
            yield tr.sample(f, n, 1, 0, float(t), base + t / cfg.tau1 / 3.0,
                            step_end=last, segment_end=last)
        field = f
        ts = np.linspace(0.0, cfg.tau2, sampler.step2)
        for sub in range(1, spec.n_max + 1):
            start = field
            for i, t in enumerate(ts):
                f = model.step2_evolve(start, n, sub, float(t))
                frac = (sub - 1 + t / cfg.tau2) / spec.n_max
                last = i == len(ts) - 1
                yield tr.sample(f, n, 2, sub, float(t), base + (1.0 + frac) / 3.0,
                                step_end=last and sub == spec.n_max, segment_end=last)
            field = f
        start = field
        ts = np.linspace(0.0, cfg.tau3, sampler.step3)
        for i, t in enumerate(ts):
            f = model.step3_evolve(start, n, float(t))
            last = i == len(ts) - 1
            yield tr.sample(f, n, 3, 0, float(t), base + (2.0 + t / cfg.tau3) / 3.0,
                            step_end=last, segment_end=last)
        field = model.complete_cycle(f, n, f.time)
        log.debug("cycle %d done: P_N=%g n_max=%d overdraft=%.3g", n, spec.center,
                  spec.n_max, field.overdraft())
