"""Engineering estimates for the cooling scheme: pulse durations, step times, drift.

All inputs and outputs are SI unless a name says otherwise (``*_hk`` means
units of hbar*k, ``*_cm`` wavenumbers in cm^-1).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import NamedTuple

import numpy as np

from . import constants as C


@dataclass(frozen=True)
class PhysicalInputs:
    mass_amu: float = 100.0
    t_initial: float = 1.0            # K
    wavelength: float = 300e-9        # m
    rot_const_cm: float = 0.1         # B, cm^-1
    vib_const_cm: float = 1000.0      # v, cm^-1
    gamma_e: float = 1.0e7            # 1/s
    detuning: float = -5.0e8          # 1/s, red detuning is negative
    dp_vs_hk: float = 2.0
    tau2: float = 1.0e-8              # s
    epsilon: float = 0.9995
    tau3_multiplier: float = 10.0
    stirap_rabi: float = 5.0e9        # 1/s

    def __post_init__(self):
        for f in fields(self):
            if f.name == "detuning":
                continue
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{f.name} must be a positive number, got {v!r}")
        if not 0 < self.epsilon <= 1:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon!r}")

    @property
    def mass(self) -> float:
        return self.mass_amu * C.AMU

    @property
    def k(self) -> float:
        return C.wavenumber(self.wavelength)

    @property
    def hbar_k(self) -> float:
        return C.recoil_momentum(self.wavelength)


# --- thermal rovibrational populations --------------------------------------

def rovib_weight(n: int, J: int, inputs: PhysicalInputs) -> float:
    """Unnormalized Maxwell-Boltzmann weight of level (n, J)."""
    if n < 0 or J < 0:
        raise ValueError("n and J must be non-negative")
    energy = C.HC_CM * (inputs.rot_const_cm * J * (J + 1) + inputs.vib_const_cm * (n + 0.5))
    return (2 * J + 1) * math.exp(-energy / (C.K_B * inputs.t_initial))


def rovib_populations(inputs: PhysicalInputs, n_levels: int = 3, j_levels: int = 20) -> np.ndarray:
    """Normalized populations over ``n < n_levels``, ``J < j_levels`` (rows n, columns J)."""
    w = np.array([[rovib_weight(n, J, inputs) for J in range(j_levels)] for n in range(n_levels)])
    return w / w.sum()


class JMax(NamedTuple):
    value: float
    candidates: tuple[int, int]


def jmax(inputs: PhysicalInputs) -> JMax:
    """Most populated rotational level, ``sqrt(k_B T / (2 h c B)) - 1/2``."""
    x = math.sqrt(C.K_B * inputs.t_initial / (2.0 * C.HC_CM * inputs.rot_const_cm)) - 0.5
    return JMax(x, (max(0, math.floor(x)), max(0, math.ceil(x))))


# --- step estimates ---------------------------------------------------------

def round_sig1(x: float) -> int:
    """Round to one significant figure (969 -> 1000)."""
    if x <= 0:
        return 0
    e = 10 ** math.floor(math.log10(x))
    return int(round(x / e) * e)


class Selection(NamedTuple):
    omega_r: float
    t_vs: float
    tau1: float
    rabi0: float
    p_max: float
    p_max_hk: float
    n_max_nearest: int
    n_max_sig1: int
    t1: float


def selection_estimates(inputs: PhysicalInputs, n_max: int | None = None) -> Selection:
    """Velocity-selection estimates. ``t1`` uses ``n_max`` (default: one-significant-figure count)."""
    if inputs.detuning >= 0:
        raise ValueError(f"detuning must be negative (red), got {inputs.detuning!r}")
    M, k, hk = inputs.mass, inputs.k, inputs.hbar_k
    dp = inputs.dp_vs_hk * hk
    omega_r = C.HBAR * k * k / (2.0 * M)
    t_vs = dp * dp / (2.0 * M * C.K_B)
    # Blackman pi-pulse for a selected width dp; equals 15/(4 omega_r) at dp = 2 hbar k
    tau1 = 15.0 * M / (k * dp)
    rabi0 = math.sqrt(-inputs.detuning * math.pi / (tau1 * 0.61))
    p_max = math.sqrt(2.0 * M * C.K_B * inputs.t_initial)
    p_max_hk = p_max / hk
    exact = 2.0 * p_max_hk / inputs.dp_vs_hk
    nearest, sig1 = int(round(exact)), round_sig1(exact)
    n = sig1 if n_max is None else n_max
    return Selection(omega_r, t_vs, tau1, rabi0, p_max, p_max_hk, nearest, sig1, n * tau1)


def deceleration_time(n_max: int, tau2: float) -> float:
    return 0.5 * n_max * (n_max + 1) * tau2


class Deceleration(NamedTuple):
    t2: float
    eps_n: float
    adiabaticity: float
    adiabatic: bool


def deceleration_estimates(inputs: PhysicalInputs, n_max: int) -> Deceleration:
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    prod = inputs.tau2 * inputs.stirap_rabi
    return Deceleration(
        deceleration_time(n_max, inputs.tau2),
        math.exp(n_max * math.log(inputs.epsilon)),
        prod,
        prod >= 50.0 * (1.0 - 1e-12),
    )


class Accumulation(NamedTuple):
    tau3: float
    t3: float
    t_cool: float


def accumulation_estimates(inputs: PhysicalInputs, n_max: int) -> Accumulation:
    tau3 = inputs.tau3_multiplier / inputs.gamma_e
    t3 = n_max * tau3
    t1 = selection_estimates(inputs, n_max).t1
    t2 = deceleration_estimates(inputs, n_max).t2
    return Accumulation(tau3, t3, t1 + t2 + t3)


def drift_distance(N, inputs: PhysicalInputs, n_max: int):
    """Distance drifted by slice ``N`` (1 = slowest) before it is processed, fastest first.

    Accepts a scalar or an array of slice numbers; returns metres.
    """
    Na = np.asarray(N)
    if np.any(Na < 1) or np.any(Na > n_max):
        raise ValueError(f"slice number must lie in 1..{n_max}")
    tau1 = selection_estimates(inputs, n_max).tau1
    tau3 = inputs.tau3_multiplier / inputs.gamma_e
    K = n_max - Na
    wait = 0.5 * K * (K + 1) * inputs.tau2 + K * (tau1 + tau3)
    L = Na * inputs.dp_vs_hk * inputs.hbar_k * wait / inputs.mass
    return float(L) if np.ndim(L) == 0 else L


def drift_argmax(inputs: PhysicalInputs, n_max: int) -> tuple[int, float]:
    N = np.arange(1, n_max + 1)
    L = drift_distance(N, inputs, n_max)
    i = int(np.argmax(L))
    return int(N[i]), float(L[i])


# --- report ------------------------------------------------------------------

# (quoted value, tolerance used for the check, SI unit)
REFERENCE_VALUES = {
    "tau1": (27e-6, 0.05, "s"),
    "rabi0": (9.8e6, 0.05, "1/s"),
    "t_vs": (4e-6, 0.10, "K"),
    "p_max_hk": (1000.0, 0.05, "hbar*k"),
    "n_max": (1000, 0.05, "1"),
    "t1": (27e-3, 0.05, "s"),
    "t2": (5e-3, 0.05, "s"),
    "eps_n": (0.60, 0.05, "1"),
    "tau3": (1e-6, 0.05, "s"),
    "t3": (1e-3, 0.05, "s"),
    "t_cool": (33e-3, 0.05, "s"),
    "drift_max": (0.20, 0.10, "m"),
}

UNITS = {
    "omega_r": "1/s", "t_vs": "K", "tau1": "s", "rabi0": "1/s", "p_max": "kg m/s",
    "p_max_hk": "hbar*k", "n_max": "1", "n_max_nearest": "1", "n_max_sig1": "1",
    "t1": "s", "t2": "s", "t3": "s", "tau3": "s", "t_cool": "s", "eps_n": "1",
    "adiabaticity": "1", "adiabatic": "bool", "drift_argmax": "1", "drift_max": "m",
    "drift_475": "m", "j_max": "1", "j_max_candidates": "1",
}


@dataclass(frozen=True)
class EstimateReport:
    omega_r: float
    t_vs: float
    tau1: float
    rabi0: float
    p_max: float
    p_max_hk: float
    n_max: int
    n_max_nearest: int
    n_max_sig1: int
    t1: float
    t2: float
    tau3: float
    t3: float
    t_cool: float
    eps_n: float
    adiabaticity: float
    adiabatic: bool
    drift_argmax: int
    drift_max: float
    drift_475: float
    j_max: float
    j_max_candidates: tuple[int, int]

    def reference_check(self) -> dict[str, dict]:
        out = {}
        for key, (ref, tol, unit) in REFERENCE_VALUES.items():
            val = getattr(self, key)
            dev = abs(val - ref) / abs(ref)
            out[key] = {"value": val, "reference": ref, "rel_dev": dev, "tol": tol, "unit": unit,
                        "ok": dev <= tol}
        return out

    def to_dict(self) -> dict:
        d = asdict(self)
        return {
            "values": {k: {"value": list(v) if isinstance(v, tuple) else v, "unit": UNITS[k]}
                       for k, v in d.items()},
            "reference_check": self.reference_check(),
        }


def estimate_report(inputs: PhysicalInputs | None = None, rounding: str = "sig1") -> EstimateReport:
    """All estimates. ``rounding`` picks the cycle count used downstream:
    ``"sig1"`` (one significant figure, 1000 for the defaults) or ``"nearest"``."""
    inputs = inputs or PhysicalInputs()
    sel = selection_estimates(inputs)
    if rounding == "sig1":
        n = sel.n_max_sig1
    elif rounding == "nearest":
        n = sel.n_max_nearest
    else:
        raise ValueError(f"rounding must be 'sig1' or 'nearest', got {rounding!r}")
    sel = selection_estimates(inputs, n)
    dec = deceleration_estimates(inputs, n)
    acc = accumulation_estimates(inputs, n)
    n_star, l_star = drift_argmax(inputs, n)
    jm = jmax(inputs)
    return EstimateReport(
        omega_r=sel.omega_r, t_vs=sel.t_vs, tau1=sel.tau1, rabi0=sel.rabi0,
        p_max=sel.p_max, p_max_hk=sel.p_max_hk, n_max=n,
        n_max_nearest=sel.n_max_nearest, n_max_sig1=sel.n_max_sig1,
        t1=sel.t1, t2=dec.t2, tau3=acc.tau3, t3=acc.t3, t_cool=acc.t_cool,
        eps_n=dec.eps_n, adiabaticity=dec.adiabaticity, adiabatic=dec.adiabatic,
        drift_argmax=n_star, drift_max=l_star,
        drift_475=drift_distance(475, inputs, n) if n >= 475 else math.nan,
        j_max=jm.value, j_max_candidates=jm.candidates,
    )
