"""Von Neumann entropies of the internal, centre-of-mass, total and radiation systems.

All reduced density matrices in the model are diagonal, so every entropy
reduces to a Shannon sum over populations. Entropies are in units of k_B.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, NamedTuple, Sequence

import numpy as np
from scipy.integrate import simpson

from .momentum import Distribution

if TYPE_CHECKING:
    from .engine import PopulationField


class EntropyError(ValueError):
    pass


def shannon(masses) -> float:
    """``-sum p ln p`` with ``0 ln 0 = 0``; negative entries are an error."""
    p = np.asarray(masses, dtype=float).ravel()
    neg = np.flatnonzero(p < 0)
    if neg.size:
        i = int(neg[0])
        raise EntropyError(f"negative mass {p[i]:g} at index {i}")
    nz = p[p > 0]
    return float(-np.sum(nz * np.log(nz)))


def internal_distribution(field: PopulationField) -> np.ndarray:
    """Internal-state masses ``C_a = sum_P rho_aa(P)``, ordered as ``field.labels``."""
    return field.populations.sum(axis=1)


def cm_distribution(field: PopulationField) -> Distribution:
    """Centre-of-mass distribution ``f(P) = sum_a rho_aa(P)``."""
    return Distribution(field.grid, field.populations.sum(axis=0))


def total_entropy_step3(field: PopulationField) -> float:
    """Joint (state, momentum) Shannon entropy of a fully diagonal snapshot.

    Only valid while the Raman states are empty, i.e. during accumulation or
    at a cycle boundary; in the coherent steps the joint state carries
    coherences the population model does not track.
    """
    if field.raman_mass() > 0.0:
        raise EntropyError(
            "total entropy is undefined for a snapshot with populated Raman states; "
            "carry the value from the previous accumulation step instead"
        )
    return shannon(field.populations)


# --- radiation -------------------------------------------------------------

POLARIZATIONS = (-1, 0, 1)


def angular_density(polarization: int, theta):
    """Dipole emission pattern for a photon of the given polarization."""
    theta = np.asarray(theta, dtype=float)
    if polarization in (-1, 1):
        return 0.375 * (1.0 + np.cos(theta) ** 2)
    if polarization == 0:
        return 0.75 * np.sin(theta) ** 2
    raise ValueError(f"polarization must be -1, 0 or +1, got {polarization!r}")


def _theta_nodes(n: int):
    # theta(s) = pi*(s - sin(2 pi s)/(2 pi)) has zero slope at both ends, which
    # tames the sin(theta)*ln(sin(theta)) endpoint singularity for Simpson.
    s = np.linspace(0.0, 1.0, n)
    theta = math.pi * (s - np.sin(2.0 * math.pi * s) / (2.0 * math.pi))
    jac = math.pi * (1.0 - np.cos(2.0 * math.pi * s))
    return s, theta, jac


def _xlogx(x):
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = x[pos] * np.log(x[pos])
    return out


def radiation_entropy(fractions: Sequence[float], theta_nodes: int = 181,
                      normalized: bool = True) -> float:
    """Entropy of one spontaneously emitted photon, over channel, polarization and angle.

    ``fractions`` are the branching (Franck-Condon) fractions of the decay
    channels and must sum to one. The angular density ``F_j M_l(theta) sin(theta)``
    integrates to 3 over polarizations, so by default it is divided by its
    computed total to give unit trace; ``normalized=False`` keeps the raw
    density.
    """
    if theta_nodes < 3 or theta_nodes % 2 == 0:
        raise ValueError(f"theta_nodes must be odd and >= 3, got {theta_nodes}")
    F = np.asarray(fractions, dtype=float)
    if F.ndim != 1 or F.size == 0 or np.any(F < 0) or abs(F.sum() - 1.0) > 1e-12:
        raise ValueError(f"branching fractions must be non-negative and sum to 1, got sum {F.sum()!r}")

    s, theta, jac = _theta_nodes(theta_nodes)
    sin_t = np.sin(theta)
    # rows: polarization
    r = np.array([angular_density(lam, theta) * sin_t for lam in POLARIZATIONS])
    if normalized:
        r = r / simpson((r * jac).sum(axis=0), x=s)
    R = F[:, None, None] * r[None, :, :]
    integrand = -_xlogx(R).sum(axis=(0, 1)) * jac
    return float(simpson(integrand, x=s))


# --- records ---------------------------------------------------------------

@dataclass(frozen=True)
class EntropyRecord:
    time: float
    cycle: int
    step: int
    S_I: float
    S_cm: float
    S_tot: float
    S_R: float
    I_C: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "I_C", self.S_cm + self.S_I - self.S_tot)


class ArakiLieb(NamedTuple):
    passed: bool
    lower_margin: float   # S_tot - |S_I - S_cm|
    upper_margin: float   # S_I + S_cm - S_tot
    time: float


def araki_lieb_check(record: EntropyRecord, tol: float = 1e-9) -> ArakiLieb:
    """Check ``|S_I - S_cm| <= S_tot <= S_I + S_cm``; negative margins are violations."""
    lower = record.S_tot - abs(record.S_I - record.S_cm)
    upper = record.S_I + record.S_cm - record.S_tot
    return ArakiLieb(lower >= -tol and upper >= -tol, lower, upper, record.time)
