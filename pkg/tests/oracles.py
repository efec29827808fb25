"""Independent reference computations shared by the test modules."""

import math

import numpy as np
from scipy.integrate import trapezoid


def shifted_slice(model, n: int, kick: float) -> np.ndarray:
    """Unkicked slice of cycle ``n`` moved toward zero by an integer index shift."""
    cfg, P = model.config, model.grid.points
    spec = model.schedule[n]
    w = np.exp(-(P / cfg.sigma) ** 2)
    w_n = math.exp(-(spec.center / cfg.sigma) ** 2) / w.sum()
    base = w_n * np.exp(-((P - spec.center) / model.sigma_vsel) ** 2)
    k = int(round(kick * model.grid.resolution)) * spec.alpha
    out = np.zeros_like(base)
    if k > 0:
        out[:-k] = base[k:]
    elif k < 0:
        out[-k:] = base[:k]
    else:
        out[:] = base
    return out


def trapezoid_radiation_entropy(fractions, n: int = 10_000) -> float:
    """Photon entropy by a plain trapezoid rule on a uniform theta grid."""
    th = np.linspace(0.0, math.pi, n)
    s = np.sin(th)
    rows = [0.375 * (1 + np.cos(th) ** 2) * s, 0.75 * s ** 3, 0.375 * (1 + np.cos(th) ** 2) * s]
    total = 0.0
    for f in fractions:
        for row in rows:
            r = f * row / 3.0
            with np.errstate(divide="ignore", invalid="ignore"):
                term = np.where(r > 0, -r * np.log(r), 0.0)
            total += trapezoid(term, th)
    return total
