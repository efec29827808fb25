"""CODATA 2018 constants used throughout the package (SI units).

Values are hard-coded instead of pulled from ``scipy.constants`` so that
derived numbers stay bit-stable across scipy releases that switch CODATA
vintages.
"""

import math

CONSTANT_SET = "CODATA-2018"

HBAR = 1.054571817e-34          # J s
H = 6.62607015e-34              # J s
K_B = 1.380649e-23              # J / K
C = 299792458.0                 # m / s
AMU = 1.66053906660e-27         # kg

# h*c in J*cm, for energies quoted as wavenumbers in cm^-1
HC_CM = H * C * 100.0


def wavenumber(wavelength):
    """Angular wavenumber k = 2*pi/lambda in 1/m."""
    return 2.0 * math.pi / wavelength


def recoil_momentum(wavelength):
    """Single-photon recoil momentum hbar*k in kg m/s."""
    return HBAR * wavenumber(wavelength)


def to_recoil_units(momentum, wavelength):
    """Convert an SI momentum to units of hbar*k."""
    return momentum / recoil_momentum(wavelength)


def from_recoil_units(p_hbar_k, wavelength):
    """Convert a momentum in units of hbar*k to SI."""
    return p_hbar_k * recoil_momentum(wavelength)
