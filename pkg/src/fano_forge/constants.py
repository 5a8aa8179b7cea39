"""Physical constants (CODATA 2018) and unit helpers."""

import math

HBAR = 1.054571817e-34  # J s
C_LIGHT = 299792458.0  # m / s
TWO_PI = 2.0 * math.pi

FEMTONEWTON = 1e-15


def hz_to_angular(f_hz: float) -> float:
    return f_hz * TWO_PI


def angular_to_hz(omega: float) -> float:
    return omega / TWO_PI
