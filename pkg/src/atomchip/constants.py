"""Physical constants and unit conversion factors.

All internal computation is in SI units.  Convenience units (gauss,
micrometres, kilohertz, ...) appear only at configuration and CLI
boundaries; multiply by the factors below to convert into SI.
"""

import math

# fundamental constants
MU_0 = 4.0e-7 * math.pi        # vacuum permeability, T*m/A
PLANCK = 6.62607e-34           # J*s
HBAR = PLANCK / (2.0 * math.pi)
BOLTZMANN = 1.38065e-23        # J/K
BOHR_MAGNETON = 9.27401e-24    # J/T

# rubidium-87
RB87_MASS = 1.44316e-25              # kg
RB87_SCATTERING_LENGTH = 5.29e-9     # m, ~100 Bohr radii (handbook value)

STANDARD_GRAVITY = 9.80665     # m/s^2

# conversion factors: value_in_unit * FACTOR -> SI
GAUSS = 1.0e-4        # T
UM = 1.0e-6           # m
NM = 1.0e-9           # m
MM = 1.0e-3           # m
KHZ = 1.0e3           # Hz
MS = 1.0e-3           # s
US = 1.0e-6           # s
DEG = math.pi / 180.0  # rad
