"""Unit conversions between laboratory and atomic units."""

#: Bohr radii per micrometer.
BOHR_PER_UM = 18897.26

#: Microseconds per atomic unit of time.
US_PER_AU_TIME = 2.4188843e-11

#: Default memory budget for dense objects (bytes).
DEFAULT_MEMORY_BUDGET = 16 * 1024**3


def um_to_bohr(x):
    return x * BOHR_PER_UM


def au_time_to_us(t):
    return t * US_PER_AU_TIME


def us_to_au_time(t):
    return t / US_PER_AU_TIME
