"""Analytic per-snapshot flop counts for the compared beamformers.

Closed-form totals (additions plus multiplications) as functions of the
sensor count M.  Only LOCSME and LOCSME-CG are implemented in this
package; the remaining entries exist purely for complexity comparison.
The LCWC entry folds in its nominal 50 inner iterations per snapshot.
"""

import math

_FORMULAS = {
    "LOCSME": lambda m: 4 * m**3 + 3 * m**2 + 20 * m,
    "LOCSME-SG": lambda m: 15 * m**2 + 30 * m,
    "SQP": lambda m: m**3.5 + 7 * m**3 + 5 * m**2 + 3 * m,
    "LOCME": lambda m: 2 * m**3 + 4 * m**2 + 5 * m,
    "LCWC": lambda m: 100 * m**2 + 350 * m,
    "LOCSME-CG": lambda m: 13 * m**2 + 77 * m,
}


def known_algorithms():
    """Canonical names accepted by :func:`flop_count`."""
    return tuple(_FORMULAS)


def flop_count(name: str, num_sensors: int) -> int:
    """Evaluate an algorithm's flop polynomial at ``num_sensors``.

    The SQP entry contains a half-integer power, so the value is rounded
    to the nearest integer; all other entries are exact.
    """
    if num_sensors < 1:
        raise ValueError(f"num_sensors must be >= 1, got {num_sensors}")
    key = name.upper()
    if key not in _FORMULAS:
        raise ValueError(
            f"unknown algorithm {name!r}; known: {', '.join(_FORMULAS)}"
        )
    value = _FORMULAS[key](num_sensors)
    return int(value) if float(value).is_integer() else round(value)


def flop_table(num_sensors_grid):
    """Rows of (algorithm, M, flops) over a sensor-count grid."""
    rows = []
    for name in _FORMULAS:
        for m in num_sensors_grid:
            rows.append((name, int(m), flop_count(name, m)))
    return rows
