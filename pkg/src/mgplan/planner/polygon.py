"""Inner polygonal approximation of the thermal loading circle."""
from __future__ import annotations

import math

DEFAULT_SIDES = 12


class DegenerateCapacity(ValueError):
    """Line capacity is zero or negative; no polygon exists."""


def polygon_linearize(s_max: float, sides: int = DEFAULT_SIDES
                      ) -> list[tuple[float, float, float]]:
    """Half-plane rows (a_p, a_q, cap) meaning a_p*p + a_q*q <= cap*(z0+z).

    The intersection is the regular `sides`-gon inscribed in the circle of
    radius s_max, so every feasible (p, q) satisfies the quadratic limit.
    An even side count >= 4 keeps the polygon symmetric in both flow
    directions.
    """
    if s_max <= 0:
        raise DegenerateCapacity(f"line capacity {s_max} must be positive")
    if sides < 4 or sides % 2 != 0:
        raise ValueError("polygon needs an even number of sides, at least 4")
    cap = s_max * math.cos(math.pi / sides)
    rows = []
    for j in range(sides):
        theta = 2.0 * math.pi * j / sides
        rows.append((math.cos(theta), math.sin(theta), cap))
    return rows
