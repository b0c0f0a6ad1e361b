"""Integer-order Bessel functions J_l, Y_l and their first derivatives.

Values come from scipy's AMOS/Cephes routines for moderate arguments.  For
x >= 1000 (always beyond the turning point since |l| <= 200) the orders are
generated by upward recurrence from J0, J1, Y0, Y1, which keeps the error
near 3e-11 of the modulus where the direct high-order routines drift to
~1e-10.  Derivatives use f'_l = (f_{l-1} - f_{l+1}) / 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .errors import ArgumentOverflow, NonPositiveArgument, OrderOutOfRange

MAX_ORDER = 200
MAX_ARGUMENT = 1e6
RECURRENCE_THRESHOLD = 1000.0
_Y_LIMIT = 1e300


@dataclass(frozen=True)
class BesselEval:
    order: int
    x: float
    j: float
    y: float
    jp: float
    yp: float

    def wronskian_residual(self) -> float:
        """|x (J Y' - J' Y) pi/2 - 1|, zero for exact values."""
        return abs(self.x * (self.j * self.yp - self.jp * self.y) * np.pi / 2 - 1.0)


def _check(l: int, x) -> np.ndarray:
    if int(l) != l:
        raise OrderOutOfRange(f"order must be an integer, got {l!r}")
    if abs(l) > MAX_ORDER:
        raise OrderOutOfRange(f"|l| = {abs(l)} exceeds {MAX_ORDER}")
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise NonPositiveArgument("Bessel argument must be positive")
    if np.any(x > MAX_ARGUMENT):
        raise ArgumentOverflow(f"argument exceeds {MAX_ARGUMENT:g}")
    return x


def _upward(n: int, x: np.ndarray):
    """J and Y of orders n-1, n, n+1 (n >= 0) by forward recurrence."""
    jm, j = sp.j0(x), sp.j1(x)
    ym, y = sp.y0(x), sp.y1(x)
    # (jm, j) hold orders (m-1, m); start at m = 1
    if n == 0:
        return (-j, jm, j), (-y, ym, y)
    for m in range(1, n):
        jm, j = j, (2.0 * m / x) * j - jm
        ym, y = y, (2.0 * m / x) * y - ym
    jn1 = (2.0 * n / x) * j - jm
    yn1 = (2.0 * n / x) * y - ym
    return (jm, j, jn1), (ym, y, yn1)


def _direct(n: int, x: np.ndarray):
    orders = (n - 1, n, n + 1)
    return tuple(sp.jv(o, x) for o in orders), tuple(sp.yv(o, x) for o in orders)


def bessel_jy(l: int, x):
    """Vectorised J_l, Y_l, J_l', Y_l' for integer ``l`` and positive ``x``.

    Returns four arrays (or scalars for scalar input).  Negative orders are
    folded onto |l| with the (-1)^l reflection.
    """
    x = _check(l, x)
    n = abs(int(l))
    scalar = x.ndim == 0
    x = np.atleast_1d(x)

    big = x >= RECURRENCE_THRESHOLD
    js = [np.empty_like(x) for _ in range(3)]
    ys = [np.empty_like(x) for _ in range(3)]
    for mask, fn in ((big, _upward), (~big, _direct)):
        if np.any(mask):
            jj, yy = fn(n, x[mask])
            for i in range(3):
                js[i][mask] = jj[i]
                ys[i][mask] = yy[i]

    if np.any(~np.isfinite(ys[2])) or np.any(np.abs(ys[2]) > _Y_LIMIT):
        raise ArgumentOverflow(f"Y_{n + 1} overflows at x = {x.min():.3e}")

    j, y = js[1], ys[1]
    jp = 0.5 * (js[0] - js[2])
    yp = 0.5 * (ys[0] - ys[2])
    if l < 0 and n % 2 == 1:
        j, y, jp, yp = -j, -y, -jp, -yp
    if scalar:
        return float(j[0]), float(y[0]), float(jp[0]), float(yp[0])
    return j, y, jp, yp


def bessel_pair(l: int, x: float) -> BesselEval:
    """Evaluate J_l(x), Y_l(x) and their derivatives at a single point."""
    j, y, jp, yp = bessel_jy(l, float(x))
    return BesselEval(int(l), float(x), j, y, jp, yp)
