"""Integer-order Bessel functions of the first kind by ascending series.

Only meant for the small arguments used by probe circles (``k * radius``
well below 1), where the series converges in a handful of terms.
"""

import math


def besselj(m: int, x: float, tol=1e-17, max_terms=200) -> float:
    """``J_m(x)`` for integer ``m``; ``J_{-m} = (-1)^m J_m``."""
    m = int(m)
    sign = -1.0 if (m < 0 and m % 2) else 1.0
    m = abs(m)
    half = 0.5 * x
    term = half**m / math.factorial(m)
    total = term
    q = -half * half
    for s in range(1, max_terms):
        term *= q / (s * (s + m))
        total += term
        if abs(term) <= tol * abs(total):
            break
    return sign * total
