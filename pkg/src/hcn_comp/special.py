"""Special functions and combinatorial recursions used by the analytic pipeline.

Hosts a vectorized regularized incomplete-gamma pair (series / continued
fraction, branched at ``x = a + 1``), the Gamma CDF, exact binomial tables,
and the complete/partial Bell-polynomial machinery that turns log-Laplace
derivatives into raw weighted moments.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .errors import NumericOverflowError, OrderError

#: Largest derivative order supported by the Bell recursions.
MAX_ORDER = 64

#: Magnitude at which the Bell recursions abort instead of overflowing.
OVERFLOW_GUARD = 1e280

_CONVERGENCE = 1e-15
_MAX_ITER = 2000

#: Exact binomial coefficients C(n, k) for n, k <= MAX_ORDER + 1, computed in
#: integer arithmetic and rounded once on conversion to float64.
BINOMIAL = np.array(
    [
        [float(math.comb(n, k)) if k <= n else 0.0 for k in range(MAX_ORDER + 2)]
        for n in range(MAX_ORDER + 2)
    ]
)


def _lower_series(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Regularized lower incomplete gamma P(a, x) by power series (x < a + 1)."""
    ap = a.copy()
    delta = np.full_like(a, 1.0) / a
    total = delta.copy()
    active = np.ones(a.shape, dtype=bool)
    for _ in range(_MAX_ITER):
        ap[active] += 1.0
        delta[active] *= x[active] / ap[active]
        total[active] += delta[active]
        active &= np.abs(delta) > np.abs(total) * _CONVERGENCE
        if not active.any():
            break
    else:  # pragma: no cover - series converges well inside the branch
        raise RuntimeError("incomplete-gamma series did not converge")
    with np.errstate(divide="ignore"):
        log_prefactor = a * np.log(x) - x - gammaln(a)
    return total * np.exp(log_prefactor)


def _upper_contfrac(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Regularized upper incomplete gamma Q(a, x) by Lentz's continued
    fraction (x >= a + 1)."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = np.full_like(a, 1.0 / tiny)
    d = 1.0 / np.maximum(b, tiny)
    h = d.copy()
    active = np.ones(a.shape, dtype=bool)
    for i in range(1, _MAX_ITER):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        np.copyto(d, tiny, where=np.abs(d) < tiny)
        c = b + an / c
        np.copyto(c, tiny, where=np.abs(c) < tiny)
        d = 1.0 / d
        step = d * c
        h = np.where(active, h * step, h)
        active &= np.abs(step - 1.0) > _CONVERGENCE
        if not active.any():
            break
    else:  # pragma: no cover - continued fraction converges in this branch
        raise RuntimeError("incomplete-gamma continued fraction did not converge")
    log_prefactor = a * np.log(x) - x - gammaln(a)
    return h * np.exp(log_prefactor)


def regularized_gamma_pair(a, x) -> tuple[np.ndarray, np.ndarray]:
    """Regularized incomplete gamma functions ``(P(a, x), Q(a, x))``.

    Vectorized over both arguments (broadcast together).  Requires ``a > 0``
    and ``x >= 0``.
    """
    a_arr, x_arr = np.broadcast_arrays(
        np.asarray(a, dtype=float), np.asarray(x, dtype=float)
    )
    if not np.all(a_arr > 0):
        raise ValueError("shape parameter a must be > 0")
    if not np.all(x_arr >= 0):
        raise ValueError("argument x must be >= 0")
    a_flat = a_arr.ravel().copy()
    x_flat = x_arr.ravel().copy()
    p = np.empty_like(a_flat)
    q = np.empty_like(a_flat)

    zero = x_flat == 0
    series = (x_flat < a_flat + 1.0) & ~zero
    confrac = ~series & ~zero

    p[zero] = 0.0
    q[zero] = 1.0
    if series.any():
        p_s = _lower_series(a_flat[series], x_flat[series])
        p[series] = p_s
        q[series] = 1.0 - p_s
    if confrac.any():
        q_c = _upper_contfrac(a_flat[confrac], x_flat[confrac])
        q[confrac] = q_c
        p[confrac] = 1.0 - q_c
    return p.reshape(a_arr.shape), q.reshape(a_arr.shape)


def upper_inc_gamma(a, x) -> np.ndarray:
    """Upper incomplete gamma function ``Γ(a, x) = ∫_x^∞ t^{a-1} e^{-t} dt``.

    Vectorized; requires ``a > 0`` and ``x >= 0`` (``x = 0`` gives ``Γ(a)``).
    """
    _, q = regularized_gamma_pair(a, x)
    out = q * np.exp(gammaln(np.asarray(a, dtype=float)))
    return out if out.shape else float(out)


def gamma_cdf(nu: float, theta: float, z) -> np.ndarray:
    """CDF of the Gamma distribution with shape ``nu`` and scale ``theta``.

    Vectorized over ``z``; nonpositive ``z`` maps to 0.
    """
    if not nu > 0:
        raise ValueError(f"shape nu must be > 0, got {nu}")
    if not theta > 0:
        raise ValueError(f"scale theta must be > 0, got {theta}")
    z_arr = np.asarray(z, dtype=float)
    out = np.zeros_like(z_arr, dtype=float)
    pos = z_arr > 0
    if np.any(pos):
        p, _ = regularized_gamma_pair(nu, z_arr[pos] / theta)
        out[pos] = p
    return out if out.shape else float(out)


class BellAccumulator:
    """Incremental complete Bell polynomial recursion.

    Feeding the sequence ``x_1, x_2, ...`` grows the list of complete Bell
    polynomial values ``B_0 = 1, B_1, B_2, ...`` via

        ``B_{n+1} = sum_i C(n, i) B_{n-i} x_{i+1}``.

    A magnitude above :data:`OVERFLOW_GUARD` aborts with
    :class:`NumericOverflowError` rather than silently overflowing.
    """

    def __init__(self):
        self._x: list[float] = []
        self._b: list[float] = [1.0]

    @property
    def values(self) -> np.ndarray:
        """Bell values ``B_0 .. B_n`` computed so far."""
        return np.array(self._b)

    @property
    def order(self) -> int:
        return len(self._b) - 1

    def extend(self, x_next: float) -> float:
        """Append the next argument ``x_{n+1}`` and return ``B_{n+1}``."""
        n = len(self._x)
        if n + 1 > MAX_ORDER:
            raise OrderError(n + 1, MAX_ORDER, "Bell recursion order too large")
        self._x.append(float(x_next))
        b_next = 0.0
        # Values past the guard (including inf) become an explicit error
        # below, so the transient overflow itself need not warn.
        with np.errstate(over="ignore"):
            for i in range(n + 1):
                b_next += BINOMIAL[n, i] * self._b[n - i] * self._x[i]
        if abs(b_next) > OVERFLOW_GUARD or not math.isfinite(b_next):
            raise NumericOverflowError("complete Bell recursion", abs(b_next))
        self._b.append(b_next)
        return b_next


def complete_bell(x: Sequence[float]) -> np.ndarray:
    """Complete Bell polynomials ``B_0 .. B_m`` of the arguments ``x_1 .. x_m``."""
    acc = BellAccumulator()
    for xi in x:
        acc.extend(xi)
    return acc.values


def partial_bell_table(x: Sequence[float], m: int) -> np.ndarray:
    """Partial (incomplete) Bell polynomials ``B_{n,j}(x_1, ..)`` for
    ``0 <= j <= n <= m`` as a lower-triangular table.

    Uses ``B_{n,j} = sum_i C(n-1, i-1) x_i B_{n-i,j-1}``.
    """
    if m > MAX_ORDER:
        raise OrderError(m, MAX_ORDER, "partial Bell order too large")
    if len(x) < m:
        raise ValueError(f"need {m} arguments, got {len(x)}")
    table = np.zeros((m + 1, m + 1))
    table[0, 0] = 1.0
    for n in range(1, m + 1):
        for j in range(1, n + 1):
            acc = 0.0
            for i in range(1, n - j + 2):
                acc += BINOMIAL[n - 1, i - 1] * x[i - 1] * table[n - i, j - 1]
            table[n, j] = acc
    if np.any(np.abs(table) > OVERFLOW_GUARD):
        raise NumericOverflowError("partial Bell recursion", float(np.abs(table).max()))
    return table


def falling_factorial(c: float, j: int) -> float:
    """Falling factorial ``c (c-1) ... (c-j+1)`` with the empty product = 1."""
    out = 1.0
    for i in range(j):
        out *= c - i
    return out


def falling_factorial_faa_di_bruno(
    c: float, g_derivs: Sequence[float], m: int
) -> float:
    """``m``-th derivative of ``g(s) ** c`` from the derivatives of ``g``.

    ``g_derivs`` lists ``g(s), g'(s), ..., g^{(m)}(s)`` at the evaluation
    point; the value ``g(s)`` must be positive so that real powers are
    defined.  Implements Faà di Bruno's formula for the outer map
    ``y -> y**c`` whose ``j``-th derivative is the falling factorial
    ``c^(j) * y**(c-j)``.
    """
    if m < 0:
        raise ValueError(f"derivative order must be >= 0, got {m}")
    if m > MAX_ORDER:
        raise OrderError(m, MAX_ORDER, "Faa di Bruno order too large")
    if len(g_derivs) < m + 1:
        raise ValueError(f"need g and {m} derivatives, got {len(g_derivs)} values")
    g0 = float(g_derivs[0])
    if not g0 > 0:
        raise ValueError(f"g(s) must be > 0 for real powers, got {g0}")
    if m == 0:
        return g0**c
    table = partial_bell_table(list(g_derivs[1 : m + 1]), m)
    out = 0.0
    for j in range(1, m + 1):
        out += falling_factorial(c, j) * g0 ** (c - j) * table[m, j]
    if abs(out) > OVERFLOW_GUARD:
        raise NumericOverflowError("Faa di Bruno evaluation", abs(out))
    return out
