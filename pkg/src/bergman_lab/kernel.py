"""Reproducing kernel series for the weighted Bergman space on the ball.

For a radial weight rho on B_n the kernel is a power series in the inner
product,

    K(z, w) = sum_{d>=0} c_d <z,w>^d,
    c_d = (d+n-1)! / (2 d! n! rho_{2n-1+2d}),

and the radial derivative applied in z multiplies term d by d.  The slice
series

    g(lam) = sum_{d>=1} Gamma(d+n)/Gamma(d) * lam^{d-1} / rho_{2n-1+2d}

ties the two together: R K(z,w) = <z,w> g(<z,w>) / (2 Gamma(n+1)), and the
n-th z-derivative of the corresponding disk kernel is g(z conj(w)) conj(w)^n / 2.

Everything is computed in log space from log-Gamma and log-moments, so
coefficient tables stay finite for weights whose moments underflow, and
series sums are rescaled so only a genuinely out-of-range result overflows.

Truncation control: a partial sum is accepted once its tail is certified
below tolerance by whichever of two geometric envelopes is sharper: the
moment lower bound rho_s >= C_eps (1-eps)^s with eps = (1-|t|)/2 (valid for
every radial weight), or the observed decay ratio of the computed terms
(valid once term ratios decrease, which holds past the peak for all weight
families here; the doubling-stability property test guards it).
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import NumericRangeError, QuadratureError, TruncationError
from .quadrature import BallPoint, inner
from .weights import MomentTable

__all__ = [
    "KernelCoeffs",
    "KernelEvalInfo",
    "build_coeffs",
    "eval_kernel",
    "eval_g",
    "eval_rk",
    "eval_disk_kernel_deriv",
    "kernel_norm_sq",
    "rk_circle_mean",
    "kernel_values_many",
    "g_values_many",
]

_LOG_MAX = 709.0
_RATIO_WINDOW = 16


@dataclass(frozen=True)
class KernelEvalInfo:
    """Truncation metadata for one series evaluation."""

    degree_used: int
    tail_bound_rel: float
    tail_bound_abs: float


class KernelCoeffs:
    """Log-space kernel coefficients log c_d for degrees 0..d_max.

    Construction is lazy: an initial block is built and the table grows by
    doubling, under a lock, whenever an evaluation needs deeper degrees.
    Extension is idempotent, so concurrent readers are safe.
    """

    def __init__(self, table: MomentTable, n: int, d_max: int = 4096,
                 initial: int = 256):
        if n < 1:
            raise ValueError("n must be >= 1")
        if d_max < 1:
            raise ValueError("d_max must be >= 1")
        self.table = table
        self.n = n
        self.d_max = d_max
        self._lock = threading.RLock()
        self._log_coeffs = np.empty(0)
        self._log_moms = np.empty(0)
        self.ensure(min(initial, d_max) + 1)

    @property
    def built(self) -> int:
        return self._log_coeffs.size

    @property
    def log_coeffs(self) -> np.ndarray:
        return self._log_coeffs

    @property
    def log_moments(self) -> np.ndarray:
        """log rho_{2n-1+2d} for the built degrees."""
        return self._log_moms

    def ensure(self, count: int):
        """Grow the table to at least `count` coefficients (capped at d_max+1)."""
        count = min(count, self.d_max + 1)
        if self.built >= count:
            return
        with self._lock:
            if self.built >= count:
                return
            lo = self.built
            n = self.n
            new_moms = self.table.log_moments_arith(2 * n - 1 + 2 * lo, 2.0, count - lo)
            d = np.arange(lo, count, dtype=float)
            new_coeffs = (gammaln(d + n) - gammaln(d + 1) - gammaln(n + 1)
                          - math.log(2.0) - new_moms)
            self._log_moms = np.concatenate([self._log_moms, new_moms])
            self._log_coeffs = np.concatenate([self._log_coeffs, new_coeffs])

    def log_c(self, d: int) -> float:
        self.ensure(d + 1)
        return float(self._log_coeffs[d])


def build_coeffs(t: MomentTable, n: int, d_max: int = 4096,
                 initial: int = 256) -> KernelCoeffs:
    """Kernel coefficient table for dimension n over the given moment table."""
    return KernelCoeffs(t, n, d_max=d_max, initial=initial)


# ----------------------------------------------------------------------
# Truncation machinery
# ----------------------------------------------------------------------

def _log_terms(k: KernelCoeffs, abs_t: float, degree_weight: int) -> np.ndarray:
    """log |term_d| over built degrees: log c_d + m log d + d log|t|.

    degree_weight m = 0 for the kernel itself, 1 for the radial-derivative
    series sum d c_d t^d.  Degree 0 of the m = 1 series is -inf.
    """
    d = np.arange(k.built, dtype=float)
    out = k.log_coeffs + d * math.log(abs_t)
    if degree_weight:
        with np.errstate(divide="ignore"):
            out = out + degree_weight * np.log(d)
    return out


def _epsilon_tail_log(k: KernelCoeffs, abs_t: float, D: int, degree_weight: int):
    """log of the moment-envelope tail bound past degree D, or +inf."""
    n = k.n
    eps = 0.5 * (1.0 - abs_t)
    log_one_minus_eps = math.log1p(-eps)
    q = abs_t * math.exp(-2.0 * log_one_minus_eps)
    if q >= 1.0:
        return math.inf
    upto = min(65, k.built)
    d = np.arange(upto, dtype=float)
    log_c_eps = float(np.min(k.log_moments[:upto]
                             - (2 * n - 1 + 2 * d) * log_one_minus_eps))
    log_a = -math.log(2 * n) - (2 * n - 1) * log_one_minus_eps - log_c_eps
    m = degree_weight
    kappa = q * (D + 1 + n) / (D + 2) * ((D + 2) / (D + 1)) ** m
    if kappa >= 1.0:
        return math.inf
    log_binom = gammaln(D + n + 1) - gammaln(D + 2) - gammaln(n)
    return (log_a + m * math.log(D + 1) + log_binom
            + (D + 1) * math.log(q) - math.log1p(-kappa))


def _certify(k: KernelCoeffs, abs_t: float, tol_rel: float, degree_weight: int):
    """Pick the truncation degree D and its certified relative tail bound.

    Returns (D, log_terms, tail_rel).  Extends the coefficient table as
    needed; raises TruncationError if no degree within d_max certifies.
    """
    if tol_rel <= 0:
        raise ValueError("tolerance must be positive")
    log_tol = math.log(tol_rel)
    while True:
        lt = _log_terms(k, abs_t, degree_weight)
        start = 1 if degree_weight else 0
        finite = lt[start:]
        cum = np.logaddexp.accumulate(lt) if start == 0 else \
            np.concatenate([[-np.inf], np.logaddexp.accumulate(finite)])
        n_terms = lt.size
        if n_terms - start > _RATIO_WINDOW + 2:
            diffs = finite[1:] - finite[:-1]
            windows = np.lib.stride_tricks.sliding_window_view(diffs, _RATIO_WINDOW)
            rhat = windows.max(axis=1)  # rhat[j]: max ratio over degrees ending at j+window
            # candidate D = start + window + j for j = 0.., tail starts at D+1
            ds = np.arange(rhat.size) + start + _RATIO_WINDOW
            with np.errstate(invalid="ignore", divide="ignore"):
                ok_ratio = rhat < -1.0e-12
                tail_log = np.where(
                    ok_ratio,
                    lt[np.minimum(ds, n_terms - 1)] + rhat - np.log1p(-np.exp(rhat)),
                    np.inf)
                ok = ok_ratio & (tail_log <= log_tol + cum[np.minimum(ds, n_terms - 1)])
            hit = np.flatnonzero(ok)
            if hit.size:
                D = int(ds[hit[0]])
                bound_log = min(float(tail_log[hit[0]]),
                                _epsilon_tail_log(k, abs_t, D, degree_weight))
                return D, lt, math.exp(bound_log - cum[D])
        # epsilon envelope may certify the full built prefix even when the
        # ratio test cannot (e.g. short tables)
        D = n_terms - 1
        eps_log = _epsilon_tail_log(k, abs_t, D, degree_weight)
        if eps_log <= log_tol + cum[D]:
            return D, lt, math.exp(eps_log - cum[D])
        if k.built >= k.d_max + 1:
            scale = float(lt.max())
            with np.errstate(under="ignore", over="ignore"):
                partial = float(np.exp(scale) * np.sum(np.exp(lt - scale)))
            raise TruncationError(
                f"tail not certified below {tol_rel:.1e} within d_max={k.d_max} "
                f"at |t|={abs_t:.6g}",
                partial_sum=partial, degree_used=D,
                tail_bound=math.exp(eps_log) if math.isfinite(eps_log) else None)
        k.ensure(min(2 * max(k.built, 1), k.d_max + 1))


def _scaled_complex_sum(log_mags: np.ndarray, angles: np.ndarray):
    """sum exp(log_mags) * e^{i angles} with overflow-safe rescaling."""
    scale = float(np.max(log_mags))
    if not math.isfinite(scale):
        return 0.0 + 0.0j
    with np.errstate(under="ignore"):
        mags = np.exp(log_mags - scale)
    val = complex(np.sum(mags * np.cos(angles)), np.sum(mags * np.sin(angles)))
    mag = abs(val)
    if mag > 0.0 and scale + math.log(mag) > _LOG_MAX:
        raise NumericRangeError("series value exceeds double range")
    return val * math.exp(scale)


def _series_at(k: KernelCoeffs, t: complex, tol: float, degree_weight: int):
    """Truncated sum_{d} d^m c_d t^d with certified tail < tol (relative)."""
    abs_t = abs(t)
    if abs_t >= 1.0:
        raise ValueError("series argument must satisfy |t| < 1")
    if abs_t == 0.0:
        if degree_weight:
            return 0.0 + 0.0j, KernelEvalInfo(0, 0.0, 0.0)
        c0 = math.exp(k.log_c(0))
        return complex(c0), KernelEvalInfo(0, 0.0, 0.0)
    D, lt, tail_rel = _certify(k, abs_t, tol, degree_weight)
    theta = math.atan2(t.imag, t.real)
    d = np.arange(D + 1)
    value = _scaled_complex_sum(lt[:D + 1], theta * d)
    return value, KernelEvalInfo(D, tail_rel, tail_rel * abs(value))


# ----------------------------------------------------------------------
# Public evaluators
# ----------------------------------------------------------------------

def eval_kernel(k: KernelCoeffs, z: BallPoint, w: BallPoint, tol: float = 1.0e-10,
                return_info: bool = False):
    """K(z, w) = sum c_d <z,w>^d, truncated with certified relative tail < tol."""
    value, info = _series_at(k, inner(z, w), tol, 0)
    return (value, info) if return_info else value


def eval_rk(k: KernelCoeffs, z: BallPoint, w: BallPoint, tol: float = 1.0e-10,
            return_info: bool = False):
    """Radial derivative R K(z, w) = <z,w> g(<z,w>) / (2 Gamma(n+1)).

    Numerically identical to the term-by-term derivative sum d c_d <z,w>^d;
    the test suite checks the two routes against each other.
    """
    t = inner(z, w)
    if t == 0:
        return (0.0j, KernelEvalInfo(0, 0.0, 0.0)) if return_info else 0.0j
    g, info = _eval_g_scalar(k, t, tol)
    value = t * g / (2.0 * math.gamma(k.n + 1))
    return (value, info) if return_info else value


def _eval_g_scalar(k: KernelCoeffs, lam: complex, tol: float):
    # g(lam) = 2 Gamma(n+1) * sum_{d>=1} d c_d lam^{d-1}
    rk_sum, info = _series_at(k, lam, tol, 1)
    return 2.0 * math.gamma(k.n + 1) * rk_sum / lam, info


def eval_g(k: KernelCoeffs, lam: complex, tol: float = 1.0e-10,
           return_info: bool = False):
    """Slice series g(lam) = sum_{d>=1} Gamma(d+n)/Gamma(d) lam^{d-1} / rho_{2n-1+2d}."""
    lam = complex(lam)
    if abs(lam) >= 1.0:
        raise ValueError("|lambda| must be < 1")
    if lam == 0:
        value = 2.0 * math.gamma(k.n + 1) * math.exp(k.log_c(1))
        info = KernelEvalInfo(1, 0.0, 0.0)
    else:
        value, info = _eval_g_scalar(k, lam, tol)
    return (value, info) if return_info else value


def eval_disk_kernel_deriv(k: KernelCoeffs, z: complex, w: complex,
                           order: int | None = None, tol: float = 1.0e-10):
    """n-th z-derivative of the one-dimensional kernel with the same weight:

        d^n/dz^n K1(z, w) = g(z conj(w)) conj(w)^n / 2.

    Only order n (the table's dimension) is supported; that is the order for
    which the g identity holds.
    """
    n = k.n
    if order is not None and order != n:
        raise ValueError("only derivative order n is supported")
    z, w = complex(z), complex(w)
    if abs(z) >= 1.0 or abs(w) >= 1.0:
        raise ValueError("|z| and |w| must be < 1")
    if w == 0:
        return 0.0j
    return 0.5 * eval_g(k, z * w.conjugate(), tol) * w.conjugate() ** n


def kernel_norm_sq(k: KernelCoeffs, z: BallPoint, tol: float = 1.0e-10,
                   return_info: bool = False):
    """Squared Bergman norm of K(., z): sum c_d |z|^{2d} = K(z, z)."""
    t = z.norm ** 2
    value, info = _series_at(k, complex(t), tol, 0)
    result = float(value.real)
    return (result, info) if return_info else result


# ----------------------------------------------------------------------
# Batch / angular evaluation
# ----------------------------------------------------------------------

def _values_many(k: KernelCoeffs, ts: np.ndarray, tol: float, degree_weight: int):
    ts = np.asarray(ts, dtype=complex)
    flat = ts.ravel()
    if not np.any(flat != 0):
        fill = math.exp(k.log_c(0)) if degree_weight == 0 else 0.0
        return np.full(ts.shape, fill, dtype=complex)
    amax = float(np.max(np.abs(flat)))
    D, _, _ = _certify(k, amax, tol, degree_weight)
    d = np.arange(D + 1, dtype=float)
    log_c = k.log_coeffs[:D + 1].copy()
    if degree_weight:
        with np.errstate(divide="ignore"):
            log_c += degree_weight * np.log(d)
    if float(np.max(log_c)) > _LOG_MAX - 10.0:
        raise NumericRangeError(
            "coefficients exceed double range; use the scalar evaluators")
    with np.errstate(under="ignore"):
        c = np.exp(log_c)
    # iterative powers: D cheap vector multiplies instead of complex exps
    vals = np.full(flat.shape, c[0], dtype=complex)
    p = np.ones(flat.shape, dtype=complex)
    for dd in range(1, D + 1):
        p = p * flat
        if c[dd] != 0.0:
            vals += c[dd] * p
    return vals.reshape(ts.shape)


def kernel_values_many(k: KernelCoeffs, ts, tol: float = 1.0e-10) -> np.ndarray:
    """K as a scalar series evaluated at an array of arguments t = <z,w>.

    Plain (unscaled) arithmetic: intended for |t| away from 1 where the
    values fit comfortably in double range.
    """
    return _values_many(k, ts, tol, 0)


def g_values_many(k: KernelCoeffs, ts, tol: float = 1.0e-10) -> np.ndarray:
    """g evaluated at an array of arguments."""
    ts = np.asarray(ts, dtype=complex)
    rk = _values_many(k, ts, tol, 1)
    out = np.empty_like(rk)
    nz = ts != 0
    out[nz] = 2.0 * math.gamma(k.n + 1) * rk[nz] / ts[nz]
    out[~nz] = 2.0 * math.gamma(k.n + 1) * math.exp(k.log_c(1))
    return out


def rk_circle_mean(k: KernelCoeffs, xi: float, tol: float = 1.0e-8,
                   start_nodes: int = 256, max_nodes: int = 1 << 20) -> float:
    """Angular mean of |R K| on the circle of radius xi:

        (1/2 pi) int |sum_d d c_d (xi e^{i theta})^d| d theta.

    The polynomial is evaluated on uniform angle grids by FFT (exactly the
    trapezoid values), and the grid is doubled until two levels agree.  The
    node count must resolve the angular peak of width ~(1 - xi), so deep
    radii climb to large FFTs; these stay cheap.

    Computed with an overall exponential scale factor, so the only failure
    mode is a result whose true magnitude exceeds double range.
    """
    if not (0.0 <= xi < 1.0):
        raise ValueError("xi must be in [0, 1)")
    if xi == 0.0:
        return 0.0
    D, lt, _ = _certify(k, xi, tol, 1)
    scale = float(np.max(lt[:D + 1]))
    with np.errstate(under="ignore"):
        gamma = np.exp(lt[:D + 1] - scale)
    n_nodes = start_nodes
    prev = None
    while n_nodes <= max_nodes:
        pad = (-gamma.size) % n_nodes
        wrapped = np.pad(gamma, (0, pad)).reshape(-1, n_nodes).sum(axis=0)
        vals = np.fft.ifft(wrapped) * n_nodes
        cur = float(np.mean(np.abs(vals)))
        if prev is not None and abs(cur - prev) <= tol * abs(cur):
            if cur > 0.0 and scale + math.log(cur) > _LOG_MAX:
                raise NumericRangeError("circle mean exceeds double range")
            return cur * math.exp(scale)
        prev = cur
        n_nodes *= 2
    raise QuadratureError("circle mean did not stabilize", partial_value=prev)
