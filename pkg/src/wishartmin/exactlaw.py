"""Exact finite-size gap probability and smallest-eigenvalue density.

For a p x n data matrix with population eigenvalues lam_1..lam_p the gap
probability that every eigenvalue of W W^dag exceeds t is

    E(t) = exp(-t * tr(beta/(2*lam))) / det(lam)^gamma * det^(beta/2)[Q_ij(t)]

with a kernel matrix of dimension 2*gamma/beta whose entries are finite
polynomials in t,

    Q_ij(t) = q_ij * sum_{k=0}^{min(p, a_ij)} e_k(lam) * t^(p-k) / (a_ij - k)!,

where a_ij = p + 2*(gamma+1)/beta - i - j (entries with a_ij < 0 vanish;
the a_ij = 0 entry keeps its finite k = 0 term), e_k are the elementary
symmetric polynomials and q_ij = (j-i)*(-1)^(i+j) for beta=1 and (-1)^(i+1)
for beta=2.  The density of the smallest eigenvalue is -dE/dt, expanded
into determinants of kernels G^(l) that replace row l of Q by its term-wise
t-derivative.

All coefficients and determinants live in signed-log form; plain floats
appear only at the API boundary.  A vectorized grid evaluator (row-scaled
log-space determinants over a stacked array) is provided for large sample
batches; it matches the scalar signed-log path to near machine precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import SignedLogMatrix, logdet_lu, sqrt_det_antisymmetric
from .numerics import (
    SLOG_ZERO,
    SignedLog,
    factorial_signedlog,
    signedlog_add,
    signedlog_from_float,
    signedlog_inv,
    signedlog_mul,
    signedlog_pow_int,
    signedlog_to_float,
)
from .spectra import (
    EmpiricalSpectrum,
    EnsembleConfig,
    elementary_symmetric,
    inverse_trace_half_beta,
)

__all__ = [
    "KernelPolynomial",
    "DensityResult",
    "q_prefactor",
    "build_q_polynomials",
    "build_g_polynomials",
    "ExactLaw",
    "gap_probability",
    "pmin_density",
    "pmin_density_detailed",
]


@dataclass(frozen=True, slots=True)
class KernelPolynomial:
    """One kernel entry: sum_{k=0}^{K} coeffs[k] * t^(degree-k).

    ``coeffs`` is empty for an identically zero entry (Heaviside cutoff or
    q_ij = 0).  ``alpha`` is the factorial cutoff index of the entry.
    """

    i: int
    j: int
    alpha: int
    degree: int
    coeffs: tuple

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    def evaluate(self, t: float) -> SignedLog:
        """Horner evaluation in signed-log arithmetic; t must be >= 0."""
        if not self.coeffs:
            return SLOG_ZERO
        tail = self.degree - (len(self.coeffs) - 1)
        if t == 0.0:
            return self.coeffs[-1] if tail == 0 else SLOG_ZERO
        slog_t = signedlog_from_float(t)
        acc = self.coeffs[0]
        for c in self.coeffs[1:]:
            acc = signedlog_add(signedlog_mul(acc, slog_t), c)
        if tail:
            acc = signedlog_mul(acc, signedlog_pow_int(slog_t, tail))
        return acc

    def derivative(self) -> "KernelPolynomial":
        """Term-wise d/dt; the degree drops by one, constants disappear."""
        new_coeffs = []
        for k, c in enumerate(self.coeffs):
            power = self.degree - k
            if power == 0:
                break
            new_coeffs.append(signedlog_mul(c, signedlog_from_float(float(power))))
        return KernelPolynomial(
            i=self.i, j=self.j, alpha=self.alpha, degree=self.degree - 1,
            coeffs=tuple(new_coeffs),
        )


def q_prefactor(i: int, j: int, config: EnsembleConfig) -> int:
    """Sign/weight factor of kernel entry (i, j), 1-based indices."""
    dim = config.kernel_dim
    if not (1 <= i <= dim and 1 <= j <= dim):
        raise IndexError(f"kernel indices must lie in 1..{dim}, got ({i}, {j})")
    if config.beta == 1:
        return (j - i) * (-1) ** (i + j)
    return (-1) ** (i + 1)


def build_q_polynomials(spectrum: EmpiricalSpectrum, config: EnsembleConfig):
    """Full kernel table of KernelPolynomial, indexed [i-1][j-1].

    The Heaviside cutoff uses the convention theta(0) = 1: an entry with
    a_ij = 0 keeps its single finite k = 0 term.
    """
    if spectrum.p != config.p:
        raise ValueError(f"spectrum has p={spectrum.p} but config expects p={config.p}")
    p = config.p
    dim = config.kernel_dim
    e = elementary_symmetric(spectrum)
    kappa = 2 * (config.gamma + 1) // config.beta
    table = []
    for i in range(1, dim + 1):
        row = []
        for j in range(1, dim + 1):
            q = q_prefactor(i, j, config)
            alpha = p + kappa - i - j
            if q == 0 or alpha < 0:
                row.append(KernelPolynomial(i=i, j=j, alpha=alpha, degree=p, coeffs=()))
                continue
            coeffs = tuple(
                signedlog_mul(
                    signedlog_from_float(q * e[k]),
                    signedlog_inv(factorial_signedlog(alpha - k)),
                )
                for k in range(min(p, alpha) + 1)
            )
            row.append(KernelPolynomial(i=i, j=j, alpha=alpha, degree=p, coeffs=coeffs))
        table.append(tuple(row))
    return tuple(table)


def build_g_polynomials(l: int, q_table):
    """Kernel table for G^(l): row l differentiated, other rows shared."""
    dim = len(q_table)
    if not (1 <= l <= dim):
        raise IndexError(f"row index must lie in 1..{dim}, got {l}")
    rows = list(q_table)
    rows[l - 1] = tuple(poly.derivative() for poly in q_table[l - 1])
    return tuple(rows)


@dataclass(frozen=True, slots=True)
class DensityResult:
    """Density value plus a flag for the finite-difference fallback path."""

    value: float
    used_fallback: bool = False


class ExactLaw:
    """Prebuilt kernel polynomials for one (spectrum, config) pair.

    Building the tables is O(kernel_dim^2 * p); evaluations afterwards are
    pure and safe to share across threads.
    """

    def __init__(self, spectrum: EmpiricalSpectrum, config: EnsembleConfig):
        self.spectrum = spectrum
        self.config = config
        self.trace_rate = inverse_trace_half_beta(spectrum, config)
        self.log_det_lambda = math.fsum(math.log(v) for v in spectrum.lambdas)
        self.q_table = build_q_polynomials(spectrum, config)
        dim = config.kernel_dim
        self.g_tables = tuple(build_g_polynomials(l, self.q_table) for l in range(1, dim + 1))
        self._grid_data = None

    # -- scalar signed-log path ------------------------------------------

    def _log_prefactor(self, t: float) -> float:
        return -self.trace_rate * t - self.config.gamma * self.log_det_lambda

    def _matrix_at(self, t: float, table) -> SignedLogMatrix:
        return SignedLogMatrix([[poly.evaluate(t) for poly in row] for row in table])

    def _det_q(self, t: float) -> SignedLog:
        mat = self._matrix_at(t, self.q_table)
        if self.config.beta == 1:
            return sqrt_det_antisymmetric(mat)  # already the 1/2 power
        return logdet_lu(mat)

    def gap(self, t: float) -> float:
        """Gap probability E(t); 1 at t = 0, decaying to 0."""
        if t < 0 or not math.isfinite(t):
            raise ValueError(f"t must be non-negative and finite, got {t}")
        log_pref = self._log_prefactor(t)
        if self.config.kernel_dim == 0:
            return math.exp(log_pref)
        det = self._det_q(t)  # already det^(1/2) for beta=1
        if det.sign <= 0:
            return 0.0
        val = signedlog_to_float(signedlog_mul(det, SignedLog.from_logmag(1, log_pref)))
        return val

    def density(self, t: float) -> float:
        return self.density_detailed(t).value

    def density_detailed(self, t: float) -> DensityResult:
        """Smallest-eigenvalue density -dE/dt at t, in expanded determinant form.

        For beta=1 a kernel determinant below the noise floor would poison
        the det^(1/2) denominator; in that case the value falls back to a
        5-point central finite difference of the gap probability (relative
        step 1e-6) and the result is flagged.
        """
        if t < 0 or not math.isfinite(t):
            raise ValueError(f"t must be non-negative and finite, got {t}")
        beta = self.config.beta
        term1 = self.trace_rate * self.gap(t)
        if self.config.kernel_dim == 0:
            return DensityResult(term1)
        g_sum = SLOG_ZERO
        for table in self.g_tables:
            g_sum = signedlog_add(g_sum, logdet_lu(self._matrix_at(t, table)))
        log_pref = self._log_prefactor(t)
        if beta == 2:
            term2 = signedlog_mul(g_sum, SignedLog.from_logmag(1, log_pref))
        else:
            den = sqrt_det_antisymmetric(self._matrix_at(t, self.q_table))
            if den.sign == 0:
                return DensityResult(self._density_fd(t), used_fallback=True)
            term2 = signedlog_mul(
                signedlog_mul(g_sum, signedlog_inv(den)),
                SignedLog.from_logmag(1, math.log(0.5) + log_pref),
            )
        value = term1 - signedlog_to_float(term2)
        return DensityResult(value if value > 0.0 else 0.0)

    def _density_fd(self, t: float) -> float:
        if t <= 0:
            raise ValueError("finite-difference fallback needs t > 0")
        h = 1e-6 * t
        stencil = (
            self.gap(t - 2 * h) - 8.0 * self.gap(t - h)
            + 8.0 * self.gap(t + h) - self.gap(t + 2 * h)
        )
        value = -stencil / (12.0 * h)
        return value if value > 0.0 else 0.0

    # -- vectorized grid path --------------------------------------------

    def _grid_tables(self):
        """Per-entry arrays (sign, log|coeff| vector, power vector) for the grid path."""
        if self._grid_data is None:
            p = self.config.p
            dim = self.config.kernel_dim
            signs = np.zeros((dim, dim))
            logcs = []
            powers = []
            for i in range(dim):
                lrow, prow = [], []
                for j in range(dim):
                    poly = self.q_table[i][j]
                    if poly.is_zero:
                        lrow.append(np.array([-np.inf]))
                        prow.append(np.array([0.0]))
                    else:
                        signs[i, j] = float(poly.coeffs[0].sign)
                        lrow.append(np.array([c.logmag for c in poly.coeffs]))
                        prow.append(np.array([float(p - k) for k in range(len(poly.coeffs))]))
                logcs.append(lrow)
                powers.append(prow)
            self._grid_data = (signs, logcs, powers)
        return self._grid_data

    def gap_grid(self, ts) -> np.ndarray:
        """Gap probability on an array of t values (vectorized log-space path)."""
        ts = np.asarray(ts, dtype=float)
        if ts.ndim != 1:
            raise ValueError("expected a 1-d array of t values")
        if np.any(~np.isfinite(ts)) or np.any(ts < 0):
            raise ValueError("t values must be non-negative and finite")
        out = np.empty(ts.shape)
        log_pref = -self.trace_rate * ts - self.config.gamma * self.log_det_lambda
        if self.config.kernel_dim == 0:
            return np.exp(log_pref)
        pos = ts > 0
        for idx in np.nonzero(~pos)[0]:
            out[idx] = self.gap(ts[idx])
        tpos = ts[pos]
        if tpos.size:
            out[pos] = self._gap_grid_positive(tpos, log_pref[pos])
        return out

    def _gap_grid_positive(self, ts, log_pref):
        dim = self.config.kernel_dim
        beta = self.config.beta
        signs, logcs, powers = self._grid_tables()
        logt = np.log(ts)
        n = ts.size
        logm = np.full((n, dim, dim), -np.inf)
        for i in range(dim):
            for j in range(dim):
                if signs[i, j] == 0.0:
                    continue
                expo = logcs[i][j][:, None] + powers[i][j][:, None] * logt[None, :]
                top = expo.max(axis=0)
                logm[:, i, j] = top + np.log(np.exp(expo - top[None, :]).sum(axis=0))
        row_top = logm.max(axis=2)
        mats = signs[None, :, :] * np.exp(logm - row_top[:, :, None])
        sgn, logabs = np.linalg.slogdet(mats)
        log_det = logabs + row_top.sum(axis=1)
        power = 0.5 * beta
        vals = np.exp(log_pref + power * log_det)
        vals[sgn <= 0] = 0.0
        return vals


@lru_cache(maxsize=32)
def _law(spectrum: EmpiricalSpectrum, config: EnsembleConfig) -> ExactLaw:
    return ExactLaw(spectrum, config)


def gap_probability(t: float, spectrum: EmpiricalSpectrum, config: EnsembleConfig) -> float:
    """E(t): probability that all eigenvalues of W W^dag lie in [t, inf)."""
    return _law(spectrum, config).gap(t)


def pmin_density(t: float, spectrum: EmpiricalSpectrum, config: EnsembleConfig) -> float:
    """Density of the smallest eigenvalue at t > 0."""
    return pmin_density_detailed(t, spectrum, config).value


def pmin_density_detailed(
    t: float, spectrum: EmpiricalSpectrum, config: EnsembleConfig
) -> DensityResult:
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    return _law(spectrum, config).density_detailed(t)
