"""Universal hard-edge limit of the smallest-eigenvalue statistics.

In the limit p, n -> infinity at fixed rectangularity, with eigenvalues
measured in units of the local mean level spacing through u = 4*p*eta*t
(eta the mean inverse population eigenvalue), the gap probability becomes
spectrum independent:

    gap(u) = exp(-beta*u/8) * det^(beta/2)[ qt_ij * L0_ij(u) ]

with Bessel-kernel entries

    L(l)_ij(u) = (u/4)^((i+j-kp)/2) * I_{kp + delta(i,l) - i - j}(sqrt(u)),

kp = 2*(gamma+1)/beta, qt_ij = (j-i) for beta=1 and (-1)^(i+1) for beta=2,
and indices running over the kernel dimension 2*gamma/beta.  The density is
the exact u-derivative -d(gap)/du; differentiating one kernel row shifts
its Bessel order up by one and pulls out a factor 1/(2*sqrt(u)), giving

    pmin(u) = beta/8 * gap(u)
              - beta/(4*sqrt(u)) * exp(-beta*u/8)
                * sum_l det[qt*L(l)] / det^(1-beta/2)[qt*L0].

Verified against central differences of gap(u) and against the rescaled
exact finite-p law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exactlaw import DensityResult
from .linalg import SignedLogMatrix, logdet_lu, sqrt_det_antisymmetric
from .numerics import (
    SLOG_ZERO,
    SignedLog,
    bessel_i_signedlog,
    signedlog_add,
    signedlog_from_float,
    signedlog_inv,
    signedlog_mul,
    signedlog_pow_int,
    signedlog_sqrt,
    signedlog_to_float,
)
from .spectra import EmpiricalSpectrum, EnsembleConfig, eta_scale

__all__ = [
    "MicroConfig",
    "make_micro_config",
    "l_kernel",
    "micro_gap",
    "micro_pmin",
    "micro_pmin_detailed",
    "micro_rescale",
    "micro_unscale",
]


@dataclass(frozen=True, slots=True)
class MicroConfig:
    beta: int
    gamma: int
    kappa_prime: int
    kernel_dim: int


def make_micro_config(beta: int, gamma: int) -> MicroConfig:
    """Hard-edge parameters for symmetry class beta and rectangularity index gamma."""
    if beta not in (1, 2):
        raise ValueError(f"beta must be 1 or 2, got {beta}")
    if gamma < 0 or int(gamma) != gamma:
        raise ValueError(f"gamma must be a non-negative integer, got {gamma}")
    gamma = int(gamma)
    return MicroConfig(
        beta=beta,
        gamma=gamma,
        kappa_prime=2 * (gamma + 1) // beta,
        kernel_dim=2 * gamma // beta,
    )


def _micro_q(i: int, j: int, beta: int) -> int:
    return (j - i) if beta == 1 else (-1) ** (i + 1)


def _entry_slog(l: int, i: int, j: int, u: float, micro: MicroConfig) -> SignedLog:
    """L(l)_ij(u) as a SignedLog, without the qt weight."""
    kp = micro.kappa_prime
    order = kp + (1 if i == l else 0) - i - j
    bess = bessel_i_signedlog(order, math.sqrt(u))
    pw = i + j - kp  # power of sqrt(u/4)
    quarter_u = signedlog_from_float(0.25 * u)
    if pw % 2 == 0:
        scale = signedlog_pow_int(quarter_u, pw // 2)
    else:
        scale = signedlog_sqrt(signedlog_pow_int(quarter_u, pw))
    return signedlog_mul(scale, bess)


def l_kernel(l: int, i: int, j: int, u: float, micro: MicroConfig) -> float:
    """Bessel kernel entry L(l)_ij(u); l = 0 is the undifferentiated kernel."""
    dim = micro.kernel_dim
    if not (1 <= i <= dim and 1 <= j <= dim):
        raise IndexError(f"kernel indices must lie in 1..{dim}, got ({i}, {j})")
    if l != 0 and not (1 <= l <= dim):
        raise IndexError(f"row index must be 0 or lie in 1..{dim}, got {l}")
    if not u > 0:
        raise ValueError(f"u must be positive, got {u}")
    return signedlog_to_float(_entry_slog(l, i, j, u, micro))


def _kernel_matrix(u: float, micro: MicroConfig, l: int) -> SignedLogMatrix:
    dim = micro.kernel_dim
    rows = []
    for i in range(1, dim + 1):
        row = []
        for j in range(1, dim + 1):
            q = _micro_q(i, j, micro.beta)
            if q == 0:
                row.append(SLOG_ZERO)
                continue
            entry = signedlog_mul(
                signedlog_from_float(float(q)), _entry_slog(l, i, j, u, micro)
            )
            row.append(entry)
        rows.append(row)
    return SignedLogMatrix(rows)


def _det_l0(u: float, micro: MicroConfig) -> SignedLog:
    mat = _kernel_matrix(u, micro, 0)
    if micro.beta == 1:
        return sqrt_det_antisymmetric(mat)  # already the 1/2 power
    return logdet_lu(mat)


def micro_gap(u: float, micro: MicroConfig) -> float:
    """Limiting gap probability at rescaled position u > 0."""
    if not u > 0:
        raise ValueError(f"u must be positive, got {u}")
    log_pref = -micro.beta * u / 8.0
    if micro.kernel_dim == 0:
        return math.exp(log_pref)
    det = _det_l0(u, micro)  # already det^(1/2) for beta=1
    if det.sign <= 0:
        return 0.0
    return signedlog_to_float(signedlog_mul(det, SignedLog.from_logmag(1, log_pref)))


def micro_pmin(u: float, micro: MicroConfig) -> float:
    """Limiting smallest-eigenvalue density at rescaled position u > 0."""
    return micro_pmin_detailed(u, micro).value


def micro_pmin_detailed(u: float, micro: MicroConfig) -> DensityResult:
    if not u > 0:
        raise ValueError(f"u must be positive, got {u}")
    beta = micro.beta
    term1 = beta / 8.0 * micro_gap(u, micro)
    if micro.kernel_dim == 0:
        return DensityResult(term1)
    g_sum = SLOG_ZERO
    for l in range(1, micro.kernel_dim + 1):
        g_sum = signedlog_add(g_sum, logdet_lu(_kernel_matrix(u, micro, l)))
    outer = signedlog_mul(
        signedlog_mul(
            signedlog_from_float(beta / 4.0),
            signedlog_inv(signedlog_sqrt(signedlog_from_float(u))),
        ),
        SignedLog.from_logmag(1, -beta * u / 8.0),
    )
    if beta == 2:
        term2 = signedlog_mul(g_sum, outer)
    else:
        den = _det_l0(u, micro)
        if den.sign == 0:
            return DensityResult(_micro_fd(u, micro), used_fallback=True)
        term2 = signedlog_mul(signedlog_mul(g_sum, signedlog_inv(den)), outer)
    value = term1 - signedlog_to_float(term2)
    return DensityResult(value if value > 0.0 else 0.0)


def _micro_fd(u: float, micro: MicroConfig) -> float:
    h = 1e-6 * u
    stencil = (
        micro_gap(u - 2 * h, micro) - 8.0 * micro_gap(u - h, micro)
        + 8.0 * micro_gap(u + h, micro) - micro_gap(u + 2 * h, micro)
    )
    value = -stencil / (12.0 * h)
    return value if value > 0.0 else 0.0


def micro_rescale(t_values, spectrum: EmpiricalSpectrum, config: EnsembleConfig) -> np.ndarray:
    """Map eigenvalue positions t to the hard-edge variable u = 4*p*eta*t."""
    if spectrum.p != config.p:
        raise ValueError(f"spectrum has p={spectrum.p} but config expects p={config.p}")
    scale = 4.0 * config.p * eta_scale(spectrum)
    return np.asarray(t_values, dtype=float) * scale


def micro_unscale(u_values, spectrum: EmpiricalSpectrum, config: EnsembleConfig) -> np.ndarray:
    """Inverse of micro_rescale: t = u / (4*p*eta)."""
    if spectrum.p != config.p:
        raise ValueError(f"spectrum has p={spectrum.p} but config expects p={config.p}")
    scale = 4.0 * config.p * eta_scale(spectrum)
    return np.asarray(u_values, dtype=float) / scale
