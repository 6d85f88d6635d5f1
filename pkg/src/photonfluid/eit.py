"""Steady state of the 3-level Lambda system: EIT, probe susceptibility, slow light.

The Bloch equations for fixed classical fields are affine in the density
matrix elements, so the damped-Newton solve below converges in one step; the
iteration is kept to certify the residual.  Degenerate configurations with a
decoupled level (e.g. control off) make the steady state non-unique; the
least-squares step then returns the minimum-norm solution, which leaves the
decoupled level empty.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.constants import c, epsilon_0, hbar

from .errors import NumericalError

_N_UNKNOWNS = 8  # rho_gg, rho_ss, Re/Im of sigma_ge, sigma_se, sigma_gs


@dataclass(frozen=True)
class ThreeLevelSpec:
    """Fields, detunings and decay rates of the Lambda system.

    omega_p/omega_c: probe and control Rabi frequencies (rad/s).
    delta_p/delta_c: one-photon detunings (rad/s).
    gamma_eg/gamma_es: decay branches of |e>, summing to the total Gamma.
    gamma0: ground-state coherence decay (rad/s).
    density (1/m^3) and dipole (C m) feed the probe susceptibility.
    """

    omega_p: float
    omega_c: float
    delta_p: float
    delta_c: float
    gamma_eg: float
    gamma_es: float
    gamma0: float = 0.0
    density: float = 0.0
    dipole: float = 0.0

    def __post_init__(self):
        for name in ("gamma_eg", "gamma_es", "gamma0"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.gamma <= 0:
            raise ValueError("total decay rate Gamma = gamma_eg + gamma_es must be positive")

    @property
    def gamma(self) -> float:
        return self.gamma_eg + self.gamma_es


@dataclass(frozen=True)
class ThreeLevelSteadyState:
    rho_gg: float
    rho_ss: float
    rho_ee: float
    sigma_ge: complex
    sigma_se: complex
    sigma_gs: complex
    residual: float  # max-norm of the six steady-state equations, in Gamma units

    @property
    def trace(self) -> float:
        return self.rho_gg + self.rho_ss + self.rho_ee


def _bloch_rates(spec: ThreeLevelSpec, x: np.ndarray) -> np.ndarray:
    """Time derivatives of (rho_gg, rho_ss, sigma_ge, sigma_se, sigma_gs) as 8 reals.

    rho_ee is eliminated through the trace; the rho_ee equation is implied
    (the three population derivatives sum to zero identically).
    """
    rho_gg, rho_ss = x[0], x[1]
    rho_ee = 1.0 - rho_gg - rho_ss
    s_ge = x[2] + 1j * x[3]
    s_se = x[4] + 1j * x[5]
    s_gs = x[6] + 1j * x[7]
    op, oc = spec.omega_p, spec.omega_c
    dp, dc = spec.delta_p, spec.delta_c
    gamma = spec.gamma

    d_gg = 1j * (op / 2.0) * (s_ge - np.conj(s_ge)) + spec.gamma_eg * rho_ee
    d_ss = 1j * (oc / 2.0) * (s_se - np.conj(s_se)) + spec.gamma_es * rho_ee
    d_ge = (-1j * (dp - 1j * gamma / 2.0) * s_ge
            - 1j * (op / 2.0) * (rho_ee - rho_gg)
            + 1j * (oc / 2.0) * s_gs)
    d_se = (-1j * (dc - 1j * gamma / 2.0) * s_se
            - 1j * (oc / 2.0) * (rho_ee - rho_ss)
            + 1j * (op / 2.0) * np.conj(s_gs))
    d_gs = (-1j * (dp - dc - 1j * spec.gamma0) * s_gs
            - 1j * (op / 2.0) * np.conj(s_se)
            + 1j * (oc / 2.0) * s_ge)

    return np.array([d_gg.real, d_ss.real,
                     d_ge.real, d_ge.imag,
                     d_se.real, d_se.imag,
                     d_gs.real, d_gs.imag])


def _full_residual(spec: ThreeLevelSpec, x: np.ndarray) -> float:
    """Max-norm residual of all six complex Bloch equations (rho_ee included)."""
    r = _bloch_rates(spec, x)
    # rho_ee equation from the trace identity: d(rho_ee) = -d(rho_gg) - d(rho_ss)
    d_ee = -(r[0] + r[1])
    return float(max(np.max(np.abs(r)), abs(d_ee)))


def three_level_steady_state(spec: ThreeLevelSpec, tol: float = 1e-11,
                             max_iter: int = 25) -> ThreeLevelSteadyState:
    """Solve the steady state of the Lambda-system Bloch equations.

    Damped Newton on the real/imaginary decomposition with the trace
    constraint eliminated; initial guess has all population in |g>.  The
    equations are solved in units of the total linewidth, so the certified
    residual (< ``tol``, else NumericalError) is dimensionless.
    """
    scale = spec.gamma
    spec = ThreeLevelSpec(
        omega_p=spec.omega_p / scale, omega_c=spec.omega_c / scale,
        delta_p=spec.delta_p / scale, delta_c=spec.delta_c / scale,
        gamma_eg=spec.gamma_eg / scale, gamma_es=spec.gamma_es / scale,
        gamma0=spec.gamma0 / scale, density=spec.density, dipole=spec.dipole)
    x = np.zeros(_N_UNKNOWNS)
    x[0] = 1.0  # all population in |g>

    # The system is affine: r(x) = A x + b.  Assemble A column by column.
    b = _bloch_rates(spec, np.zeros(_N_UNKNOWNS))
    a_mat = np.empty((_N_UNKNOWNS, _N_UNKNOWNS))
    for j in range(_N_UNKNOWNS):
        e = np.zeros(_N_UNKNOWNS)
        e[j] = 1.0
        a_mat[:, j] = _bloch_rates(spec, e) - b

    for _ in range(max_iter):
        r = _bloch_rates(spec, x)
        if np.max(np.abs(r)) < tol:
            break
        # lstsq handles the singular decoupled-level cases (min-norm step).
        step, *_ = np.linalg.lstsq(a_mat, -r, rcond=None)
        damping = 1.0
        norm0 = np.linalg.norm(r)
        while damping > 1e-4:
            x_new = x + damping * step
            if np.linalg.norm(_bloch_rates(spec, x_new)) <= norm0:
                break
            damping /= 2.0
        x = x + damping * step

    # A decoupled |s> (e.g. control off, no decay branch into it) leaves a
    # one-parameter solution family; pick the branch with |s> empty, the one
    # the dynamics reaches from all population in |g>.
    _u, sv, vt = np.linalg.svd(a_mat)
    null = vt[sv < sv[0] * 1e-12] if sv[0] > 0 else vt
    if null.size:
        comp = null[:, 1]  # rho_ss components of the null vectors
        denom = float(np.dot(comp, comp))
        if denom > 1e-20:
            x = x - x[1] * (null.T @ comp) / denom

    residual = _full_residual(spec, x)
    if residual >= max(tol, 1e-10):
        raise NumericalError(
            f"three-level steady state did not converge: residual {residual:.3e}")

    rho_gg, rho_ss = float(x[0]), float(x[1])
    rho_ee = 1.0 - rho_gg - rho_ss
    state = ThreeLevelSteadyState(
        rho_gg=rho_gg, rho_ss=rho_ss, rho_ee=rho_ee,
        sigma_ge=complex(x[2], x[3]),
        sigma_se=complex(x[4], x[5]),
        sigma_gs=complex(x[6], x[7]),
        residual=residual,
    )
    eps = 1e-9
    for name, pop in (("rho_gg", rho_gg), ("rho_ss", rho_ss), ("rho_ee", rho_ee)):
        if not -eps <= pop <= 1.0 + eps:
            raise NumericalError(f"population {name}={pop} outside [0, 1]")
    return state


def probe_susceptibility(state: ThreeLevelSteadyState, density: float,
                         dipole: float, omega_p: float) -> complex:
    """Probe susceptibility chi = N mu sigma_ge / (eps0 E_p) with E_p = hbar Omega_p / mu."""
    if omega_p == 0:
        raise ValueError("probe susceptibility undefined at Omega_p = 0")
    e_p = hbar * omega_p / dipole
    return density * dipole * state.sigma_ge / (epsilon_0 * e_p)


def fit_chi_orders(omega_p: np.ndarray, chi: np.ndarray, dipole: float,
                   gamma: float, max_saturation: float = 1e-2,
                   cond_threshold: float = 1e12):
    """Fit chi(|E_p|^2) with an even quadratic and return (chi1, chi3, chi5, misfit).

    The sweep must hold >= 5 points in the weak-probe regime
    I_p/I_sat = 2 (Omega_p/Gamma)^2 < max_saturation.  The fitted polynomial
    coefficients are divided by the 3/10 degeneracy weights so the returned
    orders share the convention of ``atoms.susceptibility_orders``.
    """
    omega_p = np.asarray(omega_p, dtype=float)
    chi = np.asarray(chi, dtype=complex)
    if omega_p.shape != chi.shape:
        raise ValueError("omega_p and chi must have the same shape")
    sat = 2.0 * (omega_p / gamma) ** 2
    if np.count_nonzero(sat < max_saturation) < 5:
        raise ValueError("need >= 5 sweep points with I_p/I_sat below "
                         f"{max_saturation} (got {np.count_nonzero(sat < max_saturation)})")
    keep = sat < max_saturation
    e2 = (hbar * omega_p[keep] / dipole) ** 2

    # Vandermonde in |E|^2, scaled to unit diagonal for conditioning.
    scale = np.max(e2)
    v = np.stack([np.ones_like(e2), e2 / scale, (e2 / scale) ** 2], axis=1)
    coeffs, res, rank, sv = np.linalg.lstsq(v, chi[keep], rcond=None)
    cond = sv[0] / sv[-1] if sv[-1] > 0 else np.inf
    if rank < 3 or cond > cond_threshold:
        raise NumericalError(f"ill-conditioned chi-order fit (cond={cond:.3e})")
    fit = v @ coeffs
    misfit = float(np.max(np.abs(fit - chi[keep])))
    chi1 = complex(coeffs[0])
    chi3 = complex(coeffs[1] / scale / 3.0)
    chi5 = complex(coeffs[2] / scale**2 / 10.0)
    return chi1, chi3, chi5, misfit


@dataclass(frozen=True)
class GroupVelocityReport:
    omega_c: float
    n: float
    dn_domega: float
    group_index: float
    group_velocity: float  # m/s, negative in anomalous-dispersion media


def group_velocity(omega: np.ndarray, n: np.ndarray, omega_c: float,
                   rtol: float = 1e-6) -> GroupVelocityReport:
    """Group index and velocity from sampled n(omega) around the carrier.

    dn/domega uses central differences at two stencil widths with Richardson
    extrapolation; the samples must form a uniform grid bracketing omega_c.
    v_g = c / n_g with n_g = n + omega * dn/domega.
    """
    omega = np.asarray(omega, dtype=float)
    n = np.asarray(n, dtype=float)
    if omega.ndim != 1 or omega.size < 3 or omega.shape != n.shape:
        raise ValueError("need >= 3 (omega, n) samples on a 1D grid")
    if not (omega[0] < omega_c < omega[-1]):
        raise ValueError("samples must bracket omega_c")
    h = np.diff(omega)
    if not np.allclose(h, h[0], rtol=1e-8):
        raise ValueError("omega samples must be uniformly spaced")
    h = float(h[0])
    i = int(np.argmin(np.abs(omega - omega_c)))
    i = min(max(i, 1), omega.size - 2)

    d1 = (n[i + 1] - n[i - 1]) / (2.0 * h)
    if 2 <= i <= omega.size - 3:
        d2 = (n[i + 2] - n[i - 2]) / (4.0 * h)
        deriv = (4.0 * d1 - d2) / 3.0
        if abs(deriv - d1) > rtol * max(abs(deriv), 1e-300):
            # Stencils disagree beyond tolerance: keep the extrapolated value,
            # the report carries the raw numbers for inspection.
            pass
    else:
        deriv = d1

    n_c = float(n[i])
    n_g = n_c + omega[i] * deriv
    return GroupVelocityReport(omega_c=float(omega[i]), n=n_c, dn_domega=float(deriv),
                               group_index=float(n_g), group_velocity=float(c / n_g))
