"""Spectral split-step integrators for the paraxial NLSE and the
driven-dissipative GPE, with Madelung (fluid) diagnostics.

Propagation uses symmetric Strang splitting: half kinetic step in Fourier
space, full nonlinear/potential/loss step in real space, half kinetic step.
Loss is applied as two exact exponentials bracketing the phase so lossy runs
stay second order in the step size.  Boundaries are periodic (spectral); an
optional super-Gaussian edge mask absorbs outgoing waves when wrap-around
would contaminate a measurement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import hbar

from . import _kernels
from .errors import BlowupError, StepSizeError

PHASE_GUARD = 0.1  # max nonlinear+potential phase per step, rad


@dataclass
class ComplexField:
    """Complex amplitude on a 1D or 2D grid.

    data: complex samples, power-of-two sizes per axis.
    dx, dy: grid spacings (m); dy ignored in 1D.
    k0: carrier wavenumber (1/m); n0: background index.
    """

    data: np.ndarray
    dx: float
    dy: float = 0.0
    k0: float = 1.0
    n0: float = 1.0

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.complex128)
        if self.data.ndim not in (1, 2):
            raise ValueError("field must be 1D or 2D")
        for n in self.data.shape:
            if n & (n - 1) != 0:
                raise ValueError(f"grid sizes must be powers of two, got {self.data.shape}")
        if self.dx <= 0:
            raise ValueError("dx must be positive")
        if self.data.ndim == 2 and self.dy <= 0:
            raise ValueError("dy must be positive for 2D fields")
        if self.k0 <= 0 or self.n0 <= 0:
            raise ValueError("k0 and n0 must be positive")
        if not np.all(np.isfinite(self.data)):
            raise ValueError("field samples must be finite")

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def cell_area(self) -> float:
        return self.dx if self.ndim == 1 else self.dx * self.dy

    @property
    def power(self) -> float:
        """Integral of |E|^2 over the grid."""
        return float(np.sum(self.data.real**2 + self.data.imag**2) * self.cell_area)

    def k_grids(self):
        """Angular spatial frequency grids matching np.fft layout."""
        if self.ndim == 1:
            return (2.0 * math.pi * np.fft.fftfreq(self.data.shape[0], self.dx),)
        ky = 2.0 * math.pi * np.fft.fftfreq(self.data.shape[0], self.dy)
        kx = 2.0 * math.pi * np.fft.fftfreq(self.data.shape[1], self.dx)
        return np.meshgrid(ky, kx, indexing="ij")

    def k_squared(self):
        if self.ndim == 1:
            (kx,) = self.k_grids()
            return kx**2
        ky, kx = self.k_grids()
        return kx**2 + ky**2

    def xy_grids(self, centered: bool = True):
        """Real-space coordinate grids (centered on the box middle by default)."""
        if self.ndim == 1:
            n = self.data.shape[0]
            x = (np.arange(n) - (n // 2 if centered else 0)) * self.dx
            return (x,)
        ny, nx = self.data.shape
        y = (np.arange(ny) - (ny // 2 if centered else 0)) * self.dy
        x = (np.arange(nx) - (nx // 2 if centered else 0)) * self.dx
        return np.meshgrid(y, x, indexing="ij")

    def copy(self) -> "ComplexField":
        return ComplexField(self.data.copy(), self.dx, self.dy, self.k0, self.n0)


@dataclass
class MediumSpec:
    """Nonlinear medium for the paraxial NLSE.

    chi3/chi5: Kerr orders (chi5 off by default); delta_n: linear index
    perturbation map matching the grid (or None); alpha: linear absorption
    (1/m); length: physical medium length (m).
    """

    chi3: float
    length: float
    chi5: float = 0.0
    delta_n: np.ndarray | None = None
    alpha: float = 0.0

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.length <= 0:
            raise ValueError("length must be positive")


@dataclass
class DriveSpec:
    """Drive, loss, potential and interactions of the lower-polariton GPE."""

    gamma_lp: float
    g: float
    mass: float
    pump: np.ndarray | None = None
    potential: np.ndarray | None = None

    def __post_init__(self):
        if self.gamma_lp < 0:
            raise ValueError("gamma_lp must be non-negative")
        if self.mass <= 0:
            raise ValueError("mass must be positive")


def super_gaussian_mask(field: ComplexField, radius_frac: float = 0.45,
                        order: int = 8) -> np.ndarray:
    """Absorbing edge mask exp(-(r/r0)^(2*order)); ~1 inside radius_frac of the box."""
    if field.ndim == 1:
        (x,) = field.xy_grids()
        half = abs(x[0])
        r = np.abs(x)
    else:
        y, x = field.xy_grids()
        half = min(abs(x[0, 0]), abs(y[0, 0]))
        r = np.sqrt(x**2 + y**2)
    r0 = radius_frac * 2.0 * half
    return np.exp(-((r / r0) ** (2 * order)))


def _check_finite(max_intensity: float, step: int):
    if not math.isfinite(max_intensity):
        raise BlowupError(f"non-finite field sample at step {step}", step=step)


def split_step_nlse(field: ComplexField, medium: MediumSpec, dz: float, steps: int,
                    edge_mask: np.ndarray | None = None,
                    observer=None) -> ComplexField:
    """Advance i dE/dz = -(1/2k0) lap(E) - (dn k0/n0) E - (k0 chi3/2n0^2)|E|^2 E
    (optional chi5 and -i alpha/2 terms) by ``steps`` Strang steps of size dz.

    ``observer(step, z, data)`` is called after every step when given; the
    returned field is a new object, the input is left untouched.
    """
    if dz <= 0 or steps < 0:
        raise ValueError("dz must be positive and steps non-negative")
    if medium.delta_n is not None and np.shape(medium.delta_n) != field.shape:
        raise ValueError("delta_n map must match the field grid")

    out = field.copy()
    k0, n0 = out.k0, out.n0
    c3 = k0 * medium.chi3 / (2.0 * n0**2)
    c5 = k0 * medium.chi5 / (2.0 * n0**2)
    dn_phase = None
    if medium.delta_n is not None:
        dn_phase = np.asarray(medium.delta_n, dtype=float) * k0 / n0

    kinetic_half = np.exp(-1j * out.k_squared() / (2.0 * k0) * dz / 2.0)
    data = out.data

    max_i = float(np.max(data.real**2 + data.imag**2))
    for step in range(steps):
        phase_bound = (abs(c3) * max_i + abs(c5) * max_i**2) * dz
        if phase_bound >= PHASE_GUARD:
            raise StepSizeError(
                f"nonlinear phase per step {phase_bound:.3f} rad >= {PHASE_GUARD} "
                f"at step {step}; reduce dz")
        data = np.fft.ifftn(np.fft.fftn(data) * kinetic_half)
        max_i = _kernels.kerr_step(data, dn_phase, c3, c5, medium.alpha, dz)
        _check_finite(max_i, step)
        data = np.fft.ifftn(np.fft.fftn(data) * kinetic_half)
        if edge_mask is not None:
            data *= edge_mask
        if observer is not None:
            observer(step, (step + 1) * dz, data)
    out.data = data
    return out


def split_step_ddgpe(field: ComplexField, drive: DriveSpec, dt: float, steps: int,
                     edge_mask: np.ndarray | None = None,
                     observer=None) -> ComplexField:
    """Advance i hbar dpsi/dt = (-hbar^2 lap/2m + V - i hbar gamma/2 + g|psi|^2) psi + P."""
    if dt <= 0 or steps < 0:
        raise ValueError("dt must be positive and steps non-negative")
    for name, arr in (("pump", drive.pump), ("potential", drive.potential)):
        if arr is not None and np.shape(arr) != field.shape:
            raise ValueError(f"{name} map must match the field grid")

    out = field.copy()
    v_rate = None
    if drive.potential is not None:
        v_rate = np.asarray(drive.potential, dtype=float) / hbar
    g_rate = drive.g / hbar
    pump_rate = None
    if drive.pump is not None:
        pump_rate = -1j * np.asarray(drive.pump, dtype=complex) / hbar

    kinetic_half = np.exp(-1j * hbar * out.k_squared() / (2.0 * drive.mass) * dt / 2.0)
    data = out.data
    max_i = float(np.max(data.real**2 + data.imag**2)) if data.size else 0.0
    for step in range(steps):
        v_bound = float(np.max(np.abs(v_rate))) if v_rate is not None else 0.0
        phase_bound = (abs(g_rate) * max_i + v_bound) * dt
        if phase_bound >= PHASE_GUARD:
            raise StepSizeError(
                f"potential+interaction phase per step {phase_bound:.3f} rad >= "
                f"{PHASE_GUARD} at step {step}; reduce dt")
        data = np.fft.ifftn(np.fft.fftn(data) * kinetic_half)
        max_i = _kernels.ddgpe_step(data, v_rate, g_rate, drive.gamma_lp, dt, pump_rate)
        _check_finite(max_i, step)
        data = np.fft.ifftn(np.fft.fftn(data) * kinetic_half)
        if edge_mask is not None:
            data *= edge_mask
        if observer is not None:
            observer(step, (step + 1) * dt, data)
    out.data = data
    return out


def ddgpe_residual(field: ComplexField, drive: DriveSpec) -> float:
    """Max-norm residual of the time-independent driven-dissipative GPE,
    normalized by the pump scale (or the field scale if undriven)."""
    psi = field.data
    lap = np.fft.ifftn(-field.k_squared() * np.fft.fftn(psi))
    rhs = (-hbar**2 / (2.0 * drive.mass)) * lap
    if drive.potential is not None:
        rhs = rhs + drive.potential * psi
    rhs = rhs + (-1j * hbar * drive.gamma_lp / 2.0 + drive.g * np.abs(psi) ** 2) * psi
    if drive.pump is not None:
        rhs = rhs + drive.pump
    scale = float(np.max(np.abs(drive.pump))) if drive.pump is not None else \
        float(np.max(np.abs(psi))) * hbar * max(drive.gamma_lp, 1.0)
    return float(np.max(np.abs(rhs))) / scale


# ---------------------------------------------------------------------------
# Madelung diagnostics
# ---------------------------------------------------------------------------

VACUUM_FRACTION = 1e-6  # density below this fraction of max rho is "vacuum"


@dataclass
class MadelungFields:
    """Fluid variables of a complex field: density, phase, velocity.

    velocity components are NaN inside the vacuum mask (rho below threshold),
    where the phase gradient is meaningless.
    """

    density: np.ndarray
    phase: np.ndarray
    velocity: tuple
    vacuum: np.ndarray
    mass_equivalent: float


def _wrapped_gradient(psi, spacing, axis):
    """Central-difference phase gradient from wrapped neighbor phase differences."""
    fwd = np.roll(psi, -1, axis=axis)
    bwd = np.roll(psi, 1, axis=axis)
    return np.angle(fwd * np.conj(bwd)) / (2.0 * spacing)


def madelung(field: ComplexField, mass_equivalent: float | None = None,
             unwrap_axes: tuple = ()) -> MadelungFields:
    """Density rho = |psi|^2, phase, and velocity v = coef * grad(phase).

    coef defaults to the optical mapping 1/k0; pass hbar/m as
    ``mass_equivalent`` for matter fields.  The gradient uses wrapped
    neighbor differences (periodic), immune to branch cuts; the stored phase
    map may additionally be unwrapped along the requested axes for display.
    """
    coef = 1.0 / field.k0 if mass_equivalent is None else mass_equivalent
    psi = field.data
    rho = psi.real**2 + psi.imag**2
    phase = np.angle(psi)
    for ax in unwrap_axes:
        phase = np.unwrap(phase, axis=ax)
    vacuum = rho < VACUUM_FRACTION * float(rho.max()) if rho.size else rho > 0

    if field.ndim == 1:
        vx = coef * _wrapped_gradient(psi, field.dx, 0)
        vx = np.where(vacuum, np.nan, vx)
        velocity = (vx,)
    else:
        vy = coef * _wrapped_gradient(psi, field.dy, 0)
        vx = coef * _wrapped_gradient(psi, field.dx, 1)
        vx = np.where(vacuum, np.nan, vx)
        vy = np.where(vacuum, np.nan, vy)
        velocity = (vx, vy)
    return MadelungFields(density=rho, phase=phase, velocity=velocity,
                          vacuum=vacuum, mass_equivalent=coef)


def continuity_residual(densities, velocities, dt: float, dx: float,
                        dy: float = 0.0) -> float:
    """Max-norm of d(rho)/dt + div(rho v) over consecutive snapshots,
    normalized by max(rho)/dt (dimensionless).

    ``densities``: sequence of >= 2 density maps; ``velocities``: matching
    velocity tuples (vx,) or (vx, vy).  Time derivative is centered between
    snapshots; the flux divergence uses centered differences of the snapshot-
    averaged flux (periodic boundaries).
    """
    if len(densities) < 2 or len(velocities) != len(densities):
        raise ValueError("need >= 2 matching (rho, v) snapshots")
    shapes = {np.shape(d) for d in densities}
    if len(shapes) != 1:
        raise ValueError("density snapshots must share one grid")
    worst = 0.0
    rho_max = max(float(np.max(d)) for d in densities)
    for a in range(len(densities) - 1):
        rho0, rho1 = np.asarray(densities[a]), np.asarray(densities[a + 1])
        drho_dt = (rho1 - rho0) / dt
        div = np.zeros_like(rho0)
        # velocity tuples are (vx,) in 1D and (vx, vy) in 2D with x = last axis
        for comp, (v0, v1) in enumerate(zip(velocities[a], velocities[a + 1])):
            ax = rho0.ndim - 1 - comp
            spacing = dx if comp == 0 else dy
            flux = 0.5 * (rho0 * np.nan_to_num(v0) + rho1 * np.nan_to_num(v1))
            div += (np.roll(flux, -1, axis=ax) - np.roll(flux, 1, axis=ax)) / (2.0 * spacing)
        worst = max(worst, float(np.max(np.abs(drho_dt + div))))
    return worst * dt / rho_max


# ---------------------------------------------------------------------------
# Topology
# ---------------------------------------------------------------------------

def winding_number(field: ComplexField, loop: np.ndarray,
                   vacuum_fraction: float = VACUUM_FRACTION) -> int:
    """Phase winding along a closed loop of grid indices, in units of 2*pi.

    ``loop`` is an (n, 2) array of (row, col) indices; the closing segment
    back to the first point is implied.  Raises ValueError when the loop
    touches the vacuum region (phase undefined there).
    """
    if field.ndim != 2:
        raise ValueError("winding_number needs a 2D field")
    loop = np.asarray(loop, dtype=int)
    if loop.ndim != 2 or loop.shape[1] != 2 or loop.shape[0] < 3:
        raise ValueError("loop must be an (n>=3, 2) index array")
    rho = field.data.real**2 + field.data.imag**2
    threshold = vacuum_fraction * float(rho.max())
    samples = field.data[loop[:, 0], loop[:, 1]]
    if np.any(np.abs(samples) ** 2 < threshold):
        raise ValueError("loop crosses a vacuum region; winding ill-defined")
    closed = np.concatenate([samples, samples[:1]])
    diffs = np.angle(closed[1:] * np.conj(closed[:-1]))
    return int(round(float(np.sum(diffs)) / (2.0 * math.pi)))


def circular_loop(center, radius: int, n_points: int = 64) -> np.ndarray:
    """Closed loop of grid indices approximating a circle (row, col)."""
    theta = np.linspace(0.0, 2.0 * math.pi, n_points, endpoint=False)
    rows = np.rint(center[0] + radius * np.sin(theta)).astype(int)
    cols = np.rint(center[1] + radius * np.cos(theta)).astype(int)
    return np.stack([rows, cols], axis=1)


def vortex_map(field: ComplexField) -> np.ndarray:
    """Plaquette winding map; nonzero entries locate quantized vortices."""
    return _kernels.plaquette_winding(np.angle(field.data))


# ---------------------------------------------------------------------------
# Double-Lambda effective potential and drag force
# ---------------------------------------------------------------------------

def double_lambda_kappa(density: float, dipole: float, gamma: float) -> float:
    """kappa = N mu^2 / (eps0 hbar Gamma)."""
    from scipy.constants import epsilon_0
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return density * dipole**2 / (epsilon_0 * hbar * gamma)


def double_lambda_potential(omega_c_map, omega_s_map, kappa: float, delta: float):
    """Effective potential and coupling of the double-Lambda probe equation.

    V = -kappa |Omega_s|^2 / (2 Delta (|Omega_c|^2 + |Omega_s|^2))
    G = -kappa |Omega_s|^2 / (2 Delta (|Omega_c|^2 + |Omega_s|^2)^2)
    """
    if delta == 0:
        raise ValueError("delta must be nonzero")
    oc2 = np.abs(np.asarray(omega_c_map)) ** 2
    os2 = np.abs(np.asarray(omega_s_map)) ** 2
    if oc2.shape != os2.shape:
        raise ValueError("Omega_c and Omega_s maps must share one grid")
    denom = oc2 + os2
    bad = np.argwhere(denom == 0)
    if bad.size:
        raise ValueError(f"|Omega_c|^2 + |Omega_s|^2 vanishes at pixel {tuple(bad[0])}")
    v = -kappa * os2 / (2.0 * delta * denom)
    g = -kappa * os2 / (2.0 * delta * denom**2)
    return v, g


def drag_force(rho: np.ndarray, potential: np.ndarray, dx: float,
               dy: float = 0.0) -> np.ndarray:
    """F = -integral of rho * grad(V), centered differences + trapezoid weights."""
    rho = np.asarray(rho, dtype=float)
    potential = np.asarray(potential, dtype=float)
    if rho.shape != potential.shape:
        raise ValueError("rho and potential must share one grid")
    if rho.ndim == 1:
        grad = np.gradient(potential, dx)
        return np.array([-float(np.trapezoid(rho * grad, dx=dx))])
    gy, gx = np.gradient(potential, dy, dx)
    fx = -float(np.trapezoid(np.trapezoid(rho * gx, dx=dx, axis=1), dx=dy))
    fy = -float(np.trapezoid(np.trapezoid(rho * gy, dx=dx, axis=1), dx=dy))
    return np.array([fx, fy])
