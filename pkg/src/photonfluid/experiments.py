"""Scripted end-to-end protocols: Bogoliubov probe scan, ring-counting n2
measurement, shockwave tracking, OAM/vortex injection, defect scattering.

Each experiment is a pure function of its config (deterministic given the
same build), returning a result object the CLI serializes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.constants import hbar

from .dispersion import BogoliubovOptical, bogoliubov_optical
from .errors import ConfigError, TrackingError
from .fluid import (ComplexField, DriveSpec, MediumSpec, split_step_ddgpe,
                    split_step_nlse, super_gaussian_mask, vortex_map, drag_force)


def _intensity(data: np.ndarray) -> np.ndarray:
    return data.real**2 + data.imag**2


def radial_profile(array: np.ndarray, center=None, bin_width: float = 1.0):
    """Azimuthal average over rings of ``bin_width`` pixels around ``center``.

    Returns (radii in pixels, mean value per ring).
    """
    ny, nx = array.shape
    if center is None:
        center = (ny / 2.0, nx / 2.0)
    y, x = np.indices(array.shape)
    r = np.hypot(y - center[0], x - center[1])
    bins = (r / bin_width).astype(int)
    counts = np.bincount(bins.ravel())
    sums = np.bincount(bins.ravel(), weights=array.ravel())
    radii = (np.arange(counts.size) + 0.5) * bin_width
    return radii, sums / np.maximum(counts, 1)


# ---------------------------------------------------------------------------
# Bogoliubov probe scan
# ---------------------------------------------------------------------------

@dataclass
class ProbeScanConfig:
    """Pump+probe transport measurement of the Bogoliubov dispersion.

    Lengths in meters, k in 1/m.  The probe is a weak Gaussian launched on a
    flat-top pump; its transverse wavepacket displacement per unit z gives the
    group velocity, integrated over k to reconstruct the dispersion.
    """

    k0: float = 2.0 * math.pi / 780e-9
    n0: float = 1.0
    chi3: float = -3.6e-6           # defocusing
    pump_intensity: float = 20.0    # |E0|^2, sets the sound speed
    pump_waist: float = 1.7e-3
    pump_order: int = 8             # super-Gaussian flatness
    probe_rel_amplitude: float = 0.04
    probe_waist: float = 0.25e-3
    k_list: tuple = ()              # in units of 1/xi when xi_units, else 1/m
    k_in_xi_units: bool = True
    grid: int = 512
    window: float = 5.0e-3
    length: float = 0.08
    steps: int = 400
    snap_every: int = 10

    def __post_init__(self):
        if not 0 < self.probe_rel_amplitude <= 0.05:
            raise ConfigError("probe amplitude must stay within 5% of the pump "
                              "(Bogoliubov linearization)")
        if not self.k_list:
            self.k_list = (0.0, 0.15, 0.3, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
        if 0.0 not in tuple(self.k_list):
            raise ConfigError("k list must include 0")

    @property
    def bogoliubov(self) -> BogoliubovOptical:
        return BogoliubovOptical(k0=self.k0, chi3=self.chi3,
                                 e0_squared=self.pump_intensity, n0=self.n0)


@dataclass
class ProbeScanResult:
    k_values: np.ndarray        # 1/m
    v_measured: np.ndarray      # transverse group speeds (dimensionless)
    v_analytic: np.ndarray
    omega_reconstructed: np.ndarray  # cumulative trapezoid of v over k (1/m)
    omega_analytic: np.ndarray
    sound_speed: float
    healing_length: float
    splitting_speeds: tuple     # (+c_s, -c_s) packet speeds at k=0
    refraction_positions: dict  # subsonic k -> output centroid x (m)
    pump_residual: float        # reference-subtraction residual with no probe


def _track_packet(delta_i_snaps, x, z_snaps, x_start: float, half_width: float,
                  direction: float = 0.0):
    """Centroid trajectory of a wavepacket in a moving window.

    ``delta_i_snaps``: per-snapshot 1D intensity profiles (collapsed over y).
    The window recentres on the previous centroid each snapshot; ``direction``
    biases the initial window for splitting packets (+1/-1 half-plane).
    Returns centroids (one per snapshot).
    """
    centroids = []
    center = x_start
    for prof in delta_i_snaps:
        lo, hi = center - half_width, center + half_width
        if direction > 0:
            lo = max(lo, x_start + 0.0)
        elif direction < 0:
            hi = min(hi, x_start - 0.0)
        sel = (x >= lo) & (x <= hi)
        if not np.any(sel) or hi >= x[-1] or lo <= x[0]:
            raise TrackingError("wavepacket window left the grid")
        w = prof[sel]
        total = w.sum()
        if total <= 0:
            raise TrackingError("wavepacket lost (no signal in window)")
        center = float(np.sum(x[sel] * w) / total)
        centroids.append(center)
    return np.asarray(centroids)


def bogoliubov_probe_scan(config: ProbeScanConfig) -> ProbeScanResult:
    bog = config.bogoliubov
    xi = bog.healing_length
    cs = bog.sound_speed
    n = config.grid
    dx = config.window / n

    if dx > xi / 2.0:
        raise ConfigError(f"grid does not resolve the healing length: dx={dx:.3g}, "
                          f"xi={xi:.3g}")

    k_values = np.asarray(sorted(config.k_list), dtype=float)
    if config.k_in_xi_units:
        k_values = k_values / xi

    y, x = np.meshgrid((np.arange(n) - n // 2) * dx, (np.arange(n) - n // 2) * dx,
                       indexing="ij")
    r = np.hypot(x, y)
    pump_amp = math.sqrt(config.pump_intensity)
    pump = pump_amp * np.exp(-((r / config.pump_waist) ** (2 * config.pump_order)))
    medium = MediumSpec(chi3=config.chi3, length=config.length)
    dz = config.length / config.steps
    x_axis = x[0]

    def run(data):
        snaps = []

        def observer(step, z, d):
            if (step + 1) % config.snap_every == 0:
                snaps.append((z, d.copy()))

        field = ComplexField(data, dx=dx, dy=dx, k0=config.k0, n0=config.n0)
        out = split_step_nlse(field, medium, dz, config.steps, observer=observer)
        return out, snaps

    ref_out, ref_snaps = run(pump.astype(complex))

    # reference-subtraction residual: probe amplitude zero reproduces the pump
    rerun_out, _ = run(pump.astype(complex))
    pump_residual = float(np.sum(_intensity(rerun_out.data - ref_out.data)) /
                          np.sum(_intensity(ref_out.data)))

    win_half = max(4.0 * config.probe_waist, 6.0 * xi)
    band = np.abs(y[:, 0]) < 3.0 * config.probe_waist

    v_measured = []
    splitting = (math.nan, math.nan)
    refraction_positions = {}
    z_snaps = np.array([z for z, _ in ref_snaps])

    for kv in k_values:
        probe = (config.probe_rel_amplitude * pump *
                 np.exp(-(r**2) / config.probe_waist**2) * np.exp(1j * kv * x))
        out, snaps = run(pump + probe)
        profiles = []
        for (z, d), (_, dref) in zip(snaps, ref_snaps):
            di = _intensity(d - dref)
            profiles.append(di[band].sum(axis=0))

        if kv == 0.0:
            cp = _track_packet(profiles, x_axis, z_snaps, 0.0, win_half, direction=+1)
            cm = _track_packet(profiles, x_axis, z_snaps, 0.0, win_half, direction=-1)
            half = len(z_snaps) // 2
            vp = np.polyfit(z_snaps[half:], cp[half:], 1)[0]
            vm = np.polyfit(z_snaps[half:], cm[half:], 1)[0]
            splitting = (float(vp), float(vm))
            v_measured.append(float(vp))
        else:
            # track the co-moving packet only; the counter-propagating
            # Bogoliubov partner (weight v_q) would bias a full-plane centroid
            c = _track_packet(profiles, x_axis, z_snaps, 0.0, win_half, direction=+1)
            half = len(z_snaps) // 2
            v_measured.append(float(np.polyfit(z_snaps[half:], c[half:], 1)[0]))
            if kv * xi < 0.5:
                refraction_positions[float(kv)] = float(c[-1])

    v_measured = np.asarray(v_measured)
    with np.errstate(invalid="ignore"):
        v_analytic = np.array([
            _bogoliubov_group_velocity(kv, bog) for kv in k_values])

    # dispersion reconstruction: Omega_B(0) = 0 fixes the offset
    omega_rec = np.concatenate([[0.0], np.cumsum(
        0.5 * (v_measured[1:] + v_measured[:-1]) * np.diff(k_values))])
    omega_ana = bogoliubov_optical(k_values, bog)

    return ProbeScanResult(
        k_values=k_values, v_measured=v_measured, v_analytic=v_analytic,
        omega_reconstructed=omega_rec, omega_analytic=omega_ana,
        sound_speed=cs, healing_length=xi, splitting_speeds=splitting,
        refraction_positions=refraction_positions, pump_residual=pump_residual)


def _bogoliubov_group_velocity(k: float, bog: BogoliubovOptical) -> float:
    """d(Omega_B)/dk, analytic; equals c_s at k -> 0."""
    cs = bog.sound_speed
    if k == 0.0:
        return cs
    a = k**2 / (2.0 * bog.k0)
    b = 2.0 * bog.k0 * cs**2
    omega = math.sqrt(a * (a + b))
    return (k / bog.k0) * (a + b / 2.0) / omega


# ---------------------------------------------------------------------------
# Ring counting n2 measurement
# ---------------------------------------------------------------------------

@dataclass
class RingCountConfig:
    """Self-phase-modulation far-field ring count vs intensity."""

    k0: float = 2.0 * math.pi / 780e-9
    n0: float = 1.0
    chi3: float = -2.0e-9
    waist: float = 0.6e-3
    length_over_zr: float = 0.02    # enforces the thin-medium regime
    peak_intensity: float = 12.0    # |E|^2 at the top sweep point
    n_intensities: int = 10
    grid: int = 256
    window_waists: float = 10.0
    steps: int = 160

    def __post_init__(self):
        if self.length_over_zr > 0.1:
            raise ConfigError("ring counting requires the long-Rayleigh regime "
                              f"z << z_R; got L/z_R = {self.length_over_zr}")

    @property
    def rayleigh(self) -> float:
        return self.k0 * self.waist**2 / 2.0

    @property
    def length(self) -> float:
        return self.length_over_zr * self.rayleigh


@dataclass
class RingCountResult:
    intensities: np.ndarray
    ring_counts: np.ndarray
    phase_over_2pi: np.ndarray     # |Delta phi(0)| / 2 pi, integrated on axis
    flagged: list                  # sweep indices with ambiguous ring detection
    delta_n_rings: float           # (lambda / L) * fitted ring count at peak I
    delta_n_phase: float           # on-axis phase route
    delta_n_configured: float      # |chi3| I_peak / (2 n0)
    fit_slope: float               # rings per unit intensity


def _count_rings(far_field: np.ndarray, min_prominence: float = 2e-4):
    """Count local maxima of the radial far-field profile at r > 0.

    Returns (count, ambiguous) where ambiguous flags shallow/noisy extrema.
    """
    radii, prof = radial_profile(far_field)
    # keep the resolved disc only; the outer corners average over few pixels
    n_keep = int(0.7 * far_field.shape[0] / 2)
    prof = prof[:n_keep]
    kernel = np.ones(3) / 3.0
    smooth = np.convolve(prof, kernel, mode="same")
    d = np.diff(smooth)
    sign = np.sign(d)
    maxima = np.where((sign[:-1] > 0) & (sign[1:] <= 0))[0] + 1
    maxima = maxima[maxima > 1]  # exclude the central lobe
    scale = float(smooth.max())
    strong, ambiguous = 0, False
    for m in maxima:
        lo = smooth[max(0, m - 4):m + 1].min()
        prom = smooth[m] - lo
        if prom > min_prominence * scale:
            strong += 1
        else:
            ambiguous = True
    return strong, ambiguous


def ring_count_n2(config: RingCountConfig) -> RingCountResult:
    n = config.grid
    dx = config.window_waists * config.waist / n
    y, x = np.meshgrid((np.arange(n) - n // 2) * dx, (np.arange(n) - n // 2) * dx,
                       indexing="ij")
    r2 = x**2 + y**2
    envelope = np.exp(-r2 / config.waist**2)
    medium = MediumSpec(chi3=config.chi3, length=config.length)
    dz = config.length / config.steps
    c3 = config.k0 * abs(config.chi3) / (2.0 * config.n0**2)
    center = (n // 2, n // 2)

    intensities = np.linspace(config.peak_intensity / config.n_intensities,
                              config.peak_intensity, config.n_intensities)
    counts, phases, flagged = [], [], []
    for idx, i_peak in enumerate(intensities):
        data = math.sqrt(i_peak) * envelope.astype(complex)
        on_axis = [float(_intensity(data[center[0], center[1]]))]

        def observer(step, z, d):
            on_axis.append(float(_intensity(d[center[0], center[1]])))

        field = ComplexField(data, dx=dx, dy=dx, k0=config.k0, n0=config.n0)
        out = split_step_nlse(field, medium, dz, config.steps, observer=observer)
        # accumulated on-axis nonlinear phase, trapezoid over the recorded samples
        phi = c3 * float(np.trapezoid(on_axis, dx=dz))
        far = np.abs(np.fft.fftshift(np.fft.fft2(out.data))) ** 2
        count, ambiguous = _count_rings(far)
        counts.append(count)
        phases.append(phi / (2.0 * math.pi))
        if ambiguous:
            flagged.append(idx)

    counts = np.asarray(counts, dtype=float)
    phases = np.asarray(phases)
    slope, intercept = np.polyfit(intensities, counts, 1)
    lam = 2.0 * math.pi / config.k0
    rings_at_peak = slope * intensities[-1] + intercept
    delta_n_rings = (lam / config.length) * rings_at_peak
    delta_n_phase = phases[-1] * 2.0 * math.pi * config.n0 / (config.k0 * config.length)
    delta_n_configured = abs(config.chi3) * intensities[-1] / (2.0 * config.n0)
    return RingCountResult(
        intensities=intensities, ring_counts=counts, phase_over_2pi=phases,
        flagged=flagged, delta_n_rings=float(delta_n_rings),
        delta_n_phase=float(delta_n_phase),
        delta_n_configured=float(delta_n_configured), fit_slope=float(slope))


# ---------------------------------------------------------------------------
# Shockwaves
# ---------------------------------------------------------------------------

@dataclass
class ShockConfig:
    """Dispersive shockwave launch: perturbation comparable to the background."""

    dimensionality: int = 2
    k0: float = 2.0 * math.pi / 780e-9
    n0: float = 1.0
    chi3: float = -1.0e-9
    background_intensity: float = 10.0
    bump_ratio: float = 1.0         # bump peak over background (not small!)
    bump_waist: float = 0.25e-3
    grid: int = 512
    window: float = 8.0e-3
    length: float = 0.08
    steps: int = 400
    snap_every: int = 10

    def __post_init__(self):
        if self.dimensionality not in (1, 2):
            raise ConfigError("dimensionality must be 1 or 2")


@dataclass
class ShockFeatures:
    z: np.ndarray
    slope_onset: np.ndarray   # point 1: outermost strong-gradient radius
    maximum: np.ndarray       # point 2: position of the profile maximum
    first_minimum: np.ndarray  # point 3: first oscillation minimum behind the max
    truncated: bool           # a feature was lost before the last snapshot


@dataclass
class ShockResult:
    features: ShockFeatures
    exponents: dict           # power-law fit exponents per feature (reported only)
    background: float
    final_center_density: float
    center_deficit: float     # background - center density at the end
    noise_floor: float        # profile fluctuation scale ahead of the front
    profiles: list            # (z, radius_or_x, density profile)


def _shock_features_from_profile(radii, prof, background, bump_scale):
    """Locate the three tracked points on one outward density profile."""
    dp = np.gradient(prof, radii)
    strong = np.abs(dp) > 0.1 * np.abs(dp).max()
    onset = radii[np.where(strong)[0][-1]] if strong.any() else math.nan
    i_max = int(np.argmax(prof))
    maximum = radii[i_max]
    first_min = math.nan
    for i in range(i_max - 1, 0, -1):
        if prof[i] < prof[i - 1] and prof[i] < prof[i + 1]:
            first_min = radii[i]
            break
    return onset, maximum, first_min


def shockwave_run(config: ShockConfig) -> ShockResult:
    n = config.grid
    dx = config.window / n
    bg_amp = math.sqrt(config.background_intensity)
    bump_amp = math.sqrt(config.background_intensity * config.bump_ratio)
    medium = MediumSpec(chi3=config.chi3, length=config.length)
    dz = config.length / config.steps

    if config.dimensionality == 1:
        x = (np.arange(n) - n // 2) * dx
        data = (bg_amp + bump_amp * np.exp(-(x**2) / config.bump_waist**2)).astype(complex)
        field = ComplexField(data, dx=dx, k0=config.k0, n0=config.n0)
        mask = None
        def profile_of(d):
            rho = _intensity(d)
            sel = x >= 0
            return x[sel], rho[sel]
    else:
        y, x2 = np.meshgrid((np.arange(n) - n // 2) * dx, (np.arange(n) - n // 2) * dx,
                            indexing="ij")
        r = np.hypot(x2, y)
        envelope = np.exp(-((r / (0.40 * config.window)) ** 16))
        data = ((bg_amp + bump_amp * np.exp(-(r**2) / config.bump_waist**2))
                * envelope).astype(complex)
        field = ComplexField(data, dx=dx, dy=dx, k0=config.k0, n0=config.n0)
        mask = super_gaussian_mask(field, radius_frac=0.46, order=12)
        def profile_of(d):
            radii, prof = radial_profile(_intensity(d))
            keep = radii < 0.42 * config.window / dx
            return radii[keep] * dx, prof[keep]

    snaps = []

    def observer(step, z, d):
        if (step + 1) % config.snap_every == 0:
            snaps.append((z, profile_of(d)))

    out = split_step_nlse(field, medium, dz, config.steps, edge_mask=mask,
                          observer=observer)

    background = config.background_intensity
    bump_scale = config.background_intensity * config.bump_ratio
    z_list, onsets, maxima, minima = [], [], [], []
    profiles = []
    quiet = max(abs(np.asarray(p[1][1] - background)).max() for p in snaps[:1])
    detectable = quiet > 1e-3 * background
    truncated = False
    for z, (radii, prof) in snaps:
        profiles.append((z, radii, prof))
        if not detectable:
            continue
        onset, mx, mn = _shock_features_from_profile(radii, prof, background, bump_scale)
        z_list.append(z)
        onsets.append(onset)
        maxima.append(mx)
        minima.append(mn)
        if math.isnan(mn):
            truncated = True

    features = ShockFeatures(z=np.asarray(z_list), slope_onset=np.asarray(onsets),
                             maximum=np.asarray(maxima),
                             first_minimum=np.asarray(minima), truncated=truncated)

    exponents = {}
    for name, traj in (("slope_onset", features.slope_onset),
                       ("maximum", features.maximum),
                       ("first_minimum", features.first_minimum)):
        good = np.isfinite(traj) & (features.z > 0.3 * config.length) & (traj > 0)
        if good.sum() >= 3:
            exponents[name] = float(np.polyfit(np.log(features.z[good]),
                                               np.log(traj[good]), 1)[0])
        else:
            exponents[name] = math.nan

    # center density at the end, and the profile noise floor ahead of the front
    z_end, radii_end, prof_end = profiles[-1]
    if config.dimensionality == 1:
        center_density = float(prof_end[0])
    else:
        center_density = float(prof_end[:3].mean())
    if detectable and len(features.slope_onset) and np.isfinite(features.slope_onset[-1]):
        ahead = radii_end > 1.15 * features.slope_onset[-1]
    else:
        ahead = radii_end > 0.5 * radii_end.max()
    noise = float(np.std(prof_end[ahead] - background)) if ahead.any() else 0.0

    return ShockResult(features=features, exponents=exponents, background=background,
                       final_center_density=center_density,
                       center_deficit=background - center_density,
                       noise_floor=noise, profiles=profiles)


# ---------------------------------------------------------------------------
# OAM injection and vortex census
# ---------------------------------------------------------------------------

@dataclass
class OamConfig:
    """Four tilted pumps on a square (or a Laguerre-Gauss demo pump).

    Normalized units: the engine runs with hbar/m* = 1 (length in grid units,
    time in 1/rate units).  ``tilt`` is the angle between each pump's in-plane
    wavevector and the direction to the square center.
    """

    engine: str = "ddgpe"           # "ddgpe" (quasi-steady) or "nlse" (fixed z)
    pump_mode: str = "four_tilted"  # or "laguerre_gauss" (demo, no assertions)
    radius: float = 40.0            # R, pump distance to center (grid units)
    k_mag: float = 0.25             # in-plane |k| (1/grid unit)
    tilt: float = 0.0               # phi (rad)
    spot_waist: float = 16.0
    cut_radius: float = 24.0        # hard aperture on each pump spot
    lg_charge: int = 2              # Laguerre-Gauss demo charge
    grid: int = 256
    pump_amplitude: float = 1.0
    g: float = 0.02                 # interaction rate per |psi|^2
    gamma_lp: float = 0.3
    dt: float = 0.05
    t_final: float = 60.0
    nlse_length: float = 60.0
    census_margin: float = 2.0      # exclude vortices this close to the census edge

    def __post_init__(self):
        if self.engine not in ("ddgpe", "nlse"):
            raise ConfigError("engine must be 'ddgpe' or 'nlse'")
        if self.pump_mode not in ("four_tilted", "laguerre_gauss"):
            raise ConfigError("pump_mode must be 'four_tilted' or 'laguerre_gauss'")


@dataclass
class VortexCensus:
    positions: list           # (row, col) grid coordinates
    charges: list
    net_charge: int
    count: int
    excluded: int             # vortices dropped for sitting at the census edge
    injected_momentum: float  # L/hbar = R |k| sin(phi)
    census_radius: float


def _four_pump_field(config: OamConfig):
    n = config.grid
    y, x = np.meshgrid(np.arange(n) - n // 2, np.arange(n) - n // 2, indexing="ij")
    total = np.zeros((n, n), dtype=complex)
    for j in range(4):
        theta = j * math.pi / 2.0
        cx = config.radius * math.cos(theta)
        cy = config.radius * math.sin(theta)
        # inward flow rotated by the tilt angle
        kdir = theta + math.pi + config.tilt
        kx = config.k_mag * math.cos(kdir)
        ky = config.k_mag * math.sin(kdir)
        d2 = (x - cx) ** 2 + (y - cy) ** 2
        spot = np.exp(-d2 / config.spot_waist**2) * (d2 < config.cut_radius**2)
        total += config.pump_amplitude * spot * np.exp(1j * (kx * x + ky * y))
    return total


def _lg_field(config: OamConfig):
    n = config.grid
    y, x = np.meshgrid(np.arange(n) - n // 2, np.arange(n) - n // 2, indexing="ij")
    r = np.hypot(x, y)
    theta = np.arctan2(y, x)
    w = config.radius
    m = config.lg_charge
    return (config.pump_amplitude * (r / w) ** abs(m)
            * np.exp(-(r**2) / w**2) * np.exp(1j * m * theta))


def oam_injection(config: OamConfig) -> VortexCensus:
    pump = _four_pump_field(config) if config.pump_mode == "four_tilted" else _lg_field(config)

    if config.engine == "ddgpe":
        # rate units: mass = hbar so hbar/m* = 1; g and V carry 1/time
        field = ComplexField(np.zeros_like(pump), dx=1.0, dy=1.0, k0=1.0, n0=1.0)
        drive = DriveSpec(gamma_lp=config.gamma_lp, g=config.g * hbar, mass=hbar,
                          pump=hbar * config.gamma_lp * pump)
        steps = int(round(config.t_final / config.dt))
        out = split_step_ddgpe(field, drive, config.dt, steps)
    else:
        field = ComplexField(pump.copy(), dx=1.0, dy=1.0, k0=1.0, n0=1.0)
        medium = MediumSpec(chi3=-2.0 * config.g, length=config.nlse_length)
        steps = int(round(config.nlse_length / config.dt))
        mask = super_gaussian_mask(field, radius_frac=0.46)
        out = split_step_nlse(field, medium, config.dt, steps, edge_mask=mask)

    if config.pump_mode == "four_tilted":
        census_radius = 0.9 * (config.radius - config.cut_radius)
    else:
        census_radius = 1.5 * config.radius
    return vortex_census(out, census_radius, margin=config.census_margin,
                         injected=config.radius * config.k_mag * math.sin(config.tilt))


def vortex_census(field: ComplexField, census_radius: float, margin: float = 2.0,
                  injected: float = math.nan,
                  density_fraction: float = 1e-4) -> VortexCensus:
    """Detect quantized vortices inside a central disc via plaquette winding.

    Plaquettes in deep vacuum (all corners below ``density_fraction`` of the
    central max density) are ignored; adjacent same-sign plaquettes merge into
    one vortex.  Vortices within ``margin`` of the census edge are excluded
    and counted separately.
    """
    n = field.shape[0]
    wind = vortex_map(field)
    rho = _intensity(field.data)
    y, x = np.meshgrid(np.arange(n) - n // 2, np.arange(n) - n // 2, indexing="ij")
    r = np.hypot(x, y)
    central = r < census_radius
    rho_scale = float(rho[central].max()) if central.any() else float(rho.max())
    corners_ok = ((rho[:-1, :-1] > density_fraction * rho_scale)
                  | (rho[:-1, 1:] > density_fraction * rho_scale)
                  | (rho[1:, :-1] > density_fraction * rho_scale)
                  | (rho[1:, 1:] > density_fraction * rho_scale))
    inside = central[:-1, :-1]
    wind = np.where(inside & corners_ok, wind, 0)

    positions, charges, excluded = [], [], 0
    for sign in (1, -1):
        labels, n_lab = ndimage.label(wind * sign > 0)
        for lab in range(1, n_lab + 1):
            cells = np.argwhere(labels == lab)
            charge = int(wind[cells[:, 0], cells[:, 1]].sum())
            cy, cx = cells.mean(axis=0) + 0.5
            rad = math.hypot(cx - n // 2, cy - n // 2)
            if rad > census_radius - margin:
                excluded += 1
                continue
            positions.append((float(cy), float(cx)))
            charges.append(charge)
    return VortexCensus(positions=positions, charges=charges,
                        net_charge=int(sum(charges)), count=len(charges),
                        excluded=excluded, injected_momentum=float(injected),
                        census_radius=float(census_radius))


# ---------------------------------------------------------------------------
# Defect scattering / superfluidity signatures
# ---------------------------------------------------------------------------

@dataclass
class DefectConfig:
    """Flow against an optically written defect in the propagating geometry."""

    k0: float = 2.0 * math.pi / 780e-9
    n0: float = 1.0
    chi3: float = -1.0e-9
    flow_speed: float = 2.0e-3      # transverse angle v = k_flow / k0
    intensity: float = 10.0         # |E0|^2 background density
    defect_delta_n: float = -4.0e-6  # index dip -> repulsive potential
    defect_waist: float = 0.12e-3
    grid: int = 512
    window: float = 8.0e-3
    length: float = 0.06
    steps: int = 240

    def __post_init__(self):
        pass


@dataclass
class DefectResult:
    fringe_contrast: float
    ring_power: float
    drag: np.ndarray
    sound_speed: float
    flow_speed: float
    mach_angle_measured: float   # rad, NaN for subsonic runs
    mach_angle_expected: float   # asin(c_s / v) for supersonic runs


def defect_scattering(config: DefectConfig) -> DefectResult:
    n = config.grid
    dx = config.window / n
    if 2.0 * config.defect_waist < 4.0 * dx:
        raise ConfigError("defect diameter must span at least 4 grid cells")
    y, x = np.meshgrid((np.arange(n) - n // 2) * dx, (np.arange(n) - n // 2) * dx,
                       indexing="ij")
    r = np.hypot(x, y)
    k_flow = config.flow_speed * config.k0
    envelope = np.exp(-((r / (0.40 * config.window)) ** 16))
    base = math.sqrt(config.intensity) * envelope * np.exp(1j * k_flow * x)

    delta_n = config.defect_delta_n * np.exp(-(r**2) / config.defect_waist**2)
    dz = config.length / config.steps

    def run(with_defect: bool):
        medium = MediumSpec(chi3=config.chi3, length=config.length,
                            delta_n=delta_n if with_defect else None)
        field = ComplexField(base.astype(complex), dx=dx, dy=dx,
                             k0=config.k0, n0=config.n0)
        mask = super_gaussian_mask(field, radius_frac=0.46, order=12)
        return split_step_nlse(field, medium, dz, config.steps, edge_mask=mask)

    out = run(True)
    ref = run(False)

    rho = _intensity(out.data)
    bog = BogoliubovOptical(k0=config.k0, chi3=config.chi3,
                            e0_squared=config.intensity, n0=config.n0)
    cs = bog.sound_speed

    # upstream fringe contrast on the flow axis
    band = np.abs(y[:, 0]) < config.defect_waist
    cut = rho[band].mean(axis=0)
    x_axis = x[0]
    window = (x_axis < -2.0 * config.defect_waist) & (x_axis > -10.0 * config.defect_waist)
    seg = cut[window]
    contrast = float((seg.max() - seg.min()) / (seg.max() + seg.min()))

    # scattered ring power in k-space, pump spot excluded
    spectrum = np.abs(np.fft.fftshift(np.fft.fft2(out.data))) ** 2
    ky_grid = 2.0 * math.pi * np.fft.fftshift(np.fft.fftfreq(n, dx))
    kyy, kxx = np.meshgrid(ky_grid, ky_grid, indexing="ij")
    k_r = np.hypot(kxx, kyy)
    pump_excl = np.hypot(kxx - k_flow, kyy) > 0.25 * k_flow
    ring = (k_r > 0.75 * k_flow) & (k_r < 1.25 * k_flow) & pump_excl
    ring_power = float(spectrum[ring].sum() / spectrum.sum())

    # drag force on the defect potential (engine rate units)
    potential = -delta_n * config.k0 / config.n0
    drag = drag_force(rho, potential, dx, dx)

    mach_measured = math.nan
    mach_expected = math.asin(min(cs / config.flow_speed, 1.0)) \
        if config.flow_speed > cs else math.nan
    if config.flow_speed > cs:
        mach_measured = _mach_angle(out.data, ref.data, x, y, config)

    return DefectResult(fringe_contrast=contrast, ring_power=ring_power,
                        drag=drag, sound_speed=cs, flow_speed=config.flow_speed,
                        mach_angle_measured=mach_measured,
                        mach_angle_expected=mach_expected)


def _mach_angle(data, ref, x, y, config: DefectConfig) -> float:
    """Half-angle of the supersonic wake, from the angular ridge of |drho|."""
    delta = np.abs(_intensity(data) - _intensity(ref))
    r = np.hypot(x, y)
    theta = np.arctan2(y, x)  # 0 along +x (downstream)
    sel = (r > 4.0 * config.defect_waist) & (r < 0.35 * config.window)
    bins = np.linspace(-math.pi, math.pi, 181)
    idx = np.digitize(theta[sel], bins) - 1
    acc = np.bincount(idx, weights=delta[sel], minlength=181)[:180]
    centers = 0.5 * (bins[:-1] + bins[1:])
    upper = (centers > 0.05) & (centers < math.pi / 2)
    lower = (centers < -0.05) & (centers > -math.pi / 2)
    th_up = centers[upper][np.argmax(acc[upper])]
    th_dn = -centers[lower][np.argmax(acc[lower])]
    return float(0.5 * (th_up + th_dn))
