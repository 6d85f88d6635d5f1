"""Analytic dispersion relations.

Cavity photon with effective mass, exciton-polariton branches with Hopfield
coefficients, Bogoliubov spectra in matter and optical form, Landau critical
velocity.  The optical form lives in the propagating geometry where the
time axis is the propagation distance: Omega_B carries 1/m and "velocities"
are transverse angles.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c, hbar


@dataclass(frozen=True)
class CavitySpec:
    """Planar Fabry-Perot cavity: index, length, longitudinal order, linewidths."""

    n_c: float
    length: float
    mode_index: int = 1
    gamma_c: float = 0.0  # photon linewidth (rad/s)
    gamma_x: float = 0.0  # exciton linewidth (rad/s)
    quality: float | None = None

    def __post_init__(self):
        if self.n_c <= 0 or self.length <= 0:
            raise ValueError("n_c and length must be positive")
        if self.mode_index < 1:
            raise ValueError("mode_index must be >= 1")

    @property
    def k_z(self) -> float:
        """Quantized longitudinal wavenumber p*pi/(n_c L)."""
        return self.mode_index * math.pi / (self.n_c * self.length)

    @property
    def omega0(self) -> float:
        """Resonance at normal incidence, c k_z / n_c."""
        return c * self.k_z / self.n_c

    @property
    def effective_mass(self) -> float:
        """Paraxial photon mass m* = n_c hbar k_z / c (kg)."""
        return self.n_c * hbar * self.k_z / c

    @property
    def photon_lifetime(self) -> float | None:
        """tau_C = Q / omega_C when the quality factor is known."""
        if self.quality is None:
            return None
        return self.quality / self.omega0


def cavity_dispersion(spec: CavitySpec, k_perp):
    """Paraxial cavity dispersion omega(k_perp) = c k_z/n_c + hbar k_perp^2/(2 m*).

    Returns (omega, m*) with omega in rad/s.
    """
    k_perp = np.asarray(k_perp, dtype=float)
    m_star = spec.effective_mass
    omega = spec.omega0 + hbar * k_perp**2 / (2.0 * m_star)
    return omega, m_star


def cavity_dispersion_exact(spec: CavitySpec, k_perp):
    """Unexpanded dispersion (c/n_c) sqrt(k_z^2 + k_perp^2)."""
    k_perp = np.asarray(k_perp, dtype=float)
    return (c / spec.n_c) * np.sqrt(spec.k_z**2 + k_perp**2)


@dataclass(frozen=True)
class PolaritonBranches:
    """Upper/lower polariton energies and Hopfield weights over a k grid."""

    k_perp: np.ndarray
    omega_lp: np.ndarray
    omega_up: np.ndarray
    hopfield_x: np.ndarray  # exciton weight of the lower polariton
    hopfield_c: np.ndarray  # photon weight of the lower polariton
    omega_x: float
    omega_r: float


def polariton_branches(omega_cavity, omega_x: float, omega_r: float,
                       k_perp=None) -> PolaritonBranches:
    """Diagonalize the 2x2 photon-exciton coupling at each k.

    omega_{UP,LP} = (omega_C + omega_X)/2 +- sqrt((omega_C - omega_X)^2 + 4 Omega_R^2)/2.
    Hopfield coefficients of the lower branch:
    X = 1/sqrt(1 + [Omega_R/(omega_LP - omega_C)]^2),
    C = -1/sqrt(1 + [(omega_LP - omega_C)/Omega_R]^2).
    """
    if omega_r < 0:
        raise ValueError("omega_r must be non-negative")
    omega_c_arr = np.atleast_1d(np.asarray(omega_cavity, dtype=float))
    if k_perp is None:
        k_perp = np.arange(omega_c_arr.size, dtype=float)
    k_perp = np.atleast_1d(np.asarray(k_perp, dtype=float))

    mean = (omega_c_arr + omega_x) / 2.0
    root = np.sqrt((omega_c_arr - omega_x) ** 2 + 4.0 * omega_r**2) / 2.0
    omega_lp = mean - root
    omega_up = mean + root

    if omega_r == 0:
        # Degenerate limit: the branches are the bare modes.
        photon_lower = omega_c_arr <= omega_x
        x = np.where(photon_lower, 0.0, 1.0)
        cc = np.where(photon_lower, -1.0, 0.0)
    else:
        a = omega_lp - omega_c_arr  # strictly negative for Omega_R > 0
        x = 1.0 / np.sqrt(1.0 + (omega_r / a) ** 2)
        cc = -1.0 / np.sqrt(1.0 + (a / omega_r) ** 2)

    return PolaritonBranches(k_perp=k_perp, omega_lp=omega_lp, omega_up=omega_up,
                             hopfield_x=x, hopfield_c=cc,
                             omega_x=float(omega_x), omega_r=float(omega_r))


def strong_coupling_check(omega_r: float, gamma_c: float, gamma_x: float) -> bool:
    """True iff Omega_R strictly exceeds both linewidths."""
    if omega_r < 0 or gamma_c < 0 or gamma_x < 0:
        raise ValueError("rates must be non-negative")
    return omega_r > max(gamma_c, gamma_x)


@dataclass(frozen=True)
class BogoliubovMatter:
    """Interaction parameters of a uniform condensate: g n >= 0, mass > 0."""

    g: float
    density: float
    mass: float

    def __post_init__(self):
        if self.mass <= 0:
            raise ValueError("mass must be positive")
        if self.g * self.density < 0:
            raise ValueError("attractive g*n < 0 is out of scope (imaginary branch)")

    @property
    def mu(self) -> float:
        return self.g * self.density

    @property
    def sound_speed(self) -> float:
        return math.sqrt(self.g * self.density / self.mass)

    @property
    def healing_length(self) -> float:
        """hbar/(m c_s); 1/xi is where the sonic slope meets hbar k^2/2m scale."""
        cs = self.sound_speed
        if cs == 0:
            return math.inf
        return hbar / (self.mass * cs)


def bogoliubov_matter(q, params: BogoliubovMatter):
    """Bogoliubov branch omega(q) = sqrt(e0 (e0 + 2 g n)) / hbar, e0 = hbar^2 q^2 / 2m."""
    q = np.asarray(q, dtype=float)
    e0 = hbar**2 * q**2 / (2.0 * params.mass)
    return np.sqrt(e0 * (e0 + 2.0 * params.g * params.density)) / hbar


@dataclass(frozen=True)
class BogoliubovOptical:
    """Optical-mapping parameters: carrier k0, chi3 |E0|^2 <= 0 (defocusing), n0."""

    k0: float
    chi3: float
    e0_squared: float
    n0: float = 1.0

    def __post_init__(self):
        if self.k0 <= 0 or self.n0 <= 0 or self.e0_squared < 0:
            raise ValueError("k0 and n0 must be positive, |E0|^2 non-negative")
        if self.chi3 * self.e0_squared > 0:
            raise ValueError("focusing chi3 |E0|^2 > 0 is out of scope for the "
                             "Bogoliubov mapping (needs repulsive interactions)")

    @property
    def sound_speed(self) -> float:
        """Transverse sound "speed" sqrt(-chi3 |E0|^2 / (2 n0^2)), dimensionless."""
        return math.sqrt(-self.chi3 * self.e0_squared / (2.0 * self.n0**2))

    @property
    def healing_length(self) -> float:
        """xi = (1/k0) sqrt(2 n0^2 / |chi3| |E0|^2) = 1/(k0 c_s)."""
        cs = self.sound_speed
        if cs == 0:
            return math.inf
        return 1.0 / (self.k0 * cs)

    @property
    def asymptote_crossing(self) -> float:
        """k where the sonic and parabolic asymptotes meet: c_s k = k^2/(2 k0).

        Solving gives k = 2 k0 c_s = 2/xi with the healing length above.
        """
        return 2.0 * self.k0 * self.sound_speed


def bogoliubov_optical(k_perp, params: BogoliubovOptical):
    """Optical Bogoliubov rate Omega_B(k) = sqrt(k^2/2k0) sqrt(k^2/2k0 - k0 chi3 |E0|^2/n0^2)."""
    k_perp = np.asarray(k_perp, dtype=float)
    a = k_perp**2 / (2.0 * params.k0)
    b = -params.k0 * params.chi3 * params.e0_squared / params.n0**2
    return np.sqrt(a * (a + b))


@dataclass
class DispersionCurve:
    """Sampled dispersion: strictly increasing wavevectors, finite values."""

    wavevector: np.ndarray
    values: np.ndarray
    label: str = ""
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.wavevector = np.asarray(self.wavevector, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.wavevector.shape != self.values.shape or self.wavevector.ndim != 1:
            raise ValueError("wavevector and values must be matching 1D arrays")
        if self.wavevector.size and np.any(np.diff(self.wavevector) <= 0):
            raise ValueError("wavevector samples must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("dispersion values must be finite")

    def to_csv(self) -> str:
        """Two-column CSV, header ``k,value``, 17 significant digits."""
        buf = io.StringIO()
        buf.write("k,value\n")
        for k, v in zip(self.wavevector, self.values):
            buf.write(f"{k:.17g},{v:.17g}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, label: str = "") -> "DispersionCurve":
        lines = [ln for ln in text.strip().splitlines() if ln]
        if not lines or lines[0].strip() != "k,value":
            raise ValueError("expected header 'k,value'")
        pairs = [ln.split(",") for ln in lines[1:]]
        k = np.array([float(p[0]) for p in pairs])
        v = np.array([float(p[1]) for p in pairs])
        return cls(wavevector=k, values=v, label=label)


def landau_critical_velocity(curve: DispersionCurve):
    """min over samples of epsilon(q)/q, with the analytic q->0 sound speed
    included when the curve metadata carries one.

    Returns (v_c, q_argmin); q_argmin is 0.0 when the analytic limit wins.
    Ties resolve to the smallest q.
    """
    if curve.wavevector.size == 0:
        raise ValueError("empty dispersion curve")
    if np.any(curve.wavevector <= 0):
        raise ValueError("curve must exclude q <= 0 samples (ratio undefined)")
    if np.any(curve.values < 0):
        raise ValueError("dispersion values must be non-negative")
    ratios = curve.values / curve.wavevector
    i = int(np.argmin(ratios))
    # argmin returns the first (smallest-q) index on ties
    v_c, q_min = float(ratios[i]), float(curve.wavevector[i])
    cs = curve.metadata.get("sound_speed")
    if cs is not None and cs <= v_c:
        return float(cs), 0.0
    return v_c, q_min
