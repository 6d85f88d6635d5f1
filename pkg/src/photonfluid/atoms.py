"""Optical response of a warm two-level atomic vapor.

Closed-form cross sections, vapor density, Bloch steady state, susceptibility
orders up to chi^(5), refractive indices and cooperativity.  All frequencies
and rates are angular (rad/s) internally; plain Hz appears only where a
function explicitly documents it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import c, epsilon_0, hbar, k as k_B

from .errors import NumericalError

# Rubidium vapor-pressure coefficients, p(Pa) = 10**(A + B/T).  The liquid
# phase fit; B carries the minus sign so that pressure rises with T.
RB_PRESSURE_A = 9.318
RB_PRESSURE_B = -4040.0  # K

_U = 1.66053906660e-27  # atomic mass unit, kg


@dataclass(frozen=True)
class AtomSpec:
    """Constants of one optical transition.

    wavelength: m; gamma: natural linewidth (rad/s); dipole: mu_eg (C m);
    mass: kg; f_ground/f_excited: total angular momenta; i_sat0: resonant
    saturation intensity (W/m^2).
    """

    wavelength: float
    gamma: float
    dipole: float
    mass: float
    f_ground: float
    f_excited: float
    i_sat0: float

    def __post_init__(self):
        if self.wavelength <= 0 or self.gamma <= 0 or self.mass <= 0 or self.i_sat0 <= 0:
            raise ValueError("wavelength, gamma, mass and i_sat0 must be positive")
        if round(2 * (self.f_excited - self.f_ground)) not in (-2, 0, 2):
            raise ValueError("dipole transition requires F_e - F_g in {-1, 0, 1}")

    @property
    def k(self) -> float:
        """Vacuum wavenumber 2*pi/lambda (1/m)."""
        return 2.0 * math.pi / self.wavelength

    @property
    def omega0(self) -> float:
        """Transition angular frequency (rad/s)."""
        return 2.0 * math.pi * c / self.wavelength


# D2-line presets used throughout the tests and example configs.
RB87_D2 = AtomSpec(
    wavelength=780.241e-9,
    gamma=2.0 * math.pi * 6.0666e6,
    dipole=3.584e-29,
    mass=86.909180527 * _U,
    f_ground=2,
    f_excited=3,
    i_sat0=16.69,
)

RB85_D2 = AtomSpec(
    wavelength=780.241e-9,
    gamma=2.0 * math.pi * 6.0666e6,
    dipole=3.584e-29,
    mass=84.911789738 * _U,
    f_ground=3,
    f_excited=4,
    i_sat0=16.69,
)


def vapor_pressure(temperature: float, a: float = RB_PRESSURE_A, b: float = RB_PRESSURE_B) -> float:
    """Vapor pressure 10**(a + b/T) in Pa.  b < 0 gives pressure rising with T."""
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    return 10.0 ** (a + b / temperature)


def atomic_density(temperature: float, pressure: float) -> float:
    """Number density p/(k_B T) in 1/m^3."""
    if temperature <= 0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    if pressure < 0:
        raise ValueError(f"pressure must be non-negative, got {pressure}")
    return pressure / (k_B * temperature)


@dataclass(frozen=True)
class VaporState:
    """Thermodynamic state of the vapor: temperature plus pressure-law coefficients."""

    temperature: float
    a: float = RB_PRESSURE_A
    b: float = RB_PRESSURE_B

    @property
    def pressure(self) -> float:
        return vapor_pressure(self.temperature, self.a, self.b)

    @property
    def density(self) -> float:
        return atomic_density(self.temperature, self.pressure)

    def density_per_lambda3(self, spec: AtomSpec) -> float:
        """Dimensionless density n_at * lambda^3 (Dicke criterion scale)."""
        return self.density * spec.wavelength**3


def resonant_cross_section(spec: AtomSpec, use_multiplicity: bool = False) -> float:
    """Resonant dipole cross section in m^2.

    3*lambda^2/(2*pi) for the bare two-level atom; with ``use_multiplicity``
    the (2F_e+1)/(2F_g+1) degeneracy ratio replaces the factor 3.
    """
    lam2 = spec.wavelength**2
    if use_multiplicity:
        ratio = (2 * spec.f_excited + 1) / (2 * spec.f_ground + 1)
        return ratio * lam2 / (2.0 * math.pi)
    return 3.0 * lam2 / (2.0 * math.pi)


def saturation_intensity(delta: float, gamma: float, i_sat0: float) -> float:
    """Off-resonance saturation intensity [1 + 4 (delta/gamma)^2] * I_sat0."""
    if gamma <= 0 or i_sat0 <= 0:
        raise ValueError("gamma and i_sat0 must be positive")
    return (1.0 + 4.0 * (delta / gamma) ** 2) * i_sat0


def saturated_cross_section(sigma0: float, delta: float, gamma: float,
                            intensity: float, i_sat: float) -> float:
    """Cross section sigma0 / (1 + 4 (delta/gamma)^2 + I/I_sat)."""
    if sigma0 <= 0 or gamma <= 0 or i_sat <= 0:
        raise ValueError("sigma0, gamma and i_sat must be positive")
    if intensity < 0:
        raise ValueError("intensity must be non-negative")
    return sigma0 / (1.0 + 4.0 * (delta / gamma) ** 2 + intensity / i_sat)


def beer_transmission(density: float, cross_section: float, length: float) -> float:
    """Beer-law transmission exp(-n sigma L)."""
    if density < 0 or cross_section < 0 or length < 0:
        raise ValueError("density, cross_section and length must be non-negative")
    return math.exp(-density * cross_section * length)


def doppler_linewidth(temperature: float, mass: float, wavelength: float) -> float:
    """Doppler linewidth sqrt(k_B T / (m lambda^2)), returned in Hz."""
    if temperature < 0:
        raise ValueError("temperature must be non-negative")
    if mass <= 0 or wavelength <= 0:
        raise ValueError("mass and wavelength must be positive")
    return math.sqrt(k_B * temperature / (mass * wavelength**2))


@dataclass(frozen=True)
class TwoLevelSteadyState:
    """Steady state of the driven two-level atom."""

    coherence: complex          # sigma_ge
    population_difference: float  # w = rho_ee - rho_gg, in [-1, 0]
    delta: float
    omega: float

    @property
    def rho_ee(self) -> float:
        return (1.0 + self.population_difference) / 2.0

    @property
    def rho_gg(self) -> float:
        return (1.0 - self.population_difference) / 2.0


def two_level_steady_state(delta: float, omega: float, gamma: float) -> TwoLevelSteadyState:
    """Steady-state coherence and population difference of the two-level atom.

    w = -(delta^2 + gamma^2/4) / (delta^2 + gamma^2/4 + omega^2/2)
    sigma_ge = -(omega/2) w / (delta - i gamma/2)
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    lorentz = delta**2 + gamma**2 / 4.0
    w = -lorentz / (lorentz + omega**2 / 2.0)
    sigma_ge = -(omega / 2.0) * w / (delta - 1j * gamma / 2.0)
    return TwoLevelSteadyState(coherence=sigma_ge, population_difference=w,
                               delta=delta, omega=omega)


@dataclass(frozen=True)
class Susceptibility:
    """chi orders of the vapor plus the derived refractive indices.

    chi3 and chi5 are stored in the degeneracy-weighted convention: the
    intensity-dependent susceptibility is chi1 + 3 chi3 |E|^2 + 10 chi5 |E|^4,
    and that weighted sum is the exact Taylor expansion of the saturated
    response in I/I_sat.
    """

    chi1: complex
    chi3: complex  # m^2/V^2
    chi5: complex  # m^4/V^4
    n0: float
    n2: float      # m^2/W
    n3: float      # m^4/W^2


def saturated_susceptibility(spec: AtomSpec, density: float, delta: float,
                             saturation: float) -> complex:
    """Full (unexpanded) susceptibility at saturation parameter s = I/I_sat.

    chi = -(4 N mu^2 / (eps0 hbar Gamma^2)) (delta + i Gamma/2) / (1 + 4 delta^2/Gamma^2 + s)
    """
    if spec.gamma <= 0:
        raise ValueError("gamma must be positive")
    if density < 0 or saturation < 0:
        raise ValueError("density and saturation must be non-negative")
    pref = 4.0 * density * spec.dipole**2 / (hbar * spec.gamma**2 * epsilon_0)
    return -pref * (delta + 1j * spec.gamma / 2.0) / (1.0 + 4.0 * (delta / spec.gamma) ** 2 + saturation)


def susceptibility_orders(spec: AtomSpec, density: float, delta: float) -> Susceptibility:
    """chi^(1), chi^(3), chi^(5) of the two-level vapor and n0, n2, n3.

    The orders come from expanding the saturated susceptibility in
    s = I/I_sat = 2 (Omega/Gamma)^2 with Omega = mu E / hbar; the degeneracy
    weights 1/3/10 are divided out so that chi1 + 3 chi3|E|^2 + 10 chi5|E|^4
    reproduces the expansion.  Index coefficients:
    n0 = sqrt(1 + Re chi1), n2 = 3 Re chi3 / (n0^2 eps0 c),
    n3 = 20 Re chi5 / (n0^3 eps0^2 c^2) - n2^2/(2 n0).
    """
    if spec.gamma <= 0:
        raise ValueError("gamma must be positive")
    if density < 0:
        raise ValueError("density must be non-negative")
    gamma = spec.gamma
    denom = 1.0 + 4.0 * (delta / gamma) ** 2
    pref = 4.0 * density * spec.dipole**2 / (hbar * gamma**2 * epsilon_0)
    lorentz = (delta + 1j * gamma / 2.0) / denom
    # s per field intensity: s = s_e2 * |E|^2
    s_e2 = 2.0 * spec.dipole**2 / (hbar**2 * gamma**2)

    chi1 = -pref * lorentz
    chi3 = pref * lorentz * s_e2 / denom / 3.0
    chi5 = -pref * lorentz * s_e2**2 / denom**2 / 10.0

    n0 = math.sqrt(1.0 + chi1.real)
    n2 = 3.0 * chi3.real / (n0**2 * epsilon_0 * c)
    n3 = 20.0 * chi5.real / (n0**3 * epsilon_0**2 * c**2) - n2**2 / (2.0 * n0)
    return Susceptibility(chi1=chi1, chi3=chi3, chi5=chi5, n0=n0, n2=n2, n3=n3)


def effective_chi(susc: Susceptibility, e_squared: float) -> complex:
    """Field-dependent susceptibility chi1 + 3 chi3 |E|^2 + 10 chi5 |E|^4."""
    if e_squared < 0:
        raise ValueError("|E|^2 must be non-negative")
    return susc.chi1 + 3.0 * susc.chi3 * e_squared + 10.0 * susc.chi5 * e_squared**2


def effective_index(susc: Susceptibility, e_squared: float) -> complex:
    """n_eff = sqrt(1 + chi_eff), complex to carry absorption."""
    return complex(np.sqrt(np.complex128(1.0 + effective_chi(susc, e_squared))))


def doppler_averaged_chi(chi_fn, temperature: float, spec: AtomSpec, delta: float,
                         rtol: float = 1e-8, max_order: int = 4096) -> complex:
    """Average chi(delta - k v) over the 1D Maxwell-Boltzmann distribution.

    Gauss-Hermite quadrature with order doubling until the relative change
    between refinement levels drops below ``rtol``.  Only the velocity
    projection along the beam enters.  Strongly Doppler-broadened lines
    (k sigma_v >> Gamma) need high order; the quadrature raises
    NumericalError instead of returning an unconverged value.
    """
    if temperature < 0:
        raise ValueError("temperature must be non-negative")
    if temperature == 0:
        return chi_fn(delta)
    sigma_v = math.sqrt(k_B * temperature / spec.mass)
    k = spec.k

    def level(order: int) -> complex:
        x, w = np.polynomial.hermite.hermgauss(order)
        v = math.sqrt(2.0) * sigma_v * x
        vals = np.asarray([chi_fn(delta - k * vi) for vi in v])
        return complex(np.sum(w * vals) / math.sqrt(math.pi))

    order = 16
    prev = level(order)
    while order <= max_order:
        order *= 2
        cur = level(order)
        scale = max(abs(cur), abs(prev), 1e-300)
        if abs(cur - prev) / scale < rtol:
            return cur
        prev = cur
    raise NumericalError(
        f"Doppler quadrature did not converge below rtol={rtol} up to order {max_order}")


@dataclass(frozen=True)
class CooperativityReport:
    """Cooperativity C and coupling efficiency beta = C/(1+C)."""

    sigma0: float
    mode_area: float
    mirror_transmission: float | None
    n_atoms: float | None
    cooperativity: float
    beta: float


def cooperativity(sigma0: float, mode_area: float, n_atoms: float | None = None,
                  mirror_transmission: float | None = None) -> CooperativityReport:
    """C = sigma0/A, times N atoms and 1/T cavity round trips when given."""
    if mode_area <= 0:
        raise ValueError("mode_area must be positive")
    if mirror_transmission is not None and not 0 < mirror_transmission <= 1:
        raise ValueError("mirror_transmission must lie in (0, 1]")
    if n_atoms is not None and n_atoms < 0:
        raise ValueError("n_atoms must be non-negative")
    coop = sigma0 / mode_area
    if n_atoms is not None:
        coop *= n_atoms
    if mirror_transmission is not None:
        coop /= mirror_transmission
    return CooperativityReport(sigma0=sigma0, mode_area=mode_area,
                               mirror_transmission=mirror_transmission,
                               n_atoms=n_atoms, cooperativity=coop,
                               beta=coop / (1.0 + coop))
