"""Hot inner loops: numba-compiled kernels with pure-numpy fallbacks.

Set ``PHOTONFLUID_NO_NUMBA=1`` to force the numpy path (used by the
benchmark and by tests that pin backend equality).  Each public function
dispatches on the module flag at call time, so flipping ``USE_NUMBA``
after import works too.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f
        return wrap if not (args and callable(args[0])) else args[0]


USE_NUMBA = _HAVE_NUMBA and os.environ.get("PHOTONFLUID_NO_NUMBA", "") not in ("1", "true")


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# Kerr / potential real-space step of the split-step NLSE
# ---------------------------------------------------------------------------

def _kerr_step_numpy(data, dn_phase, c3, c5, alpha, dz):
    intensity = data.real**2 + data.imag**2
    max_i = float(intensity.max()) if intensity.size else 0.0
    if alpha != 0.0:
        data *= math.exp(-alpha * dz / 4.0)
        intensity = data.real**2 + data.imag**2
    phase = c3 * intensity * dz
    if c5 != 0.0:
        phase += c5 * intensity**2 * dz
    if dn_phase is not None:
        phase = phase + dn_phase * dz
    data *= np.exp(1j * phase)
    if alpha != 0.0:
        data *= math.exp(-alpha * dz / 4.0)
    return max_i


@njit(cache=True)
def _kerr_step_numba(flat, dn_flat, has_dn, c3, c5, alpha, dz):  # pragma: no cover
    max_i = 0.0
    damp = math.exp(-alpha * dz / 4.0) if alpha != 0.0 else 1.0
    damp2 = damp * damp
    for i in range(flat.size):
        v = flat[i]
        inten0 = v.real * v.real + v.imag * v.imag
        if inten0 > max_i:
            max_i = inten0
        inten = inten0 * damp2
        phase = c3 * inten * dz
        if c5 != 0.0:
            phase += c5 * inten * inten * dz
        if has_dn:
            phase += dn_flat[i] * dz
        rot = complex(math.cos(phase), math.sin(phase))
        flat[i] = v * rot * damp2
    return max_i


def kerr_step(data, dn_phase, c3, c5, alpha, dz):
    """In-place half-loss / Kerr+potential phase / half-loss sub-step.

    ``dn_phase`` is the precomputed linear phase rate (delta_n k0 / n0) map or
    None.  Returns the max intensity found before the step (guards and blowup
    detection key off it).
    """
    if USE_NUMBA:
        flat = data.reshape(-1)
        if dn_phase is None:
            dn_flat = np.empty(0, dtype=np.float64)
            has_dn = False
        else:
            dn_flat = np.ascontiguousarray(dn_phase, dtype=np.float64).reshape(-1)
            has_dn = True
        return _kerr_step_numba(flat, dn_flat, has_dn,
                                float(c3), float(c5), float(alpha), float(dz))
    return _kerr_step_numpy(data, dn_phase, float(c3), float(c5), float(alpha), float(dz))


# ---------------------------------------------------------------------------
# Driven-dissipative GPE real-space step
# ---------------------------------------------------------------------------

def _ddgpe_step_numpy(psi, v_rate, g_rate, gamma, dt, pump_rate):
    intensity = psi.real**2 + psi.imag**2
    max_i = float(intensity.max()) if intensity.size else 0.0
    a = (-gamma / 2.0 - 1j * g_rate * intensity) * dt
    if v_rate is not None:
        a = a - 1j * v_rate * dt
    ex = np.exp(a)
    if pump_rate is None:
        psi *= ex
        return max_i
    small = np.abs(a) < 1e-8
    with np.errstate(invalid="ignore", divide="ignore"):
        phi1 = np.where(small, 1.0 + a / 2.0, (ex - 1.0) / a)
    psi *= ex
    psi += pump_rate * dt * phi1
    return max_i


@njit(cache=True)
def _ddgpe_step_numba(flat, v_flat, has_v, g_rate, gamma, dt,
                      pump_flat, has_pump):  # pragma: no cover
    max_i = 0.0
    for i in range(flat.size):
        v = flat[i]
        inten = v.real * v.real + v.imag * v.imag
        if inten > max_i:
            max_i = inten
        rate = -g_rate * inten
        if has_v:
            rate -= v_flat[i]
        a = complex(-gamma * dt / 2.0, rate * dt)
        ex = np.exp(a)
        v = v * ex
        if has_pump:
            if abs(a) < 1e-8:
                phi1 = 1.0 + a / 2.0
            else:
                phi1 = (ex - 1.0) / a
            v = v + pump_flat[i] * dt * phi1
        flat[i] = v
    return max_i


def ddgpe_step(psi, v_rate, g_rate, gamma, dt, pump_rate):
    """In-place real-space step of the driven-dissipative GPE.

    Exponential step on the local part: with a = -gamma/2 - i(V + g|psi|^2)/hbar
    frozen at the step-start intensity, psi -> e^(a dt) psi + dt phi1(a dt) s,
    s = -i P/hbar.  A uniform pumped steady state is a fixed point of this map
    exactly.  Rates are pre-divided by hbar: ``v_rate`` = V/hbar map or None,
    ``g_rate`` = g/hbar, ``pump_rate`` = -i P/hbar map or None.
    """
    if USE_NUMBA:
        flat = psi.reshape(-1)
        v_flat = (np.ascontiguousarray(v_rate, dtype=np.float64).reshape(-1)
                  if v_rate is not None else np.empty(0, dtype=np.float64))
        pump_flat = (np.ascontiguousarray(pump_rate, dtype=np.complex128).reshape(-1)
                     if pump_rate is not None else np.empty(0, dtype=np.complex128))
        return _ddgpe_step_numba(flat, v_flat, v_rate is not None,
                                 float(g_rate), float(gamma), float(dt),
                                 pump_flat, pump_rate is not None)
    return _ddgpe_step_numpy(psi, v_rate, float(g_rate), float(gamma), float(dt), pump_rate)


# ---------------------------------------------------------------------------
# GEM (t, z) sweep: exponential integrator on the coherence, trapezoid field
# ---------------------------------------------------------------------------

def _phi_coeffs(x):
    """phi1 = (e^x - 1)/x and gI = (x e^x - e^x + 1)/x^2 with small-|x| series."""
    if abs(x) < 1e-6:
        phi1 = 1.0 + x / 2.0 + x * x / 6.0
        g_i = 0.5 + x / 3.0 + x * x / 8.0
    else:
        ex = np.exp(x)
        phi1 = (ex - 1.0) / x
        g_i = (x * ex - ex + 1.0) / (x * x)
    return phi1, g_i


def _gem_sweep_numpy(e_in, eta_mid, z, dt, gamma, kappa, chi_f):
    nt, nz = e_in.size, z.size
    dz = z[1] - z[0]
    sigma = np.zeros(nz, dtype=np.complex128)
    e_hist = np.zeros((nt, nz), dtype=np.complex128)
    s_hist = np.zeros((nt, nz), dtype=np.complex128)

    def field_from(sig, bc):
        e = np.empty(nz, dtype=np.complex128)
        e[0] = bc
        incr = -1j * chi_f * 0.5 * (sig[1:] + sig[:-1]) * dz
        e[1:] = bc + np.cumsum(incr)
        return e

    for it in range(nt):
        e = field_from(sigma, e_in[it])
        e_hist[it] = e
        s_hist[it] = sigma
        if it == nt - 1:
            break
        a = (-gamma + 1j * eta_mid[it] * z) * dt
        ex = np.exp(a)
        small = np.abs(a) < 1e-6
        with np.errstate(invalid="ignore", divide="ignore"):
            phi1 = np.where(small, 1.0 + a / 2.0 + a * a / 6.0, (ex - 1.0) / a)
            g_i = np.where(small, 0.5 + a / 3.0 + a * a / 8.0,
                           (a * ex - ex + 1.0) / (a * a))
        s0 = -1j * kappa * e
        sigma_pred = ex * sigma + dt * phi1 * s0
        e_pred = field_from(sigma_pred, e_in[it + 1])
        s1 = -1j * kappa * e_pred
        sigma = ex * sigma + dt * ((phi1 - g_i) * s0 + g_i * s1)
    return e_hist, s_hist


@njit(cache=True)
def _gem_sweep_numba(e_in, eta_mid, z, dt, gamma, kappa, chi_f):  # pragma: no cover
    nt = e_in.size
    nz = z.size
    dz = z[1] - z[0]
    sigma = np.zeros(nz, dtype=np.complex128)
    sig_pred = np.zeros(nz, dtype=np.complex128)
    e = np.zeros(nz, dtype=np.complex128)
    e_pred = np.zeros(nz, dtype=np.complex128)
    e_hist = np.zeros((nt, nz), dtype=np.complex128)
    s_hist = np.zeros((nt, nz), dtype=np.complex128)

    for it in range(nt):
        e[0] = e_in[it]
        for iz in range(1, nz):
            e[iz] = e[iz - 1] - 1j * chi_f * 0.5 * (sigma[iz] + sigma[iz - 1]) * dz
        for iz in range(nz):
            e_hist[it, iz] = e[iz]
            s_hist[it, iz] = sigma[iz]
        if it == nt - 1:
            break
        eta = eta_mid[it]
        # predictor
        for iz in range(nz):
            a = complex(-gamma * dt, eta * z[iz] * dt)
            if abs(a) < 1e-6:
                phi1 = 1.0 + a / 2.0 + a * a / 6.0
            else:
                phi1 = (np.exp(a) - 1.0) / a
            sig_pred[iz] = np.exp(a) * sigma[iz] + dt * phi1 * (-1j * kappa * e[iz])
        e_pred[0] = e_in[it + 1]
        for iz in range(1, nz):
            e_pred[iz] = e_pred[iz - 1] - 1j * chi_f * 0.5 * (sig_pred[iz] + sig_pred[iz - 1]) * dz
        # corrector with linear-in-t source
        for iz in range(nz):
            a = complex(-gamma * dt, eta * z[iz] * dt)
            ex = np.exp(a)
            if abs(a) < 1e-6:
                phi1 = 1.0 + a / 2.0 + a * a / 6.0
                g_i = 0.5 + a / 3.0 + a * a / 8.0
            else:
                phi1 = (ex - 1.0) / a
                g_i = (a * ex - ex + 1.0) / (a * a)
            s0 = -1j * kappa * e[iz]
            s1 = -1j * kappa * e_pred[iz]
            sigma[iz] = ex * sigma[iz] + dt * ((phi1 - g_i) * s0 + g_i * s1)
    return e_hist, s_hist


def gem_sweep(e_in, eta_mid, z, dt, gamma, kappa, chi_f):
    """Integrate the gradient-echo equations over the full (t, z) grid.

    Field by trapezoid along z at each time, coherence by a second-order
    exponential integrator on the stiff diagonal [-gamma + i eta z].
    Returns (field history, coherence history), each (nt, nz).
    """
    e_in = np.ascontiguousarray(e_in, dtype=np.complex128)
    eta_mid = np.ascontiguousarray(eta_mid, dtype=np.float64)
    z = np.ascontiguousarray(z, dtype=np.float64)
    if USE_NUMBA:
        return _gem_sweep_numba(e_in, eta_mid, z, float(dt), float(gamma),
                                float(kappa), float(chi_f))
    return _gem_sweep_numpy(e_in, eta_mid, z, float(dt), float(gamma),
                            float(kappa), float(chi_f))


# ---------------------------------------------------------------------------
# Plaquette winding map for vortex detection
# ---------------------------------------------------------------------------

_TWO_PI = 2.0 * math.pi


def _plaquette_winding_numpy(phase):
    def wrap(d):
        return (d + math.pi) % _TWO_PI - math.pi

    d_right = wrap(phase[:-1, 1:] - phase[:-1, :-1])
    d_up = wrap(phase[1:, 1:] - phase[:-1, 1:])
    d_left = wrap(phase[1:, :-1] - phase[1:, 1:])
    d_down = wrap(phase[:-1, :-1] - phase[1:, :-1])
    total = d_right + d_up + d_left + d_down
    return np.rint(total / _TWO_PI).astype(np.int64)


@njit(cache=True)
def _plaquette_winding_numba(phase):  # pragma: no cover
    ny, nx = phase.shape
    out = np.zeros((ny - 1, nx - 1), dtype=np.int64)
    for j in range(ny - 1):
        for i in range(nx - 1):
            total = 0.0
            d = phase[j, i + 1] - phase[j, i]
            total += (d + math.pi) % _TWO_PI - math.pi
            d = phase[j + 1, i + 1] - phase[j, i + 1]
            total += (d + math.pi) % _TWO_PI - math.pi
            d = phase[j + 1, i] - phase[j + 1, i + 1]
            total += (d + math.pi) % _TWO_PI - math.pi
            d = phase[j, i] - phase[j + 1, i]
            total += (d + math.pi) % _TWO_PI - math.pi
            out[j, i] = round(total / _TWO_PI)
    return out


def plaquette_winding(phase):
    """Winding number of every 2x2 grid plaquette; nonzero entries mark vortices."""
    phase = np.ascontiguousarray(phase, dtype=np.float64)
    if phase.ndim != 2 or min(phase.shape) < 2:
        raise ValueError("phase map must be 2D with at least 2 points per axis")
    if USE_NUMBA:
        return _plaquette_winding_numba(phase)
    return _plaquette_winding_numpy(phase)
