"""Gradient echo memory: 1D Maxwell-Bloch solver with gradient switching.

The stored equations (retarded frame, adiabatically eliminated excited
state):

    d(sigma_gs)/dt = [-gamma + i eta(t) z] sigma_gs - i kappa E
    dE/dz          = -i chi_f sigma_gs

with kappa = g Omega / Delta and chi_f = N g Omega / Delta.  The relative
sign of the two source terms is fixed by absorption: the loop gain
(-i)(-i) = -1 removes energy from a resonant field, and a gradient flip
returns it as the echo.  Field and
coherence are kept in normalized units; the observable dynamics depends only
on the product kappa * chi_f, exposed through the dimensionless effective
optical depth od = kappa * chi_f / |eta0| (the gradient-echo absorption
parameter).  Energies are time integrals of |E|^2, so efficiencies are
normalization-free.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import BlowupError, ConfigError


@dataclass(frozen=True)
class GradientSchedule:
    """Piecewise-constant gradient eta(t): segments of (start time, eta)."""

    segments: tuple

    def __post_init__(self):
        if not self.segments:
            raise ConfigError("schedule needs at least one segment")
        starts = [s[0] for s in self.segments]
        if starts[0] != 0.0:
            raise ConfigError("first segment must start at t=0")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ConfigError("segment start times must be strictly increasing "
                              "(overlapping segments)")

    def eta_at(self, t):
        t = np.asarray(t, dtype=float)
        starts = np.array([s[0] for s in self.segments])
        values = np.array([s[1] for s in self.segments])
        idx = np.clip(np.searchsorted(starts, t, side="right") - 1, 0, len(values) - 1)
        return values[idx]

    @property
    def flip_times(self):
        return tuple(s[0] for s in self.segments[1:])


def gradient_schedule(t_flip: float, eta0: float,
                      extra_flips: tuple = ()) -> GradientSchedule:
    """Standard write/read schedule: +eta0 until t_flip, -eta0 after.

    ``extra_flips`` appends more sign inversions for multi-recall sequences.
    """
    if t_flip <= 0:
        raise ConfigError("t_flip must be positive")
    segs = [(0.0, eta0), (t_flip, -eta0)]
    sign = 1.0
    for t in extra_flips:
        segs.append((t, sign * eta0))
        sign = -sign
    return GradientSchedule(tuple(segs))


@dataclass(frozen=True)
class GemConfig:
    """Memory configuration.

    od: dimensionless effective optical depth, aggregating N g^2 Omega^2/Delta^2
        against the gradient (the paper never gives g numerically).
    eta0: gradient magnitude (rad/s per m); schedule: eta(t) segments.
    gamma: ground-state coherence decay (rad/s).
    length: medium length (m); nz, nt: grid sizes; t_final: simulated span (s).
    delta/gamma_e: one-photon detuning and excited linewidth, only used to
        flag the adiabatic-elimination validity (|Delta| >> Gamma_e).
    """

    od: float
    eta0: float
    gamma: float
    length: float
    t_final: float
    schedule: GradientSchedule
    nz: int = 256
    nt: int = 2048
    delta: float = 1.0
    gamma_e: float = 0.0

    def __post_init__(self):
        if self.od < 0:
            raise ConfigError("od must be non-negative")
        if self.length <= 0 or self.t_final <= 0:
            raise ConfigError("length and t_final must be positive")
        if self.eta0 == 0:
            raise ConfigError("eta0 must be nonzero (no gradient, no memory)")
        if self.delta == 0:
            raise ConfigError("one-photon detuning must be nonzero "
                              "(adiabatic elimination assumes |Delta| >> Gamma)")
        if self.nz < 8 or self.nt < 8:
            raise ConfigError("nz and nt must be at least 8")

    @property
    def adiabatic_ok(self) -> bool:
        return self.gamma_e == 0.0 or abs(self.delta) >= 10.0 * self.gamma_e

    @property
    def coupling_product(self) -> float:
        """kappa * chi_f = od * |eta0|, the only combination entering the field."""
        return self.od * abs(self.eta0)

    @property
    def bandwidth_window(self) -> float:
        """Gradient-broadened acceptance window |eta| L / 2 pi, in Hz."""
        return abs(self.eta0) * self.length / (2.0 * math.pi)


@dataclass
class GemHistory:
    """Full (t, z) history of one run."""

    t: np.ndarray
    z: np.ndarray
    field: np.ndarray      # (nt, nz) complex
    coherence: np.ndarray  # (nt, nz) complex
    config: GemConfig

    @property
    def output(self) -> np.ndarray:
        """Field at the exit plane z = L."""
        return self.field[:, -1]

    @property
    def chi_f(self) -> float:
        return math.sqrt(self.config.coupling_product)


@dataclass(frozen=True)
class EchoReport:
    input_energy: float
    transmitted_energy: float
    echo_energy: float
    echo_peak_time: float
    efficiency: float
    write_window: tuple
    read_window: tuple


def _pulse_bandwidth(e_in: np.ndarray, dt: float) -> float:
    """rms spectral width (Hz) of the input, doubled to approximate full width."""
    spec = np.abs(np.fft.fft(e_in)) ** 2
    total = spec.sum()
    if total == 0:
        return 0.0
    f = np.fft.fftfreq(e_in.size, dt)
    mean = float(np.sum(f * spec) / total)
    var = float(np.sum((f - mean) ** 2 * spec) / total)
    return 2.0 * math.sqrt(max(var, 0.0))


def gem_propagate(config: GemConfig, e_in, strict: bool = False):
    """Run the memory and report echo energetics.

    ``e_in`` is the input field envelope: either an array of length nt or a
    callable of time.  Returns (GemHistory, EchoReport).  Energy windows:
    write window is [0, first flip), read window is [first flip, t_final].
    """
    t = np.linspace(0.0, config.t_final, config.nt)
    dt = t[1] - t[0]
    # z centered on the gradient zero so the two-photon carrier (delta = 0)
    # sits in the middle of the broadened band
    z = np.linspace(-config.length / 2.0, config.length / 2.0, config.nz)
    if callable(e_in):
        e_in_arr = np.asarray([e_in(ti) for ti in t], dtype=np.complex128)
    else:
        e_in_arr = np.asarray(e_in, dtype=np.complex128)
        if e_in_arr.shape != t.shape:
            raise ConfigError(f"e_in must have nt={config.nt} samples")

    bw = _pulse_bandwidth(e_in_arr, dt)
    if bw > config.bandwidth_window:
        msg = (f"pulse bandwidth {bw:.3g} Hz exceeds the gradient window "
               f"{config.bandwidth_window:.3g} Hz; storage will clip the spectrum")
        if strict:
            raise ConfigError(msg)
        warnings.warn(msg, stacklevel=2)

    # Symmetric split of the coupling product; only the product is physical.
    root = math.sqrt(config.coupling_product)
    eta_mid = np.asarray(config.schedule.eta_at(t + dt / 2.0), dtype=float)
    e_hist, s_hist = _kernels.gem_sweep(e_in_arr, eta_mid, z, dt,
                                        config.gamma, root, root)
    if not np.all(np.isfinite(e_hist[-1])):
        raise BlowupError("non-finite field in GEM propagation")

    history = GemHistory(t=t, z=z, field=e_hist, coherence=s_hist, config=config)
    flips = config.schedule.flip_times
    t_flip = flips[0] if flips else config.t_final
    report = echo_report(history, t_flip)
    return history, report


def echo_report(history: GemHistory, t_split: float,
                read_end: float | None = None) -> EchoReport:
    """Windowed energies of one write/read cycle split at ``t_split``."""
    t = history.t
    out = np.abs(history.output) ** 2
    e_in = np.abs(history.field[:, 0]) ** 2
    write = t < t_split
    if read_end is None:
        read_end = t[-1]
    read = (t >= t_split) & (t <= read_end)
    input_energy = float(np.trapezoid(e_in[write], t[write])) if write.any() else 0.0
    transmitted = float(np.trapezoid(out[write], t[write])) if write.any() else 0.0
    echo_energy = float(np.trapezoid(out[read], t[read])) if read.any() else 0.0
    if read.any() and np.max(out[read]) > 0:
        peak = float(t[read][np.argmax(out[read])])
    else:
        peak = math.nan
    eff = echo_energy / input_energy if input_energy > 0 else 0.0
    return EchoReport(input_energy=input_energy, transmitted_energy=transmitted,
                      echo_energy=echo_energy, echo_peak_time=peak,
                      efficiency=eff, write_window=(float(t[0]), float(t_split)),
                      read_window=(float(t_split), float(read_end)))


@dataclass
class PolaritonDiagnostics:
    """k-space polariton psi(k, t) and its centroid transport."""

    k: np.ndarray
    t: np.ndarray
    psi: np.ndarray        # (nt, nk) complex
    centroid: np.ndarray   # intensity-weighted k centroid per time
    drift_rate: np.ndarray  # d(centroid)/dt per time interval
    eta: np.ndarray        # programmed eta at interval midpoints


def kspace_polariton(history: GemHistory, quiet_fraction: float = 1e-3) -> PolaritonDiagnostics:
    """Spatial Fourier transform diagnostic psi(k,t) = k E(k,t) + chi_f sigma(k,t).

    The centroid of |psi| drifts at the programmed gradient rate during quiet
    intervals (no field at either face: the emission precursor near k = 0
    distorts the |psi| weights as much as an input pulse does).
    ``drift_rate`` holds the per-interval differences of the centroid;
    intervals where the input or output field exceeds ``quiet_fraction`` of
    its run peak are NaN.
    """
    nz = history.z.size
    dz = history.z[1] - history.z[0]
    k = 2.0 * math.pi * np.fft.fftshift(np.fft.fftfreq(nz, dz))
    e_k = np.fft.fftshift(np.fft.fft(history.field, axis=1), axes=1) * dz
    s_k = np.fft.fftshift(np.fft.fft(history.coherence, axis=1), axes=1) * dz
    # polariton partner of the absorbing sign convention: quasi-statically
    # k E(k) = -chi_f sigma(k), so the transported mode is the difference
    psi = k[None, :] * e_k - history.chi_f * s_k

    weights = np.abs(psi)
    norm = weights.sum(axis=1)
    norm[norm == 0] = 1.0
    centroid = (weights * k[None, :]).sum(axis=1) / norm

    t = history.t
    dt = t[1] - t[0]
    drift = np.diff(centroid) / dt
    e_in = np.abs(history.field[:, 0])
    e_out = np.abs(history.field[:, -1])
    active = (e_in > quiet_fraction * max(float(e_in.max()), 1e-300)) | \
             (e_out > quiet_fraction * max(float(e_out.max()), 1e-300))
    # interval is quiet when neither endpoint samples see boundary fields
    quiet = ~(active[:-1] | active[1:])
    drift = np.where(quiet, drift, np.nan)
    eta_mid = np.asarray(history.config.schedule.eta_at(t[:-1] + dt / 2.0))
    return PolaritonDiagnostics(k=k, t=t, psi=psi, centroid=centroid,
                                drift_rate=drift, eta=eta_mid)


def gaussian_pulse(t0: float, width: float, amplitude: float = 1.0):
    """Input envelope exp(-(t-t0)^2 / (2 width^2))."""
    def pulse(t):
        return amplitude * math.exp(-((t - t0) ** 2) / (2.0 * width**2))
    return pulse


def multi_pulse_run(config: GemConfig, pulses):
    """Store several pulses in one run and report per-pulse recall.

    ``pulses`` is a sequence of (t0, width, amplitude).  Each pulse written at
    t0 rephases at 2*t_flip - t0 under a sign-inverting flip, so recall order
    is the reverse of storage order; the order is reported, never asserted.
    Returns (history, [per-pulse EchoReport], recall_order).
    """
    if not pulses:
        raise ConfigError("need at least one pulse")
    flips = config.schedule.flip_times
    if not flips:
        raise ConfigError("multi-pulse recall needs a gradient flip")
    t_flip = flips[0]
    for (t0, width, _amp) in pulses:
        if not (0.0 < t0 < t_flip):
            raise ConfigError(f"pulse at t0={t0} outside the storage window (0, {t_flip})")

    def e_in(t):
        return sum(amp * math.exp(-((t - t0) ** 2) / (2.0 * w**2))
                   for (t0, w, amp) in pulses)

    history, _ = gem_propagate(config, e_in)
    t = history.t
    out2 = np.abs(history.output) ** 2
    expected = [2.0 * t_flip - t0 for (t0, _w, _a) in pulses]
    # window half-width: half the smallest gap between expected echo times
    if len(expected) > 1:
        gaps = np.diff(sorted(expected))
        half = float(min(gaps)) / 2.0
        if half < 4.0 * max(w for (_t, w, _a) in pulses):
            warnings.warn("echo windows overlap; energies integrated on the "
                          "declared windows anyway", stacklevel=2)
    else:
        half = 4.0 * pulses[0][1]

    reports = []
    for (t0, width, amp), t_echo in zip(pulses, expected):
        write = (t > t0 - 4.0 * width) & (t < t0 + 4.0 * width)
        read = (t > t_echo - half) & (t < t_echo + half)
        e_in_arr = np.abs(history.field[:, 0]) ** 2
        input_energy = float(np.trapezoid(np.where(write, e_in_arr, 0.0), t))
        echo_energy = float(np.trapezoid(np.where(read, out2, 0.0), t))
        masked = np.where(read, out2, 0.0)
        peak = float(t[np.argmax(masked)]) if masked.max() > 0 else math.nan
        reports.append(EchoReport(
            input_energy=input_energy, transmitted_energy=math.nan,
            echo_energy=echo_energy, echo_peak_time=peak,
            efficiency=echo_energy / input_energy if input_energy > 0 else 0.0,
            write_window=(t0 - 4.0 * width, t0 + 4.0 * width),
            read_window=(t_echo - half, t_echo + half)))
    order = list(np.argsort([r.echo_peak_time for r in reports]))
    return history, reports, order
