"""Atomic-vapor nonlinear optics and fluids of light.

Modules:
    atoms        two-level vapor response: cross sections, chi orders, indices
    eit          three-level steady state, probe susceptibility, slow light
    dispersion   cavity, polariton branches, Bogoliubov spectra, Landau velocity
    fluid        split-step NLSE / driven-dissipative GPE + Madelung diagnostics
    gem          gradient echo memory solver and k-space polariton
    experiments  scripted measurement protocols
    cli          batch runner with sweeps and manifests
"""

__version__ = "0.1.0"

from . import atoms, dispersion, eit, experiments, fluid, gem, gridio  # noqa: F401
