"""Temporal-mode effects in discrete-time CVQKD receivers.

Thin Python front-end over the C++ core. Times are in seconds unless a name
says otherwise (``beta2_ps2_per_km``, ``z_km``).
"""

from ._dcvqkd import (
    ChannelSpec,
    ConfigError,
    DegenerateKernel,
    DegenerateWavepacket,
    Detection,
    Error,
    GaussianPulse,
    GridMismatch,
    InvalidParameter,
    KeyRateParams,
    KeyRateResult,
    ModeLossModel,
    Propagated,
    RectangularPulse,
    ResolutionError,
    RrcPulse,
    RunOutcome,
    Scenario,
    SymplecticSpectrum,
    TimeGrid,
    TruncationError,
    Wavepacket,
    holevo_spectrum,
    inner_product,
    intensity_fwhm,
    key_rate,
    load_scenario,
    mode_match,
    parse_scenario,
    propagate,
    propagate_compensated,
    raised_cosine,
    render_pulse,
    run,
    symplectic_entropy,
    thermal_entropy,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
