"""Coherence, squeezing and entanglement of Gaussian states in thermal-noise channels."""

__version__ = "0.1.0"

from cvcoherence.channels import ThermalChannel, apply_channel, apply_two_channels
from cvcoherence.core import (
    CovarianceMatrix,
    GaussianState,
    SymplecticSpectrum,
    load_state,
    make_epr_state,
    make_squeezed_state,
    save_state,
    symplectic_eigenvalues,
    validate_physicality,
    vacuum,
)
from cvcoherence.errors import *  # noqa: F401,F403
from cvcoherence.homodyne import (
    QuadratureSampleSet,
    estimate_error_bars,
    ingest_samples,
    reconstruct_covariance,
    sample_quadratures,
)
from cvcoherence.metrics import (
    coherence,
    entropy_term,
    ppt_value,
    squeezing_db,
    thermal_reference,
)
from cvcoherence.sweep import SweepConfig, emit_report, find_threshold, run_all_figures, run_sweep
