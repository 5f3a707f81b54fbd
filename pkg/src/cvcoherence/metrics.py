"""Entropy, relative-entropy coherence, squeezing and PPT value.

All entropies are in bits. Batched variants (``*_batch``) act on stacks of
covariance matrices and go through the compiled kernels; they are what the
sweep harness and the error-bar estimator use.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from cvcoherence import kernels
from cvcoherence.core import (
    EPS_PHYS,
    CovarianceMatrix,
    GaussianState,
    symplectic_eigenvalues,
    variance_to_db,
)
from cvcoherence.errors import DimensionError, DomainError

QUADRATURES = {"X": 0, "Y": 1, 0: 0, 1: 1}


@dataclass(frozen=True)
class CoherenceReport:
    coherence_bits: float
    entropy_state: float
    entropy_thermal_ref: float
    thermal_ref_variances: tuple
    matrix_sha256: str = ""

    def to_dict(self):
        d = asdict(self)
        d["thermal_ref_variances"] = list(self.thermal_ref_variances)
        return d


@dataclass(frozen=True)
class EntanglementReport:
    ppt_value: float
    entangled: bool
    matrix_sha256: str = ""

    def to_dict(self):
        return asdict(self)


def entropy_term(nu):
    """``g(nu) = ((nu+1)/2) log2((nu+1)/2) - ((nu-1)/2) log2((nu-1)/2)``, with 0 log 0 = 0."""
    nu = float(nu)
    if not nu >= 1.0 - EPS_PHYS:
        raise DomainError(f"symplectic eigenvalue {nu!r} is below 1")
    return float(kernels.entropy_g(np.array([max(nu, 1.0)]))[0])


def von_neumann_entropy(state):
    """Entropy in bits: sum of ``g`` over the symplectic spectrum."""
    return sum(entropy_term(nu) for nu in symplectic_eigenvalues(state))


def thermal_reference(state):
    """Zero-mean thermal state with the same mean photon number in every mode.

    Each mode gets variance ``(V_XX + V_YY + x_X^2 + x_Y^2) / 2`` in both
    quadratures.
    """
    v = state.matrix
    d = state.displacement
    diag = np.diag(v)
    per_mode = (diag[0::2] + diag[1::2] + d[0::2] ** 2 + d[1::2] ** 2) / 2.0
    matrix = np.diag(np.repeat(per_mode, 2))
    return GaussianState(CovarianceMatrix(matrix, state.cov.tolerance))


def coherence(state):
    """Relative entropy of coherence ``S(thermal reference) - S(state)`` in bits."""
    ref = thermal_reference(state)
    mus = np.diag(ref.matrix)[0::2]
    # Reconstructed states may carry a looser tolerance; clamp inside it.
    tol = state.cov.tolerance
    mus = np.where(mus >= 1.0 - tol, np.maximum(mus, 1.0), mus)
    s_state = von_neumann_entropy(state)
    s_ref = sum(entropy_term(mu) for mu in mus)
    value = s_ref - s_state
    if value < -1e-9:
        raise DomainError(f"negative coherence {value!r}; state is not physical")
    return CoherenceReport(
        coherence_bits=max(value, 0.0),
        entropy_state=s_state,
        entropy_thermal_ref=s_ref,
        thermal_ref_variances=tuple(float(m) for m in mus),
        matrix_sha256=state.cov.digest(),
    )


def squeezing_db(state, quadrature, mode=None):
    """``10 log10`` of a quadrature variance; negative means below shot noise.

    ``mode`` may be omitted only for single-mode states.
    """
    try:
        q = QUADRATURES[quadrature]
    except (KeyError, TypeError):
        raise IndexError(f"quadrature must be 'X' or 'Y', got {quadrature!r}") from None
    if mode is None:
        if state.n_modes != 1:
            raise DimensionError("squeezing_db needs a mode index for multimode states")
        mode = 0
    if not 0 <= mode < state.n_modes:
        raise IndexError(f"mode {mode} out of range for {state.n_modes}-mode state")
    return float(variance_to_db(state.matrix[2 * mode + q, 2 * mode + q]))


def ppt_value(state):
    """Smallest symplectic eigenvalue of the partially transposed two-mode matrix.

    Computed as ``sqrt((G - sqrt(G^2 - 4 det V))/2)`` with
    ``G = det A + det B - 2 det C`` taken from the actual 2x2 blocks.
    """
    if state.n_modes != 2:
        raise DimensionError(f"PPT value needs a two-mode state, got {state.n_modes} modes")
    _, _, ppt = kernels.two_mode_spectra(state.matrix[None])
    value = float(ppt[0])
    return EntanglementReport(value, value < 1.0, state.cov.digest())


# -- batched evaluation -----------------------------------------------------


def thermal_variances_batch(covs, means=None):
    covs = np.asarray(covs, dtype=np.float64)
    diag = np.diagonal(covs, axis1=1, axis2=2)
    total = diag[:, 0::2] + diag[:, 1::2]
    if means is not None:
        means = np.asarray(means, dtype=np.float64)
        total = total + means[:, 0::2] ** 2 + means[:, 1::2] ** 2
    return total / 2.0


def symplectic_batch(covs):
    """Symplectic spectra of a (M, 2N, 2N) stack for N in {1, 2}, unclamped."""
    covs = np.asarray(covs, dtype=np.float64)
    dim = covs.shape[1]
    if dim == 2:
        return kernels.one_mode_nu(covs)[:, None]
    if dim == 4:
        nu_plus, nu_minus, _ = kernels.two_mode_spectra(covs)
        return np.stack([nu_plus, nu_minus], axis=1)
    raise DimensionError("batched spectra support one or two modes")


def coherence_batch(covs, means=None):
    """Coherence (bits) for a stack of 1- or 2-mode covariance matrices.

    Eigenvalues are clamped to >= 1; negative results are clamped to 0.
    """
    nus = symplectic_batch(covs)
    mus = thermal_variances_batch(covs, means)
    s_state = kernels.entropy_g(nus.ravel()).reshape(nus.shape).sum(axis=1)
    s_ref = kernels.entropy_g(mus.ravel()).reshape(mus.shape).sum(axis=1)
    return np.maximum(s_ref - s_state, 0.0)


def ppt_batch(covs):
    _, _, ppt = kernels.two_mode_spectra(covs)
    return ppt
