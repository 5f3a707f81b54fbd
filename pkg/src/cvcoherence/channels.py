"""Single-mode thermal-noise (lossy + excess noise) Gaussian channel."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from cvcoherence.core import CovarianceMatrix, GaussianState
from cvcoherence.errors import DimensionError, ParameterError

VACUUM_NOISE = 1.0


@dataclass(frozen=True)
class ThermalChannel:
    """Transmission ``eta`` in [0, 1] and excess noise ``delta`` >= 0 (SNL units).

    Acts on one mode as ``V -> eta V + (1 - eta)(delta + 1) I`` and
    ``x -> sqrt(eta) x``.
    """

    eta: float
    delta: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ParameterError(f"transmission eta must lie in [0, 1], got {self.eta!r}")
        if not self.delta >= 0.0:
            raise ParameterError(f"excess noise delta must be >= 0, got {self.delta!r}")

    @classmethod
    def from_loss(cls, loss, excess_noise=0.0):
        if not 0.0 <= loss <= 1.0:
            raise ParameterError(f"loss must lie in [0, 1], got {loss!r}")
        return cls(1.0 - loss, excess_noise)

    @property
    def loss(self):
        return 1.0 - self.eta

    @property
    def vacuum_noise(self):
        return VACUUM_NOISE

    @property
    def added_noise(self):
        return (1.0 - self.eta) * (self.delta + VACUUM_NOISE)


def apply_channel(state, channel, mode_index):
    """Send mode ``mode_index`` of ``state`` through ``channel``.

    The mode's diagonal block becomes ``eta B + (1 - eta)(delta + 1) I``,
    its correlations with every other mode scale by ``sqrt(eta)``, and its
    displacement scales by ``sqrt(eta)``.
    """
    if not 0 <= mode_index < state.n_modes:
        raise IndexError(f"mode {mode_index} out of range for {state.n_modes}-mode state")
    s = slice(2 * mode_index, 2 * mode_index + 2)
    root = np.sqrt(channel.eta)
    v = np.array(state.matrix)
    v[s, :] *= root
    v[:, s] *= root
    v[s, s] += channel.added_noise * np.eye(2)
    d = np.array(state.displacement)
    d[s] *= root
    return GaussianState(CovarianceMatrix(v, state.cov.tolerance), d)


def apply_two_channels(state, ch_a, ch_b):
    """Channel ``ch_a`` on mode 0 and ``ch_b`` on mode 1 of a two-mode state."""
    if state.n_modes != 2:
        raise DimensionError(f"two-channel map needs a two-mode state, got {state.n_modes}")
    return apply_channel(apply_channel(state, ch_a, 0), ch_b, 1)


def channel_grid(matrix, mode_indices, eta, delta):
    """Vectorised channel map over arrays of ``(eta, delta)``.

    ``matrix`` is a single 2N x 2N covariance; ``eta`` and ``delta`` are
    broadcast together. Every mode in ``mode_indices`` goes through an
    identical channel. Returns a stack of shape ``(M, 2N, 2N)``. No
    physicality validation happens here; callers use it for analytic grids.
    """
    eta, delta = np.broadcast_arrays(np.asarray(eta, float).ravel(), np.asarray(delta, float).ravel())
    if np.any((eta < 0) | (eta > 1)) or np.any(delta < 0):
        raise ParameterError("grid contains eta outside [0, 1] or negative delta")
    dim = matrix.shape[0]
    scale = np.ones((eta.size, dim))
    noise = np.zeros((eta.size, dim))
    for m in mode_indices:
        scale[:, 2 * m : 2 * m + 2] = np.sqrt(eta)[:, None]
        noise[:, 2 * m : 2 * m + 2] = ((1.0 - eta) * (delta + VACUUM_NOISE))[:, None]
    out = matrix[None, :, :] * scale[:, :, None] * scale[:, None, :]
    idx = np.arange(dim)
    out[:, idx, idx] += noise
    return out
