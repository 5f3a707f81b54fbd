"""Pure-numpy implementations of the numerical kernels.

Used when the compiled extension is unavailable and as the reference
against which the extension is tested. Every function here has a
twin with the same signature in ``_ckernels.pyx``.
"""

import numpy as np

DISCRIMINANT_ULPS = 32.0


def block_moments(data, n_blocks):
    """Per-block means and (ddof=1) covariance matrices.

    ``data`` has shape (n, k). It is cut into ``n_blocks`` contiguous,
    non-overlapping blocks of ``n // n_blocks`` samples; the remainder is
    dropped. Returns ``(means, covs)`` of shapes (B, k) and (B, k, k).
    """
    data = np.ascontiguousarray(data, dtype=np.float64)
    n, k = data.shape
    size = n // n_blocks
    if size < 2:
        raise ValueError("each block needs at least two samples")
    blocks = data[: size * n_blocks].reshape(n_blocks, size, k)
    means = blocks.mean(axis=1)
    centered = blocks - means[:, None, :]
    covs = np.einsum("bni,bnj->bij", centered, centered) / (size - 1)
    return means, covs


def entropy_g(nu):
    nu = np.maximum(np.asarray(nu, dtype=np.float64), 1.0)
    plus = (nu + 1.0) / 2.0
    minus = (nu - 1.0) / 2.0
    out = plus * np.log2(plus)
    pos = minus > 0.0
    out[pos] -= minus[pos] * np.log2(minus[pos])
    return out


def one_mode_nu(covs):
    covs = np.asarray(covs, dtype=np.float64)
    det = covs[:, 0, 0] * covs[:, 1, 1] - covs[:, 0, 1] * covs[:, 1, 0]
    return np.sqrt(np.maximum(det, 0.0))


def _det2(m):
    return m[:, 0, 0] * m[:, 1, 1] - m[:, 0, 1] * m[:, 1, 0]


def two_mode_spectra(covs):
    """Closed-form symplectic eigenvalues and PPT value of 4x4 covariances.

    Returns ``(nu_plus, nu_minus, ppt)``, each of shape (M,).
    """
    covs = np.asarray(covs, dtype=np.float64)
    det_a = _det2(covs[:, :2, :2])
    det_b = _det2(covs[:, 2:, 2:])
    det_c = _det2(covs[:, :2, 2:])
    det_v = np.linalg.det(covs)
    delta = det_a + det_b + 2.0 * det_c
    gamma = det_a + det_b - 2.0 * det_c
    # Rounding in the discriminants is ~eps * max|V|^4; anything below the
    # bound is a degenerate spectrum, not a small gap.
    floor = DISCRIMINANT_ULPS * np.finfo(np.float64).eps * np.abs(covs).max(axis=(1, 2)) ** 4
    disc_d = delta * delta - 4.0 * det_v
    disc_g = gamma * gamma - 4.0 * det_v
    root_d = np.where(disc_d > floor, np.sqrt(np.maximum(disc_d, 0.0)), 0.0)
    root_g = np.where(disc_g > floor, np.sqrt(np.maximum(disc_g, 0.0)), 0.0)
    big = np.maximum((delta + root_d) / 2.0, 0.0)
    big_pt = np.maximum((gamma + root_g) / 2.0, 0.0)
    # Small roots from det V / large root: no cancellation.
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.where(big > 0.0, np.maximum(det_v, 0.0) / big, 0.0)
        small_pt = np.where(big_pt > 0.0, np.maximum(det_v, 0.0) / big_pt, 0.0)
    nu_plus = np.sqrt(big)
    nu_minus = np.sqrt(small)
    ppt = np.sqrt(small_pt)
    return nu_plus, nu_minus, ppt
