"""Gaussian states in the covariance-matrix formalism.

Conventions used throughout the package:

* quadratures are ordered ``(X1, Y1, X2, Y2, ...)`` with ``X = a + a^dagger``
  and ``Y = i(a^dagger - a)``, so the vacuum has unit variance in every
  quadrature (shot-noise limit = 1, i.e. 0 dB);
* ``V_ij = <x_i x_j + x_j x_i>/2 - <x_i><x_j>``;
* a state is physical iff all its symplectic eigenvalues are >= 1.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from cvcoherence import kernels
from cvcoherence.errors import DimensionError, FormatError, NumericalFailure, UnphysicalState

EPS_PHYS = 1e-9
SYMMETRY_TOL = 1e-9
ORDERING = "XYXY"


def symplectic_form(n_modes):
    """Block-diagonal symplectic form with ``[[0, 1], [-1, 0]]`` blocks."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def general_symplectic_eigenvalues(matrix):
    """Symplectic eigenvalues from the spectrum of ``i Omega V``, descending.

    Works for any number of modes and does not clamp. Eigenvalues of
    ``i Omega V`` come in ``+/- nu`` pairs; each modulus is kept once.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    n_modes = matrix.shape[0] // 2
    try:
        eig = np.linalg.eigvals(1j * symplectic_form(n_modes) @ matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigen-solver did not converge: {exc}") from exc
    moduli = np.sort(np.abs(eig))[::-1]
    return moduli[::2].copy()


def raw_symplectic_eigenvalues(matrix):
    """Unclamped symplectic eigenvalues (descending): closed forms for N <= 2."""
    matrix = np.asarray(matrix, dtype=np.float64)
    n_modes = matrix.shape[0] // 2
    if n_modes == 1:
        return kernels.one_mode_nu(matrix[None])
    if n_modes == 2:
        nu_plus, nu_minus, _ = kernels.two_mode_spectra(matrix[None])
        return np.array([nu_plus[0], nu_minus[0]])
    return general_symplectic_eigenvalues(matrix)


def _freeze(array):
    array = np.array(array, dtype=np.float64)
    array.flags.writeable = False
    return array


@dataclass(frozen=True, eq=False)
class Physicality:
    """Verdict of :func:`validate_physicality`; truthy iff physical."""

    physical: bool
    min_eigenvalue: float
    detail: str

    def __bool__(self):
        return self.physical


def validate_physicality(cov, tolerance=EPS_PHYS):
    """Check that every symplectic eigenvalue is at least ``1 - tolerance``."""
    matrix = cov.matrix if isinstance(cov, CovarianceMatrix) else np.asarray(cov, dtype=float)
    nus = raw_symplectic_eigenvalues(matrix)
    nu_min = float(nus.min())
    if nu_min >= 1.0 - tolerance:
        return Physicality(True, nu_min, "all symplectic eigenvalues >= 1")
    index = int(np.argmin(nus))
    return Physicality(
        False,
        nu_min,
        f"symplectic eigenvalue #{index} = {nu_min:.9g} < 1 (uncertainty principle violated)",
    )


@dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Symmetric, physical 2N x 2N covariance matrix (vacuum = identity).

    ``tolerance`` is how far below 1 a symplectic eigenvalue may sit and
    still be accepted (and clamped to 1). Constructed states use
    ``EPS_PHYS``; reconstructions from samples pass a looser value.
    """

    matrix: np.ndarray
    tolerance: float = EPS_PHYS

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2 or m.shape[0] == 0:
            raise DimensionError(f"covariance matrix must be 2N x 2N, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise UnphysicalState("covariance matrix has non-finite entries")
        asym = np.max(np.abs(m - m.T))
        if asym > SYMMETRY_TOL:
            raise UnphysicalState(f"covariance matrix is not symmetric (max |V - V^T| = {asym:.3g})")
        m = (m + m.T) / 2.0
        if np.any(np.diag(m) <= 0.0):
            raise UnphysicalState("covariance matrix has a non-positive variance")
        verdict = validate_physicality(m, self.tolerance)
        if not verdict:
            raise UnphysicalState(verdict.detail)
        object.__setattr__(self, "matrix", _freeze(m))

    @property
    def n_modes(self):
        return self.matrix.shape[0] // 2

    def block(self, i, j):
        """2x2 block coupling mode ``i`` to mode ``j``."""
        return self.matrix[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]

    def digest(self):
        """SHA-256 of the float64 entries; used as a provenance tag in reports."""
        return hashlib.sha256(np.ascontiguousarray(self.matrix).tobytes()).hexdigest()

    def __eq__(self, other):
        return isinstance(other, CovarianceMatrix) and np.array_equal(self.matrix, other.matrix)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class GaussianState:
    """Displacement vector plus covariance matrix."""

    cov: CovarianceMatrix
    displacement: np.ndarray = field(default=None)

    def __post_init__(self):
        cov = self.cov
        if not isinstance(cov, CovarianceMatrix):
            cov = CovarianceMatrix(cov)
            object.__setattr__(self, "cov", cov)
        if self.displacement is None:
            d = np.zeros(2 * cov.n_modes)
        else:
            d = np.asarray(self.displacement, dtype=np.float64).ravel()
        if d.shape != (2 * cov.n_modes,):
            raise DimensionError(
                f"displacement must have length {2 * cov.n_modes}, got {d.shape[0]}"
            )
        object.__setattr__(self, "displacement", _freeze(d))

    @property
    def n_modes(self):
        return self.cov.n_modes

    @property
    def matrix(self):
        return self.cov.matrix

    def __eq__(self, other):
        return (
            isinstance(other, GaussianState)
            and self.cov == other.cov
            and np.array_equal(self.displacement, other.displacement)
        )

    __hash__ = None


@dataclass(frozen=True)
class SymplecticSpectrum:
    """Symplectic eigenvalues in descending order, clamped to >= 1."""

    eigenvalues: tuple

    def __len__(self):
        return len(self.eigenvalues)

    def __iter__(self):
        return iter(self.eigenvalues)

    def __getitem__(self, i):
        return self.eigenvalues[i]

    def is_pure(self, tol=1e-6):
        return all(abs(nu - 1.0) <= tol for nu in self.eigenvalues)


def symplectic_eigenvalues(state):
    """Symplectic spectrum of a state (or covariance matrix).

    One mode: ``sqrt(det V)``. Two modes: ``sqrt((D +/- sqrt(D^2 - 4 det V))/2)``
    with ``D = det A + det B + 2 det C``. More modes: moduli of the eigenvalues
    of ``i Omega V``. Values within the matrix's tolerance below 1 are clamped.
    """
    cov = state.cov if isinstance(state, GaussianState) else state
    if not isinstance(cov, CovarianceMatrix):
        cov = CovarianceMatrix(cov)
    nus = raw_symplectic_eigenvalues(cov.matrix)
    if not np.all(np.isfinite(nus)):
        raise NumericalFailure("non-finite symplectic eigenvalue")
    if nus.min() < 1.0 - cov.tolerance:
        raise UnphysicalState(f"symplectic eigenvalue {nus.min():.9g} < 1")
    nus = np.sort(np.maximum(nus, 1.0))[::-1]
    return SymplecticSpectrum(tuple(float(v) for v in nus))


def db_to_variance(db):
    return 10.0 ** (db / 10.0)


def variance_to_db(variance):
    return 10.0 * np.log10(variance)


def _check_uncertainty(v_s, v_as):
    if v_s <= 0 or v_as <= 0:
        raise UnphysicalState(f"variances must be positive, got ({v_s}, {v_as})")
    if v_s * v_as < 1.0 - EPS_PHYS:
        raise UnphysicalState(
            f"V_s * V_as = {v_s * v_as:.6g} < 1 violates the uncertainty relation"
        )


def vacuum(n_modes=1):
    return GaussianState(CovarianceMatrix(np.eye(2 * n_modes)))


def thermal_state(variance, n_modes=1):
    """Thermal state with the same variance ``variance >= 1`` in every quadrature."""
    return GaussianState(CovarianceMatrix(variance * np.eye(2 * n_modes)))


def make_squeezed_state(v_s, v_as):
    """Single-mode state with ``diag(v_s, v_as)`` covariance (X squeezed for v_s < 1)."""
    _check_uncertainty(v_s, v_as)
    return GaussianState(CovarianceMatrix(np.diag([float(v_s), float(v_as)])))


def make_epr_state(v_s, v_as):
    """Two-mode EPR state ``[[a I, c Z], [c Z, a I]]``.

    ``a = (v_s + v_as)/2`` and ``c = (v_s - v_as)/2``; the X1-X2 entry is
    ``+c`` and the Y1-Y2 entry ``-c``.
    """
    _check_uncertainty(v_s, v_as)
    a = (v_s + v_as) / 2.0
    c = (v_s - v_as) / 2.0
    eye, z = np.eye(2), np.diag([1.0, -1.0])
    return GaussianState(CovarianceMatrix(np.block([[a * eye, c * z], [c * z, a * eye]])))


def direct_sum(*states):
    """Product state of independent Gaussian states (block-diagonal covariance)."""
    dim = sum(2 * s.n_modes for s in states)
    matrix = np.zeros((dim, dim))
    disp = np.zeros(dim)
    at = 0
    for s in states:
        k = 2 * s.n_modes
        matrix[at : at + k, at : at + k] = s.matrix
        disp[at : at + k] = s.displacement
        at += k
    tol = max(s.cov.tolerance for s in states)
    return GaussianState(CovarianceMatrix(matrix, tol), disp)


# -- JSON file format -------------------------------------------------------


def state_to_dict(state):
    return {
        "n_modes": state.n_modes,
        "ordering": ORDERING,
        "matrix": state.matrix.tolist(),
        "displacement": state.displacement.tolist(),
    }


def state_from_dict(data, tolerance=EPS_PHYS):
    try:
        n_modes = int(data["n_modes"])
        ordering = data.get("ordering", ORDERING)
        matrix = np.asarray(data["matrix"], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"invalid state object: {exc}") from exc
    if ordering != ORDERING:
        raise FormatError(f"unsupported quadrature ordering {ordering!r} (expected {ORDERING!r})")
    if matrix.shape != (2 * n_modes, 2 * n_modes):
        raise FormatError(f"matrix shape {matrix.shape} does not match n_modes={n_modes}")
    displacement = data.get("displacement")
    return GaussianState(CovarianceMatrix(matrix, tolerance), displacement)


def save_state(state, path, **extra):
    payload = state_to_dict(state)
    payload.update(extra)
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_state(path, tolerance=EPS_PHYS):
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc.msg})", exc.lineno) from exc
    return state_from_dict(data, tolerance)
