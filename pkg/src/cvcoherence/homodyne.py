"""Synthetic homodyne records and covariance-matrix reconstruction.

A measurement is organised as *joint rows*: each row is a set of
quadratures recorded simultaneously (for instance ``X1, X2`` from two
detectors), giving an ``(n, k)`` array of samples. Quadratures of the same
mode can never share a row.

Labels are ``X<m>`` / ``Y<m>`` with 1-based mode numbers, matching the
column names in sample files.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from cvcoherence import kernels
from cvcoherence.core import (
    EPS_PHYS,
    ORDERING,
    CovarianceMatrix,
    GaussianState,
    raw_symplectic_eigenvalues,
    state_to_dict,
)
from cvcoherence.errors import (
    FormatError,
    InsufficientDataError,
    LengthMismatchError,
    MissingDataError,
    NumericalFailure,
    PlanError,
    ReconstructionWarning,
    UnphysicalState,
)
from cvcoherence.metrics import coherence_batch, ppt_batch

DEFAULT_SAMPLES = 500_000
DEFAULT_BLOCKS = 100
# Reconstructions may sit this far below nu = 1 before failing.
RECONSTRUCTION_TOLERANCE = 0.05

_LABEL = re.compile(r"^([XY])([1-9][0-9]*)$")


def parse_label(label):
    """``"Y2"`` -> ``(1, 1)``: zero-based mode and quadrature (0 = X, 1 = Y)."""
    m = _LABEL.match(label.strip())
    if m is None:
        raise PlanError(f"bad quadrature label {label!r}; expected X<mode> or Y<mode>")
    return int(m.group(2)) - 1, 0 if m.group(1) == "X" else 1


def label_index(label):
    mode, quad = parse_label(label)
    return 2 * mode + quad


def index_label(index):
    return ("X", "Y")[index % 2] + str(index // 2 + 1)


def default_plan(n_modes):
    """All amplitude quadratures jointly, then all phase quadratures jointly."""
    return (
        tuple(f"X{m + 1}" for m in range(n_modes)),
        tuple(f"Y{m + 1}" for m in range(n_modes)),
    )


def parse_plan(text):
    """``"X1,X2;Y1,Y2"`` -> ``(("X1", "X2"), ("Y1", "Y2"))``."""
    return tuple(tuple(s.strip() for s in row.split(",") if s.strip()) for row in text.split(";") if row.strip())


def validate_plan(plan, n_modes):
    plan = tuple(tuple(row) for row in plan)
    if not plan:
        raise PlanError("acquisition plan is empty")
    for row in plan:
        if not row:
            raise PlanError("acquisition plan has an empty row")
        seen = {}
        for label in row:
            mode, quad = parse_label(label)
            if mode >= n_modes:
                raise PlanError(f"{label} refers to mode {mode + 1} of a {n_modes}-mode state")
            if mode in seen:
                if seen[mode] == quad:
                    raise PlanError(f"{label} appears twice in joint row {row}")
                raise PlanError(
                    f"joint row {row} measures X and Y of mode {mode + 1} simultaneously"
                )
            seen[mode] = quad
    return plan


@dataclass(frozen=True, eq=False)
class JointRow:
    """Simultaneously acquired quadratures: ``samples[:, c]`` belongs to ``labels[c]``."""

    labels: tuple
    samples: np.ndarray

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64)
        if samples.ndim == 1:
            samples = samples[:, None]
        if samples.ndim != 2 or samples.shape[1] != len(self.labels):
            raise LengthMismatchError(
                f"{len(self.labels)} labels but sample array has shape {samples.shape}"
            )
        samples.flags.writeable = False
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.shape[0]


@dataclass(frozen=True, eq=False)
class QuadratureSampleSet:
    n_modes: int
    rows: tuple
    rng_seed: int | None = None

    def __post_init__(self):
        rows = tuple(self.rows)
        validate_plan([r.labels for r in rows], self.n_modes)
        object.__setattr__(self, "rows", rows)

    @property
    def pairing(self):
        return tuple(r.labels for r in self.rows)

    @property
    def sample_count(self):
        return min(len(r) for r in self.rows)

    @property
    def records(self):
        """Flat ``(mode_index, "X"|"Y", samples)`` view of every column."""
        out = []
        for row in self.rows:
            for c, label in enumerate(row.labels):
                mode, quad = parse_label(label)
                out.append((mode, "XY"[quad], row.samples[:, c]))
        return out

    def merge(self, other):
        if other.n_modes != self.n_modes:
            raise FormatError(f"cannot merge {self.n_modes}-mode and {other.n_modes}-mode sets")
        seed = self.rng_seed if self.rng_seed == other.rng_seed else None
        return QuadratureSampleSet(self.n_modes, self.rows + other.rows, seed)


def sample_quadratures(state, n=DEFAULT_SAMPLES, seed=0, plan=None):
    """Draw ``n`` i.i.d. samples per joint row from the state's Gaussian statistics.

    Each row gets its own generator spawned from ``seed``, so the output is
    a deterministic function of ``(state, n, seed, plan)``.
    """
    if n < 1:
        raise ValueError(f"sample count must be positive, got {n}")
    plan = validate_plan(plan if plan is not None else default_plan(state.n_modes), state.n_modes)
    children = np.random.SeedSequence(seed).spawn(len(plan))
    rows = []
    for labels, child in zip(plan, children):
        idx = [label_index(lb) for lb in labels]
        sub = state.matrix[np.ix_(idx, idx)]
        chol = np.linalg.cholesky(sub)
        z = np.random.default_rng(child).standard_normal((n, len(idx)))
        rows.append(JointRow(labels, state.displacement[idx] + z @ chol.T))
    return QuadratureSampleSet(state.n_modes, tuple(rows), seed)


# -- sample files -------------------------------------------------------------


def _header(n_modes, labels, seed):
    seed_text = "none" if seed is None else str(int(seed))
    return f"# modes={n_modes} ordering={ORDERING} columns={','.join(labels)} seed={seed_text}"


def write_sample_file(row, path, n_modes, seed=None):
    with open(path, "w", newline="\n") as fh:
        fh.write(_header(n_modes, row.labels, seed) + "\n")
        np.savetxt(fh, row.samples, fmt="%.17g", delimiter=",")
    return Path(path)


def export_samples(sample_set, directory, stem="samples"):
    """Write one CSV per joint row; returns the paths in row order."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, row in enumerate(sample_set.rows):
        name = f"{stem}_{i}_{'-'.join(row.labels)}.csv"
        paths.append(write_sample_file(row, directory / name, sample_set.n_modes, sample_set.rng_seed))
    return paths


def _parse_header(line):
    if not line.startswith("#"):
        raise FormatError("missing '# modes=... ordering=... columns=...' header", 1)
    fields = {}
    for token in line[1:].split():
        key, sep, value = token.partition("=")
        if not sep:
            raise FormatError(f"malformed header token {token!r}", 1)
        fields[key] = value
    for key in ("modes", "ordering", "columns"):
        if key not in fields:
            raise FormatError(f"header lacks '{key}='", 1)
    if fields["ordering"] != ORDERING:
        raise FormatError(f"unsupported ordering {fields['ordering']!r} (expected {ORDERING})", 1)
    try:
        n_modes = int(fields["modes"])
    except ValueError:
        raise FormatError(f"modes={fields['modes']!r} is not an integer", 1) from None
    labels = tuple(s for s in fields["columns"].split(",") if s)
    seed = fields.get("seed", "none")
    try:
        seed = None if seed.lower() == "none" else int(seed)
    except ValueError:
        raise FormatError(f"seed={seed!r} is not an integer", 1) from None
    return n_modes, labels, seed


def _locate_bad_line(lines, width):
    for number, line in enumerate(lines, start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != width:
            raise LengthMismatchError(f"expected {width} columns, found {len(parts)}", number)
        for p in parts:
            try:
                float(p)
            except ValueError:
                raise FormatError(f"not a number: {p.strip()!r}", number) from None
    raise FormatError("unparseable data")


def ingest_samples(*paths):
    """Read one or more sample CSV files into a single sample set."""
    if not paths:
        raise ValueError("no sample files given")
    result = None
    for path in paths:
        text = Path(path).read_text()
        first, _, body = text.partition("\n")
        n_modes, labels, seed = _parse_header(first)
        try:
            plan = validate_plan([labels], n_modes)
        except PlanError as exc:
            raise FormatError(str(exc), 1) from exc
        lines = body.splitlines()
        if not any(line.strip() for line in lines):
            raise FormatError("file contains no samples", 2)
        try:
            data = np.loadtxt(lines, delimiter=",", ndmin=2, dtype=np.float64)
        except ValueError:
            _locate_bad_line(lines, len(labels))
        if data.shape[1] != len(labels):
            raise LengthMismatchError(f"header declares {len(labels)} columns, data has {data.shape[1]}", 2)
        current = QuadratureSampleSet(n_modes, (JointRow(plan[0], data),), seed)
        result = current if result is None else result.merge(current)
    return result


# -- reconstruction -------------------------------------------------------------


def correlation_from_variances(var_i, var_j, var_sum=None, var_diff=None):
    """Off-diagonal covariance from correlation variances.

    ``V_ij = [Var(x_i + x_j) - Var(x_i) - Var(x_j)] / 2`` or, from the
    difference signal, ``V_ij = -[Var(x_i - x_j) - Var(x_i) - Var(x_j)] / 2``.
    """
    if var_sum is not None:
        return (var_sum - var_i - var_j) / 2.0
    if var_diff is not None:
        return -(var_diff - var_i - var_j) / 2.0
    raise ValueError("need the sum or the difference variance")


def _check_estimators(row):
    """Sum-form and difference-form correlation estimates against the direct sample covariance."""
    x = row.samples
    _, direct = kernels.block_moments(x, 1)
    direct = direct[0]
    k = x.shape[1]
    for i in range(k):
        for j in range(i + 1, k):
            vi, vj = np.var(x[:, i], ddof=1), np.var(x[:, j], ddof=1)
            from_sum = correlation_from_variances(vi, vj, var_sum=np.var(x[:, i] + x[:, j], ddof=1))
            from_diff = correlation_from_variances(vi, vj, var_diff=np.var(x[:, i] - x[:, j], ddof=1))
            scale = max(1.0, vi, vj)
            if abs(from_sum - direct[i, j]) > 1e-12 * scale or abs(from_diff - direct[i, j]) > 1e-12 * scale:
                raise NumericalFailure(
                    f"correlation estimators disagree for {row.labels[i]},{row.labels[j]}: "
                    f"sum={from_sum!r} diff={from_diff!r} direct={direct[i, j]!r}"
                )
    return direct


def _required_pairs(n_modes):
    pairs = []
    for q in (0, 1):
        for a in range(n_modes):
            for b in range(a + 1, n_modes):
                pairs.append((2 * a + q, 2 * b + q))
    return pairs


def _sources(sample_set, entries):
    """Map each covariance entry to ``(row number, column i, column j)``."""
    n_modes = sample_set.n_modes
    dim = 2 * n_modes
    where = {}
    for r, row in enumerate(sample_set.rows):
        cols = [label_index(lb) for lb in row.labels]
        for a in range(len(cols)):
            for b in range(a, len(cols)):
                key = (min(cols[a], cols[b]), max(cols[a], cols[b]))
                where.setdefault(key, (r, a, b))
    missing = [index_label(i) for i in range(dim) if (i, i) not in where]

    if entries is None:
        wanted = _required_pairs(n_modes)
    else:
        wanted = []
        for pair in entries:
            i, j = sorted(label_index(lb) if isinstance(lb, str) else int(lb) for lb in pair)
            if i // 2 == j // 2 and i != j:
                warnings.warn(
                    f"{index_label(i)},{index_label(j)} cannot be measured jointly; fixed to 0",
                    ReconstructionWarning,
                    stacklevel=3,
                )
                continue
            wanted.append((i, j))
    missing += [f"{index_label(i)},{index_label(j)}" for i, j in wanted if (i, j) not in where]
    if missing:
        raise MissingDataError(missing)
    return where


def _assemble(sample_set, where, stats):
    """Build (M, 2N, 2N) covariances and (M, 2N) means from per-row moment stacks."""
    dim = 2 * sample_set.n_modes
    count = stats[0][0].shape[0]
    covs = np.zeros((count, dim, dim))
    means = np.zeros((count, dim))
    measured = np.zeros((dim, dim), dtype=bool)
    for (i, j), (r, a, b) in where.items():
        if i // 2 == j // 2 and i != j:
            continue
        row_means, row_covs = stats[r]
        covs[:, i, j] = covs[:, j, i] = row_covs[:, a, b]
        measured[i, j] = measured[j, i] = True
        if i == j:
            means[:, i] = row_means[:, a]
    return covs, means, measured


def blocked_moments(sample_set, n_blocks=DEFAULT_BLOCKS, entries=None):
    """Per-block covariance matrices and means, shapes (B, 2N, 2N) and (B, 2N)."""
    where = _sources(sample_set, entries)
    stats = []
    for row in sample_set.rows:
        if len(row) // n_blocks < 2:
            raise InsufficientDataError(
                f"row {row.labels} has {len(row)} samples; {n_blocks} blocks need at least {2 * n_blocks}"
            )
        stats.append(kernels.block_moments(row.samples, n_blocks))
    covs, means, _ = _assemble(sample_set, where, stats)
    return covs, means


@dataclass(frozen=True, eq=False)
class ReconstructedCovariance:
    cov: CovarianceMatrix
    standard_errors: np.ndarray
    n_samples: int
    displacement: np.ndarray
    measured: np.ndarray
    min_raw_eigenvalue: float

    @property
    def state(self):
        return GaussianState(self.cov, self.displacement)

    def to_dict(self):
        d = state_to_dict(self.state)
        d["standard_errors"] = self.standard_errors.tolist()
        d["n_samples"] = self.n_samples
        d["measured"] = self.measured.tolist()
        return d


def reconstruct_covariance(
    sample_set,
    entries=None,
    n_blocks=DEFAULT_BLOCKS,
    estimate_displacement=True,
    tolerance=RECONSTRUCTION_TOLERANCE,
):
    """Covariance matrix from homodyne records.

    Diagonal entries are sample variances; off-diagonals come from the
    correlation variance ``Var(x_i + x_j)`` of a jointly recorded row
    (verified against the direct sample covariance). X-Y entries of the same
    mode are fixed to 0, as are cross-mode X-Y entries nobody recorded.
    Entries listed in ``entries`` (label pairs) must be recorded.

    Standard errors: the standard deviation of ``n_blocks`` non-overlapping
    block estimates divided by ``sqrt(n_blocks)``.
    """
    where = _sources(sample_set, entries)
    full = [(row.samples.mean(axis=0)[None], _check_estimators(row)[None]) for row in sample_set.rows]
    covs, means, measured = _assemble(sample_set, where, full)
    block_covs, _ = blocked_moments(sample_set, n_blocks, entries)
    errors = block_covs.std(axis=0, ddof=1) / np.sqrt(n_blocks)

    matrix = covs[0]
    nu_min = float(raw_symplectic_eigenvalues(matrix).min())
    if nu_min < 1.0 - tolerance:
        raise UnphysicalState(
            f"reconstructed matrix has symplectic eigenvalue {nu_min:.6g}, "
            f"more than {tolerance} below 1; check the acquisition"
        )
    if nu_min < 1.0 - EPS_PHYS:
        warnings.warn(
            f"reconstructed symplectic eigenvalue {nu_min:.6g} < 1 clamped to 1 (sampling noise)",
            ReconstructionWarning,
            stacklevel=2,
        )
    displacement = means[0] if estimate_displacement else np.zeros(matrix.shape[0])
    return ReconstructedCovariance(
        cov=CovarianceMatrix(matrix, tolerance),
        standard_errors=errors,
        n_samples=sample_set.sample_count,
        displacement=displacement,
        measured=measured,
        min_raw_eigenvalue=nu_min,
    )


# -- error bars -------------------------------------------------------------------


def _metric_function(metric):
    name, _, arg = metric.partition(":")
    labels = [s for s in arg.split(",") if s]
    if name == "variance" and len(labels) == 1:
        i = label_index(labels[0])
        return lambda covs, means: covs[:, i, i]
    if name == "squeezing_db" and len(labels) == 1:
        i = label_index(labels[0])
        return lambda covs, means: 10.0 * np.log10(covs[:, i, i])
    if name == "covariance" and len(labels) == 2:
        i, j = label_index(labels[0]), label_index(labels[1])
        return lambda covs, means: covs[:, i, j]
    if name == "coherence" and not labels:
        return coherence_batch
    if name == "ppt" and not labels:
        return lambda covs, means: ppt_batch(covs)
    raise ValueError(
        f"unknown metric {metric!r}; use variance:<q>, squeezing_db:<q>, "
        "covariance:<q>,<q>, coherence or ppt"
    )


def estimate_error_bars(sample_set, metric, n_blocks=DEFAULT_BLOCKS, estimate_displacement=True):
    """``(value, sigma)`` for a metric, sigma from ``n_blocks`` equal blocks.

    ``value`` uses all samples; ``sigma`` is the standard deviation of the
    per-block values divided by ``sqrt(n_blocks)``.
    """
    return estimate_error_bars_many(sample_set, [metric], n_blocks, estimate_displacement)[metric]


def estimate_error_bars_many(sample_set, metrics, n_blocks=DEFAULT_BLOCKS, estimate_displacement=True):
    """Like :func:`estimate_error_bars` for several metrics sharing one blocking pass."""
    funcs = {m: _metric_function(m) for m in metrics}
    where = _sources(sample_set, None)
    full = [(row.samples.mean(axis=0)[None], kernels.block_moments(row.samples, 1)[1]) for row in sample_set.rows]
    covs, means, _ = _assemble(sample_set, where, full)
    block_covs, block_means = blocked_moments(sample_set, n_blocks)
    if not estimate_displacement:
        means = block_means = None
    out = {}
    for m, f in funcs.items():
        value = float(f(covs, means)[0])
        per_block = f(block_covs, block_means)
        out[m] = (value, float(np.std(per_block, ddof=1) / np.sqrt(n_blocks)))
    return out
