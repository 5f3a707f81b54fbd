"""Channel-parameter sweeps, threshold search and CSV/JSON reports."""

from __future__ import annotations

import configparser
import csv
import io
import json
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from cvcoherence import __version__, kernels
from cvcoherence.channels import ThermalChannel, apply_channel, channel_grid
from cvcoherence.core import db_to_variance, make_epr_state, make_squeezed_state
from cvcoherence.errors import NoCrossingError, ParameterError, SweepPointError
from cvcoherence.homodyne import (
    DEFAULT_BLOCKS,
    estimate_error_bars_many,
    reconstruct_covariance,
    sample_quadratures,
)
from cvcoherence.metrics import coherence, coherence_batch, ppt_value, squeezing_db

DEFAULT_SOURCE_DB = (-2.95, 4.15)
DEFAULT_FIXED_LOSS = 0.4
DEFAULT_POINTS = 41
BRACKET = (0.0, 100.0)
THRESHOLD_TOL = 1e-6
NULL = "null"


@dataclass(frozen=True)
class Scenario:
    source: str  # "squeezed" or "epr"
    axis: str  # "loss" or "excess_noise"
    modes: tuple  # modes sent through a channel


SCENARIOS = {
    "squeezed_loss": Scenario("squeezed", "loss", (0,)),
    "epr_loss": Scenario("epr", "loss", (1,)),
    "epr_loss_two_modes": Scenario("epr", "loss", (0, 1)),
    "squeezed_noise": Scenario("squeezed", "excess_noise", (0,)),
    "epr_noise_one_mode": Scenario("epr", "excess_noise", (1,)),
    "epr_noise_two_modes": Scenario("epr", "excess_noise", (0, 1)),
}

METRIC_COLUMNS = ("squeezing_db_X", "squeezing_db_Y", "ppt_value", "coherence_bits")
THRESHOLD_METRICS = ("squeezing_crosses_snl", "ppt_crosses_one")


def _scenario(name):
    try:
        return SCENARIOS[name]
    except KeyError:
        raise ParameterError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}") from None


@dataclass(frozen=True)
class SweepConfig:
    scenario: str
    source_db: tuple = DEFAULT_SOURCE_DB
    fixed_loss: float = DEFAULT_FIXED_LOSS
    grid: tuple | None = None
    sampling: tuple | None = None  # (n, seed)
    n_blocks: int = DEFAULT_BLOCKS

    def __post_init__(self):
        sc = _scenario(self.scenario)
        if self.grid is None:
            stop = 1.0 if sc.axis == "loss" else 5.0
            object.__setattr__(self, "grid", (0.0, stop, DEFAULT_POINTS))
        start, stop, points = self.grid
        object.__setattr__(self, "grid", (float(start), float(stop), int(points)))
        if int(points) < 2 or not stop > start:
            raise ParameterError(f"grid must be increasing with >= 2 points, got {self.grid}")
        if sc.axis == "loss" and not (0.0 <= start and stop <= 1.0):
            raise ParameterError("loss grid must lie in [0, 1]")
        if sc.axis == "excess_noise" and start < 0.0:
            raise ParameterError("excess-noise grid must be nonnegative")
        if not 0.0 <= self.fixed_loss <= 1.0:
            raise ParameterError(f"fixed_loss must lie in [0, 1], got {self.fixed_loss}")
        object.__setattr__(self, "source_db", tuple(float(v) for v in self.source_db))
        if self.sampling is not None:
            n, seed = self.sampling
            object.__setattr__(self, "sampling", (int(n), int(seed)))

    @property
    def axis(self):
        return _scenario(self.scenario).axis

    def values(self):
        start, stop, points = self.grid
        return np.linspace(start, stop, points)


@dataclass
class SweepResult:
    columns: tuple
    rows: list
    metadata: dict = field(default_factory=dict)

    def column(self, name):
        k = self.columns.index(name)
        return [row[k] for row in self.rows]


def source_state(kind, source_db=DEFAULT_SOURCE_DB):
    v_s, v_as = (db_to_variance(v) for v in source_db)
    return make_squeezed_state(v_s, v_as) if kind == "squeezed" else make_epr_state(v_s, v_as)


def scenario_state(scenario, loss, excess_noise, source_db=DEFAULT_SOURCE_DB):
    """Source state of ``scenario`` after its channel(s) with the given loss and noise."""
    sc = _scenario(scenario)
    state = source_state(sc.source, source_db)
    channel = ThermalChannel.from_loss(loss, excess_noise)
    for mode in sc.modes:
        state = apply_channel(state, channel, mode)
    return state


def _channel_params(config, value):
    if config.axis == "loss":
        return value, 0.0
    return config.fixed_loss, value


def analytic_metrics(state, source):
    if source == "squeezed":
        return {
            "squeezing_db_X": squeezing_db(state, "X"),
            "squeezing_db_Y": squeezing_db(state, "Y"),
            "ppt_value": None,
            "coherence_bits": coherence(state).coherence_bits,
        }
    return {
        "squeezing_db_X": None,
        "squeezing_db_Y": None,
        "ppt_value": ppt_value(state).ppt_value,
        "coherence_bits": coherence(state).coherence_bits,
    }


_SAMPLED_METRICS = {
    "squeezed": {"squeezing_db_X": "squeezing_db:X1", "squeezing_db_Y": "squeezing_db:Y1", "coherence_bits": "coherence"},
    "epr": {"ppt_value": "ppt", "coherence_bits": "coherence"},
}


def sampled_metrics(state, source, n, seed, n_blocks=DEFAULT_BLOCKS):
    """Sample, reconstruct and evaluate; returns ``{column: (value, sigma)}``."""
    samples = sample_quadratures(state, n, seed)
    reconstruct_covariance(samples, n_blocks=n_blocks)  # physicality + estimator checks
    wanted = _SAMPLED_METRICS[source]
    bars = estimate_error_bars_many(samples, list(wanted.values()), n_blocks)
    return {col: bars[m] for col, m in wanted.items()}


def run_sweep(config):
    """Evaluate the scenario's metrics at every grid point."""
    sc = _scenario(config.scenario)
    columns = [config.axis, *METRIC_COLUMNS]
    if config.sampling is not None:
        for name in METRIC_COLUMNS:
            columns += [f"{name}_sampled", f"{name}_err"]
    rows = []
    seeds = []
    for index, value in enumerate(config.values()):
        value = float(value)
        try:
            loss, noise = _channel_params(config, value)
            state = scenario_state(config.scenario, loss, noise, config.source_db)
            analytic = analytic_metrics(state, sc.source)
            row = [value] + [analytic[c] for c in METRIC_COLUMNS]
            if config.sampling is not None:
                n, base_seed = config.sampling
                seed = base_seed ^ index
                seeds.append(seed)
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    sampled = sampled_metrics(state, sc.source, n, seed, config.n_blocks)
                for c in METRIC_COLUMNS:
                    row += list(sampled.get(c, (None, None)))
        except Exception as exc:
            raise SweepPointError(index, value, exc) from exc
        rows.append(tuple(row))
    metadata = {
        "tool": "cvcoherence",
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "config": asdict(config),
        "seeds": seeds,
    }
    return SweepResult(tuple(columns), rows, metadata)


# -- thresholds -------------------------------------------------------------


def threshold_metric(scenario, metric, fixed_loss=DEFAULT_FIXED_LOSS, source_db=DEFAULT_SOURCE_DB):
    """Signed distance to the boundary as a function of excess noise (negative = nonclassical)."""
    sc = _scenario(scenario)
    if metric == "squeezing_crosses_snl":
        if sc.source != "squeezed":
            raise ParameterError(f"{metric} needs a squeezed-state scenario, got {scenario}")
        return lambda d: scenario_state(scenario, fixed_loss, d, source_db).matrix[0, 0] - 1.0
    if metric == "ppt_crosses_one":
        if sc.source != "epr":
            raise ParameterError(f"{metric} needs an EPR scenario, got {scenario}")
        return lambda d: ppt_value(scenario_state(scenario, fixed_loss, d, source_db)).ppt_value - 1.0
    raise ParameterError(f"unknown threshold metric {metric!r}; choose from {THRESHOLD_METRICS}")


def find_threshold(scenario, metric, fixed_loss=DEFAULT_FIXED_LOSS, source_db=DEFAULT_SOURCE_DB, tol=THRESHOLD_TOL):
    """Excess noise at which the metric crosses its classical boundary (bisection)."""
    f = threshold_metric(scenario, metric, fixed_loss, source_db)
    lo, hi = BRACKET
    f_lo, f_hi = f(lo), f(hi)
    if f_lo >= 0.0:
        raise NoCrossingError(
            f"{metric} is already classical at delta={lo} (value {f_lo + 1:.6g}); nothing to cross"
        )
    if f_hi < 0.0:
        raise NoCrossingError(f"{metric} is still nonclassical at delta={hi} (value {f_hi + 1:.6g})")
    while hi - lo > tol / 4:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def squeezing_threshold_closed_form(v_s, loss):
    """Excess noise solving ``eta V_s + (1 - eta)(delta + 1) = 1``."""
    eta = 1.0 - loss
    return (1.0 - eta * v_s) / (1.0 - eta) - 1.0


# -- 2-D surfaces -------------------------------------------------------------


def coherence_surface(scenario, losses, noises, source_db=DEFAULT_SOURCE_DB):
    """Long-format coherence over the (loss, excess noise) grid via batched kernels."""
    sc = _scenario(scenario)
    state = source_state(sc.source, source_db)
    ll, dd = np.meshgrid(np.asarray(losses, float), np.asarray(noises, float), indexing="ij")
    covs = channel_grid(state.matrix, sc.modes, 1.0 - ll.ravel(), dd.ravel())
    coh = coherence_batch(covs)
    rows = [(float(l), float(d), float(c)) for l, d, c in zip(ll.ravel(), dd.ravel(), coh)]
    metadata = {
        "tool": "cvcoherence",
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "scenario": scenario,
        "source_db": list(source_db),
    }
    return SweepResult(("loss", "excess_noise", "coherence_bits"), rows, metadata)


# -- reports ----------------------------------------------------------------


def _format(value):
    return NULL if value is None else repr(float(value))


def _parse(text):
    return None if text == NULL else float(text)


def report_csv(result):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(result.columns)
    for row in result.rows:
        writer.writerow([_format(v) for v in row])
    return buf.getvalue()


def emit_report(result, path):
    """Write ``path`` (CSV) and a sidecar ``.json`` with metadata; returns both paths."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report_csv(result))
    meta_path = path.with_suffix(".json")
    meta_path.write_text(json.dumps(result.metadata, indent=2, sort_keys=True) + "\n")
    return path, meta_path


def load_report(path):
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        columns = tuple(next(reader))
        rows = [tuple(_parse(v) for v in row) for row in reader]
    meta_path = path.with_suffix(".json")
    metadata = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    return SweepResult(columns, rows, metadata)


CURVES = tuple(SCENARIOS)
SURFACES = {
    "surface_squeezed": "squeezed_noise",
    "surface_epr_one_mode": "epr_noise_one_mode",
    "surface_epr_two_modes": "epr_noise_two_modes",
}


def run_all_figures(outdir, points=DEFAULT_POINTS, source_db=DEFAULT_SOURCE_DB, fixed_loss=DEFAULT_FIXED_LOSS, sampling=None):
    """Write every curve, surface and the threshold summary into ``outdir``."""
    outdir = Path(outdir)
    written = {}
    for scenario in CURVES:
        sc = SCENARIOS[scenario]
        stop = 1.0 if sc.axis == "loss" else 5.0
        config = SweepConfig(scenario, source_db, fixed_loss, (0.0, stop, points), sampling)
        written[scenario] = emit_report(run_sweep(config), outdir / f"{scenario}.csv")[0]
    losses = np.linspace(0.0, 1.0, points)
    noises = np.linspace(0.0, 5.0, points)
    for name, scenario in SURFACES.items():
        surface = coherence_surface(scenario, losses, noises, source_db)
        written[name] = emit_report(surface, outdir / f"{name}.csv")[0]

    thresholds = {}
    for scenario, metric in (
        ("squeezed_noise", "squeezing_crosses_snl"),
        ("epr_noise_one_mode", "ppt_crosses_one"),
        ("epr_noise_two_modes", "ppt_crosses_one"),
    ):
        try:
            thresholds[f"{scenario}:{metric}"] = find_threshold(scenario, metric, fixed_loss, source_db)
        except NoCrossingError as exc:
            thresholds[f"{scenario}:{metric}"] = None
            warnings.warn(str(exc), stacklevel=2)
    path = outdir / "thresholds.json"
    payload = {"fixed_loss": fixed_loss, "source_db": list(source_db), "thresholds": thresholds}
    path.write_text(json.dumps(payload, indent=2) + "\n")
    written["thresholds"] = path
    return written


# -- config files -------------------------------------------------------------


def _floats(text):
    return tuple(float(s) for s in text.replace(";", ",").split(",") if s.strip())


def load_config(path):
    """Read an INI-style sweep configuration.

    ``[sweep]`` holds ``scenario``, ``source_db``, ``fixed_loss`` and
    ``grid = start, stop, points``; an optional ``[sampling]`` section
    holds ``n`` and ``seed``; ``[threshold]`` may name a ``metric``.
    Returns ``(SweepConfig, threshold_metric_or_None)``.
    """
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise FileNotFoundError(path)
    if "sweep" not in parser:
        raise ParameterError(f"{path}: missing [sweep] section")
    sw = parser["sweep"]
    kwargs = {"scenario": sw.get("scenario", "").strip()}
    if "source_db" in sw:
        kwargs["source_db"] = _floats(sw["source_db"])
    if "fixed_loss" in sw:
        kwargs["fixed_loss"] = sw.getfloat("fixed_loss")
    if "grid" in sw:
        start, stop, points = _floats(sw["grid"])
        kwargs["grid"] = (start, stop, int(points))
    if "n_blocks" in sw:
        kwargs["n_blocks"] = sw.getint("n_blocks")
    if "sampling" in parser:
        sp = parser["sampling"]
        kwargs["sampling"] = (sp.getint("n", 500_000), sp.getint("seed", 0))
    metric = parser.get("threshold", "metric", fallback=None)
    return SweepConfig(**kwargs), metric
