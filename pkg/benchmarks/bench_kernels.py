"""Compare the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported directly, so the CVCOHERENCE_PURE_PYTHON switch
does not matter here. Outputs are also checked for agreement.
"""

import argparse
import sys
import timeit

import numpy as np

from cvcoherence import _kernels_py

try:
    from cvcoherence import _ckernels
except ImportError:
    _ckernels = None


def _cases(rng):
    samples = rng.standard_normal((500_000, 4))
    a = rng.standard_normal((1681, 4, 4))
    covs4 = a @ a.transpose(0, 2, 1) + 2.0 * np.eye(4)
    covs2 = covs4[:, :2, :2].copy()
    nus = 1.0 + 10.0 * rng.random(100_000)
    return {
        "block_moments 5e5x4, B=100": ("block_moments", (samples, 100)),
        "two_mode_spectra 1681x4x4": ("two_mode_spectra", (covs4,)),
        "one_mode_nu 1681x2x2": ("one_mode_nu", (covs2,)),
        "entropy_g 1e5": ("entropy_g", (nus,)),
    }


def _agree(x, y):
    if isinstance(x, tuple):
        return all(_agree(a, b) for a, b in zip(x, y))
    return np.allclose(x, y, rtol=1e-10, atol=1e-12)


def main(argv=None):
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not built; only the numpy backend is available", file=sys.stderr)
        return 1
    rng = np.random.default_rng(7)
    print(f"{'kernel':32s} {'numpy ms':>10s} {'cython ms':>10s} {'speedup':>8s}  agree")
    for label, (name, call_args) in _cases(rng).items():
        py_fn, c_fn = getattr(_kernels_py, name), getattr(_ckernels, name)
        t_py = min(timeit.repeat(lambda: py_fn(*call_args), number=1, repeat=args.repeat))
        t_c = min(timeit.repeat(lambda: c_fn(*call_args), number=1, repeat=args.repeat))
        ok = _agree(py_fn(*call_args), c_fn(*call_args))
        print(f"{label:32s} {1e3 * t_py:10.2f} {1e3 * t_c:10.2f} {t_py / t_c:8.1f}x  {ok}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
