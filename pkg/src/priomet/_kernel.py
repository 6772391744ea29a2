"""Numeric kernel shared by every module.

Two kernels coexist.  The *exact* kernel holds ``fractions.Fraction`` values in
numpy object arrays; the *float* kernel holds ``float64``.  Bulk comparisons in
exact mode are done on integer numerators over one common denominator, which
keeps them exact while letting numpy do the loops.
"""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

import numpy as np

# Relative tolerance of the float kernel.
FLOAT_TOL = 1e-9

_INT64_SAFE = 2**62


def to_fraction(x) -> Fraction:
    """Convert an int, Fraction or ``"p/q"`` string into a Fraction."""
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Rational):
        return Fraction(int(x.numerator), int(x.denominator))
    if isinstance(x, (np.integer,)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"not a rational value: {x!r}")


def is_rational_value(x) -> bool:
    if isinstance(x, bool):
        return False
    if isinstance(x, (Rational, np.integer)):
        return True
    if isinstance(x, str):
        try:
            Fraction(x.strip())
        except ValueError:
            return False
        return True
    return False


def parse_number(x, exact: bool):
    """Parse one input scalar for the requested kernel."""
    if exact:
        return to_fraction(x)
    if isinstance(x, str):
        return float(Fraction(x.strip())) if "/" in x else float(x)
    return float(x)


def fraction_array(rows) -> np.ndarray:
    """Build an object array of Fractions (any shape)."""
    arr = np.array(rows, dtype=object)
    flat = arr.reshape(-1)
    for idx, v in enumerate(flat):
        flat[idx] = to_fraction(v)
    return flat.reshape(arr.shape)


def format_number(x):
    """JSON-friendly form: rationals as ``"p/q"`` (or int), floats unchanged."""
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    return x


def _safe_int_array(values: list[int], shape) -> np.ndarray:
    big = max((abs(v) for v in values), default=0)
    dtype = np.int64 if big < _INT64_SAFE else object
    return np.array(values, dtype=dtype).reshape(shape)


def common_denominator(*arrays: np.ndarray) -> int:
    den = 1
    for arr in arrays:
        dens = {x.denominator for x in arr.reshape(-1)}
        if dens:
            den = math.lcm(den, *dens)
    return den


def scaled_ints(arr: np.ndarray, den: int) -> np.ndarray:
    """Numerators of ``arr`` over denominator ``den`` (int64 when safe)."""
    vals = [x.numerator * (den // x.denominator) for x in arr.reshape(-1)]
    return _safe_int_array(vals, arr.shape)


def to_common_ints(*arrays: np.ndarray) -> tuple[list[np.ndarray], int]:
    den = common_denominator(*arrays)
    return [scaled_ints(a, den) for a in arrays], den


def widen(arr: np.ndarray, factor: int) -> np.ndarray:
    """Multiply an integer array, falling back to Python ints on overflow risk."""
    if arr.dtype == object:
        return arr * factor
    big = int(np.abs(arr).max()) if arr.size else 0
    if big * factor < _INT64_SAFE:
        return arr * factor
    return arr.astype(object) * factor


def pairwise_linf(values: np.ndarray) -> np.ndarray:
    """All-pairs l-infinity distance matrix of the rows of ``values``.

    Works on float arrays and on integer (int64 or object) arrays alike.
    """
    n = values.shape[0]
    if values.dtype == object:
        out = np.zeros((n, n), dtype=object)
        out[:] = 0
    else:
        out = np.zeros((n, n), dtype=values.dtype)
    for c in range(values.shape[1]):
        col = values[:, c]
        diff = col[:, None] - col[None, :]
        out = np.maximum(out, np.abs(diff))
    return out


def ceil_log2(n: int) -> int:
    """Smallest b with 2**b >= n (0 for n <= 1)."""
    return 0 if n <= 1 else (n - 1).bit_length()
