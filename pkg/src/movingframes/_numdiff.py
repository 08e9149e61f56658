"""Central finite differences with a per-direction scaled step."""

import numpy as np

from .errors import EvaluationFailure

DEFAULT_STEP = 1e-5


def steps(x, h=DEFAULT_STEP):
    x = np.asarray(x, dtype=float)
    return h * np.maximum(1.0, np.abs(x))


def _call(f, x):
    try:
        val = np.asarray(f(x), dtype=float)
    except (ArithmeticError, ValueError) as exc:
        raise EvaluationFailure(f"evaluation failed at {x!r}: {exc}") from exc
    if not np.all(np.isfinite(val)):
        raise EvaluationFailure(f"non-finite value at {x!r}")
    return val


def derivative(f, x, h=DEFAULT_STEP):
    """d f / d x_j for array-valued f, stacked on a trailing axis.

    Output shape is ``f(x).shape + (len(x),)``.
    """
    x = np.asarray(x, dtype=float)
    hs = steps(x, h)
    cols = []
    for j in range(x.size):
        dx = np.zeros_like(x)
        dx[j] = hs[j]
        cols.append((_call(f, x + dx) - _call(f, x - dx)) / (2.0 * hs[j]))
    return np.stack(cols, axis=-1)


def gradient(f, x, h=DEFAULT_STEP):
    """Gradient of a scalar function."""
    return derivative(lambda y: np.atleast_1d(f(y)), x, h)[0]
