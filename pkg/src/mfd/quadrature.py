"""Nested time-ordered integrals over the simplex t >= t_1 >= ... >= t_r >= 0.

Two methods: tensorized Gauss-Legendre with a per-level change of variables
to [0, t_{k-1}] (deterministic, exact node tree), and Monte Carlo via sorted
uniforms (counter-based Philox stream, so parallel and serial runs draw the
same samples).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

# default per-level Gauss orders by integral depth; Monte Carlo beyond
DEFAULT_GAUSS_ORDER = {1: 24, 2: 16, 3: 12, 4: 12, 5: 8, 6: 8}
MC_DEPTH_THRESHOLD = 7


@dataclass(frozen=True)
class QuadratureSpec:
    """How to evaluate the nested integrals.

    method: "nested-gauss" or "simplex-monte-carlo".
    order: Gauss points per nesting level (None = depth-dependent default).
    samples: Monte Carlo sample count (>= 1000).
    seed: mandatory for Monte Carlo (reproducibility).
    rtol: target relative tolerance used by error checks.
    """

    method: str = "nested-gauss"
    order: int | None = None
    samples: int = 20000
    seed: int | None = None
    rtol: float = 1e-8

    def __post_init__(self):
        if self.method not in ("nested-gauss", "simplex-monte-carlo"):
            raise ConfigError(f"unknown quadrature method {self.method!r}")
        if self.order is not None and self.order < 2:
            raise ConfigError("nested-gauss needs order >= 2 per level")
        if self.method == "simplex-monte-carlo":
            if self.samples < 1000:
                raise ConfigError("Monte Carlo needs at least 1000 samples")
            if self.seed is None:
                raise ConfigError("Monte Carlo quadrature requires an explicit seed")

    def order_for(self, r: int) -> int:
        if self.order is not None:
            return self.order
        return DEFAULT_GAUSS_ORDER.get(r, DEFAULT_GAUSS_ORDER[max(DEFAULT_GAUSS_ORDER)])

    def uses_mc(self, r: int) -> bool:
        return self.method == "simplex-monte-carlo" or (
            self.order is None and r >= MC_DEPTH_THRESHOLD
        )


_leggauss_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_nodes(order: int):
    """Gauss-Legendre nodes/weights on [-1, 1], cached."""
    if order not in _leggauss_cache:
        x, w = np.polynomial.legendre.leggauss(order)
        _leggauss_cache[order] = (x, w)
    return _leggauss_cache[order]


def simplex_nodes(t: float, r: int, order: int):
    """Node tuples and weights for the nested rule on the ordered simplex.

    Returns (times, weights): times has shape (order**r, r) with row
    (t_1, ..., t_r), t >= t_1 >= ... >= t_r, and sum(weights * f(times))
    approximates the iterated integral.
    """
    if r < 1:
        raise ValueError("depth r must be >= 1")
    x, w = gauss_nodes(order)
    frac = (x + 1.0) / 2.0  # map [-1,1] -> [0,1]
    times = np.zeros((1, 0))
    weights = np.ones(1)
    upper = np.full(1, float(t))
    for _ in range(r):
        new_t = upper[:, None] * frac[None, :]           # (M, o)
        new_w = weights[:, None] * (w[None, :] * upper[:, None] / 2.0)
        M, o = new_t.shape
        times = np.concatenate(
            [np.repeat(times, o, axis=0), new_t.reshape(M * o, 1)], axis=1
        )
        weights = new_w.reshape(M * o)
        upper = times[:, -1].copy()
    return times, weights


def simplex_samples(t: float, r: int, samples: int, seed: int):
    """Uniform samples on the ordered simplex via sorted uniforms.

    Returns (times, volume) with times shape (samples, r) sorted descending;
    the integral estimate is volume * mean(f(times)), volume = t^r / r!.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    u = rng.random((samples, r)) * t
    u.sort(axis=1)
    times = u[:, ::-1].copy()
    volume = float(t) ** r / math.factorial(r)
    return times, volume


def integrate_simplex(f, t: float, r: int, spec: QuadratureSpec):
    """Integrate f(t_1,...,t_r) over the ordered simplex.

    ``f`` maps an (M, r) array of node rows to an (M,) array of complex
    values.  Returns (value, error_estimate); the estimate is |difference|
    against a coarser embedded rule (Gauss) or the standard error (MC).
    """
    if t == 0.0:
        return 0.0 + 0.0j, 0.0
    if spec.uses_mc(r):
        times, volume = simplex_samples(t, r, spec.samples, _require_seed(spec))
        vals = np.asarray(f(times))
        value = volume * vals.mean()
        stderr = volume * vals.std(ddof=1) / np.sqrt(len(vals))
        return complex(value), float(abs(stderr))
    order = spec.order_for(r)
    times, weights = simplex_nodes(t, r, order)
    value = complex(np.dot(weights, np.asarray(f(times))))
    coarse_order = max(2, order // 2)
    ct, cw = simplex_nodes(t, r, coarse_order)
    coarse = complex(np.dot(cw, np.asarray(f(ct))))
    return value, abs(value - coarse)


def _require_seed(spec: QuadratureSpec) -> int:
    if spec.seed is None:
        raise ConfigError("Monte Carlo quadrature requires an explicit seed")
    return spec.seed


def integrate_cube(f, t: float, r: int, order: int):
    """Tensor-product Gauss on the full cube [0, t]^r (cross-check helper)."""
    x, w = gauss_nodes(order)
    pts_1d = t * (x + 1.0) / 2.0
    wts_1d = w * t / 2.0
    grids = np.meshgrid(*([pts_1d] * r), indexing="ij")
    times = np.stack([g.ravel() for g in grids], axis=1)
    wts = np.ones(len(times))
    for axis in range(r):
        idx = np.unravel_index(np.arange(len(times)), (order,) * r)[axis]
        wts *= wts_1d[idx]
    return complex(np.dot(wts, np.asarray(f(times))))
