"""Registry of built-in payoffs with analytically known (K, B)."""
from __future__ import annotations

import math

import numpy as np

from .errors import InputError
from .measures import PayoffSpec


def _vec(a, dim):
    a = np.atleast_1d(np.asarray(a, dtype=np.float64))
    if dim is not None and a.size == 1 and dim > 1:
        a = np.full(dim, a.item())
    return a


def clamp(a=1.0, b=0.0, lo=-1.0, hi=1.0, dim=None) -> PayoffSpec:
    """``clip(<a, x> + b, lo, hi)``."""
    a = _vec(a, dim)
    if not lo < hi:
        raise InputError(f"clamp needs lo < hi, got {lo}, {hi}")
    K = float(np.linalg.norm(a))
    B = float(max(abs(lo), abs(hi)))
    return PayoffSpec(
        evaluator=lambda x: np.clip(x @ a + b, lo, hi),
        lipschitz_K=K,
        sup_bound_B=B,
        name="clamp",
        dim=a.size,
        params=(("a", tuple(a)), ("b", b), ("lo", lo), ("hi", hi)),
    )


def call(strike=0.0, cap=1.0, a=1.0, dim=None) -> PayoffSpec:
    """Capped call ``max(0, min(<a, x> - strike, cap))``."""
    a = _vec(a, dim)
    if cap <= 0:
        raise InputError("call cap must be positive")
    return PayoffSpec(
        evaluator=lambda x: np.clip(x @ a - strike, 0.0, cap),
        lipschitz_K=float(np.linalg.norm(a)),
        sup_bound_B=float(cap),
        name="call",
        dim=a.size,
        params=(("strike", strike), ("cap", cap), ("a", tuple(a))),
    )


def bump(height=1.0, width=1.0, center=0.0, dim=None) -> PayoffSpec:
    """Gaussian bump ``height * exp(-||x - center||^2 / (2 width^2))``.

    The gradient norm peaks at distance ``width`` from the centre, giving
    ``K = |height| * exp(-1/2) / width``.
    """
    c = _vec(center, dim)
    if width <= 0:
        raise InputError("bump width must be positive")
    K = abs(height) * math.exp(-0.5) / width
    return PayoffSpec(
        evaluator=lambda x: height * np.exp(-np.sum((x - c) ** 2, axis=1) / (2.0 * width**2)),
        lipschitz_K=K,
        sup_bound_B=abs(float(height)),
        name="bump",
        dim=c.size,
        params=(("height", height), ("width", width), ("center", tuple(c))),
    )


def tabulated(grid, values) -> PayoffSpec:
    """Piecewise-linear interpolation of ``values`` on a 1-d ``grid``.

    Constant beyond the grid ends. K is the largest finite-difference slope,
    which is exact for the interpolant.
    """
    g = np.asarray(grid, dtype=np.float64).ravel()
    v = np.asarray(values, dtype=np.float64).ravel()
    if g.size != v.size or g.size < 2:
        raise InputError("tabulated payoff needs matching grid/values with >= 2 nodes")
    if np.any(np.diff(g) <= 0):
        raise InputError("tabulated grid must be strictly increasing")
    K = float(np.max(np.abs(np.diff(v) / np.diff(g))))
    return PayoffSpec(
        evaluator=lambda x: np.interp(x[:, 0], g, v),
        lipschitz_K=K,
        sup_bound_B=float(np.max(np.abs(v))),
        name="tabulated",
        dim=1,
        params=(("grid", tuple(g)), ("values", tuple(v))),
    )


def constant(value=0.0, dim=None) -> PayoffSpec:
    return PayoffSpec(
        evaluator=lambda x: np.full(x.shape[0], float(value)),
        lipschitz_K=0.0,
        sup_bound_B=abs(float(value)),
        name="constant",
        dim=dim,
        params=(("value", value),),
    )


def negated(V: PayoffSpec) -> PayoffSpec:
    return PayoffSpec(
        evaluator=lambda x: -V.evaluator(x),
        lipschitz_K=V.lipschitz_K,
        sup_bound_B=V.sup_bound_B,
        name=f"neg_{V.name}",
        dim=V.dim,
        params=V.params,
    )


REGISTRY = {
    "clamp": clamp,
    "call": call,
    "bump": bump,
    "tabulated": tabulated,
    "constant": constant,
}


def make_payoff(name: str, dim: int | None = None, **params) -> PayoffSpec:
    """Build a registry payoff by name."""
    try:
        factory = REGISTRY[name]
    except KeyError:
        raise InputError(f"unknown payoff {name!r}; known: {', '.join(sorted(REGISTRY))}") from None
    if name != "tabulated":
        params.setdefault("dim", dim)
    return factory(**params)


def parse_params(text: str) -> dict:
    """Parse ``"a=1,0.5; b=0; lo=-1"`` into ``{"a": [1.0, 0.5], "b": 0.0, ...}``."""
    out = {}
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "=" not in chunk:
            raise InputError(f"payoff parameter {chunk!r} is not key=value")
        key, val = (s.strip() for s in chunk.split("=", 1))
        nums = [float(t) for t in val.replace(",", " ").split()]
        if not nums:
            raise InputError(f"payoff parameter {key!r} has no value")
        out[key] = nums[0] if len(nums) == 1 else nums
    return out
