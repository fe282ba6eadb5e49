"""Scalar flux functions and the Lax-Friedrichs numerical flux."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

SAMPLES = 4096
SAFETY = 1.01


@dataclass(frozen=True)
class FluxFn:
    name: str
    f: Callable
    speed_bound: Callable   # (lo, hi) -> max |f'(u)| for u in [lo, hi]

    def __call__(self, u):
        return self.f(u)

    def wave_speed_bound(self, lo, hi) -> float:
        lo, hi = float(min(lo, hi)), float(max(lo, hi))
        return float(self.speed_bound(lo, hi))


def lax_friedrichs(u, v, flux, alpha):
    """h(u, v) = (f(u) + f(v) - alpha (v - u)) / 2."""
    return 0.5 * (flux(u) + flux(v) - alpha * (v - u))


def sampled_bound(dfdu, samples=SAMPLES, safety=SAFETY):
    """Interval bound on |f'| from dense sampling, padded by a safety factor."""
    def bound(lo, hi):
        u = np.linspace(lo, hi, samples)
        return safety * float(np.max(np.abs(dfdu(u))))
    return bound


def _linear():
    return FluxFn("linear", lambda u: np.asarray(u, dtype=float) * 1.0, lambda lo, hi: 1.0)


def _zero():
    return FluxFn("zero", lambda u: np.zeros_like(np.asarray(u, dtype=float)), lambda lo, hi: 0.0)


def _burgers():
    return FluxFn("burgers", lambda u: 0.5 * np.asarray(u, dtype=float) ** 2,
                  lambda lo, hi: max(abs(lo), abs(hi)))


def _buckley(c=4.0):
    def f(u):
        u = np.asarray(u, dtype=float)
        return c * u**2 / (c * u**2 + (1 - u) ** 2)

    def df(u):
        den = c * u**2 + (1 - u) ** 2
        return 2 * c * u * (1 - u) / den**2

    return FluxFn("buckley-leverett" if c == 4.0 else f"buckley-leverett-{c:g}", f, sampled_bound(df))


def _buckley_gravity():
    # g(u) = f(u) (1 - 5 (1-u)^2) with f(u) = u^2 / (u^2 + (1-u)^2)
    def f(u):
        u = np.asarray(u, dtype=float)
        return u**2 / (u**2 + (1 - u) ** 2)

    def df(u):
        den = u**2 + (1 - u) ** 2
        return 2 * u * (1 - u) / den**2

    def g(u):
        u = np.asarray(u, dtype=float)
        return f(u) * (1 - 5 * (1 - u) ** 2)

    def dg(u):
        return df(u) * (1 - 5 * (1 - u) ** 2) + f(u) * 10 * (1 - u)

    return FluxFn("buckley-leverett-gravity", g, sampled_bound(dg))


_CATALOG = {
    "linear": _linear,
    "zero": _zero,
    "burgers": _burgers,
    "buckley-leverett": _buckley,
    "buckley-leverett-2d-x": lambda: _buckley(1.0),
    "buckley-leverett-gravity": _buckley_gravity,
}


def flux_catalog(name: str) -> FluxFn:
    try:
        return _CATALOG[name]()
    except KeyError:
        raise KeyError(f"unknown flux {name!r}; known: {sorted(_CATALOG)}") from None
