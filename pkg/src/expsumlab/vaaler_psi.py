"""Vaaler's trigonometric approximation to the centered sawtooth.

The degree-H approximation is

    psi_approx(x, H) = - sum_{h=1}^{H} Phi(h/(H+1)) sin(2 pi h x) / (pi h)

with the tapering weight Phi(t) = pi t (1 - |t|) cot(pi t) + |t|, and the
approximation error is bounded pointwise by a scaled Fejer kernel:

    |psi_frac(x) - psi_approx(x, H)| <= (1/(2H+2)) *
        sum_{|h| <= H} (1 - |h|/(H+1)) e(h x)
      = (sin(pi (H+1) x))^2 / (2 (H+1)^2 sin(pi x)^2).

At integer x the majorant takes its maximum value 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Below this |t| the closed form 0/0-cancels; a 4-term series of
# pi t cot(pi t) = 1 - u/3 - u^2/45 - 2u^3/945 + O(u^4), u = (pi t)^2,
# is exact to ~1e-16 relative there.
_PHI_TAYLOR_CUT = 1e-4
# Below this |sin(pi x)| the Fejer quotient is evaluated by its cosine series.
_SIN_FALLBACK = 1e-6


def vaaler_phi(t: float) -> float:
    """Tapering weight Phi on (-1, 1); even, Phi(0) = 1, Phi(1/2) = 1/2."""
    a = abs(t)
    if a >= 1.0:
        raise ValueError(f"Phi is defined on |t| < 1, got t = {t}")
    if a < _PHI_TAYLOR_CUT:
        u = (math.pi * t) ** 2
        core = 1.0 - u / 3.0 - u * u / 45.0 - 2.0 * u ** 3 / 945.0
        return (1.0 - a) * core + a
    pt = math.pi * t
    return pt * (1.0 - a) * (math.cos(pt) / math.sin(pt)) + a


def _phi_array(t: np.ndarray) -> np.ndarray:
    a = np.abs(t)
    if np.any(a >= 1.0):
        raise ValueError("Phi is defined on |t| < 1")
    out = np.empty_like(t, dtype=np.float64)
    small = a < _PHI_TAYLOR_CUT
    if np.any(small):
        u = (np.pi * t[small]) ** 2
        core = 1.0 - u / 3.0 - u * u / 45.0 - 2.0 * u ** 3 / 945.0
        out[small] = (1.0 - a[small]) * core + a[small]
    big = ~small
    if np.any(big):
        pt = np.pi * t[big]
        out[big] = pt * (1.0 - a[big]) * (np.cos(pt) / np.sin(pt)) + a[big]
    return out


@dataclass(frozen=True)
class VaalerPolynomial:
    """Degree-H sine polynomial with coefficients c_h = Phi(h/(H+1))/(pi h).

    The c_h are strictly positive and strictly decreasing in h.
    """

    H: int
    coefficients: np.ndarray

    @classmethod
    def build(cls, H: int) -> "VaalerPolynomial":
        if H < 1:
            raise ValueError("degree H must be >= 1")
        h = np.arange(1, H + 1, dtype=np.float64)
        return cls(H=H, coefficients=_phi_array(h / (H + 1)) / (np.pi * h))

    def evaluate(self, x: float) -> float:
        h = np.arange(1, self.H + 1, dtype=np.float64)
        return -float(np.dot(self.coefficients, np.sin(2.0 * np.pi * x * h)))

    def evaluate_many(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        h = np.arange(1, self.H + 1, dtype=np.float64)
        return -np.sin(2.0 * np.pi * np.outer(xs, h)) @ self.coefficients


_poly_cache: dict[int, VaalerPolynomial] = {}


def _poly(H: int) -> VaalerPolynomial:
    poly = _poly_cache.get(H)
    if poly is None:
        poly = VaalerPolynomial.build(H)
        _poly_cache[H] = poly
    return poly


def psi_approx(x: float, H: int) -> float:
    """Degree-H approximation to psi_frac at x."""
    return _poly(H).evaluate(x)


def psi_approx_many(xs, H: int) -> np.ndarray:
    return _poly(H).evaluate_many(xs)


def error_majorant(x: float, H: int) -> float:
    """Pointwise bound on |psi_frac - psi_approx| at degree H."""
    if H < 1:
        raise ValueError("degree H must be >= 1")
    s = math.sin(math.pi * x)
    if abs(s) < _SIN_FALLBACK:
        h = np.arange(1, H + 1, dtype=np.float64)
        kernel = 1.0 + 2.0 * float(
            np.dot(1.0 - h / (H + 1), np.cos(2.0 * np.pi * x * h))
        )
        return max(kernel, 0.0) / (2.0 * (H + 1))
    r = math.sin(math.pi * (H + 1) * x) / s
    return r * r / (2.0 * (H + 1) ** 2)


def error_majorant_many(xs, H: int) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.float64)
    s = np.sin(np.pi * xs)
    out = np.empty_like(xs)
    near = np.abs(s) < _SIN_FALLBACK
    far = ~near
    if np.any(far):
        r = np.sin(np.pi * (H + 1) * xs[far]) / s[far]
        out[far] = r * r / (2.0 * (H + 1) ** 2)
    if np.any(near):
        h = np.arange(1, H + 1, dtype=np.float64)
        kern = 1.0 + 2.0 * (
            np.cos(2.0 * np.pi * np.outer(xs[near], h)) @ (1.0 - h / (H + 1))
        )
        out[near] = np.maximum(kern, 0.0) / (2.0 * (H + 1))
    return out
