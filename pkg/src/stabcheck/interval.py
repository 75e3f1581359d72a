"""Outward-rounded interval arithmetic.

Intervals hold either floats or numpy arrays of matching shape, so one
`Interval` can stand for a whole batch of boxes.  Every primitive widens its
result by two ulps in each direction, which keeps the enclosure sound without
access to hardware rounding modes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi
HALF_PI = 0.5 * math.pi


class DomainError(ArithmeticError):
    """Raised when an operation meets a singularity (x/0, sqrt(x<0))."""

    def __init__(self, message: str, mask=None):
        super().__init__(message)
        self.mask = mask


def _down(a):
    return np.nextafter(np.nextafter(a, -np.inf), -np.inf)


def _up(a):
    return np.nextafter(np.nextafter(a, np.inf), np.inf)


def _scalar(a):
    if isinstance(a, np.ndarray) and a.ndim == 0:
        return float(a)
    if isinstance(a, np.floating):
        return float(a)
    return a


@dataclass(frozen=True, eq=False)
class Interval:
    lo: float | np.ndarray
    hi: float | np.ndarray

    def __post_init__(self):
        if np.any(np.isnan(self.lo)) or np.any(np.isnan(self.hi)):
            raise ValueError("interval bound is NaN")
        if np.any(np.asarray(self.lo) > np.asarray(self.hi)):
            raise ValueError(f"empty interval: lo > hi ({self.lo!r}, {self.hi!r})")

    @classmethod
    def point(cls, value) -> Interval:
        return cls(value, value)

    @classmethod
    def _widened(cls, lo, hi) -> Interval:
        return cls(_scalar(_down(lo)), _scalar(_up(hi)))

    def __repr__(self):
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __eq__(self, other):
        if not isinstance(other, Interval):
            return NotImplemented
        return bool(np.all(self.lo == other.lo) and np.all(self.hi == other.hi))

    @property
    def width(self):
        return self.hi - self.lo

    def contains(self, value):
        """Elementwise membership test; returns bool or bool array."""
        return (np.asarray(self.lo) <= value) & (value <= np.asarray(self.hi))

    def excludes_zero(self):
        return (np.asarray(self.lo) > 0) | (np.asarray(self.hi) < 0)

    def __neg__(self):
        return Interval(_scalar(-np.asarray(self.hi)), _scalar(-np.asarray(self.lo)))

    def __add__(self, other):
        other = _coerce(other)
        return Interval._widened(np.add(self.lo, other.lo), np.add(self.hi, other.hi))

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        return Interval._widened(np.subtract(self.lo, other.hi), np.subtract(self.hi, other.lo))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        a, b, c, d = self.lo, self.hi, other.lo, other.hi
        products = (np.multiply(a, c), np.multiply(a, d), np.multiply(b, c), np.multiply(b, d))
        lo = np.minimum(np.minimum(products[0], products[1]), np.minimum(products[2], products[3]))
        hi = np.maximum(np.maximum(products[0], products[1]), np.maximum(products[2], products[3]))
        return Interval._widened(lo, hi)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        bad = ~other.excludes_zero()
        if np.any(bad):
            raise DomainError("division by an interval containing 0", mask=bad)
        a, b, c, d = self.lo, self.hi, other.lo, other.hi
        with np.errstate(over="ignore"):
            q = (np.divide(a, c), np.divide(a, d), np.divide(b, c), np.divide(b, d))
        lo = np.minimum(np.minimum(q[0], q[1]), np.minimum(q[2], q[3]))
        hi = np.maximum(np.maximum(q[0], q[1]), np.maximum(q[2], q[3]))
        return Interval._widened(lo, hi)

    def __rtruediv__(self, other):
        return _coerce(other) / self

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ValueError("interval power needs a non-negative integer exponent")
        k = int(k)
        if k == 0:
            return Interval(_scalar(np.ones_like(np.asarray(self.lo, dtype=float))),
                            _scalar(np.ones_like(np.asarray(self.hi, dtype=float))))
        if k == 1:
            return self
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        plo, phi = np.power(lo, k), np.power(hi, k)
        if k % 2:
            return Interval._widened(plo, phi)
        straddle = (lo < 0) & (hi > 0)
        out_lo = np.where(hi <= 0, phi, plo)
        out_hi = np.where(hi <= 0, plo, phi)
        out_hi = np.where(straddle, np.maximum(plo, phi), out_hi)
        wlo = np.where(straddle | (out_lo == 0), 0.0, np.maximum(_down(out_lo), 0.0))
        return Interval(_scalar(wlo), _scalar(_up(out_hi)))


def _coerce(value) -> Interval:
    if isinstance(value, Interval):
        return value
    return Interval.point(value)


def iabs(x: Interval) -> Interval:
    lo = np.asarray(x.lo, dtype=float)
    hi = np.asarray(x.hi, dtype=float)
    out_lo = np.where(lo >= 0, lo, np.where(hi <= 0, -hi, 0.0))
    out_hi = np.maximum(np.abs(lo), np.abs(hi))
    return Interval(_scalar(out_lo), _scalar(out_hi))


def iexp(x: Interval) -> Interval:
    lo = np.maximum(_down(np.exp(x.lo)), 0.0)
    return Interval(_scalar(lo), _scalar(_up(np.exp(x.hi))))


def isqrt(x: Interval) -> Interval:
    lo = np.asarray(x.lo, dtype=float)
    if np.any(lo < 0):
        raise DomainError("sqrt of an interval reaching below 0", mask=lo < 0)
    out_lo = np.maximum(_down(np.sqrt(lo)), 0.0)
    return Interval(_scalar(out_lo), _scalar(_up(np.sqrt(x.hi))))


def _hits(lo, hi, phase):
    """True where lo..hi contains phase + 2*pi*k for some integer k (conservative)."""
    slack = 1e-12 * np.maximum(1.0, np.maximum(np.abs(lo), np.abs(hi)))
    k = np.ceil((lo - slack - phase) / TWO_PI)
    return phase + TWO_PI * k <= hi + slack


def isin(x: Interval) -> Interval:
    return _periodic(x, np.sin, HALF_PI, -HALF_PI)


def icos(x: Interval) -> Interval:
    return _periodic(x, np.cos, 0.0, math.pi)


def _periodic(x, fn, max_phase, min_phase):
    lo = np.asarray(x.lo, dtype=float)
    hi = np.asarray(x.hi, dtype=float)
    a, b = fn(lo), fn(hi)
    out_lo = _down(np.minimum(a, b))
    out_hi = _up(np.maximum(a, b))
    wide = (hi - lo) >= TWO_PI
    out_hi = np.where(wide | _hits(lo, hi, max_phase), 1.0, out_hi)
    out_lo = np.where(wide | _hits(lo, hi, min_phase), -1.0, out_lo)
    return Interval(_scalar(np.maximum(out_lo, -1.0)), _scalar(np.minimum(out_hi, 1.0)))
