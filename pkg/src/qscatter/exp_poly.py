"""Exact algebra on finite sums of ``c * t**k * exp(lam * t)`` terms.

This class of functions is closed under the operations needed by the
perturbative solution of the driven Bloch equations: addition, scaling,
multiplication by a single exponential and integration from zero.
"""
from __future__ import annotations

import json
from math import factorial

import numpy as np

RATE_TOL = 1e-12
COEF_DROP = 1e-15


def _same_rate(a, b):
    return abs(a - b) <= RATE_TOL * max(1.0, abs(a))


def _canonical(terms):
    merged = []
    for c, k, lam in sorted(terms, key=lambda tm: (tm[1], tm[2].real, tm[2].imag)):
        if merged and merged[-1][1] == k and _same_rate(merged[-1][2], lam):
            pc, pk, plam = merged[-1]
            merged[-1] = (pc + c, pk, plam)
        else:
            merged.append((c, k, lam))
    if not merged:
        return ()
    cmax = max(abs(c) for c, _, _ in merged)
    floor = COEF_DROP * cmax
    return tuple((c, k, lam) for c, k, lam in merged if c != 0 and abs(c) > floor)


class ExpPoly:
    """Immutable sum of terms ``(coef, power, rate)``.

    Terms are kept in canonical form: sorted by ``(power, rate)``, with equal
    ``(power, rate)`` pairs merged and negligible coefficients dropped.

    Values produced by :meth:`integrate` remember that they vanish at the
    origin, and evaluation there returns an exact zero instead of the
    rounded sum of the constant parts. Scaling, :meth:`mul_exp` and sums of
    such values keep the property.

    >>> q = ExpPoly([(1, 0, -1)]).integrate()   # 1 - exp(-t)
    >>> [(c.real, k, lam.real) for c, k, lam in q.terms]
    [(-1.0, 0, -1.0), (1.0, 0, 0.0)]
    """

    __slots__ = ("terms", "zero_at_origin")

    def __init__(self, terms=(), zero_at_origin=False):
        norm = []
        for c, k, lam in terms:
            k = int(k)
            if k < 0:
                raise ValueError(f"powers must be non-negative, got {k}")
            norm.append((complex(c), k, complex(lam)))
        object.__setattr__(self, "terms", _canonical(norm))
        object.__setattr__(self, "zero_at_origin", bool(zero_at_origin))

    def __setattr__(self, name, value):
        raise AttributeError("ExpPoly is immutable")

    @classmethod
    def constant(cls, c):
        return cls([(c, 0, 0)])

    def __repr__(self):
        return f"ExpPoly({list(self.terms)!r})"

    def __eq__(self, other):
        return isinstance(other, ExpPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def __call__(self, t):
        """Evaluate at scalar or array ``t``."""
        t_arr = np.asarray(t, dtype=float)
        out = np.zeros(t_arr.shape, dtype=complex)
        for c, k, lam in self.terms:
            out = out + c * t_arr**k * np.exp(lam * t_arr)
        if self.zero_at_origin:
            out = np.where(t_arr == 0, 0j, out)
        return out if out.ndim else complex(out)

    evaluate = __call__

    def __add__(self, other):
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return ExpPoly(self.terms + other.terms,
                       self.zero_at_origin and other.zero_at_origin)

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        if isinstance(c, ExpPoly):
            raise TypeError("products of two ExpPoly values are not supported")
        c = complex(c)
        return ExpPoly([(c * a, k, lam) for a, k, lam in self.terms], self.zero_at_origin)

    __rmul__ = __mul__

    def mul_exp(self, mu):
        """Multiply by ``exp(mu * t)``: every rate is shifted by ``mu``."""
        mu = complex(mu)
        return ExpPoly([(c, k, lam + mu) for c, k, lam in self.terms], self.zero_at_origin)

    def integrate(self):
        """Antiderivative ``q`` with ``q(0) = 0``, exact within the class."""
        out = []
        for c, k, lam in self.terms:
            if abs(lam) <= RATE_TOL:
                out.append((c / (k + 1), k + 1, 0j))
                continue
            # int_0^t s^k e^{lam s} ds
            #   = e^{lam t} sum_j (-1)^(k-j) k!/j! t^j / lam^(k-j+1) - (-1)^k k!/lam^(k+1)
            for j in range(k, -1, -1):
                coef = (-1) ** (k - j) * factorial(k) / factorial(j) / lam ** (k - j + 1)
                out.append((c * coef, j, lam))
            out.append((-c * (-1) ** k * factorial(k) / lam ** (k + 1), 0, 0j))
        return ExpPoly(out, zero_at_origin=True)

    def derivative(self):
        out = []
        for c, k, lam in self.terms:
            out.append((c * lam, k, lam))
            if k:
                out.append((c * k, k - 1, lam))
        return ExpPoly(out)

    def to_records(self):
        return [
            {"coef": [c.real, c.imag], "power": k, "rate": [lam.real, lam.imag]}
            for c, k, lam in self.terms
        ]

    @classmethod
    def from_records(cls, records):
        return cls([
            (complex(*r["coef"]), r["power"], complex(*r["rate"])) for r in records
        ])

    def dumps(self):
        return json.dumps(self.to_records(), sort_keys=True)
