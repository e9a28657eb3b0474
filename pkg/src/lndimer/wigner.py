"""Angular-momentum algebra on doubled integers.

Every angular momentum and projection is passed as twice its value, so
``tj=7`` means j = 7/2 and ``tm=-3`` means m = -3/2.  Racah sums are
evaluated in exact rational arithmetic; only the final square root is taken
in floating point, which keeps every symbol within a few ulp of its exact
value for the ranges used here (2j <= 30 and beyond).

Reduced matrix elements follow the Edmonds convention

    <j m| T_kq |j' m'> = (-1)**(j-m) (j k j'; -m q m') <j||T||j'>.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

__all__ = [
    "AngMom",
    "WignerDomainError",
    "clebsch_gordan",
    "wigner_3j",
    "wigner_6j",
    "racah_w",
    "wigner_9j",
    "reduced_j",
    "reduced_jj2",
    "spherical_components",
    "triangle",
]


class WignerDomainError(ValueError):
    """Raised for an angular momentum or projection that cannot exist."""


@dataclass(frozen=True, order=True)
class AngMom:
    """An angular momentum stored as the integer 2j."""

    twice_j: int

    def __post_init__(self):
        if int(self.twice_j) != self.twice_j or self.twice_j < 0:
            raise WignerDomainError(f"2j must be a non-negative integer, got {self.twice_j!r}")

    @classmethod
    def parse(cls, text: str | int | Fraction) -> "AngMom":
        """Build from a value such as ``6``, ``"7/2"`` or ``Fraction(5, 2)``."""
        value = Fraction(str(text).strip()) if not isinstance(text, Fraction) else text
        twice = 2 * value
        if twice.denominator != 1:
            raise WignerDomainError(f"{text!r} is not a multiple of 1/2")
        return cls(int(twice))

    @property
    def value(self) -> float:
        return self.twice_j / 2

    @property
    def is_half_integer(self) -> bool:
        return self.twice_j % 2 == 1

    def projections(self) -> list[int]:
        """Doubled projections 2m from -2j to 2j in steps of 2."""
        return list(range(-self.twice_j, self.twice_j + 1, 2))

    def __str__(self) -> str:
        return str(self.twice_j // 2) if self.twice_j % 2 == 0 else f"{self.twice_j}/2"


def _check_projection(tj: int, tm: int) -> None:
    if tj < 0:
        raise WignerDomainError(f"negative angular momentum 2j={tj}")
    if abs(tm) > tj or (tj - tm) % 2:
        raise WignerDomainError(f"projection 2m={tm} invalid for 2j={tj}")


def triangle(ta: int, tb: int, tc: int) -> bool:
    """True if (a, b, c) satisfy the triangle rule with integer perimeter."""
    return (
        ta >= 0 and tb >= 0 and tc >= 0
        and (ta + tb + tc) % 2 == 0
        and abs(ta - tb) <= tc <= ta + tb
    )


@lru_cache(maxsize=None)
def _fact(n: int) -> int:
    return math.factorial(n)


def _delta_sq(ta: int, tb: int, tc: int) -> Fraction:
    """Triangle coefficient Delta(abc) (not square-rooted)."""
    return Fraction(
        _fact((ta + tb - tc) // 2) * _fact((ta - tb + tc) // 2) * _fact((-ta + tb + tc) // 2),
        _fact((ta + tb + tc) // 2 + 1),
    )


def _signed_sqrt(total: Fraction, radicand: Fraction) -> float:
    """total * sqrt(radicand) with a single rounding step."""
    if total == 0 or radicand == 0:
        return 0.0
    mag = math.sqrt(float(total * total * radicand))
    return mag if total > 0 else -mag


@lru_cache(maxsize=200_000)
def wigner_3j(tj1: int, tj2: int, tj3: int, tm1: int, tm2: int, tm3: int) -> float:
    """Wigner 3j symbol (j1 j2 j3; m1 m2 m3) with doubled arguments."""
    for tj, tm in ((tj1, tm1), (tj2, tm2), (tj3, tm3)):
        _check_projection(tj, tm)
    if tm1 + tm2 + tm3 != 0 or not triangle(tj1, tj2, tj3):
        return 0.0
    # Racah's formula; all half-sums below are integers once the checks pass.
    k_min = max(0, (tj2 - tj3 - tm1) // 2, (tj1 - tj3 + tm2) // 2)
    k_max = min((tj1 + tj2 - tj3) // 2, (tj1 - tm1) // 2, (tj2 + tm2) // 2)
    total = Fraction(0)
    for k in range(k_min, k_max + 1):
        den = (
            _fact(k)
            * _fact((tj1 + tj2 - tj3) // 2 - k)
            * _fact((tj1 - tm1) // 2 - k)
            * _fact((tj2 + tm2) // 2 - k)
            * _fact((tj3 - tj2 + tm1) // 2 + k)
            * _fact((tj3 - tj1 - tm2) // 2 + k)
        )
        total += Fraction((-1) ** k, den)
    radicand = _delta_sq(tj1, tj2, tj3) * (
        _fact((tj1 + tm1) // 2) * _fact((tj1 - tm1) // 2)
        * _fact((tj2 + tm2) // 2) * _fact((tj2 - tm2) // 2)
        * _fact((tj3 + tm3) // 2) * _fact((tj3 - tm3) // 2)
    )
    if ((tj1 - tj2 - tm3) // 2) % 2:
        total = -total
    return _signed_sqrt(total, radicand)


def clebsch_gordan(tj1: int, tj2: int, tm1: int, tm2: int, tj: int, tm: int) -> float:
    """<j m | j1 j2 m1 m2> with the Condon-Shortley phase."""
    for a, b in ((tj1, tm1), (tj2, tm2), (tj, tm)):
        _check_projection(a, b)
    if tm1 + tm2 != tm or not triangle(tj1, tj2, tj):
        return 0.0
    phase = -1.0 if ((tj1 - tj2 + tm) // 2) % 2 else 1.0
    return phase * math.sqrt(tj + 1) * wigner_3j(tj1, tj2, tj, tm1, tm2, -tm)


@lru_cache(maxsize=200_000)
def wigner_6j(ta: int, tb: int, tc: int, td: int, te: int, tf: int) -> float:
    """Wigner 6j symbol {a b c; d e f}; zero when any triad fails."""
    if min(ta, tb, tc, td, te, tf) < 0:
        raise WignerDomainError("negative angular momentum in 6j symbol")
    triads = ((ta, tb, tc), (ta, te, tf), (td, tb, tf), (td, te, tc))
    if not all(triangle(*t) for t in triads):
        return 0.0
    sums = [sum(t) // 2 for t in triads]
    pairs = [(ta + tb + td + te) // 2, (ta + tc + td + tf) // 2, (tb + tc + te + tf) // 2]
    total = Fraction(0)
    for t in range(max(sums), min(pairs) + 1):
        den = _fact(t - sums[0]) * _fact(t - sums[1]) * _fact(t - sums[2]) * _fact(t - sums[3])
        den *= _fact(pairs[0] - t) * _fact(pairs[1] - t) * _fact(pairs[2] - t)
        total += Fraction((-1) ** t * _fact(t + 1), den)
    radicand = Fraction(1)
    for t in triads:
        radicand *= _delta_sq(*t)
    return _signed_sqrt(total, radicand)


def racah_w(ta: int, tb: int, tc: int, td: int, te: int, tf: int) -> float:
    """Racah W(abcd; ef) = (-1)**(a+b+c+d) {a b e; d c f}."""
    sign = -1.0 if ((ta + tb + tc + td) // 2) % 2 else 1.0
    if (ta + tb + tc + td) % 2:
        # odd perimeter means some triad is broken, so the 6j vanishes anyway
        return 0.0
    return sign * wigner_6j(ta, tb, te, td, tc, tf)


@lru_cache(maxsize=50_000)
def wigner_9j(ta: int, tb: int, tc: int, td: int, te: int, tf: int,
              tg: int, th: int, ti: int) -> float:
    """Wigner 9j symbol {a b c; d e f; g h i} by contraction over 6j symbols."""
    rows = ((ta, tb, tc), (td, te, tf), (tg, th, ti))
    cols = ((ta, td, tg), (tb, te, th), (tc, tf, ti))
    if not all(triangle(*t) for t in rows + cols):
        return 0.0
    x_lo = max(abs(ta - ti), abs(td - th), abs(tb - tf))
    x_hi = min(ta + ti, td + th, tb + tf)
    terms = []
    for tx in range(x_lo, x_hi + 1, 2):
        term = (tx + 1) * wigner_6j(ta, tb, tc, tf, ti, tx) \
            * wigner_6j(td, te, tf, tb, tx, th) * wigner_6j(tg, th, ti, tx, ta, td)
        terms.append(-term if tx % 2 else term)
    return math.fsum(terms)


def reduced_j(tj: int) -> float:
    """<j||J||j> = sqrt(j(j+1)(2j+1)) in units of hbar."""
    j = tj / 2
    return math.sqrt(j * (j + 1) * (2 * j + 1))


def reduced_jj2(tj: int) -> float:
    """<j||[J x J]_2||j> in units of hbar**2; zero for j < 1."""
    if tj < 2:
        return 0.0
    # coupling of two rank-1 tensors acting on the same j; only j''=j contributes
    phase = -1.0 if tj % 2 else 1.0
    return phase * math.sqrt(5.0) * wigner_6j(2, 2, 4, tj, tj, tj) * reduced_j(tj) ** 2


def spherical_components(tj: int) -> dict[int, np.ndarray]:
    """Spherical components J_q (q = -1, 0, +1) in the |j m> basis, m descending.

    J_{+1} = -(Jx + iJy)/sqrt(2) and J_{-1} = (Jx - iJy)/sqrt(2); all entries
    are real in this basis.
    """
    tms = list(range(tj, -tj - 1, -2))
    dim = len(tms)
    j = tj / 2
    jz = np.diag([tm / 2 for tm in tms])
    jplus = np.zeros((dim, dim))
    for col, tm in enumerate(tms[1:], start=1):
        m = tm / 2
        jplus[col - 1, col] = math.sqrt(j * (j + 1) - m * (m + 1))
    return {1: -jplus / math.sqrt(2), 0: jz, -1: jplus.T / math.sqrt(2)}
