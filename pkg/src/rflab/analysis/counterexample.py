"""Exact evaluation of the N = D = 1 two-point-mass counterexample.

``W`` is uniform on ``{-4, -3, 3, 4} / sqrt(12.5)`` and ``w_perp`` equals
``sqrt(2)`` on one pair of magnitudes and 0 on the other. Then
``E[w_perp^2 / W^2]`` depends on which pair carries ``w_perp``, so the
single-model variance is not a function of ``r_perp`` alone.

Every quantity is a monomial ``q * sqrt(r)`` with rational ``q`` and ``r``,
so the moments come out as exact :class:`fractions.Fraction` values.
"""

from dataclasses import dataclass
from fractions import Fraction

SCALE = Fraction(25, 2)  # 12.5
CASES = ("ThreeMass", "FourMass")


@dataclass(frozen=True)
class Surd:
    """The number ``coef * sqrt(rad)``."""

    coef: Fraction
    rad: Fraction = Fraction(1)

    def __mul__(self, other):
        if self.rad == other.rad:
            return Surd(self.coef * other.coef * self.rad)
        return Surd(self.coef * other.coef, self.rad * other.rad)

    def square(self):
        return self.coef * self.coef * self.rad


def _expect(values):
    """Mean of equally likely surds with a common radicand, as ``(coef, rad)``."""
    values = list(values)
    rads = {v.rad for v in values if v.coef != 0}
    if len(rads) > 1:
        raise ValueError("mixed radicands")
    rad = rads.pop() if rads else Fraction(1)
    return sum((v.coef for v in values), Fraction(0)) / len(values), rad


def _outcomes(case):
    if case not in CASES:
        raise ValueError(f"unknown case {case!r}; expected one of {CASES}")
    carrier = 3 if case == "ThreeMass" else 4
    inv_sqrt_scale = Fraction(1) / SCALE  # sqrt(1/12.5)
    out = []
    for q in (-4, -3, 3, 4):
        W = Surd(Fraction(q), inv_sqrt_scale)
        w_perp = Surd(Fraction(1), Fraction(2)) if abs(q) == carrier else Surd(Fraction(0))
        out.append((W, w_perp))
    return out


def counterexample_moments(case):
    """Exact moments of the construction: E[W], E[W^2], E[w_perp W], E[w_perp^2].

    First-order moments are returned as ``(coef, rad)`` meaning ``coef * sqrt(rad)``.
    """
    outs = _outcomes(case)
    return {
        "E[W]": _expect(W for W, _ in outs),
        "E[W^2]": sum((W.square() for W, _ in outs), Fraction(0)) / len(outs),
        "E[w_perp W]": _expect(wp * W for W, wp in outs),
        "E[w_perp^2]": sum((wp.square() for _, wp in outs), Fraction(0)) / len(outs),
    }


def counterexample_expectation(case):
    """``E[(W W^T)^{-1} W w_perp w_perp^T W^T (W W^T)^{-1}] = E[w_perp^2 / W^2]`` exactly.

    ``"ThreeMass"`` puts ``w_perp = sqrt(2)`` on ``|W| = 3/sqrt(12.5)`` and
    gives 12.5/9; ``"FourMass"`` puts it on ``|W| = 4/sqrt(12.5)`` and gives
    12.5/16.
    """
    outs = _outcomes(case)
    return sum((wp.square() / W.square() for W, wp in outs), Fraction(0)) / len(outs)
