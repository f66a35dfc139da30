"""Tree height and grid tolerance for the witness tree."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from ..rational import as_fraction, fmt

__all__ = ["TreeParameters", "guaranteed_parameters", "empirical_parameters"]


@dataclass(frozen=True)
class TreeParameters:
    h_star: int
    eps_star: Fraction
    eps: Fraction
    mode: str = "empirical"

    def __post_init__(self):
        if self.h_star < 2 or self.h_star % 2:
            raise ValueError(f"tree height must be even and at least 2, got {self.h_star}")
        object.__setattr__(self, "eps", as_fraction(self.eps))
        object.__setattr__(self, "eps_star", as_fraction(self.eps_star))
        if not 0 < self.eps_star < self.eps:
            raise ValueError("need 0 < eps_star < eps")
        if self.mode not in ("guaranteed", "empirical"):
            raise ValueError(f"unknown parameter mode {self.mode!r}")

    @property
    def grid_tolerance(self) -> Fraction:
        return self.eps_star / 4

    def to_json(self) -> dict:
        return {
            "h_star": self.h_star,
            "eps_star": fmt(self.eps_star),
            "eps": fmt(self.eps),
            "mode": self.mode,
        }


def guaranteed_parameters(masses: Sequence, eps, m_star: int, i_star: int) -> TreeParameters:
    """Smallest even height for which the Chebyshev estimates force a witness.

    Requires, with ``n = m_star + i_star``,
    ``2 a (1 - a) / (h eps^2) < 1/n`` for every block mass ``a`` and
    ``1/h < (eps/2)^2 / (2n)``; then ``eps_star`` is the largest ``2^-j``
    below ``eps`` with ``(2/h + eps_star) / (eps/2)^2 < 1/n``.
    """
    eps = as_fraction(eps)
    n = m_star + i_star
    if n < 1 or eps <= 0:
        raise ValueError("need at least one block and a positive eps")
    bounds = [2 * n / ((eps / 2) ** 2)]
    for a in masses:
        a = as_fraction(a)
        bounds.append(2 * a * (1 - a) * n / (eps * eps))
    limit = max(bounds)
    h = math.floor(limit) + 1
    if h % 2:
        h += 1
    eps_star = Fraction(1)
    while not (eps_star < eps and (Fraction(2, h) + eps_star) / ((eps / 2) ** 2) < Fraction(1, n)):
        eps_star /= 2
    return TreeParameters(h, eps_star, eps, "guaranteed")


def empirical_parameters(h_star: int, eps, eps_star=None) -> TreeParameters:
    """A caller-chosen height; the certificate is checked exactly afterwards."""
    eps = as_fraction(eps)
    eps_star = eps / 2 if eps_star is None else as_fraction(eps_star)
    return TreeParameters(h_star, eps_star, eps, "empirical")
