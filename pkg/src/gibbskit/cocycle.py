"""The homoclinic cocycle ``c_f(x, y) = sum_k f(sigma^k y) - f(sigma^k x)``.

For a finite-range ``f`` with dependence window ``W`` and ``x, y`` differing on
``D``, the term at ``k`` vanishes unless ``k + W`` meets ``D``; those offsets
are enumerated and the sum is exact.

For a certified-decay ``f`` the sum is truncated to ``||k|| <= R``. With
``D`` inside the box of size ``m``, a shift ``||k|| = s >= m`` leaves the two
points agreeing on the box of size ``s - m + 1``, so the term is at most
``delta_{s-m+1}``. The shell ``{||k|| = s}`` has at most
``2d (2s + 1)^{d-1} <= 2d (2m + 1)^{d-1} n^{d-1}`` points (``n = s - m + 1``),
hence the omitted part is bounded by
``2d (2m + 1)^{d-1} * sum_{n > R - m + 1} n^{d-1} delta_n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .lattice import FiniteRegion, Site, box, translates_meeting
from .potential import Potential, sv_tail
from .subshift import FramedConfiguration, gibbs_related

Getter = Callable[[Site], object]

DEFAULT_TOLERANCE = 1e-12
_MAX_RADIUS = 10_000


class NotGibbsRelatedError(ValueError):
    """The two points differ at infinitely many sites."""


def logsumexp(values) -> float:
    """``log sum exp(v)`` with a single max shift; ``-inf`` entries are allowed."""
    values = list(values)
    top = max(values, default=-math.inf)
    if top == -math.inf:
        return -math.inf
    return top + math.log(math.fsum(math.exp(v - top) for v in values))


@dataclass(frozen=True)
class CocycleValue:
    value: float
    error_bound: float = 0.0


def contributing_shifts(f: Potential, diff: FiniteRegion) -> list[Site]:
    """Offsets ``k`` whose term can be nonzero when the points differ on ``diff``."""
    if not f.finite_range:
        raise ValueError("only finite-range potentials have a finite set of shifts")
    if not diff:
        return []
    return translates_meeting(diff, f.window)


def truncation_radius(f: Potential, diff: FiniteRegion,
                      tol: float = DEFAULT_TOLERANCE) -> tuple[int, float]:
    """Smallest ``R`` whose omitted tail is certified below ``tol``; returns ``(R, bound)``."""
    d = f.dim
    m = diff.radius()
    shell = 2 * d * (2 * m + 1) ** (d - 1)
    R = max(m - 1, 1)
    while R < _MAX_RADIUS:
        bound = shell * sv_tail(f, R - m + 1, d) if R - m + 1 >= 1 else math.inf
        if bound < tol:
            return R, bound
        R += 1
    raise ValueError(f"no truncation radius below {_MAX_RADIUS} reaches tolerance {tol}")


def local_energy(f: Potential, get: Getter, shifts: list[Site]) -> float:
    """``sum_{k in shifts} f(sigma^k x)`` for a finite-range ``f``."""
    return math.fsum(f.at(get, k) for k in shifts)


def cocycle_local(f: Potential, get_x: Getter, get_y: Getter, diff: FiniteRegion) -> float:
    """Exact ``c_f(x, y)`` for finite-range ``f`` when ``x, y`` differ only inside ``diff``."""
    return math.fsum(f.at(get_y, k) - f.at(get_x, k) for k in contributing_shifts(f, diff))


def cocycle(f: Potential, x: FramedConfiguration, y: FramedConfiguration,
            tol: float = DEFAULT_TOLERANCE) -> CocycleValue:
    diff = gibbs_related(x, y)
    if diff is None:
        raise NotGibbsRelatedError("points differ at infinitely many sites")
    if not diff:
        return CocycleValue(0.0, 0.0)
    if f.finite_range:
        return CocycleValue(cocycle_local(f, x.value, y.value, diff), 0.0)
    R, bound = truncation_radius(f, diff, tol)
    terms = (f.evaluator(y.shift(k)) - f.evaluator(x.shift(k)) for k in box(R + 1, f.dim).sites)
    return CocycleValue(math.fsum(terms), bound)


def check_cocycle_identity(f: Potential, x: FramedConfiguration, y: FramedConfiguration,
                           z: FramedConfiguration, tol: float = DEFAULT_TOLERANCE) -> float:
    """``|c(x, z) - c(x, y) - c(y, z)|``."""
    xz, xy, yz = cocycle(f, x, z, tol), cocycle(f, x, y, tol), cocycle(f, y, z, tol)
    return abs(xz.value - xy.value - yz.value)


def log_multiplier(f: Potential, x: FramedConfiguration,
                   phi: Callable[[FramedConfiguration], FramedConfiguration],
                   tol: float = DEFAULT_TOLERANCE) -> float:
    return cocycle(f, x, phi(x), tol).value


def multiplier(f: Potential, x: FramedConfiguration,
               phi: Callable[[FramedConfiguration], FramedConfiguration],
               tol: float = DEFAULT_TOLERANCE) -> float:
    """``R(x) = exp(c_f(x, phi(x)))``."""
    return math.exp(log_multiplier(f, x, phi, tol))
