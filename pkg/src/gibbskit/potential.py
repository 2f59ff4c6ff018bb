"""Potentials with d-summable variation and translation-invariant interactions.

Two kinds of potential are admitted:

* finite range: ``f(x)`` is a function ``local`` of the symbols on a finite
  dependence window ``W`` containing the origin;
* certified decay: ``f`` is an exact evaluator on framed configurations with a
  declared bound ``delta_n(f) <= C q^n``.

Anything else has no variation certificate and is refused.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .lattice import (
    FiniteRegion,
    Site,
    add,
    box,
    check_enumeration,
    origin,
    sub,
    translates_meeting,
    unit,
)
from .subshift import FramedConfiguration, PeriodicBoundary

Getter = Callable[[Site], object]


class UncertifiedTailError(ValueError):
    """No certified bound on the variation tail is available."""


@dataclass(frozen=True)
class Potential:
    dim: int
    window: FiniteRegion | None = None
    local: Callable[[tuple], float] | None = field(default=None, compare=False)
    evaluator: Callable[[FramedConfiguration], float] | None = field(default=None, compare=False)
    alphabet: tuple | None = None
    decay: tuple[float, float] | None = None
    name: str = ""

    def __post_init__(self):
        if self.local is None and self.evaluator is None:
            raise ValueError("a potential needs a local rule or an evaluator")
        if self.local is not None:
            if self.window is None or not self.window:
                raise ValueError("a finite-range potential needs its dependence window")
            if origin(self.dim) not in self.window:
                raise ValueError("the dependence window must contain the origin")
        elif self.decay is None:
            raise UncertifiedTailError(
                "potentials without finite range need a declared decay (C, q)"
            )
        if self.decay is not None:
            c, q = self.decay
            if c < 0 or not 0 <= q < 1:
                raise ValueError("decay needs C >= 0 and 0 <= q < 1")

    @property
    def finite_range(self) -> bool:
        return self.local is not None

    @property
    def range(self) -> int | None:
        """Smallest ``r`` with the dependence window inside the box of size ``r``."""
        return self.window.radius() if self.finite_range else None

    def at(self, get: Getter, k: Site) -> float:
        """``f(sigma^k x)`` for a finite-range potential, reading ``x`` through ``get``."""
        return self.local(tuple(get(add(k, w)) for w in self.window.sites))

    def oscillation(self) -> float:
        """``max f - min f`` over all window patterns."""
        try:
            return self.__dict__["_osc"]
        except KeyError:
            pass
        if self.alphabet is None:
            raise UncertifiedTailError("oscillation needs the alphabet")
        check_enumeration(len(self.alphabet), len(self.window))
        vals = [self.local(v) for v in itertools.product(self.alphabet, repeat=len(self.window))]
        osc = max(vals) - min(vals)
        object.__setattr__(self, "_osc", osc)
        return osc


def zero_potential(dim: int = 1, alphabet: Sequence | None = None) -> Potential:
    return constant_potential(0.0, dim, alphabet)


def constant_potential(c: float, dim: int = 1, alphabet: Sequence | None = None) -> Potential:
    return Potential(
        dim,
        FiniteRegion((origin(dim),), dim),
        lambda v: c,
        alphabet=tuple(alphabet) if alphabet is not None else None,
        name=f"constant({c})",
    )


def local_potential(window: FiniteRegion, rule: Callable[[tuple], float],
                    alphabet: Sequence, name: str = "") -> Potential:
    return Potential(window.dim, window, rule, alphabet=tuple(alphabet), name=name)


def table_potential(window: FiniteRegion, table: dict[tuple, float], alphabet: Sequence) -> Potential:
    """Finite-range potential given by a table on window patterns (missing entries are 0)."""
    table = dict(table)
    return local_potential(window, lambda v: table.get(v, 0.0), alphabet, name="table")


def evaluate(f: Potential, x: FramedConfiguration) -> float:
    if f.finite_range:
        return f.at(x.value, origin(f.dim))
    return f.evaluator(x)


def variation_bound(f: Potential, n: int) -> float:
    """Certified upper bound on ``sup{|f(x) - f(y)| : x_{Lambda_n} = y_{Lambda_n}}``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    bound = 0.0
    if f.finite_range:
        bound = 0.0 if n >= f.range else f.oscillation()
    if f.decay is not None:
        c, q = f.decay
        decay_bound = c * q**n
        bound = decay_bound if not f.finite_range else min(bound, decay_bound)
    return bound


def sv_tail(f: Potential, N: int, d: int | None = None) -> float:
    """Certified upper bound on ``sum_{n > N} n^{d-1} delta_n(f)``."""
    if N < 1:
        raise ValueError("N must be >= 1")
    d = f.dim if d is None else d
    if f.finite_range:
        if N >= f.range - 1:
            return 0.0
        return sum(n ** (d - 1) * variation_bound(f, n) for n in range(N + 1, f.range))
    if f.decay is None:
        raise UncertifiedTailError("no certified variation tail")
    c, q = f.decay
    if c == 0 or q == 0:
        return 0.0
    if d == 1:
        return c * q ** (N + 1) / (1 - q)
    # ratio of consecutive terms n^{d-1} q^n is ((n+1)/n)^{d-1} q, decreasing in n
    total = 0.0
    n = N + 1
    while True:
        rho = ((n + 1) / n) ** (d - 1) * q
        if rho < 1:
            return total + c * n ** (d - 1) * q**n / (1 - rho)
        total += c * n ** (d - 1) * q**n
        n += 1


def birkhoff_box_sum(f: Potential, n: int, x: FramedConfiguration) -> float:
    """``f_n(x) = sum_{i in Lambda_n} f(sigma^i x)``."""
    sites = box(n, f.dim).sites
    if f.finite_range:
        return math.fsum(f.at(x.value, i) for i in sites)
    return math.fsum(f.evaluator(x.shift(i)) for i in sites)


# --------------------------------------------------------------------------
# certified geometric decay family


def _ray_sum(x: FramedConfiguration, site: Site, axis: int, q: float) -> float:
    """Exact ``sum_{m >= 1} q^m x_{site + m e_axis}`` for an eventually periodic frame."""
    d = x.dim
    e = unit(d, axis)
    irregular = x.irregular_sites()
    start = 1
    if irregular:
        hi = irregular.bounds()[1][axis]
        start = max(1, hi - site[axis] + 1)
    head = math.fsum(q**m * x.value(add(site, tuple(m * c for c in e))) for m in range(1, start))
    period = x.background_period()[axis]
    tail = math.fsum(
        q ** (start + t) * x.boundary.value(add(site, tuple((start + t) * c for c in e)))
        for t in range(period)
    )
    return head + tail / (1 - q**period)


def geometric_pair_potential(c: float, q: float, dim: int = 1, axis: int = 0) -> Potential:
    """``f(x) = c * sum_{m >= 1} q^m x_0 x_{m e_axis}`` on spins ``{-1, +1}``.

    Points agreeing on the box of size ``n`` only differ in terms ``m >= n``,
    each moving by at most ``2|c| q^m``, so ``delta_n <= (2|c| / (1 - q)) q^n``.
    """
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")

    def evaluator(x: FramedConfiguration) -> float:
        o = origin(x.dim)
        return c * x.value(o) * _ray_sum(x, o, axis, q)

    return Potential(
        dim,
        evaluator=evaluator,
        alphabet=(-1, 1),
        decay=(2 * abs(c) / (1 - q), q),
        name=f"geometric_pair(c={c}, q={q})",
    )


# --------------------------------------------------------------------------
# interactions


@dataclass(frozen=True)
class InteractionTerm:
    """``Phi_{shape + i}(x) = coefficient(x_{shape + i})`` for every offset ``i``."""

    shape: FiniteRegion
    table: tuple[tuple[tuple, float], ...]

    def __post_init__(self):
        if origin(self.shape.dim) not in self.shape:
            raise ValueError("term shapes must contain the origin")

    @classmethod
    def of(cls, shape: FiniteRegion, table: dict[tuple, float]) -> InteractionTerm:
        return cls(shape, tuple(sorted(table.items(), key=lambda kv: repr(kv[0]))))

    @property
    def lookup(self) -> dict[tuple, float]:
        try:
            return self.__dict__["_lookup"]
        except KeyError:
            d = dict(self.table)
            object.__setattr__(self, "_lookup", d)
            return d

    def value(self, get: Getter, i: Site) -> float:
        return self.lookup.get(tuple(get(add(i, s)) for s in self.shape.sites), 0.0)


@dataclass(frozen=True)
class InteractionPotential:
    """Translation-invariant, finite-range interaction built from a list of terms."""

    dim: int
    alphabet: tuple
    terms: tuple[InteractionTerm, ...] = ()
    translation_invariant: bool = True

    def interaction_range(self) -> int:
        return max((t.shape.diameter() for t in self.terms), default=0)


@dataclass(frozen=True)
class IsingParams:
    J: float
    h: float


def ising(params: IsingParams, d: int = 1) -> InteractionPotential:
    """Nearest-neighbour pair terms ``-J x_i x_j`` and site terms ``-h x_i``."""
    spins = (-1, 1)
    terms = []
    if params.J != 0:
        for axis in range(d):
            shape = FiniteRegion.of([origin(d), unit(d, axis)], d)
            terms.append(
                InteractionTerm.of(shape, {(a, b): -params.J * a * b for a in spins for b in spins})
            )
    if params.h != 0:
        terms.append(
            InteractionTerm.of(FiniteRegion((origin(d),), d), {(a,): -params.h * a for a in spins})
        )
    return InteractionPotential(d, spins, tuple(terms))


def hamiltonian_local(phi: InteractionPotential, region: FiniteRegion, get: Getter) -> float:
    """``H_Lambda(x) = sum`` of ``Phi_Delta(x)`` over term translates ``Delta`` meeting ``region``."""
    return math.fsum(
        term.value(get, i) for term in phi.terms for i in translates_meeting(region, term.shape)
    )


def hamiltonian(phi: InteractionPotential, region: FiniteRegion, x: FramedConfiguration) -> float:
    return hamiltonian_local(phi, region, x.value)


def a_phi(phi: InteractionPotential) -> Potential:
    """``A_Phi = -sum_{Delta containing 0} Phi_Delta / |Delta|`` as a finite-range potential."""
    d = phi.dim
    o = origin(d)
    # each translate shape - s (s in shape) contains the origin
    parts = [(term, sub(o, s)) for term in phi.terms for s in term.shape.sites]
    pts = {o}
    for term, i in parts:
        pts.update(add(i, s) for s in term.shape.sites)
    window = FiniteRegion.of(pts, d)
    plan = [
        (term.lookup, tuple(window.index(add(i, s)) for s in term.shape.sites), len(term.shape))
        for term, i in parts
    ]

    def rule(values: tuple) -> float:
        return -math.fsum(
            lookup.get(tuple(values[k] for k in idx), 0.0) / size for lookup, idx, size in plan
        )

    return Potential(d, window, rule, alphabet=phi.alphabet, name="A_Phi")
