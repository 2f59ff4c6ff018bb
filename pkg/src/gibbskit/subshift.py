"""Subshifts of finite type over Z^d.

Points of the subshift are never materialized: a :class:`FramedConfiguration`
is an explicit window pattern on top of a boundary rule that can answer
``x_i`` for every site. Every boundary rule used here is eventually periodic,
so two frames can be compared exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable, Hashable, Iterable, Mapping, Sequence

from .lattice import (
    ENUMERATION_CAP,
    DimensionError,
    FiniteRegion,
    Site,
    add,
    check_enumeration,
    enlarge_window,
    norm,
    sub,
    translates_meeting,
)

Symbol = Hashable


class AlphabetError(ValueError):
    pass


class FrameInadmissibleError(ValueError):
    """The frame itself is not a point of the subshift."""


class NotComparableError(ValueError):
    """Two frames differ at infinitely many sites."""


@dataclass(frozen=True)
class Alphabet:
    symbols: tuple

    def __post_init__(self):
        if len(set(self.symbols)) != len(self.symbols):
            raise AlphabetError("alphabet symbols must be distinct")
        if not self.symbols:
            raise AlphabetError("alphabet is empty")

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __contains__(self, s) -> bool:
        return s in self.symbols

    def index(self, s: Symbol) -> int:
        return self.symbols.index(s)


@dataclass(frozen=True)
class Pattern:
    """Symbols on a finite region; ``values[k]`` sits at ``region.sites[k]``."""

    region: FiniteRegion
    values: tuple

    def __post_init__(self):
        if len(self.values) != len(self.region):
            raise ValueError("pattern values must match the region size")

    @classmethod
    def from_mapping(cls, mapping: Mapping[Sequence[int], Symbol], dim: int | None = None) -> Pattern:
        items = {tuple(k): v for k, v in mapping.items()}
        region = FiniteRegion.of(items.keys(), dim)
        return cls(region, tuple(items[s] for s in region.sites))

    @classmethod
    def line(cls, values: Sequence[Symbol], start: int = 0) -> Pattern:
        """One-dimensional pattern on ``{start, ..., start + len(values) - 1}``."""
        return cls(FiniteRegion.interval(start, start + len(values)), tuple(values))

    @classmethod
    def constant(cls, region: FiniteRegion, symbol: Symbol) -> Pattern:
        return cls(region, (symbol,) * len(region))

    def __getitem__(self, site) -> Symbol:
        return self.values[self.region.index(tuple(site))]

    def as_dict(self) -> dict[Site, Symbol]:
        return dict(zip(self.region.sites, self.values))

    def restrict(self, region: FiniteRegion) -> Pattern:
        return Pattern(region, tuple(self[s] for s in region.sites))

    def translate(self, j: Sequence[int]) -> Pattern:
        from .lattice import translate

        return Pattern(translate(self.region, j), self.values)

    def merge(self, other: Pattern) -> Pattern:
        """Union of two patterns; ``other`` wins on overlaps."""
        d = self.as_dict()
        d.update(other.as_dict())
        return Pattern.from_mapping(d, self.region.dim)

    def __repr__(self) -> str:
        if self.region.dim == 1 and self.region:
            return f"Pattern({self.region.sites[0][0]}: {list(self.values)})"
        return f"Pattern({self.as_dict()})"


Cylinder = Pattern
"""A cylinder ``[w]`` is identified with its base pattern ``w``."""


# --------------------------------------------------------------------------
# boundaries


def _lcm(values: Iterable[int]) -> int:
    return reduce(lambda a, b: a * b // math.gcd(a, b), values, 1)


@dataclass(frozen=True)
class ConstantBoundary:
    symbol: Symbol

    def value(self, site: Site) -> Symbol:
        return self.symbol

    def periods(self, dim: int) -> tuple[int, ...]:
        return (1,) * dim

    def exceptions(self) -> tuple[Site, ...]:
        return ()

    def shift(self, j: Site) -> ConstantBoundary:
        return self


@dataclass(frozen=True)
class PeriodicBoundary:
    """Periodic extension of a torus pattern with periods ``period``.

    ``values`` lists the torus entries in lexicographic order of
    ``itertools.product(*(range(p) for p in period))``; ``offset`` is the
    torus cell that sits at the origin.
    """

    period: tuple[int, ...]
    values: tuple
    offset: tuple[int, ...] | None = None

    def __post_init__(self):
        if any(p < 1 for p in self.period):
            raise ValueError("periods must be positive")
        if len(self.values) != math.prod(self.period):
            raise ValueError("torus pattern size does not match the periods")
        if self.offset is None:
            object.__setattr__(self, "offset", (0,) * len(self.period))

    def _flat(self, cell: Site) -> int:
        k = 0
        for c, p in zip(cell, self.period):
            k = k * p + c
        return k

    def value(self, site: Site) -> Symbol:
        cell = tuple((s + o) % p for s, o, p in zip(site, self.offset, self.period))
        return self.values[self._flat(cell)]

    def periods(self, dim: int) -> tuple[int, ...]:
        if len(self.period) != dim:
            raise DimensionError("periodic boundary has the wrong dimension")
        return self.period

    def exceptions(self) -> tuple[Site, ...]:
        return ()

    def shift(self, j: Site) -> PeriodicBoundary:
        off = tuple((o + a) % p for o, a, p in zip(self.offset, j, self.period))
        return PeriodicBoundary(self.period, self.values, off)


@dataclass(frozen=True)
class TabulatedBoundary:
    """A constant symbol except at finitely many tabulated sites."""

    default: Symbol
    table: tuple[tuple[Site, Symbol], ...] = ()

    @classmethod
    def of(cls, default: Symbol, table: Mapping[Sequence[int], Symbol]) -> TabulatedBoundary:
        return cls(default, tuple(sorted((tuple(k), v) for k, v in table.items())))

    def value(self, site: Site) -> Symbol:
        for s, v in self.table:
            if s == site:
                return v
        return self.default

    def periods(self, dim: int) -> tuple[int, ...]:
        return (1,) * dim

    def exceptions(self) -> tuple[Site, ...]:
        return tuple(s for s, _ in self.table)

    def shift(self, j: Site) -> TabulatedBoundary:
        return TabulatedBoundary(self.default, tuple(sorted((sub(s, j), v) for s, v in self.table)))


Boundary = ConstantBoundary | PeriodicBoundary | TabulatedBoundary


@dataclass(frozen=True)
class FramedConfiguration:
    """A point ``x`` of A^{Z^d}: explicit ``window`` pattern plus a boundary rule."""

    window: Pattern
    boundary: Boundary
    dim: int = field(default=0)

    def __post_init__(self):
        if self.dim == 0:
            object.__setattr__(self, "dim", self.window.region.dim)
        if self.window.region.dim != self.dim:
            raise DimensionError("window dimension does not match the frame")

    @classmethod
    def constant(cls, symbol: Symbol, dim: int, window: Pattern | None = None) -> FramedConfiguration:
        window = window or Pattern(FiniteRegion((), dim), ())
        return cls(window, ConstantBoundary(symbol), dim)

    @classmethod
    def periodic(cls, period: Sequence[int], values: Sequence[Symbol],
                 window: Pattern | None = None) -> FramedConfiguration:
        dim = len(period)
        window = window or Pattern(FiniteRegion((), dim), ())
        return cls(window, PeriodicBoundary(tuple(period), tuple(values)), dim)

    @property
    def _lookup(self) -> dict[Site, Symbol]:
        try:
            return self.__dict__["_lookup_cache"]
        except KeyError:
            d = self.window.as_dict()
            object.__setattr__(self, "_lookup_cache", d)
            return d

    def value(self, site: Sequence[int]) -> Symbol:
        site = tuple(site)
        v = self._lookup.get(site, _MISSING)
        if v is _MISSING:
            return self.boundary.value(site)
        return v

    __getitem__ = value

    def restrict(self, region: FiniteRegion) -> Pattern:
        """``x_region``."""
        return Pattern(region, tuple(self.value(s) for s in region.sites))

    def patch(self, pattern: Pattern) -> FramedConfiguration:
        """The point equal to ``pattern`` on its region and to ``self`` elsewhere."""
        if not pattern.region:
            return self
        d = dict(self._lookup)
        d.update(pattern.as_dict())
        return FramedConfiguration(Pattern.from_mapping(d, self.dim), self.boundary, self.dim)

    def shift(self, j: Sequence[int]) -> FramedConfiguration:
        """``sigma^j x``, i.e. ``(sigma^j x)_i = x_{i+j}``."""
        j = tuple(j)
        win = self.window.translate(tuple(-c for c in j))
        return FramedConfiguration(win, self.boundary.shift(j), self.dim)

    def irregular_sites(self) -> FiniteRegion:
        """Finite set outside of which ``x`` follows its periodic background."""
        pts = set(self.window.region.sites) | set(self.boundary.exceptions())
        return FiniteRegion.of(pts, self.dim)

    def background_period(self) -> tuple[int, ...]:
        return self.boundary.periods(self.dim)


_MISSING = object()


# --------------------------------------------------------------------------
# subshifts of finite type


@dataclass(frozen=True)
class SftSpec:
    """``X = {x : (sigma^i x)_shape is never a forbidden pattern}``.

    ``forbidden`` holds value tuples aligned with ``shape.sites``.
    """

    alphabet: Alphabet
    dim: int
    shape: FiniteRegion
    forbidden: frozenset = frozenset()
    membership_oracle: Callable[[FramedConfiguration, Pattern], bool] | None = field(
        default=None, compare=False
    )

    def __post_init__(self):
        if self.shape.dim != self.dim:
            raise DimensionError("forbidden-pattern shape has the wrong dimension")
        if (0,) * self.dim not in self.shape:
            raise ValueError("the forbidden-pattern shape must contain the origin")
        fb = frozenset(tuple(p) for p in self.forbidden)
        for p in fb:
            if len(p) != len(self.shape):
                raise ValueError("forbidden pattern does not fit the shape")
            for s in p:
                if s not in self.alphabet:
                    raise AlphabetError(f"symbol {s!r} not in alphabet")
        object.__setattr__(self, "forbidden", fb)

    @classmethod
    def full_shift(cls, symbols: Sequence[Symbol], dim: int = 1) -> SftSpec:
        return cls(Alphabet(tuple(symbols)), dim, FiniteRegion(((0,) * dim,), dim))

    @classmethod
    def golden_mean(cls) -> SftSpec:
        """Binary one-dimensional shift forbidding the word ``11``."""
        return cls(Alphabet((0, 1)), 1, FiniteRegion.interval(0, 2), frozenset({(1, 1)}))

    @classmethod
    def from_adjacency(cls, symbols: Sequence[Symbol], adjacency) -> SftSpec:
        """One-dimensional nearest-neighbour SFT: ``ab`` allowed iff ``adjacency[a][b]``."""
        symbols = tuple(symbols)
        bad = {
            (a, b)
            for i, a in enumerate(symbols)
            for j, b in enumerate(symbols)
            if not adjacency[i][j]
        }
        return cls(Alphabet(symbols), 1, FiniteRegion.interval(0, 2), frozenset(bad))

    def is_full_shift(self) -> bool:
        return not self.forbidden

    def check_pattern(self, p: Pattern) -> None:
        if p.region.dim != self.dim:
            raise DimensionError("pattern dimension does not match the subshift")
        for v in p.values:
            if v not in self.alphabet:
                raise AlphabetError(f"symbol {v!r} not in alphabet")

    def violates_at(self, get: Callable[[Site], Symbol], i: Site) -> bool:
        """Whether the translate ``i + shape`` carries a forbidden pattern."""
        if not self.forbidden:
            return False
        return tuple(get(add(i, s)) for s in self.shape.sites) in self.forbidden


def locally_admissible(spec: SftSpec, p: Pattern) -> bool:
    """No translate of the shape lying inside ``p.region`` carries a forbidden pattern."""
    spec.check_pattern(p)
    if not spec.forbidden or not p.region:
        return True
    vals = p.as_dict()
    for i in translates_meeting(p.region, spec.shape):
        cells = [add(i, s) for s in spec.shape.sites]
        if all(c in vals for c in cells) and tuple(vals[c] for c in cells) in spec.forbidden:
            return False
    return True


def validate_frame(spec: SftSpec, x: FramedConfiguration) -> None:
    """Raise :class:`FrameInadmissibleError` unless ``x`` lies in the subshift.

    The background is periodic, so one period block of offsets settles every
    translate that avoids the irregular sites; the translates meeting the
    irregular sites are checked one by one.
    """
    if x.dim != spec.dim:
        raise DimensionError("frame dimension does not match the subshift")
    if spec.membership_oracle is not None or not spec.forbidden:
        return
    irregular = x.irregular_sites()
    checked: set[Site] = set()
    if irregular:
        for i in translates_meeting(irregular, spec.shape):
            checked.add(i)
            if spec.violates_at(x.value, i):
                raise FrameInadmissibleError(f"forbidden pattern at offset {i} of the window")
    # background: any translate far from the irregular sites
    period = x.background_period()
    if irregular:
        lo, hi = irregular.bounds()
        far = tuple(h + 2 * spec.shape.radius() + 1 for h in hi)
    else:
        far = (0,) * spec.dim
    for cell in itertools.product(*(range(p) for p in period)):
        i = add(far, cell)
        if spec.violates_at(x.boundary.value, i):
            raise FrameInadmissibleError(f"forbidden pattern in the periodic background at {i}")


def patch(x: FramedConfiguration, omega: Pattern) -> FramedConfiguration:
    return x.patch(omega)


def membership_after_patch(spec: SftSpec, x: FramedConfiguration, omega: Pattern) -> bool:
    """Decide ``omega x_{Lambda^c} in X`` for a frame ``x`` that is in ``X``.

    Only translates of the shape meeting ``Lambda`` can change, and they read
    sites inside ``enlarge_window(Lambda, shape)``.
    """
    spec.check_pattern(omega)
    validate_frame(spec, x)
    if spec.membership_oracle is not None:
        return bool(spec.membership_oracle(x, omega))
    if not spec.forbidden or not omega.region:
        return True
    vals = omega.as_dict()

    def get(s):
        v = vals.get(s, _MISSING)
        return x.value(s) if v is _MISSING else v

    return not any(spec.violates_at(get, i) for i in translates_meeting(omega.region, spec.shape))


def all_patterns(alphabet: Alphabet, region: FiniteRegion, cap: int = ENUMERATION_CAP):
    """Every pattern on ``region`` in canonical (lexicographic) order."""
    check_enumeration(len(alphabet), len(region), cap)
    for values in itertools.product(alphabet.symbols, repeat=len(region)):
        yield Pattern(region, values)


def admissible_patterns(spec: SftSpec, x: FramedConfiguration, region: FiniteRegion,
                        cap: int = ENUMERATION_CAP) -> list[Pattern]:
    """All ``w`` on ``region`` with ``w x_{region^c}`` in ``X``, canonical order."""
    if not region:
        raise ValueError("region must be nonempty")
    check_enumeration(len(spec.alphabet), len(region), cap)
    validate_frame(spec, x)
    return [w for w in all_patterns(spec.alphabet, region, cap) if membership_after_patch(spec, x, w)]


# --------------------------------------------------------------------------
# relation, metric, generators


def gibbs_related(x: FramedConfiguration, y: FramedConfiguration) -> FiniteRegion | None:
    """The finite set where ``x`` and ``y`` differ, or ``None`` if it is infinite.

    Equal points give the empty region.
    """
    if x.dim != y.dim:
        raise DimensionError("frames of different dimension")
    d = x.dim
    irregular = x.irregular_sites().union(y.irregular_sites())
    period = tuple(
        _lcm([a, b]) for a, b in zip(x.background_period(), y.background_period())
    )
    far = tuple(h + 1 for h in irregular.bounds()[1]) if irregular else (0,) * d
    for cell in itertools.product(*(range(p) for p in period)):
        s = add(far, cell)
        if x.boundary.value(s) != y.boundary.value(s):
            return None
    return FiniteRegion.of((s for s in irregular.sites if x.value(s) != y.value(s)), d)


def metric_distance(x: FramedConfiguration, y: FramedConfiguration) -> float:
    """``2^{-n(x, y)}`` with ``n`` the largest box size on which ``x`` and ``y`` agree."""
    diff = gibbs_related(x, y)
    if diff is None:
        raise NotComparableError("frames differ at infinitely many sites")
    if not diff:
        return 0.0
    n = min(norm(s) for s in diff.sites)
    return 2.0 ** (-n)


def generator_apply(spec: SftSpec, omega: Pattern, eta: Pattern,
                    x: FramedConfiguration) -> FramedConfiguration:
    """The involution that swaps the blocks ``omega`` and ``eta`` when the swap stays in X."""
    if omega.region != eta.region:
        raise ValueError("generator patterns must share a region")
    if omega == eta:
        return x
    here = x.restrict(omega.region)
    if here == eta and membership_after_patch(spec, x, omega):
        return x.patch(omega)
    if here == omega and membership_after_patch(spec, x, eta):
        return x.patch(eta)
    return x


def generator_apply_pattern(spec: SftSpec, omega: Pattern, eta: Pattern, pi: Pattern) -> Pattern:
    """Pattern-level generator on a cylinder base ``pi``.

    ``pi`` must cover ``enlarge_window(region, shape)`` so that admissibility of
    the swap is decided inside ``pi``. On the cylinder ``[pi]`` the generator
    acts as the single pattern map returned here.
    """
    lam = omega.region
    if not enlarge_window(lam, spec.shape).issubset(pi.region):
        raise ValueError("cylinder too coarse to decide the swap")
    if omega == eta:
        return pi
    here = pi.restrict(lam)
    target = omega if here == eta else eta if here == omega else None
    if target is None:
        return pi
    meeting = translates_meeting(lam, spec.shape)
    # an inadmissible base is an empty cylinder, on which the generator is the identity
    own = pi.as_dict()
    if any(spec.violates_at(own.__getitem__, i) for i in meeting):
        return pi
    swapped = pi.merge(target)
    vals = swapped.as_dict()
    if any(spec.violates_at(vals.__getitem__, i) for i in meeting):
        return pi
    return swapped
