"""Z^d geometry: sites, sup-norm boxes, finite regions and translations."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

Site = tuple[int, ...]

#: Largest number of patterns any enumeration may visit.
ENUMERATION_CAP = 2**24


class EnumerationCapError(ValueError):
    """Raised instead of attempting an enumeration larger than the cap."""


class DimensionError(ValueError):
    pass


def norm(site: Site) -> int:
    """Sup norm ``max_l |i_l|``."""
    return max((abs(c) for c in site), default=0)


def add(a: Site, b: Site) -> Site:
    return tuple(x + y for x, y in zip(a, b))


def sub(a: Site, b: Site) -> Site:
    return tuple(x - y for x, y in zip(a, b))


def neg(a: Site) -> Site:
    return tuple(-x for x in a)


def origin(d: int) -> Site:
    return (0,) * d


def unit(d: int, axis: int) -> Site:
    return tuple(1 if l == axis else 0 for l in range(d))


@dataclass(frozen=True)
class FiniteRegion:
    """Finite set of sites of Z^d, kept in lexicographic order.

    The empty region is representable (it marks "no difference" in
    :func:`gibbskit.subshift.gibbs_related`) but is rejected wherever a
    nonempty region is required.
    """

    sites: tuple[Site, ...]
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionError("dimension must be >= 1")
        for s in self.sites:
            if len(s) != self.dim:
                raise DimensionError(f"site {s} is not in Z^{self.dim}")

    @classmethod
    def of(cls, sites: Iterable[Sequence[int]], dim: int | None = None) -> FiniteRegion:
        pts = {tuple(int(c) for c in s) for s in sites}
        if dim is None:
            if not pts:
                raise DimensionError("cannot infer the dimension of an empty region")
            dim = len(next(iter(pts)))
        return cls(tuple(sorted(pts)), dim)

    @classmethod
    def interval(cls, start: int, stop: int) -> FiniteRegion:
        """The one-dimensional region ``{start, ..., stop - 1}``."""
        return cls(tuple((i,) for i in range(start, stop)), 1)

    def __len__(self) -> int:
        return len(self.sites)

    def __iter__(self) -> Iterator[Site]:
        return iter(self.sites)

    def __contains__(self, site) -> bool:
        return tuple(site) in self._index

    def __bool__(self) -> bool:
        return bool(self.sites)

    @property
    def _index(self) -> dict[Site, int]:
        # frozen dataclass: cache through object.__setattr__
        try:
            return self.__dict__["_index_cache"]
        except KeyError:
            idx = {s: k for k, s in enumerate(self.sites)}
            object.__setattr__(self, "_index_cache", idx)
            return idx

    def index(self, site: Site) -> int:
        return self._index[tuple(site)]

    def _check(self, other: FiniteRegion) -> None:
        if other.dim != self.dim:
            raise DimensionError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def union(self, other: FiniteRegion) -> FiniteRegion:
        self._check(other)
        return FiniteRegion.of(self._index.keys() | other._index.keys(), self.dim)

    def difference(self, other: FiniteRegion) -> FiniteRegion:
        self._check(other)
        return FiniteRegion.of(self._index.keys() - other._index.keys(), self.dim)

    def intersection(self, other: FiniteRegion) -> FiniteRegion:
        self._check(other)
        return FiniteRegion.of(self._index.keys() & other._index.keys(), self.dim)

    def issubset(self, other: FiniteRegion) -> bool:
        self._check(other)
        return self._index.keys() <= other._index.keys()

    def isdisjoint(self, other: FiniteRegion) -> bool:
        self._check(other)
        return self._index.keys().isdisjoint(other._index.keys())

    def radius(self) -> int:
        """Smallest ``m`` with ``self`` inside the box of size ``m``."""
        return max((norm(s) for s in self.sites), default=-1) + 1

    def diameter(self) -> int:
        """Largest sup-norm distance between two sites (0 for a singleton)."""
        if not self.sites:
            return 0
        return max(
            max(s[l] for s in self.sites) - min(s[l] for s in self.sites)
            for l in range(self.dim)
        )

    def bounds(self) -> tuple[Site, Site]:
        """Coordinate-wise minimum and maximum."""
        lo = tuple(min(s[l] for s in self.sites) for l in range(self.dim))
        hi = tuple(max(s[l] for s in self.sites) for l in range(self.dim))
        return lo, hi

    def __repr__(self) -> str:
        if self.dim == 1:
            return f"FiniteRegion({[s[0] for s in self.sites]})"
        return f"FiniteRegion({list(self.sites)})"


@dataclass(frozen=True)
class BoxSpec:
    n: int
    d: int

    def region(self) -> FiniteRegion:
        return box(self.n, self.d)


def box(n: int, d: int) -> FiniteRegion:
    """The box ``{i in Z^d : ||i|| < n}``; ``(2n - 1)^d`` sites."""
    if n < 1:
        raise ValueError("box size must be >= 1 (the empty box is not a finite region)")
    r = range(-(n - 1), n)
    return FiniteRegion(tuple(itertools.product(r, repeat=d)), d)


def ball(region: FiniteRegion, w: int) -> FiniteRegion:
    """All sites within sup distance ``w`` of ``region``."""
    if w <= 0:
        return region
    cube = box(w + 1, region.dim).sites
    return FiniteRegion.of((add(s, b) for s in region.sites for b in cube), region.dim)


def translate(region: FiniteRegion, j: Sequence[int]) -> FiniteRegion:
    j = tuple(j)
    if len(j) != region.dim:
        raise DimensionError("translation vector has the wrong dimension")
    # translation preserves lexicographic order
    return FiniteRegion(tuple(add(s, j) for s in region.sites), region.dim)


def translates_meeting(region: FiniteRegion, shape: FiniteRegion) -> list[Site]:
    """Offsets ``i`` with ``(i + shape)`` meeting ``region``, sorted."""
    region._check(shape)
    return sorted({sub(lam, s) for lam in region.sites for s in shape.sites})


def enlarge_window(region: FiniteRegion, shape: FiniteRegion) -> FiniteRegion:
    """``region`` together with every translate of ``shape`` that meets it."""
    if not region or not shape:
        raise ValueError("enlarge_window needs nonempty regions")
    pts = set(region.sites)
    for i in translates_meeting(region, shape):
        pts.update(add(i, s) for s in shape.sites)
    return FiniteRegion.of(pts, region.dim)


def check_enumeration(alphabet_size: int, n_sites: int, cap: int = ENUMERATION_CAP) -> int:
    """Return ``alphabet_size ** n_sites`` or refuse if it exceeds ``cap``."""
    total = alphabet_size**n_sites
    if total > cap:
        raise EnumerationCapError(
            f"{alphabet_size}^{n_sites} = {total} patterns exceeds the cap {cap}"
        )
    return total
