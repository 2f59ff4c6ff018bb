"""Specification kernels ``gamma_Lambda`` of a potential on a subshift of finite type.

For a finite-range potential the row ``gamma_Lambda(. | x)`` is proportional to
``exp(E(eta))`` over admissible ``eta``, where ``E(eta)`` sums ``f(sigma^k eta x)``
over the shifts ``k`` whose dependence window meets ``Lambda``. All other
shifts contribute the same amount for every ``eta`` and cancel, so ratios of
these weights are exactly ``exp(c_f(omega x, eta x))``.

Events are evaluated as ratios of compensated sums of the unnormalized
weights. With that convention an event containing every admissible pattern
gets probability exactly 1, which makes properness exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .cocycle import DEFAULT_TOLERANCE, logsumexp, truncation_radius
from .lattice import ENUMERATION_CAP, FiniteRegion, Site, box, enlarge_window, translates_meeting
from .potential import InteractionPotential, Potential, birkhoff_box_sum, hamiltonian
from .subshift import (
    Pattern,
    SftSpec,
    FramedConfiguration,
    admissible_patterns,
    all_patterns,
    membership_after_patch,
    validate_frame,
)

Getter = Callable[[Site], object]


class ContextError(ValueError):
    """A context pattern does not cover the sites a kernel row reads."""


class NoAdmissiblePrefix(ValueError):
    """No admissible rewrite of the first ``n`` symbols exists."""


@dataclass(frozen=True)
class Specification:
    sft: SftSpec
    potential: Potential
    tolerance: float = DEFAULT_TOLERANCE
    cap: int = ENUMERATION_CAP

    def __post_init__(self):
        if self.sft.dim != self.potential.dim:
            raise ValueError("subshift and potential live in different dimensions")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.potential.alphabet is not None:
            extra = set(self.sft.alphabet.symbols) - set(self.potential.alphabet)
            if extra:
                raise ValueError(f"potential is not defined on symbols {sorted(map(repr, extra))}")

    @property
    def dim(self) -> int:
        return self.sft.dim

    def neighbourhood(self, region: FiniteRegion) -> FiniteRegion:
        """Sites outside ``region`` read by a row on ``region`` (finite-range only)."""
        f = self.potential
        if not f.finite_range:
            raise ValueError("rows of a decay potential read infinitely many sites")
        pts = set(enlarge_window(region, f.window).sites)
        if self.sft.forbidden:
            pts.update(enlarge_window(region, self.sft.shape).sites)
        pts.difference_update(region.sites)
        return FiniteRegion.of(pts, region.dim)


@dataclass(frozen=True)
class PartitionValue:
    logZ: float

    def __post_init__(self):
        if not math.isfinite(self.logZ):
            raise ValueError("partition function is not finite")


@dataclass(frozen=True)
class KernelRow:
    """``gamma_Lambda(. | x)`` over every pattern on ``region`` in canonical order.

    Inadmissible patterns carry log-weight ``-inf`` and probability 0.
    """

    region: FiniteRegion
    patterns: tuple[Pattern, ...]
    log_weights: tuple[float, ...]
    error_bound: float = 0.0
    outside: Getter | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        top = max(self.log_weights)
        if top == -math.inf:
            raise ValueError("no admissible pattern on the region")
        w = tuple(math.exp(v - top) if v != -math.inf else 0.0 for v in self.log_weights)
        total = math.fsum(w)
        object.__setattr__(self, "_top", top)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "total", total)
        object.__setattr__(self, "probs", tuple(v / total for v in w))
        object.__setattr__(self, "_index", {p.values: k for k, p in enumerate(self.patterns)})

    def __len__(self) -> int:
        return len(self.patterns)

    def prob(self, omega: Pattern) -> float:
        if omega.region != self.region:
            raise ValueError("pattern does not live on the row's region")
        return self.probs[self._index[omega.values]]

    def log_partition(self) -> float:
        """``log sum_eta exp(E(eta))`` for the row's energy convention."""
        return self._top + math.log(self.total)

    def as_dict(self) -> dict[tuple, float]:
        return {p.values: q for p, q in zip(self.patterns, self.probs)}

    def _matches(self, omega: Pattern, event: Pattern, outside: Getter | None) -> bool:
        own = omega.as_dict()
        for site, v in zip(event.region.sites, event.values):
            if site in own:
                if own[site] != v:
                    return False
            else:
                if outside is None:
                    raise ContextError("row has no outside values to test the event")
                try:
                    if outside(site) != v:
                        return False
                except KeyError:
                    raise ContextError(f"event reads site {site} outside the context") from None
        return True

    def event(self, events: Pattern | Sequence[Pattern], outside: Getter | None = None) -> float:
        """``gamma_Lambda(A | x)`` for a cylinder or a finite union of cylinders.

        ``outside`` overrides the row's own outside values; it must agree with
        them on the sites the row reads.
        """
        if isinstance(events, Pattern):
            events = [events]
        outside = self.outside if outside is None else outside
        hit = [
            w
            for p, w in zip(self.patterns, self.weights)
            if w > 0 and any(self._matches(p, e, outside) for e in events)
        ]
        return math.fsum(hit) / self.total

    def expect(self, g: Callable[[Pattern], float]) -> float:
        """``sum_omega gamma([omega]) g(omega)`` over admissible ``omega``."""
        return math.fsum(w * g(p) for p, w in zip(self.patterns, self.weights) if w > 0) / self.total


# --------------------------------------------------------------------------
# rows


def _row_local(s: Specification, region: FiniteRegion, outside: Getter) -> KernelRow:
    """Row of a finite-range specification, reading outside values through ``outside``."""
    f, sft = s.potential, s.sft
    shifts = translates_meeting(region, f.window)
    checks = translates_meeting(region, sft.shape) if sft.forbidden else []
    pats = list(all_patterns(sft.alphabet, region, s.cap))
    logw = []
    for p in pats:
        vals = dict(zip(region.sites, p.values))

        def get(site, vals=vals):
            v = vals.get(site, _MISSING)
            return outside(site) if v is _MISSING else v

        if any(sft.violates_at(get, i) for i in checks):
            logw.append(-math.inf)
        else:
            logw.append(math.fsum(f.at(get, k) for k in shifts))
    return KernelRow(region, tuple(pats), tuple(logw), 0.0, outside)


_MISSING = object()


def _row_decay(s: Specification, region: FiniteRegion, x: FramedConfiguration) -> KernelRow:
    """Row of a certified-decay specification with truncated energies.

    Every ratio ``exp(c(omega x, eta x))`` is off by at most a factor
    ``exp(+-eps)``, with ``eps`` the cocycle truncation bound, so each
    probability is off by at most ``expm1(eps)``.
    """
    f, sft = s.potential, s.sft
    R, eps = truncation_radius(f, region, min(s.tolerance, DEFAULT_TOLERANCE))
    shifts = box(R + 1, f.dim).sites
    pats = list(all_patterns(sft.alphabet, region, s.cap))
    logw = []
    for p in pats:
        if not membership_after_patch(sft, x, p):
            logw.append(-math.inf)
            continue
        y = x.patch(p)
        logw.append(math.fsum(f.evaluator(y.shift(k)) for k in shifts))
    return KernelRow(region, tuple(pats), tuple(logw), math.expm1(eps), x.value)


def gamma_row(s: Specification, region: FiniteRegion, x: FramedConfiguration) -> KernelRow:
    """The full row ``gamma_Lambda(. | x)``."""
    if not region:
        raise ValueError("region must be nonempty")
    validate_frame(s.sft, x)
    if not s.potential.finite_range:
        return _row_decay(s, region, x)
    if s.sft.membership_oracle is not None:
        row = _row_local(s, region, x.value)
        mask = [membership_after_patch(s.sft, x, p) for p in row.patterns]
        logw = tuple(v if ok else -math.inf for v, ok in zip(row.log_weights, mask))
        return KernelRow(region, row.patterns, logw, 0.0, x.value)
    return _row_local(s, region, x.value)


def gamma_row_local(s: Specification, region: FiniteRegion, context: Pattern) -> KernelRow:
    """Row computed from a context pattern covering :meth:`Specification.neighbourhood`.

    Shares its code path with :func:`gamma_row`, so equal outside values give
    bit-identical rows.
    """
    need = s.neighbourhood(region)
    if not need.issubset(context.region):
        raise ContextError("context does not cover the sites the row reads")
    lookup = context.as_dict()
    return _row_local(s, region, lookup.__getitem__)


def gamma_cylinder(s: Specification, region: FiniteRegion, omega: Pattern,
                   x: FramedConfiguration) -> float:
    """``gamma_Lambda([omega] | x)``; zero when ``omega x`` leaves the subshift."""
    s.sft.check_pattern(omega)
    if omega.region != region:
        raise ValueError("omega must live on the region")
    return gamma_row(s, region, x).prob(omega)


def gamma_limit_probe(s: Specification, region: FiniteRegion, omega: Pattern,
                      x: FramedConfiguration, n: int) -> float:
    """The finite-``n`` ratio built from Birkhoff sums over the box of size ``n``."""
    if omega.region != region:
        raise ValueError("omega must live on the region")
    validate_frame(s.sft, x)
    if not membership_after_patch(s.sft, x, omega):
        return 0.0
    etas = admissible_patterns(s.sft, x, region, s.cap)
    energies = [birkhoff_box_sum(s.potential, n, x.patch(eta)) for eta in etas]
    own = birkhoff_box_sum(s.potential, n, x.patch(omega))
    return math.exp(own - logsumexp(energies))


def gamma_limit_row(s: Specification, region: FiniteRegion, x: FramedConfiguration, n: int) -> KernelRow:
    """Every finite-``n`` ratio of :func:`gamma_limit_probe` at once."""
    validate_frame(s.sft, x)
    pats = list(all_patterns(s.sft.alphabet, region, s.cap))
    logw = tuple(
        birkhoff_box_sum(s.potential, n, x.patch(p)) if membership_after_patch(s.sft, x, p) else -math.inf
        for p in pats
    )
    return KernelRow(region, tuple(pats), logw, 0.0, x.value)


# --------------------------------------------------------------------------
# axioms


def consistency_residual(s: Specification, delta: FiniteRegion, region: FiniteRegion,
                         x: FramedConfiguration,
                         events: Sequence[Pattern] | None = None) -> float:
    """``max_A |sum_omega gamma_Delta([omega]|x) gamma_Lambda(A | omega x) - gamma_Delta(A|x)|``.

    ``events`` defaults to every cylinder on ``Delta``.
    """
    if not region.issubset(delta):
        raise ValueError("need Lambda inside Delta")
    outer = gamma_row(s, delta, x)
    inner_cache: dict[tuple, KernelRow] = {}
    need = s.neighbourhood(region) if s.potential.finite_range else None

    def inner(omega: Pattern) -> KernelRow:
        y = x.patch(omega)
        if need is None:
            return gamma_row(s, region, y)
        key = tuple(y.value(site) for site in need.sites)
        row = inner_cache.get(key)
        if row is None:
            row = _row_local(s, region, y.value)
            inner_cache[key] = row
        return row

    admissible = [(p, q) for p, q in zip(outer.patterns, outer.probs) if q > 0]
    if events is None:
        return _consistency_all_cylinders(outer, admissible, region, inner)
    worst = 0.0
    for A in events:
        lhs = math.fsum(q * inner(p).event(A, x.patch(p).value) for p, q in admissible)
        worst = max(worst, abs(lhs - outer.event(A)))
    return worst


def _consistency_all_cylinders(outer: KernelRow, admissible, region: FiniteRegion,
                               inner: Callable[[Pattern], KernelRow]) -> float:
    """Consistency over every cylinder ``[xi]`` on ``Delta``.

    ``gamma_Lambda([xi] | omega x)`` vanishes unless ``xi`` and ``omega`` agree
    off ``Lambda``, so the left side is accumulated row by row.
    """
    delta = outer.region
    pos = [delta.index(site) for site in region.sites]
    lhs: dict[tuple, list[float]] = {}
    for p, q in admissible:
        row = inner(p)
        for eta, r in zip(row.patterns, row.probs):
            if r == 0:
                continue
            xi = list(p.values)
            for k, v in zip(pos, eta.values):
                xi[k] = v
            lhs.setdefault(tuple(xi), []).append(q * r)
    worst = 0.0
    for p, q in zip(outer.patterns, outer.probs):
        worst = max(worst, abs(math.fsum(lhs.get(p.values, ())) - q))
    return worst


@dataclass(frozen=True)
class ProperCheck:
    value: float
    indicator: float
    residual: float


def properness_check(s: Specification, region: FiniteRegion, B: Pattern,
                     x: FramedConfiguration) -> ProperCheck:
    """``|gamma_Lambda(B | x) - 1_B(x)|`` for a cylinder ``B`` living off ``Lambda``."""
    if not B.region.isdisjoint(region):
        raise ValueError("B must be supported outside Lambda")
    value = gamma_row(s, region, x).event(B)
    indicator = 1.0 if all(x.value(site) == v for site, v in zip(B.region.sites, B.values)) else 0.0
    return ProperCheck(value, indicator, abs(value - indicator))


# --------------------------------------------------------------------------
# Hamiltonian form, kernel maps, one-sided kernels


def gibbsian_gamma(phi: InteractionPotential, sft: SftSpec, region: FiniteRegion, omega: Pattern,
                   x: FramedConfiguration, cap: int = ENUMERATION_CAP) -> tuple[float, PartitionValue]:
    """``exp(-H_Lambda(omega x)) / Z_Lambda(x)`` over admissible patterns, and ``log Z``."""
    if phi.dim != sft.dim:
        raise ValueError("interaction and subshift live in different dimensions")
    etas = admissible_patterns(sft, x, region, cap)
    energies = [-hamiltonian(phi, region, x.patch(eta)) for eta in etas]
    logZ = logsumexp(energies)
    if not membership_after_patch(sft, x, omega):
        return 0.0, PartitionValue(logZ)
    return math.exp(-hamiltonian(phi, region, x.patch(omega)) - logZ), PartitionValue(logZ)


def gibbsian_row(phi: InteractionPotential, sft: SftSpec, region: FiniteRegion,
                 x: FramedConfiguration, cap: int = ENUMERATION_CAP) -> KernelRow:
    """The row ``exp(-H_Lambda(omega x)) / Z_Lambda(x)`` over every pattern on ``region``."""
    if phi.dim != sft.dim:
        raise ValueError("interaction and subshift live in different dimensions")
    validate_frame(sft, x)
    pats = list(all_patterns(sft.alphabet, region, cap))
    logw = tuple(
        -hamiltonian(phi, region, x.patch(p)) if membership_after_patch(sft, x, p) else -math.inf
        for p in pats
    )
    return KernelRow(region, tuple(pats), logw, 0.0, x.value)


def q_lambda(s: Specification, region: FiniteRegion, g: Callable[[FramedConfiguration], float],
             x: FramedConfiguration) -> float:
    """``Q_Lambda(g)(x) = sum_omega gamma_Lambda([omega]|x) g(omega x)``."""
    row = gamma_row(s, region, x)
    return row.expect(lambda p: g(x.patch(p)))


def cylinder_indicator(A: Pattern) -> Callable[[FramedConfiguration], float]:
    items = tuple(zip(A.region.sites, A.values))

    def g(y: FramedConfiguration) -> float:
        return 1.0 if all(y.value(site) == v for site, v in items) else 0.0

    return g


@dataclass(frozen=True)
class OneSidedPoint:
    """Eventually periodic one-sided sequence ``prefix + period + period + ...``."""

    prefix: tuple
    period: tuple

    def __post_init__(self):
        if not self.period:
            raise ValueError("period must be nonempty")

    def value(self, i: int) -> object:
        if i < 0:
            raise IndexError("one-sided points have no negative coordinates")
        if i < len(self.prefix):
            return self.prefix[i]
        return self.period[(i - len(self.prefix)) % len(self.period)]

    def __getitem__(self, i):
        if isinstance(i, tuple):
            (i,) = i
        return self.value(i)

    def with_prefix(self, word: Sequence) -> OneSidedPoint:
        """``word sigma^n x`` with ``n = len(word)``."""
        n, m = len(word), len(self.prefix)
        if n <= m:
            return OneSidedPoint(tuple(word) + self.prefix[n:], self.period)
        r = (n - m) % len(self.period)
        return OneSidedPoint(tuple(word), self.period[r:] + self.period[:r])


def _onesided_ok(A: np.ndarray, index: Mapping, x: OneSidedPoint) -> bool:
    span = len(x.prefix) + 2 * len(x.period) + 1
    return all(A[index[x.value(i)], index[x.value(i + 1)]] for i in range(span))


def q_n_onesided(symbols: Sequence, adjacency, f: Potential | Callable[[OneSidedPoint], float],
                 n: int, g: Callable[[OneSidedPoint], float], x: OneSidedPoint) -> float:
    """``Q_n(g)(x) = E_n^g(x) / Z_n(x)`` over ``R_n(x)``, the admissible rewrites of ``x_0 ... x_{n-1}``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    A = np.asarray(adjacency, dtype=bool)
    index = {a: k for k, a in enumerate(symbols)}
    if not _onesided_ok(A, index, x):
        raise ValueError("x is not a point of the one-sided shift")
    if isinstance(f, Potential):
        if not f.finite_range or any(w[0] < 0 for w in f.window.sites):
            raise ValueError("one-sided potentials need a window in the nonnegative sites")
        pot = f
        energy = lambda y: pot.at(lambda site: y.value(site[0]), (0,))
    else:
        energy = f
    tail = x.value(n)
    logw, vals = [], []
    for word in _admissible_words(A, symbols, index, n):
        if not A[index[word[-1]], index[tail]]:
            continue
        y = x.with_prefix(word)
        logw.append(energy(y))
        vals.append(g(y))
    if not logw:
        raise NoAdmissiblePrefix(f"no admissible word of length {n} precedes x_{n}")
    top = max(logw)
    w = [math.exp(v - top) for v in logw]
    return math.fsum(a * b for a, b in zip(w, vals)) / math.fsum(w)


def _admissible_words(A: np.ndarray, symbols: Sequence, index: Mapping, n: int):
    words = [(a,) for a in symbols]
    for _ in range(n - 1):
        words = [w + (b,) for w in words for b in symbols if A[index[w[-1]], index[b]]]
    return words
