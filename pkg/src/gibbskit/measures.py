"""Measures with computable cylinder probabilities and the residual checks run against them.

* :func:`transfer_gibbs_1d` gives the exact shift-invariant Gibbs measure of a
  finite-range potential on a one-dimensional SFT, from the Perron data of a
  block transfer matrix.
* :func:`heat_bath_sample` gives an empirical measure from single-site
  heat-bath sweeps on a torus, whose update probabilities are kernel rows.

The residual checks reduce conformality, the DLR equations, the kernel fixed
point and the multiplier pushforward to finite sums over cylinders fine enough
for the finite-range integrands to be constant on them.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Protocol, Sequence

import numpy as np

from .cocycle import cocycle_local
from .lattice import (
    ENUMERATION_CAP,
    FiniteRegion,
    Site,
    add,
    ball,
    check_enumeration,
    enlarge_window,
    origin,
    translate,
)
from .potential import Potential
from .specification import KernelRow, Specification, gamma_row_local
from .subshift import Alphabet, Pattern, SftSpec, all_patterns, generator_apply_pattern

log = logging.getLogger(__name__)


class NotPrimitiveError(ValueError):
    """The block transfer matrix is not primitive."""


class CylinderMeasure(Protocol):
    kind: str

    def prob(self, pattern: Pattern) -> float: ...


@dataclass(frozen=True)
class Residual:
    """Largest residual over the checked cases; ``skipped`` lists zero-mass conditions."""

    value: float
    checked: int
    skipped: tuple = ()

    def __float__(self) -> float:
        return self.value


def _empty(dim: int) -> Pattern:
    return Pattern(FiniteRegion((), dim), ())


# --------------------------------------------------------------------------
# exact one-dimensional oracle


def _span(region: FiniteRegion) -> int:
    lo, hi = region.bounds()
    return hi[0] - lo[0] + 1


def _is_primitive(B: np.ndarray) -> bool:
    n = len(B)
    if n == 0:
        return False
    P = B.copy()
    # Wielandt: a primitive n x n matrix has a positive power of exponent <= (n-1)^2 + 1
    for _ in range((n - 1) ** 2 + 1):
        if P.all():
            return True
        P = (P.astype(np.int64) @ B.astype(np.int64)) > 0
    return bool(P.all())


@dataclass(frozen=True, eq=False)
class TransferMeasure:
    """Shift-invariant Gibbs measure of a finite-range potential on a 1D SFT.

    States are admissible blocks of length ``block_len``; the transition
    ``u -> v`` (``u[1:] == v[:-1]``) carries weight ``exp(F(v))`` with ``F(v)``
    the potential read off the block. The word ``b_0 ... b_t`` of blocks has
    probability ``l[b_0] prod (M[b_i, b_{i+1}] / lam) r[b_t]`` with ``l . r = 1``.
    """

    sft: SftSpec
    potential: Potential
    block_len: int
    states: tuple[tuple, ...]
    matrix: np.ndarray = field(repr=False)
    lam: float
    left: np.ndarray = field(repr=False)
    right: np.ndarray = field(repr=False)
    kind: str = "transfer"

    def __post_init__(self):
        object.__setattr__(self, "_index", {u: k for k, u in enumerate(self.states)})

    def word_prob(self, word: Sequence) -> float:
        """Probability of ``word`` placed on consecutive sites."""
        word = tuple(word)
        k, ell = len(word), self.block_len
        if k == 0:
            return 1.0
        idx = self._index
        if k < ell:
            return math.fsum(
                self.left[j] * self.right[j] for u, j in idx.items() if u[:k] == word
            )
        blocks = [word[t : t + ell] for t in range(k - ell + 1)]
        if any(b not in idx for b in blocks):
            return 0.0
        p = self.left[idx[blocks[0]]]
        for a, b in zip(blocks, blocks[1:]):
            p *= self.matrix[idx[a], idx[b]] / self.lam
        return float(p * self.right[idx[blocks[-1]]])

    def prob(self, pattern: Pattern) -> float:
        region = pattern.region
        if not region:
            return 1.0
        if region.dim != 1:
            raise ValueError("the transfer oracle is one-dimensional")
        a, b = region.sites[0][0], region.sites[-1][0]
        given = {s[0]: v for s, v in zip(region.sites, pattern.values)}
        gaps = [i for i in range(a, b + 1) if i not in given]
        if not gaps:
            return self.word_prob([given[i] for i in range(a, b + 1)])
        check_enumeration(len(self.sft.alphabet), len(gaps))
        total = []
        for fill in itertools.product(self.sft.alphabet.symbols, repeat=len(gaps)):
            full = dict(given)
            full.update(zip(gaps, fill))
            total.append(self.word_prob([full[i] for i in range(a, b + 1)]))
        return math.fsum(total)


def transfer_gibbs_1d(sft: SftSpec, f: Potential) -> TransferMeasure:
    if sft.dim != 1 or f.dim != 1:
        raise ValueError("the transfer oracle needs a one-dimensional model")
    if not f.finite_range:
        raise ValueError("the transfer oracle needs a finite-range potential")
    ell = max(_span(sft.shape), _span(f.window))
    wmin = f.window.bounds()[0][0]
    symbols = sft.alphabet.symbols
    check_enumeration(len(symbols), ell)
    states = []
    for u in itertools.product(symbols, repeat=ell):
        get = lambda s, u=u: u[s[0]]
        ok = all(
            not sft.violates_at(get, (i,))
            for i in range(ell)
            if all(0 <= i + s[0] < ell for s in sft.shape.sites)
        )
        if ok:
            states.append(u)
    if not states:
        raise NotPrimitiveError("no admissible blocks")
    F = np.array([f.at(lambda s, u=u: u[s[0]], (-wmin,)) for u in states])
    F -= F.max()
    n = len(states)
    M = np.zeros((n, n))
    for i, u in enumerate(states):
        for j, v in enumerate(states):
            if u[1:] == v[:-1]:
                M[i, j] = math.exp(F[j])
    if not _is_primitive(M > 0):
        raise NotPrimitiveError("block transfer matrix is not primitive")
    lam, right = _perron(M)
    _, left = _perron(M.T)
    left = left / float(left @ right)
    return TransferMeasure(sft, f, ell, tuple(states), M, lam, left, right)


def _perron(M: np.ndarray) -> tuple[float, np.ndarray]:
    vals, vecs = np.linalg.eig(M)
    k = int(np.argmax(vals.real))
    v = np.abs(vecs[:, k].real)
    lam = float(vals[k].real)
    # a few power steps polish the eigenvector to working precision
    for _ in range(4):
        w = M @ v
        v = w / np.linalg.norm(w)
    lam = float((M @ v) @ v / (v @ v))
    return lam, v / v.sum()


@dataclass(frozen=True)
class TableMeasure:
    """A probability table on the patterns of one finite window."""

    window: FiniteRegion
    table: dict
    kind: str = "table"

    def prob(self, pattern: Pattern) -> float:
        if not pattern.region.issubset(self.window):
            raise ValueError("query region leaves the tabulated window")
        pos = [self.window.index(s) for s in pattern.region.sites]
        return math.fsum(
            p for vals, p in self.table.items() if all(vals[k] == v for k, v in zip(pos, pattern.values))
        )


# --------------------------------------------------------------------------
# residuals


def _probe_region(s: Specification, region: FiniteRegion) -> FiniteRegion:
    """Sites a generator swap and its cocycle read: Lambda enlarged by the shape and the window."""
    if not s.potential.finite_range:
        raise ValueError("cylinder residuals need a finite-range potential")
    return enlarge_window(region, s.sft.shape).union(enlarge_window(region, s.potential.window))


def _swap_log_multiplier(s: Specification, pi: Pattern, phi_pi: Pattern, region: FiniteRegion) -> float:
    """``c_f(x, phi x)``, constant on the cylinder ``[pi]``."""
    if phi_pi == pi:
        return 0.0
    a, b = pi.as_dict(), phi_pi.as_dict()
    return cocycle_local(s.potential, a.__getitem__, b.__getitem__, region)


def conformality_residual(mu: CylinderMeasure, s: Specification, omega: Pattern, eta: Pattern,
                          probes: Pattern | Sequence[Pattern] | None = None) -> Residual:
    """``max |mu(phi[pi]) - exp(c(pi, phi pi)) mu([pi])|`` over probe cylinders ``[pi]``.

    On a probe covering the swap and cocycle reach, ``phi = phi_{omega, eta}``
    maps ``[pi]`` onto ``[phi pi]`` and the derivative ``exp(c(x, phi^{-1} x))``
    is constant, so both sides of ``d phi_* mu = exp(c(x, phi^{-1} x)) d mu``
    integrate over the probe exactly.
    """
    region = omega.region
    if eta.region != region:
        raise ValueError("omega and eta must share a region")
    need = _probe_region(s, region)
    if probes is None:
        probes = list(all_patterns(s.sft.alphabet, need))
    elif isinstance(probes, Pattern):
        probes = [probes]
    worst, n = 0.0, 0
    for pi in probes:
        if not need.issubset(pi.region):
            raise ValueError("probe too coarse for the integrand to be constant")
        phi_pi = generator_apply_pattern(s.sft, omega, eta, pi)
        # phi is an involution, so phi^{-1}[pi] = [phi pi]
        lhs = mu.prob(phi_pi)
        m = mu.prob(pi)
        rhs = m * math.exp(_swap_log_multiplier(s, pi, phi_pi, region)) if m > 0 else 0.0
        worst = max(worst, abs(lhs - rhs))
        n += 1
    return Residual(worst, n)


def _context_key(pattern: Pattern, need: FiniteRegion) -> tuple:
    return tuple(pattern[s] for s in need.sites)


def dlr_residual(mu: CylinderMeasure, s: Specification, region: FiniteRegion, width: int,
                 cap: int = ENUMERATION_CAP) -> Residual:
    """``max |mu([omega eta]) / mu([eta]) - E_mu[gamma_Lambda([omega] | .) | [eta]]|``.

    ``eta`` runs over the patterns on the annulus of the given width around
    ``Lambda``. Once the annulus covers every site a row reads, the
    conditional expectation is the row itself. A thinner annulus leaves some
    read sites ``zeta`` free, and the row is averaged against
    ``mu([eta zeta]) / mu([eta])``.
    """
    if width < 0:
        raise ValueError("width must be nonnegative")
    annulus = ball(region, width).difference(region)
    need = s.neighbourhood(region)
    free = need.difference(annulus)
    omegas = list(all_patterns(s.sft.alphabet, region, cap))
    worst, n, skipped = 0.0, 0, []
    rows: dict[tuple, KernelRow] = {}

    def row_for(context: Pattern) -> KernelRow:
        key = _context_key(context, need)
        row = rows.get(key)
        if row is None:
            row = rows[key] = gamma_row_local(s, region, context)
        return row

    for eta in all_patterns(s.sft.alphabet, annulus, cap):
        m = mu.prob(eta)
        if m == 0:
            skipped.append(eta)
            continue
        if free:
            parts = []
            for zeta in all_patterns(s.sft.alphabet, free, cap):
                ctx = eta.merge(zeta)
                mz = mu.prob(ctx)
                if mz > 0:
                    parts.append((mz, row_for(ctx)))
            expected = [math.fsum(mz * r.prob(o) for mz, r in parts) / m for o in omegas]
        else:
            row = row_for(eta)
            expected = [row.prob(o) for o in omegas]
        for omega, rhs in zip(omegas, expected):
            lhs = mu.prob(eta.merge(omega)) / m
            worst = max(worst, abs(lhs - rhs))
            n += 1
    if skipped:
        log.info("dlr_residual skipped %d annulus patterns of zero mass", len(skipped))
    return Residual(worst, n, tuple(skipped))


def q_dual_fixed_point_residual(mu: CylinderMeasure, s: Specification, region: FiniteRegion,
                                tests: Sequence[Pattern] | None = None,
                                cap: int = ENUMERATION_CAP) -> Residual:
    """``max_A |int Q_Lambda(1_A) d mu - mu(A)|``.

    ``Q_Lambda(1_A)(x)`` depends on ``x`` only through the kernel
    neighbourhood and the sites of ``A`` outside ``Lambda``, so the integral is
    a finite sum over patterns there. ``tests`` defaults to every cylinder on
    ``Lambda`` grown by one site.
    """
    need = s.neighbourhood(region)
    if tests is None:
        tests = list(all_patterns(s.sft.alphabet, ball(region, 1), cap))
    rows: dict[tuple, KernelRow] = {}
    worst, n, skipped = 0.0, 0, []
    for A in tests:
        outside_A = A.region.difference(region) if A.region else A.region
        reach = need.union(outside_A) if outside_A else need
        terms = []
        for zeta in all_patterns(s.sft.alphabet, reach, cap):
            m = mu.prob(zeta)
            if m == 0:
                continue
            key = _context_key(zeta, need)
            row = rows.get(key)
            if row is None:
                row = rows[key] = gamma_row_local(s, region, zeta.restrict(need))
            terms.append(m * row.event(A, zeta.as_dict().__getitem__))
        worst = max(worst, abs(math.fsum(terms) - mu.prob(A)))
        n += 1
    return Residual(worst, n, tuple(skipped))


def capocaccia_residual(mu: CylinderMeasure, s: Specification, omega: Pattern, eta: Pattern,
                        domain: Pattern, probes: Sequence[Pattern] | None = None,
                        cap: int = ENUMERATION_CAP) -> Residual:
    """``max_P |phi_*(R mu|_O)(P) - mu|_{phi(O)}(P)|`` with ``R = exp(c(x, phi(x)))``.

    ``O = [domain]`` must refine ``[omega]`` or ``[eta]`` so that ``phi`` is a
    homeomorphism of ``O`` onto the cylinder ``phi(O)``. Probes default to the
    whole space and every cylinder on the common refinement.
    """
    region = omega.region
    if eta.region != region:
        raise ValueError("omega and eta must share a region")
    if not region.issubset(domain.region) or domain.restrict(region) not in (omega, eta):
        raise ValueError("the domain cylinder must refine [omega] or [eta]")
    base = _probe_region(s, region).union(domain.region)
    if probes is None:
        probes = [_empty(region.dim)] + list(all_patterns(s.sft.alphabet, base, cap))
    worst, n = 0.0, 0
    for P in probes:
        fine = base.union(P.region) if P.region else base
        free = fine.difference(domain.region)
        lhs, rhs = [], []
        for rest in all_patterns(s.sft.alphabet, free, cap) if free else [_empty(region.dim)]:
            pi = domain.merge(rest) if rest.region else domain
            phi_pi = generator_apply_pattern(s.sft, omega, eta, pi)
            if not _inside(phi_pi, P):
                continue
            m = mu.prob(pi)
            if m > 0:
                lhs.append(m * math.exp(_swap_log_multiplier(s, pi, phi_pi, region)))
            rhs.append(mu.prob(phi_pi))
        worst = max(worst, abs(math.fsum(lhs) - math.fsum(rhs)))
        n += 1
    return Residual(worst, n)


def _inside(pi: Pattern, P: Pattern) -> bool:
    """``[pi]`` is inside ``[P]`` (``pi`` covers ``P``'s region)."""
    vals = pi.as_dict()
    return all(vals[s] == v for s, v in zip(P.region.sites, P.values))


# --------------------------------------------------------------------------
# heat-bath sampler


@dataclass(frozen=True)
class SamplerConfig:
    """Torus of side lengths ``shape``; measurements are taken every sweep after burn-in."""

    shape: tuple[int, ...]
    sweeps: int
    burn_in: int = 0
    seed: int = 0
    windows: tuple[FiniteRegion, ...] = ()
    batches: int = 20
    init: object = None

    def __post_init__(self):
        if self.sweeps < self.batches or self.batches < 2:
            raise ValueError("need at least two batches and one sweep per batch")
        if self.burn_in < 0:
            raise ValueError("burn-in must be nonnegative")


@dataclass(frozen=True, eq=False)
class HeatBathTable:
    """Single-site update probabilities indexed by the code of the context pattern."""

    context: FiniteRegion
    probs: np.ndarray
    rows: tuple[KernelRow, ...] = field(repr=False)

    def code(self, values: Sequence, alphabet: Alphabet) -> int:
        k = 0
        for v in reversed(values):
            k = k * len(alphabet) + alphabet.index(v)
        return k


def heat_bath_table(s: Specification) -> HeatBathTable:
    """Kernel rows at the origin for every context pattern, in context-code order."""
    d = s.dim
    site = FiniteRegion((origin(d),), d)
    ctx = s.neighbourhood(site)
    A = s.sft.alphabet
    check_enumeration(len(A), len(ctx))
    rows, probs = [], []
    for values in itertools.product(range(len(A)), repeat=len(ctx)):
        # code = sum idx_j |A|^j, so the first context site varies fastest
        symbols = tuple(A.symbols[i] for i in reversed(values))
        row = gamma_row_local(s, site, Pattern(ctx, symbols))
        rows.append(row)
        probs.append(row.probs)
    return HeatBathTable(ctx, np.array(probs, dtype=float), tuple(rows))


def _colour_classes(shape: tuple[int, ...], reach: int) -> list[np.ndarray]:
    """Flat site indices grouped so that no two sites of a class see each other.

    Along each axis sites ``i < L - rem`` get colour ``i mod m`` and the
    ``rem = L mod m`` remaining sites get colours of their own; two sites of a
    class are then at torus distance ``>= m > reach`` along some axis.
    """
    m = reach + 1
    per_axis = []
    for L in shape:
        rem = L % m
        per_axis.append([i % m if i < L - rem else m + i - (L - rem) for i in range(L)])
    classes: dict[tuple, list[int]] = {}
    for flat, cell in enumerate(itertools.product(*(range(L) for L in shape))):
        key = tuple(per_axis[l][c] for l, c in enumerate(cell))
        classes.setdefault(key, []).append(flat)
    return [np.array(v, dtype=np.int64) for _, v in sorted(classes.items())]


def _offset_index(shape: tuple[int, ...], offsets: Iterable[Site]) -> np.ndarray:
    """``idx[site, j]`` = flat index of ``site + offsets[j]`` on the torus."""
    grids = np.indices(shape).reshape(len(shape), -1)
    offsets = list(offsets)
    if not offsets:
        return np.zeros((grids.shape[1], 0), dtype=np.int64)
    out = []
    for off in offsets:
        moved = [(grids[l] + off[l]) % shape[l] for l in range(len(shape))]
        out.append(np.ravel_multi_index(moved, shape))
    return np.stack(out, axis=1)


@dataclass
class EmpiricalMeasure:
    """Translation-averaged pattern counts on a torus, split into batches.

    ``counts[w][b, code]`` counts occurrences of the pattern with code ``code``
    on window ``w`` during batch ``b``; codes use base ``|A|`` with the first
    window site varying fastest.
    """

    alphabet: Alphabet
    windows: tuple[FiniteRegion, ...]
    counts: dict
    seeds: tuple[int, ...]
    sweeps: int
    frozen_sweeps: int = 0
    kind: str = "empirical"

    def _locate(self, region: FiniteRegion) -> tuple[int, list[int]]:
        for w_id, w in enumerate(self.windows):
            if len(w) < len(region) or not region:
                continue
            for anchor in w.sites:
                shift = tuple(a - b for a, b in zip(anchor, region.sites[0]))
                moved = translate(region, shift)
                if moved.issubset(w):
                    return w_id, [w.index(s) for s in moved.sites]
        raise KeyError(f"no recorded window contains a translate of {region}")

    def _marginal(self, region: FiniteRegion) -> tuple[np.ndarray, list[int], int]:
        w_id, pos = self._locate(region)
        return self.counts[self.windows[w_id]], pos, len(self.windows[w_id])

    def _hits(self, pattern: Pattern) -> np.ndarray:
        """Per-batch counts of the pattern and per-batch totals."""
        counts, pos, size = self._marginal(pattern.region)
        q = len(self.alphabet)
        codes = np.arange(counts.shape[1])
        digits = (codes[:, None] // q ** np.arange(size)[None, :]) % q
        want = np.array([self.alphabet.index(v) for v in pattern.values])
        mask = (digits[:, pos] == want[None, :]).all(axis=1)
        return counts[:, mask].sum(axis=1), counts.sum(axis=1)

    def prob(self, pattern: Pattern) -> float:
        if not pattern.region:
            return 1.0
        hits, totals = self._hits(pattern)
        return float(hits.sum() / totals.sum())

    def prob_se(self, pattern: Pattern) -> tuple[float, float]:
        hits, totals = self._hits(pattern)
        return _ratio_with_se(hits, totals)

    def conditional(self, target: Pattern, given: Pattern) -> tuple[float, float]:
        """Estimate and batch-means standard error of ``mu([target] | [given])``."""
        joint = given.merge(target)
        hits, _ = self._hits(joint)
        base, _ = self._hits(given)
        return _ratio_with_se(hits, base)

    def mean(self, window: FiniteRegion, fn: Callable[[tuple], float]) -> tuple[float, float]:
        """Estimate and batch-means standard error of ``E[fn(x_window)]``."""
        counts, pos, size = self._marginal(window)
        q = len(self.alphabet)
        vals = []
        for code in range(counts.shape[1]):
            digits = [(code // q**j) % q for j in range(size)]
            vals.append(fn(tuple(self.alphabet.symbols[digits[k]] for k in pos)))
        vals = np.array(vals, dtype=float)
        per_batch = counts @ vals
        return _ratio_with_se(per_batch, counts.sum(axis=1))

    def merge(self, other: EmpiricalMeasure) -> EmpiricalMeasure:
        """Pool two chains batch by batch; the result does not depend on the order."""
        if other.windows != self.windows or other.alphabet != self.alphabet:
            raise ValueError("cannot merge measures recorded on different windows")
        counts = {w: self.counts[w] + other.counts[w] for w in self.windows}
        return EmpiricalMeasure(
            self.alphabet,
            self.windows,
            counts,
            tuple(sorted(self.seeds + other.seeds)),
            self.sweeps + other.sweeps,
            self.frozen_sweeps + other.frozen_sweeps,
        )

    def dump(self) -> str:
        """Text dump: a header, then per window its sites and ``values count`` lines."""
        q = len(self.alphabet)
        lines = [
            "# gibbskit empirical measure v1",
            f"alphabet {' '.join(map(str, self.alphabet.symbols))}",
            f"seeds {' '.join(map(str, self.seeds))}",
            f"sweeps {self.sweeps}",
            f"frozen_sweeps {self.frozen_sweeps}",
        ]
        for w in self.windows:
            total = self.counts[w].sum(axis=0)
            lines.append("window " + " ".join(",".join(map(str, s)) for s in w.sites))
            for code, c in enumerate(total):
                if c:
                    vals = [self.alphabet.symbols[(code // q**j) % q] for j in range(len(w))]
                    lines.append(f"{' '.join(map(str, vals))} {int(c)}")
        return "\n".join(lines) + "\n"


def _ratio_with_se(num: np.ndarray, den: np.ndarray) -> tuple[float, float]:
    num, den = np.asarray(num, dtype=float), np.asarray(den, dtype=float)
    est = float(num.sum() / den.sum())
    ok = den > 0
    if ok.sum() < 2:
        return est, math.inf
    per = num[ok] / den[ok]
    return est, float(per.std(ddof=1) / math.sqrt(ok.sum()))


def heat_bath_sample(s: Specification, cfg: SamplerConfig,
                     table: HeatBathTable | None = None) -> EmpiricalMeasure:
    """Seeded single-site heat-bath sweeps on a torus.

    Sites are updated colour class by colour class; inside a class no site reads
    another, so the vectorized update equals the sequential one.
    """
    if not s.potential.finite_range:
        raise ValueError("the sampler needs a finite-range potential")
    shape = tuple(cfg.shape)
    if len(shape) != s.dim:
        raise ValueError("torus dimension does not match the model")
    table = table or heat_bath_table(s)
    A = s.sft.alphabet
    q = len(A)
    # an empty context (independent sites) still needs one colour
    reach = max(table.context.radius() - 1, 0)
    if any(L <= 2 * reach for L in shape):
        raise ValueError("torus too small for the kernel neighbourhood")
    rng = np.random.default_rng(cfg.seed)
    n_sites = math.prod(shape)
    init = A.symbols[0] if cfg.init is None else cfg.init
    state = np.full(n_sites, A.index(init), dtype=np.int64)
    _check_torus(s, shape, state)

    ctx_idx = _offset_index(shape, table.context.sites)
    weights = q ** np.arange(len(table.context), dtype=np.int64)
    cum = np.cumsum(table.probs, axis=1)[:, :-1]
    classes = [(c, ctx_idx[c]) for c in _colour_classes(shape, reach)]

    windows = tuple(cfg.windows)
    win_idx = [_offset_index(shape, w.sites) for w in windows]
    win_w = [q ** np.arange(len(w), dtype=np.int64) for w in windows]
    measured = cfg.sweeps
    per_batch = measured // cfg.batches
    counts = {w: np.zeros((cfg.batches, q ** len(w)), dtype=np.int64) for w in windows}

    frozen = 0
    for sweep in range(cfg.burn_in + measured):
        moved = False
        for sites, ctx in classes:
            code = state[ctx] @ weights
            u = rng.random(len(sites))
            new = (u[:, None] >= cum[code]).sum(axis=1)
            if not moved and np.any(new != state[sites]):
                moved = True
            state[sites] = new
        if not moved:
            frozen += 1
        t = sweep - cfg.burn_in
        if t >= 0:
            b = min(t // per_batch, cfg.batches - 1)
            for w, idx, ww in zip(windows, win_idx, win_w):
                counts[w][b] += np.bincount(state[idx] @ ww, minlength=q ** len(w))
    if frozen:
        log.info("heat bath: %d sweeps changed no site", frozen)
    return EmpiricalMeasure(A, windows, counts, (cfg.seed,), measured, frozen)


def _check_torus(s: Specification, shape: tuple[int, ...], state: np.ndarray) -> None:
    if not s.sft.forbidden:
        return
    grid = state.reshape(shape)

    def get(site):
        return s.sft.alphabet.symbols[grid[tuple(c % L for c, L in zip(site, shape))]]

    for cell in itertools.product(*(range(L) for L in shape)):
        if s.sft.violates_at(get, cell):
            raise ValueError("initial torus configuration is not admissible")


def uniform_bernoulli(symbols: Sequence) -> TransferMeasure:
    """Uniform product measure on the one-dimensional full shift."""
    from .potential import zero_potential

    return transfer_gibbs_1d(SftSpec.full_shift(symbols, 1), zero_potential(1, symbols))
