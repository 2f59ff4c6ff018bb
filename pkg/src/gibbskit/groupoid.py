"""Finite principal groupoids: equivalence relations on finite unit sets.

Every class is a pair groupoid, so a function on the groupoid is one square
block per class, convolution is the block matrix product and the involution is
the conjugate transpose. With the dynamics ``tau_t(h) = exp(i t c) h`` the
analytic continuation at ``i beta`` multiplies entrywise by ``exp(-beta c)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .cocycle import cocycle
from .lattice import FiniteRegion
from .specification import Specification, gamma_row
from .subshift import FramedConfiguration, admissible_patterns

ADDITIVITY_TOL = 1e-12


class GroupoidMismatch(ValueError):
    pass


class InsufficientBudget(ValueError):
    """Fewer trials than needed to span the function space of every class."""


@dataclass(frozen=True, eq=False)
class FiniteGroupoid:
    """Units, a partition into classes, and one antisymmetric cocycle matrix per class.

    ``cocycles[k][a, b] = c(u, v)`` for the ``a``-th and ``b``-th units of class ``k``.
    """

    units: tuple[Hashable, ...]
    classes: tuple[tuple[int, ...], ...]
    cocycles: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        flat = sorted(i for c in self.classes for i in c)
        if flat != list(range(len(self.units))):
            raise ValueError("classes must partition the units")
        if len(self.cocycles) != len(self.classes):
            raise ValueError("one cocycle matrix per class is required")
        mats = []
        for cls, C in zip(self.classes, self.cocycles):
            C = np.asarray(C, dtype=float)
            n = len(cls)
            if C.shape != (n, n):
                raise ValueError("cocycle matrix does not match its class")
            if np.any(np.diag(C) != 0):
                raise ValueError("c(x, x) must vanish")
            if np.max(np.abs(C + C.T), initial=0.0) > ADDITIVITY_TOL:
                raise ValueError("cocycle is not antisymmetric")
            # c(x, z) = c(x, y) + c(y, z) for every in-class triple
            defect = C[:, None, :] - C[:, :, None] - C[None, :, :]
            if np.max(np.abs(defect), initial=0.0) > ADDITIVITY_TOL * max(1.0, np.abs(C).max(initial=0)):
                raise ValueError("cocycle is not additive")
            mats.append(C)
        object.__setattr__(self, "cocycles", tuple(mats))

    @classmethod
    def from_levels(cls, units: Sequence[Hashable], classes: Sequence[Sequence[int]],
                    levels: Sequence[float]) -> FiniteGroupoid:
        """Cocycle ``c(x, y) = V(y) - V(x)`` from unit levels ``V``."""
        V = np.asarray(levels, dtype=float)
        classes = tuple(tuple(c) for c in classes)
        mats = tuple(V[list(c)][None, :] - V[list(c)][:, None] for c in classes)
        return cls(tuple(units), classes, mats)

    @classmethod
    def random(cls, rng: np.random.Generator, sizes: Sequence[int], scale: float = 1.0) -> FiniteGroupoid:
        n = sum(sizes)
        starts = np.cumsum([0, *sizes])
        classes = [tuple(range(starts[k], starts[k + 1])) for k in range(len(sizes))]
        return cls.from_levels(range(n), classes, rng.normal(0.0, scale, n))

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(c) for c in self.classes)

    def dimension(self) -> int:
        """Dimension of the space of functions on the groupoid."""
        return sum(n * n for n in self.sizes)


@dataclass(frozen=True, eq=False)
class GroupoidFunction:
    groupoid: FiniteGroupoid
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        if len(self.blocks) != len(self.groupoid.classes):
            raise GroupoidMismatch("one block per class is required")
        for b, n in zip(self.blocks, self.groupoid.sizes):
            if b.shape != (n, n):
                raise GroupoidMismatch("block does not match its class")

    @classmethod
    def unit(cls, G: FiniteGroupoid) -> GroupoidFunction:
        """Indicator of the unit space, the identity for convolution."""
        return cls(G, tuple(np.eye(n, dtype=complex) for n in G.sizes))

    @classmethod
    def zero(cls, G: FiniteGroupoid) -> GroupoidFunction:
        return cls(G, tuple(np.zeros((n, n), dtype=complex) for n in G.sizes))

    @classmethod
    def matrix_unit(cls, G: FiniteGroupoid, k: int, a: int, b: int) -> GroupoidFunction:
        """Indicator of the single arrow from the ``a``-th to the ``b``-th unit of class ``k``."""
        blocks = [np.zeros((n, n), dtype=complex) for n in G.sizes]
        blocks[k][a, b] = 1.0
        return cls(G, tuple(blocks))

    @classmethod
    def random(cls, G: FiniteGroupoid, rng: np.random.Generator) -> GroupoidFunction:
        return cls(G, tuple(rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)) for n in G.sizes))

    def _check(self, other: GroupoidFunction) -> None:
        if other.groupoid is not self.groupoid:
            raise GroupoidMismatch("functions live on different groupoids")

    def __add__(self, other: GroupoidFunction) -> GroupoidFunction:
        self._check(other)
        return GroupoidFunction(self.groupoid, tuple(a + b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other: GroupoidFunction) -> GroupoidFunction:
        self._check(other)
        return GroupoidFunction(self.groupoid, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def scale(self, z: complex) -> GroupoidFunction:
        return GroupoidFunction(self.groupoid, tuple(z * a for a in self.blocks))

    def max_abs(self) -> float:
        return max((float(np.abs(b).max(initial=0.0)) for b in self.blocks), default=0.0)


def convolve(a: GroupoidFunction, b: GroupoidFunction) -> GroupoidFunction:
    """``(a * b)(x, z) = sum_y a(x, y) b(y, z)``."""
    a._check(b)
    return GroupoidFunction(a.groupoid, tuple(x @ y for x, y in zip(a.blocks, b.blocks)))


def involution(a: GroupoidFunction) -> GroupoidFunction:
    """``a*(x, y) = conj(a(y, x))``."""
    return GroupoidFunction(a.groupoid, tuple(x.conj().T for x in a.blocks))


def evolve_imaginary(b: GroupoidFunction, beta: float) -> GroupoidFunction:
    """``tau_{i beta}(b) = exp(-beta c) b``."""
    G = b.groupoid
    return GroupoidFunction(G, tuple(np.exp(-beta * C) * x for C, x in zip(G.cocycles, b.blocks)))


@dataclass(frozen=True, eq=False)
class UnitMeasure:
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0):
            raise ValueError("unit weights must be nonnegative")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise ValueError("unit weights must sum to 1")
        object.__setattr__(self, "weights", w)

    @classmethod
    def normalized(cls, weights) -> UnitMeasure:
        w = np.asarray(weights, dtype=float)
        return cls(w / math.fsum(w))

    def perturbed(self, unit: int, factor: float = 1.1) -> UnitMeasure:
        w = self.weights.copy()
        w[unit] *= factor
        return UnitMeasure.normalized(w)


def state(h: GroupoidFunction, mu: UnitMeasure) -> complex:
    """``phi_mu(h) = sum_x h(x, x) mu(x)``."""
    G = h.groupoid
    return complex(
        sum(np.dot(np.diag(b), mu.weights[list(c)]) for b, c in zip(h.blocks, G.classes))
    )


def counting_measures(G: FiniteGroupoid, mu: UnitMeasure) -> tuple[tuple[np.ndarray, ...], tuple[np.ndarray, ...]]:
    """``nu_r{(x, y)} = mu(x)`` and ``nu_s{(x, y)} = mu(y)``, one block per class."""
    nu_r, nu_s = [], []
    for c in G.classes:
        m = mu.weights[list(c)]
        nu_r.append(np.repeat(m[:, None], len(c), axis=1))
        nu_s.append(np.repeat(m[None, :], len(c), axis=0))
    return tuple(nu_r), tuple(nu_s)


@dataclass(frozen=True, eq=False)
class RadonNikodym:
    """``D(x, y) = mu(x) / mu(y)`` per class; ``nan`` outside the domain."""

    blocks: tuple[np.ndarray, ...]
    out_of_domain: tuple[tuple[Hashable, Hashable], ...]

    @property
    def quasi_invariant(self) -> bool:
        return not self.out_of_domain


def rn_derivative(G: FiniteGroupoid, mu: UnitMeasure) -> RadonNikodym:
    blocks, bad = [], []
    for c in G.classes:
        m = mu.weights[list(c)]
        D = np.full((len(c), len(c)), np.nan)
        if np.any(m > 0):
            for a in range(len(c)):
                for b in range(len(c)):
                    if m[a] > 0 and m[b] > 0:
                        D[a, b] = m[a] / m[b]
                    else:
                        bad.append((G.units[c[a]], G.units[c[b]]))
        blocks.append(D)
    return RadonNikodym(tuple(blocks), tuple(bad))


def conformal_residual(G: FiniteGroupoid, mu: UnitMeasure, beta: float = 1.0) -> float:
    """``max |D(x, y) - exp(-beta c(x, y))|``; ``inf`` if ``mu`` is not quasi-invariant.

    Pairs are taken with ``x`` before ``y`` in the class: both sides invert
    under the flip, so the reversed pairs vanish exactly when these do.
    """
    rn = rn_derivative(G, mu)
    if not rn.quasi_invariant:
        return math.inf
    worst = 0.0
    for D, C in zip(rn.blocks, G.cocycles):
        ok = ~np.isnan(D) & np.triu(np.ones(D.shape, dtype=bool), 1)
        if ok.any():
            worst = max(worst, float(np.abs(D[ok] - np.exp(-beta * C[ok])).max()))
    return worst


def kms_residual(G: FiniteGroupoid, mu: UnitMeasure, beta: float,
                 trials: Sequence[tuple[GroupoidFunction, GroupoidFunction]]) -> float:
    """``max |phi_mu(a * tau_{i beta}(b)) - phi_mu(b * a)|`` over the trials."""
    worst = 0.0
    for a, b in trials:
        if a.groupoid is not G or b.groupoid is not G:
            raise GroupoidMismatch("trial lives on another groupoid")
        lhs = state(convolve(a, evolve_imaginary(b, beta)), mu)
        rhs = state(convolve(b, a), mu)
        worst = max(worst, abs(lhs - rhs))
    return worst


def matrix_unit_trials(G: FiniteGroupoid) -> list[tuple[GroupoidFunction, GroupoidFunction]]:
    """Pairs ``(e_{ab}, e_{ba})``; every other pair of matrix units gives 0 on both sides."""
    return [
        (GroupoidFunction.matrix_unit(G, k, a, b), GroupoidFunction.matrix_unit(G, k, b, a))
        for k, n in enumerate(G.sizes)
        for a in range(n)
        for b in range(n)
    ]


@dataclass(frozen=True)
class KmsVerdict:
    conformal: float
    kms: float
    tolerance: float
    trials: int

    @property
    def conformal_ok(self) -> bool:
        return self.conformal <= self.tolerance

    @property
    def kms_ok(self) -> bool:
        return self.kms <= self.tolerance

    @property
    def agree(self) -> bool:
        return self.conformal_ok == self.kms_ok


def kms_iff_conformal_probe(G: FiniteGroupoid, mu: UnitMeasure, beta: float = 1.0,
                            budget: int | None = None, tol: float = 1e-10) -> KmsVerdict:
    """Both residuals, the KMS one over matrix-unit trials spanning every class."""
    need = G.dimension()
    if budget is not None and budget < need:
        raise InsufficientBudget(f"need {need} trials to span the function space, got {budget}")
    trials = matrix_unit_trials(G)
    return KmsVerdict(conformal_residual(G, mu, beta), kms_residual(G, mu, beta, trials), tol, len(trials))


def conformal_measure(G: FiniteGroupoid, beta: float = 1.0,
                      class_weights: Sequence[float] | None = None) -> UnitMeasure:
    """A measure with ``D = exp(-beta c)`` and the given mass on each class."""
    cw = np.ones(len(G.classes)) if class_weights is None else np.asarray(class_weights, float)
    w = np.zeros(len(G.units))
    for c, C, m in zip(G.classes, G.cocycles, cw):
        # mu(x_a) / mu(x_0) = exp(-beta c(x_a, x_0)) = exp(beta c(x_0, x_a))
        rel = np.exp(beta * (C[0] - C[0].max()))
        w[list(c)] = m * rel / math.fsum(rel)
    return UnitMeasure.normalized(w)


# --------------------------------------------------------------------------
# truncations of the Gibbs relation


def build_truncation(s: Specification, region: FiniteRegion,
                     boundaries: FramedConfiguration | Sequence[FramedConfiguration]) -> FiniteGroupoid:
    """Points ``omega x`` for admissible ``omega`` on ``region``; one class per boundary ``x``."""
    if isinstance(boundaries, FramedConfiguration):
        boundaries = [boundaries]
    units, classes, mats = [], [], []
    for x in boundaries:
        pts = [x.patch(p) for p in admissible_patterns(s.sft, x, region, s.cap)]
        n = len(pts)
        C = np.zeros((n, n))
        for a in range(n):
            for b in range(a + 1, n):
                v = cocycle(s.potential, pts[a], pts[b], s.tolerance).value
                C[a, b], C[b, a] = v, -v
        classes.append(tuple(range(len(units), len(units) + n)))
        units.extend(pts)
        mats.append(C)
    return FiniteGroupoid(tuple(units), tuple(classes), tuple(mats))


def truncation_measure(s: Specification, region: FiniteRegion,
                       boundaries: FramedConfiguration | Sequence[FramedConfiguration],
                       class_weights: Sequence[float] | None = None) -> UnitMeasure:
    """Kernel rows ``gamma_Lambda(. | x)`` on each class, mixed by ``class_weights``."""
    if isinstance(boundaries, FramedConfiguration):
        boundaries = [boundaries]
    cw = np.ones(len(boundaries)) if class_weights is None else np.asarray(class_weights, float)
    w = []
    for x, m in zip(boundaries, cw):
        row = gamma_row(s, region, x)
        w.extend(m * p for p in row.probs if p > 0)
    return UnitMeasure.normalized(w)
