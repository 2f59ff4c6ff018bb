"""Model matrix shared by the module tests and the acceptance suite."""

from __future__ import annotations

import itertools

from gibbskit.lattice import FiniteRegion, box
from gibbskit.potential import IsingParams, a_phi, ising
from gibbskit.specification import Specification
from gibbskit.subshift import (
    FrameInadmissibleError,
    FramedConfiguration,
    Pattern,
    SftSpec,
    TabulatedBoundary,
    validate_frame,
)

SPINS = (-1, 1)

# (J, h) pairs; (0, 0) is the zero interaction, so f = A_Phi vanishes
ISING_PARAMS = [(0.0, 0.0), (0.3, 0.0), (0.3, 0.5), (1.0, 0.0), (1.0, 0.5)]


def full_spins(d: int = 1) -> SftSpec:
    return SftSpec.full_shift(SPINS, d)


def golden_spins() -> SftSpec:
    """Golden-mean shift on spins: ``+1 +1`` is forbidden."""
    return SftSpec.from_adjacency(SPINS, [[1, 1], [1, 0]])


def ising_spec(sft: SftSpec, J: float, h: float) -> tuple[Specification, object]:
    phi = ising(IsingParams(J, h), sft.dim)
    return Specification(sft, a_phi(phi)), phi


def matrix_1d():
    """``(label, sft, J, h)`` over the one-dimensional test matrix."""
    for name, sft in (("full", full_spins()), ("golden", golden_spins())):
        for J, h in ISING_PARAMS:
            yield f"{name} J={J} h={h}", sft, J, h


def frames_1d(sft: SftSpec) -> list[tuple[str, FramedConfiguration]]:
    cands = [
        ("plus", FramedConfiguration.constant(1, 1)),
        ("minus", FramedConfiguration.constant(-1, 1)),
        ("alternating", FramedConfiguration.periodic((2,), (1, -1))),
        ("defect", FramedConfiguration(Pattern.line([1, -1, 1, -1, -1], -2),
                                       TabulatedBoundary.of(-1, {(4,): 1}))),
    ]
    return [(n, x) for n, x in cands if admissible(sft, x)]


def frames_2d() -> list[tuple[str, FramedConfiguration]]:
    return [
        ("plus", FramedConfiguration.constant(1, 2)),
        ("checkerboard", FramedConfiguration.periodic((2, 2), (1, -1, -1, 1))),
        ("defect", FramedConfiguration(Pattern.from_mapping({(0, 2): -1, (-2, -1): -1}),
                                       TabulatedBoundary.of(1, {(2, 2): -1}))),
    ]


def admissible(sft: SftSpec, x: FramedConfiguration) -> bool:
    try:
        validate_frame(sft, x)
    except FrameInadmissibleError:
        return False
    return True


def subsets(region: FiniteRegion):
    """Every nonempty subregion."""
    sites = region.sites
    for k in range(1, len(sites) + 1):
        for combo in itertools.combinations(sites, k):
            yield FiniteRegion.of(combo, region.dim)


DELTA_1D = FiniteRegion.interval(-2, 3)
DELTA_2D = box(2, 2)


def regions_2d() -> list[FiniteRegion]:
    of = lambda pts: FiniteRegion.of(pts, 2)
    return [
        of([(0, 0)]),
        of([(-1, -1)]),
        of([(0, 1)]),
        of([(0, 0), (1, 0)]),
        of([(0, 0), (0, 1)]),
        of([(-1, 1), (1, -1)]),
        of([(0, 0), (1, 0), (0, 1), (1, 1)]),
        of([(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)]),
        of([(-1, -1), (0, -1), (1, -1)]),
        DELTA_2D,
    ]
