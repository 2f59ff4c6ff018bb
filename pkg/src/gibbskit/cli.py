"""Command-line front end: run verification suites on a model and write a residual report.

Exit status: 0 when every check passes, 1 when a check fails, 2 for usage,
config, schema or enumeration-cap errors, 3 for internal or oracle failures.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import itertools
import math
import sys
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .groupoid import (
    FiniteGroupoid,
    build_truncation,
    conformal_measure,
    kms_iff_conformal_probe,
    truncation_measure,
)
from .lattice import EnumerationCapError, FiniteRegion, ball, origin
from .measures import (
    SamplerConfig,
    capocaccia_residual,
    conformality_residual,
    dlr_residual,
    heat_bath_sample,
    q_dual_fixed_point_residual,
    transfer_gibbs_1d,
    uniform_bernoulli,
)
from .modelio import ExperimentConfig, ModelError, load_config
from .report import Record, render_body, render_header, render_table
from .specification import (
    Specification,
    gamma_cylinder,
    gamma_limit_probe,
    gamma_row,
    gibbsian_gamma,
    consistency_residual,
    properness_check,
)
from .subshift import FramedConfiguration, Pattern, all_patterns, admissible_patterns

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


def probe_regions(d: int, max_size: int) -> list[FiniteRegion]:
    """Small regions containing the origin, up to ``max_size`` sites."""
    out = []
    if d == 1:
        out = [FiniteRegion.interval(0, k) for k in range(1, max_size + 1)]
        if max_size >= 2:
            out.append(FiniteRegion.of([(0,), (2,)]))
    else:
        row = [tuple(k if l == d - 1 else 0 for l in range(d)) for k in range(max_size)]
        out = [FiniteRegion.of(row[:k], d) for k in range(1, max_size + 1)]
    return out


def _region_label(region: FiniteRegion) -> str:
    if region.dim == 1:
        return "[" + ",".join(str(s[0]) for s in region.sites) + "]"
    return "[" + ";".join(",".join(map(str, s)) for s in region.sites) + "]"


def _zscore(est: float, exact: float, se: float) -> float:
    if se > 0:
        return abs(est - exact) / se
    return 0.0 if abs(est - exact) <= 1e-12 else math.inf


def _width_for(s: Specification, region: FiniteRegion) -> int:
    need = s.neighbourhood(region)
    w = 1
    while not need.issubset(ball(region, w)):
        w += 1
    return w


class Runner:
    def __init__(self, cfg: ExperimentConfig, tolerance_scale: float = 1.0):
        self.cfg = cfg
        self.model = cfg.model
        self.s = Specification(self.model.sft, self.model.potential)
        self.tol = {k: v * tolerance_scale for k, v in cfg.tolerances.items()}
        self.records: list[Record] = []
        self.notes: list[str] = []
        self.regions = probe_regions(self.model.dim, cfg.max_region)
        self._measure = None

    # -- helpers ---------------------------------------------------------

    def boundaries(self):
        for name in self.cfg.boundaries:
            yield name, self.model.boundaries[name]

    def measure(self):
        if self._measure is None:
            if self.cfg.measure == "uniform":
                self._measure = uniform_bernoulli(self.model.sft.alphabet.symbols)
            else:
                self._measure = transfer_gibbs_1d(self.model.sft, self.model.potential)
        return self._measure

    def add(self, rec: Record) -> None:
        self.records.append(rec)

    def needs_1d_finite(self, suite: str) -> bool:
        if self.model.dim != 1 or not self.model.potential.finite_range:
            self.notes.append(f"{suite}: needs a one-dimensional finite-range model, skipped")
            return False
        return True

    # -- suites ----------------------------------------------------------

    def spec_check(self) -> None:
        s, tol = self.s, self.tol
        f = s.potential
        for name, x in self.boundaries():
            for lam in self.regions:
                label = _region_label(lam)
                outside = ball(lam, 1).difference(lam).sites[0]
                here = x.value(outside)
                other = next(a for a in s.sft.alphabet.symbols if a != here) if len(s.sft.alphabet) > 1 else here
                worst = max(
                    properness_check(s, lam, Pattern(FiniteRegion((outside,), lam.dim), (b,)), x).residual
                    for b in {here, other}
                )
                self.add(Record.at_most("spec-check/properness", "properness", label, name, worst, 0.0))

                delta = ball(lam, 1)
                rows_err = gamma_row(s, delta, x).error_bound
                res = consistency_residual(s, delta, lam, x)
                self.add(Record.at_most("spec-check/consistency", "consistency", label, name, res,
                                        tol["spec"] + 4 * rows_err))

                pats = admissible_patterns(s.sft, x, lam, s.cap)
                if self.model.interaction is not None:
                    diff = max(
                        abs(gibbsian_gamma(self.model.interaction, s.sft, lam, w, x)[0]
                            - gamma_cylinder(s, lam, w, x))
                        for w in pats
                    )
                    self.add(Record.at_most("spec-check/gibbsian", "hamiltonian-form", label, name, diff,
                                            tol["gibbsian"]))
                if f.finite_range:
                    n0 = lam.radius() + f.range
                    diff = max(
                        abs(gamma_limit_probe(s, lam, w, x, n) - gamma_cylinder(s, lam, w, x))
                        for w in pats
                        for n in (n0, n0 + 1)
                    )
                    self.add(Record.at_most("spec-check/limit", "limit-definition", label, name, diff,
                                            tol["limit"]))

    def dlr_check(self) -> None:
        if not self.needs_1d_finite("dlr-check"):
            return
        mu, s = self.measure(), self.s
        w0 = self.cfg.annulus
        for lam in self.regions:
            label = _region_label(lam)
            w = max(w0 or 0, _width_for(s, lam))
            res = dlr_residual(mu, s, lam, w)
            self.add(Record.at_most("dlr-check/dlr", "dlr-equations", label, self.cfg.measure, res.value,
                                    self.tol["measure"]))
            res = q_dual_fixed_point_residual(mu, s, lam)
            self.add(Record.at_most("dlr-check/fixed-point", "kernel-fixed-point", label, self.cfg.measure,
                                    res.value, self.tol["measure"]))

    def _swap_pairs(self, lam: FiniteRegion, limit: int = 16):
        pats = list(all_patterns(self.s.sft.alphabet, lam))
        return list(itertools.combinations(pats, 2))[:limit]

    def conformal_check(self) -> None:
        if not self.needs_1d_finite("conformal-check"):
            return
        mu, s = self.measure(), self.s
        for lam in self.regions:
            worst = max(
                (conformality_residual(mu, s, om, et).value for om, et in self._swap_pairs(lam)),
                default=0.0,
            )
            self.add(Record.at_most("conformal-check/generators", "conformality", _region_label(lam),
                                    self.cfg.measure, worst, self.tol["measure"]))

    def capocaccia_check(self) -> None:
        if not self.needs_1d_finite("capocaccia-check"):
            return
        mu, s = self.measure(), self.s
        for name, x in self.boundaries():
            for lam in self.regions:
                base = ball(lam, _width_for(s, lam))
                worst = 0.0
                for om, et in self._swap_pairs(lam, limit=4):
                    domain = x.patch(om).restrict(base)
                    worst = max(worst, capocaccia_residual(mu, s, om, et, domain).value)
                self.add(Record.at_most("capocaccia-check/multipliers", "capocaccia", _region_label(lam),
                                        f"{name}/{self.cfg.measure}", worst, self.tol["measure"]))

    def kms_check(self) -> None:
        s, tol = self.s, self.tol["kms"]
        beta = float(self.cfg.kms.get("beta", 1.0))
        frames = [x for _, x in self.boundaries()]
        for lam in self.regions[: min(3, len(self.regions))]:
            label = _region_label(lam)
            G = build_truncation(s, lam, frames)
            if beta != 1.0:
                mu = conformal_measure(G, beta)
            else:
                mu = truncation_measure(s, lam, frames)
            v = kms_iff_conformal_probe(G, mu, beta, tol=tol)
            self.add(Record.at_most("kms-check/truncation", "conformal", label, "all", v.conformal, tol))
            self.add(Record.at_most("kms-check/truncation", "kms", label, "all", v.kms, tol))
            big = [c for c in G.classes if len(c) >= 2]
            if big:
                vp = kms_iff_conformal_probe(G, mu.perturbed(big[0][0]), beta, tol=tol)
                self.add(Record.at_least("kms-check/perturbed", "conformal", label, "all", vp.conformal, 1e-6))
                self.add(Record.at_least("kms-check/perturbed", "kms", label, "all", vp.kms, 1e-6))
        rng = np.random.default_rng(self.cfg.seed)
        n = int(self.cfg.kms.get("instances", 20))
        top = int(self.cfg.kms.get("max_class", 8))
        agree_conf, agree_kms, pert = 0.0, 0.0, math.inf
        for _ in range(n):
            sizes = list(rng.integers(1, top + 1, size=rng.integers(1, 5)))
            G = FiniteGroupoid.random(rng, sizes)
            mu = conformal_measure(G, beta, rng.uniform(0.5, 2.0, len(sizes)))
            v = kms_iff_conformal_probe(G, mu, beta, tol=tol)
            agree_conf, agree_kms = max(agree_conf, v.conformal), max(agree_kms, v.kms)
            big = [c for c in G.classes if len(c) >= 2]
            if big:
                vp = kms_iff_conformal_probe(G, mu.perturbed(big[0][0]), beta, tol=tol)
                pert = min(pert, vp.conformal, vp.kms)
        self.add(Record.at_most("kms-check/random", "conformal", f"{n} groupoids", "-", agree_conf, tol))
        self.add(Record.at_most("kms-check/random", "kms", f"{n} groupoids", "-", agree_kms, tol))
        if math.isfinite(pert):
            self.add(Record.at_least("kms-check/random-perturbed", "kms-and-conformal", f"{n} groupoids", "-",
                                     pert, 1e-6))

    def sample(self) -> None:
        s = self.s
        if not s.potential.finite_range:
            self.notes.append("sample: needs a finite-range potential, skipped")
            return
        sc = self.cfg.sampler
        d = self.model.dim
        shape = tuple(sc.get("shape", [64] if d == 1 else [16] * d))
        sigmas = float(sc.get("sigmas", 3.0))
        site = FiniteRegion((origin(d),), d)
        ctx = s.neighbourhood(site)
        window = ctx.union(site)
        windows = (window,)
        e1 = FiniteRegion.of([origin(d), tuple(1 if l == 0 else 0 for l in range(d))], d)
        if d == 1:
            windows = (window, e1)
        cfg = SamplerConfig(shape, int(sc.get("sweeps", 2000)), int(sc.get("burn_in", 200)), self.cfg.seed,
                            windows, int(sc.get("batches", 20)))
        emp = heat_bath_sample(s, cfg)
        for name, x in self.boundaries():
            given = x.restrict(ctx)
            row = gamma_row(s, site, x)
            a = s.sft.alphabet.symbols[-1]
            target = Pattern(site, (a,))
            est, se = emp.conditional(target, given)
            z = _zscore(est, row.prob(target), se)
            self.add(Record.at_most("sample/conditional", "heat-bath-conditional", "[0]", name, z, sigmas))
        if d == 1:
            mu = transfer_gibbs_1d(s.sft, s.potential)
            syms = s.sft.alphabet.symbols
            if all(isinstance(a, (int, float)) for a in syms):
                exact = math.fsum(
                    a * b * mu.prob(Pattern(e1, (a, b))) for a in syms for b in syms
                )
                est, se = emp.mean(e1, lambda v: v[0] * v[1])
                z = _zscore(est, exact, se)
                self.add(Record.at_most("sample/correlation", "nearest-neighbour-correlation", "[0,1]", "torus",
                                        z, sigmas))

    def transfer_1d(self) -> None:
        if not self.needs_1d_finite("transfer-1d"):
            return
        mu = transfer_gibbs_1d(self.model.sft, self.model.potential)
        A = self.model.sft.alphabet.symbols
        norm = abs(math.fsum(mu.prob(Pattern.line([a])) for a in A) - 1.0)
        shift = max(abs(mu.prob(Pattern.line(w)) - mu.prob(Pattern.line(w, 7)))
                    for w in itertools.product(A, repeat=3))
        add = max(abs(mu.prob(Pattern.line(w)) - math.fsum(mu.prob(Pattern.line(w + (a,))) for a in A))
                  for w in itertools.product(A, repeat=2))
        self.add(Record.at_most("transfer-1d/normalization", "probability", "[0]", "-", norm, 1e-12))
        self.add(Record.at_most("transfer-1d/shift-invariance", "shift-invariance", "[0,1,2]", "-", shift, 1e-12))
        self.add(Record.at_most("transfer-1d/additivity", "refinement", "[0,1]", "-", add, 1e-12))

    SUITE_METHODS: dict[str, Callable] = {
        "spec-check": spec_check,
        "dlr-check": dlr_check,
        "kms-check": kms_check,
        "conformal-check": conformal_check,
        "capocaccia-check": capocaccia_check,
        "sample": sample,
        "transfer-1d": transfer_1d,
    }

    def run(self, suites) -> list[Record]:
        for name in suites:
            self.SUITE_METHODS[name](self)
        return self.records


def run_suite(cfg: ExperimentConfig, suites=None, tolerance_scale: float = 1.0) -> tuple[list[Record], list[str]]:
    runner = Runner(cfg, tolerance_scale)
    runner.run(suites or cfg.suites)
    return runner.records, runner.notes


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gibbskit", description=__doc__.splitlines()[0])
    p.add_argument("--config", required=True, help="experiment config file (JSON)")
    p.add_argument("--suite", choices=list(Runner.SUITE_METHODS) + ["all"],
                   help="run only this suite (default: the suites named in the config)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--out", help="write the structured report to this path")
    p.add_argument("--tolerance-scale", type=float, default=1.0,
                   help="multiply every tolerance by this factor")
    p.add_argument("--version", action="version", version=f"gibbskit {__version__}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not args.tolerance_scale > 0:
        print("error: --tolerance-scale must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ModelError("seed must be nonnegative")
            cfg = ExperimentConfig(**{**cfg.__dict__, "seed": args.seed})
        suites = None
        if args.suite:
            suites = [n for n in Runner.SUITE_METHODS] if args.suite == "all" else [args.suite]
        records, notes = run_suite(cfg, suites, args.tolerance_scale)
    except (ModelError, EnumerationCapError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:  # noqa: BLE001 - every other failure is internal
        print(f"internal error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_INTERNAL

    sys.stdout.write(render_table(records))
    for n in notes:
        print(f"note: {n}")
    if args.out:
        meta = {
            "generated": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            "config": str(args.config),
            "model": cfg.model.name,
            "seed": cfg.seed,
            "tolerance_scale": args.tolerance_scale,
            "version": __version__,
        }
        Path(args.out).write_text(render_header(meta) + render_body(records))
    return EXIT_PASS if all(r.passed for r in records) else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
