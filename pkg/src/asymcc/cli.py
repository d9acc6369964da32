"""Command-line front end.

Exit codes: 0 success, 1 validation error, 2 infeasible design,
3 golden-table mismatch, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .analytics import dof_grouping, dof_min_g, phantom_design, render_dof
from .errors import (
    AsymCCError,
    ConfigError,
    DomainError,
    FeasibilityError,
    ScheduleSizeError,
    SchedulingError,
)
from .model import validate_config
from .optimizer import is_feasible, phantom_grid, solve_phantom
from .scenario import OUTPUT_FORMATS, Scenario, load_scenario
from .scheduler import (
    DEFAULT_MAX_USERS,
    build_grouping_schedule,
    build_min_g_schedule,
    build_phantom_schedule,
    dumps_schedules,
    realized_dof,
    validate_schedule,
)
from .tables import PRESETS, reproduce
from .verifier import verify_schedule

EXIT_OK, EXIT_VALIDATION, EXIT_FEASIBILITY, EXIT_GOLDEN, EXIT_VERIFY = 0, 1, 2, 3, 4
SCHEMES = ("min-g", "grouping", "phantom")


@dataclass
class ComparisonRow:
    label: str
    min_g: Fraction
    grouping: Fraction | None
    phantom: Fraction
    phantom_triple: tuple[int, int, int]
    grouping_note: str = ""

    @property
    def winner(self) -> str:
        values = {"min-g": self.min_g, "phantom": self.phantom}
        if self.grouping is not None:
            values["grouping"] = self.grouping
        top = max(values.values())
        return "=".join(name for name in SCHEMES if values.get(name) == top)

    def as_dict(self) -> dict:
        def pair(v):
            return None if v is None else {"rendered": render_dof(v), "exact": str(v)}

        return {
            "label": self.label,
            "min_g": pair(self.min_g),
            "grouping": pair(self.grouping),
            "grouping_note": self.grouping_note,
            "phantom": pair(self.phantom),
            "phantom_design": dict(zip(("hat_G", "omega", "beta"), self.phantom_triple)),
            "winner": self.winner,
        }


def compare(scn: Scenario) -> ComparisonRow:
    cfg = scn.config
    validate_config(cfg)
    mg = dof_min_g(cfg)
    try:
        gp, note = dof_grouping(cfg).dof, ""
    except DomainError as exc:
        gp, note = None, str(exc)
    best = solve_phantom(cfg).best
    return ComparisonRow(scn.label, mg.dof, gp, best.dof, (best.hat_G, best.omega, best.beta), note)


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _parse_range(text: str) -> range:
    lo, _, hi = text.partition(":")
    return range(int(lo), int(hi) + 1)


def parse_seeds(text: str) -> list[int]:
    """``"1..10"``, ``"3"`` or ``"1,4,9"``."""
    seeds: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            seeds.extend(range(int(lo), int(hi) + 1))
        elif part:
            seeds.append(int(part))
    if not seeds:
        raise DomainError(f"no seeds in {text!r}")
    return seeds


def _fmt(args, scn: Scenario | None = None) -> str:
    return args.format or (scn.output_format if scn else "table")


def cmd_dof(args) -> int:
    scn = load_scenario(args.scenario)
    row = compare(scn)
    fmt = _fmt(args, scn)
    grid = None
    if args.grid:
        cfg = scn.config
        t = cfg.cc_gain
        hat_G = args.ghat or cfg.groups[-1].rx_antennas
        if args.omega_range:
            omegas = _parse_range(args.omega_range)
        else:
            top = t + 1
            while top < cfg.num_users and is_feasible(top + 1, 1, t, cfg.tx_antennas, hat_G):
                top += 1
            omegas = range(t + 1, top + 1)
        grid = phantom_grid(cfg, hat_G, omegas, range(1, hat_G + 1))

    if fmt == "json":
        doc = row.as_dict()
        if grid is not None:
            doc["grid"] = [
                {"hat_G": c.hat_G, "omega": c.omega, "beta": c.beta,
                 "dof": None if c.dof is None else {"rendered": render_dof(c.dof), "exact": str(c.dof)}}
                for c in grid
            ]
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["label", "min_g", "grouping", "phantom", "hat_G", "omega", "beta", "winner"])
        w.writerow([row.label, render_dof(row.min_g),
                    "" if row.grouping is None else render_dof(row.grouping),
                    render_dof(row.phantom), *row.phantom_triple, row.winner])
        if grid is not None:
            w.writerow([])
            w.writerow(["hat_G", "omega", "beta", "dof"])
            for c in grid:
                w.writerow([c.hat_G, c.omega, c.beta, "--" if c.dof is None else render_dof(c.dof)])
        _emit(buf.getvalue(), args.out)
    else:
        g = "n/a" if row.grouping is None else render_dof(row.grouping)
        lines = [
            f"{'scenario':<12} {'min-G':>8} {'grouping':>9} {'phantom*':>9}  {'(hat_G, omega, beta)':<22} winner",
            f"{row.label:<12} {render_dof(row.min_g):>8} {g:>9} {render_dof(row.phantom):>9}  "
            f"{str(row.phantom_triple):<22} {row.winner}",
        ]
        if row.grouping_note:
            lines.append(f"grouping not applicable: {row.grouping_note}")
        if grid is not None:
            omegas = sorted({c.omega for c in grid})
            lines.append("")
            lines.append(f"phantom grid, hat_G={grid[0].hat_G}")
            lines.append("  ".join(f"{h:>8}" for h in ["beta\\omega"] + [str(o) for o in omegas]))
            for beta in sorted({c.beta for c in grid}):
                cells = {c.omega: c for c in grid if c.beta == beta}
                vals = ["--" if cells[o].dof is None else render_dof(cells[o].dof) for o in omegas]
                lines.append("  ".join(f"{x:>8}" for x in [str(beta)] + vals))
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_tables(args) -> int:
    presets = PRESETS if args.preset == "all" else (args.preset,)
    results = [reproduce(p) for p in presets]
    if args.format == "json":
        doc = [{"preset": r.preset, "ok": r.ok,
                "cells": [{"label": c.label, "computed": c.shown, "exact": None if c.value is None else str(c.value),
                           "published": c.golden or "--", "ok": c.ok} for c in r.cells]}
               for r in results]
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
    else:
        chunks = []
        for r in results:
            status = "all cells match" if r.ok else f"{len(r.mismatches)} MISMATCHES\n{r.diff()}"
            chunks.append(f"{r.text}\n-> {r.preset}: {len(r.cells)} cells, {status}\n")
        _emit("\n".join(chunks), args.out)
    return EXIT_OK if all(r.ok for r in results) else EXIT_GOLDEN


def _phantom_triple(args, scn: Scenario) -> tuple[int, int, int]:
    explicit = (args.ghat, args.omega, args.beta)
    if any(x is not None for x in explicit):
        if None in explicit:
            raise DomainError("--ghat, --omega and --beta must be given together")
        return explicit
    if scn.phantom is not None:
        return scn.phantom
    b = solve_phantom(scn.config).best
    return (b.hat_G, b.omega, b.beta)


def _build(args, scn: Scenario):
    cfg = scn.config
    kw = {"max_users": args.max_users}
    if args.scheme == "min-g":
        plan = dof_min_g(cfg)
        return [build_min_g_schedule(cfg, plan=plan, **kw)], plan
    if args.scheme == "grouping":
        plan = dof_grouping(cfg)
        return build_grouping_schedule(cfg, plan=plan, **kw), plan
    g, o, b = _phantom_triple(args, scn)
    plan = phantom_design(cfg, g, o, b)  # raises FeasibilityError before any construction
    policy = args.policy or scn.removal_policy
    return [build_phantom_schedule(cfg, g, o, b, policy, args.seed, **kw)], plan


def cmd_schedule(args) -> int:
    scn = load_scenario(args.scenario)
    schedules, plan = _build(args, scn)
    plans = plan.groups if args.scheme == "grouping" else [plan] * len(schedules)
    reports = [validate_schedule(s, scn.config, p) for s, p in zip(schedules, plans)]
    _emit(dumps_schedules(schedules), args.out)
    total = sum(len(s.transmissions) for s in schedules)
    for s, r in zip(schedules, reports):
        extra = ""
        if s.hat_G is not None:
            extra = f", perfect partition: {r.perfect_partition}"
        print(f"interval {s.interval}: {len(s.transmissions)} transmissions, counts {r.counts}, "
              f"max repetition {r.max_repetition}/{r.repetition_bound}{extra}, "
              f"{len(r.violations)} violations", file=sys.stderr)
        for msg in r.violations[:20]:
            print(f"  violation: {msg}", file=sys.stderr)
    print(f"{args.scheme}: {total} transmissions, realized DoF {render_dof(realized_dof(schedules))}",
          file=sys.stderr)
    return EXIT_OK if all(r.ok for r in reports) else EXIT_VALIDATION


def cmd_verify(args) -> int:
    scn = load_scenario(args.scenario)
    schedules, _ = _build(args, scn)
    seeds = parse_seeds(args.seeds) if args.seeds else list(scn.seeds)
    res = verify_schedule(schedules, scn.config, seeds, policy=args.combiner)
    if args.out:
        Path(args.out).write_text(res.to_csv())
    fmt = _fmt(args, scn)
    summary = {
        "scheme": args.scheme,
        "transmissions": sum(len(s.transmissions) for s in schedules),
        "seeds": seeds,
        "pass_rate": res.pass_rate,
        "worst_residual": res.worst_residual,
        "worst_sigma_min": res.worst_sigma_min,
        "redraws": res.redraws,
        "feasibility_errors": res.feasibility_errors,
        "passed": res.passed,
    }
    if fmt == "json":
        print(json.dumps(summary, indent=2))
    elif fmt == "csv" and not args.out:
        sys.stdout.write(res.to_csv())
    else:
        print(f"{args.scheme}: {summary['transmissions']} transmissions x {len(seeds)} seeds, "
              f"pass rate {res.pass_rate:.4f}, worst residual {res.worst_residual:.2e}, "
              f"worst sigma_min {res.worst_sigma_min:.2e}, redraws {res.redraws}")
        for msg in res.feasibility_errors[:20]:
            print(f"  feasibility: {msg}")
    if res.feasibility_errors:
        return EXIT_FEASIBILITY
    return EXIT_OK if res.passed else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="asymcc", description="Coded-caching DoF analysis for asymmetric MIMO downlinks.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, scheme=False):
        sp.add_argument("--scenario", required=True, help="scenario file or built-in name (example1, table1a, ...)")
        sp.add_argument("--format", choices=OUTPUT_FORMATS, default=None)
        sp.add_argument("--out", default=None, help="write output here instead of stdout")
        if scheme:
            sp.add_argument("--scheme", choices=SCHEMES, required=True)
            sp.add_argument("--ghat", type=int)
            sp.add_argument("--omega", type=int)
            sp.add_argument("--beta", type=int)
            sp.add_argument("--policy", choices=("drop-last", "random"), default=None)
            sp.add_argument("--seed", type=int, default=0, help="seed for random phantom removal")
            sp.add_argument("--max-users", type=int, default=DEFAULT_MAX_USERS)

    sp = sub.add_parser("dof", help="compare the three schemes")
    common(sp)
    sp.add_argument("--grid", action="store_true", help="also print the phantom feasibility grid")
    sp.add_argument("--ghat", type=int, help="hat_G for the grid (default: largest group antenna count)")
    sp.add_argument("--omega-range", help="grid omega window, e.g. 5:10")
    sp.set_defaults(func=cmd_dof)

    sp = sub.add_parser("tables", help="reproduce the published tables")
    sp.add_argument("preset", choices=PRESETS + ("all",))
    sp.add_argument("--format", choices=("table", "json"), default="table")
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=cmd_tables)

    sp = sub.add_parser("schedule", help="build and validate a delivery schedule")
    common(sp, scheme=True)
    sp.set_defaults(func=cmd_schedule)

    sp = sub.add_parser("verify", help="Monte-Carlo decodability check of a schedule")
    common(sp, scheme=True)
    sp.add_argument("--seeds", help="e.g. 1..10 or 1,2,5 (default: scenario seeds)")
    sp.add_argument("--combiner", choices=("svd", "random"), default="svd")
    sp.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FeasibilityError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_FEASIBILITY
    except (ConfigError, DomainError, ScheduleSizeError, SchedulingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except AsymCCError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
