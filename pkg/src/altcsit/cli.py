"""Command-line front end: region, compose, verify, sweep and synergy.

Every command writes JSON (structured results) or CSV (grids) to stdout or ``--out``.
Exit codes: 0 on success, 1 when a scheme verification fails, 2 on usage or config errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Optional, Sequence

from .composer import (
    allocation_to_json,
    applicable_targets,
    classify,
    compose_corner,
    compose_point,
    synergy_gap,
)
from .errors import AltCsitError
from .metrics import DEFAULT_BLOCKS, DEFAULT_GRID, DEFAULT_TOL, _check_grid, verify_scheme
from .region import cost_shape, min_csit, region_inequalities, region_vertices, sum_sdof
from .schemes import SchemeId, build_plan, catalog_entry, mirror_plan
from .states import StatePmf, symmetric_pmf, to_fraction, validate_pmf

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
FIGURES = ("sum_surface", "tradeoff", "cost")

# joint-coding examples emitted by ``synergy`` when no pmf is given
SYNERGY_EXAMPLES: tuple[tuple[str, dict[str, str]], ...] = (
    ("PD/DP", {"PD": "1/2", "DP": "1/2"}),
    ("PD/DP/NN", {"PD": "1/3", "DP": "1/3", "NN": "1/3"}),
    ("PN/NP/DD", {"PN": "1/3", "NP": "1/3", "DD": "1/3"}),
    ("DD/NN", {"DD": "1/2", "NN": "1/2"}),
    ("DN/ND", {"DN": "1/2", "ND": "1/2"}),
    ("PN/NP", {"PN": "1/2", "NP": "1/2"}),
)


class UsageError(Exception):
    """Bad flags or config; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    pmf: Optional[StatePmf] = None
    scheme: Optional[str] = None
    mirrored: bool = False
    target: Optional[str] = None
    point: Optional[tuple[Fraction, Fraction]] = None
    grid: tuple[float, ...] = DEFAULT_GRID
    blocks: int = DEFAULT_BLOCKS
    seed: int = 0
    tol: float = DEFAULT_TOL
    figure: Optional[str] = None
    resolution: int = 10
    s: tuple[Fraction, ...] = field(default_factory=lambda: (Fraction(4, 3),))
    out: Optional[str] = None
    format: str = "json"


# ---------------------------------------------------------------------------
# parsing


def parse_pmf(text: str) -> StatePmf:
    """Read a pmf from a JSON file path, a JSON object, or ``{PD:1/2,DP:1/2}`` / ``PD=1/2,DP=1/2``."""
    text = text.strip()
    if os.path.isfile(text):
        with open(text, encoding="utf-8") as fh:
            raw = json.load(fh)
        if isinstance(raw, dict) and "pmf" in raw:
            raw = raw["pmf"]
        return _pmf_from_obj(raw)
    try:
        return _pmf_from_obj(json.loads(text))
    except json.JSONDecodeError:
        pass
    body = text[1:-1] if text.startswith("{") and text.endswith("}") else text
    raw: dict[str, str] = {}
    for item in filter(None, (x.strip() for x in body.split(","))):
        sep = ":" if ":" in item else "="
        key, _, value = item.partition(sep)
        if not value:
            raise UsageError(f"cannot parse pmf item {item!r}")
        raw[key.strip().strip("'\"")] = value.strip().strip("'\"")
    if not raw:
        raise UsageError("empty pmf")
    return validate_pmf(raw)


def _pmf_from_obj(raw: Any) -> StatePmf:
    if not isinstance(raw, dict):
        raise UsageError("pmf must be an object mapping states to masses")
    return validate_pmf(raw)


def parse_grid(value: Any) -> tuple[float, ...]:
    items = value if isinstance(value, (list, tuple)) else str(value).split(",")
    try:
        grid = tuple(float(x) for x in items)
    except ValueError as exc:
        raise UsageError(f"bad grid {value!r}") from exc
    _check_grid(grid)
    return grid


def parse_fractions(value: Any) -> tuple[Fraction, ...]:
    items = value if isinstance(value, (list, tuple)) else str(value).split(",")
    return tuple(to_fraction(x.strip() if isinstance(x, str) else x) for x in items)


def parse_point(value: Any) -> tuple[Fraction, Fraction]:
    vals = parse_fractions(value)
    if len(vals) != 2:
        raise UsageError("a point needs exactly two coordinates")
    return vals[0], vals[1]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with the same keys as the flags")
    common.add_argument("--pmf", help="pmf file or inline {PD:1/2,DP:1/2}")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--format", choices=("json", "csv"))

    parser = argparse.ArgumentParser(prog="altcsit", description="Secure d.o.f. of the two-user MISO broadcast channel under alternating CSIT.")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("region", parents=[common], help="region half-planes and vertices")

    p = sub.add_parser("compose", parents=[common], help="time-sharing allocation for a corner or point")
    p.add_argument("--target", help="corner name (P1, P2, Q, S, R, AXIS; prefix 'mirror:' for the swap); 'all' for every applicable corner")
    p.add_argument("--point", help="d1,d2 as exact fractions")

    p = sub.add_parser("verify", parents=[common], help="Monte-Carlo check of one scheme")
    p.add_argument("--scheme", help="scheme id, e.g. S1_32 or S3_1(n=3)")
    p.add_argument("--mirrored", action="store_true", default=None, help="verify the user-swapped plan")
    p.add_argument("--grid", help="comma-separated SNR values, strictly increasing")
    p.add_argument("--blocks", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)

    p = sub.add_parser("sweep", parents=[common], help="figure data grids")
    p.add_argument("--figure", choices=FIGURES)
    p.add_argument("--resolution", type=int)
    p.add_argument("--s", help="comma-separated sum targets for the tradeoff figure")

    sub.add_parser("synergy", parents=[common], help="joint versus per-state sum d.o.f.")
    return parser


def load_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            raise
        raise UsageError("invalid arguments") from exc
    values: dict[str, Any] = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                values.update(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
    # flags override the config file
    for key, val in vars(args).items():
        if key not in ("command", "config") and val is not None:
            values[key] = val
    cfg = RunConfig(args.command)
    known = {f for f in RunConfig.__dataclass_fields__} - {"command"}
    unknown = set(values) - known
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    upd: dict[str, Any] = {}
    for key, val in values.items():
        if key == "pmf":
            upd[key] = _pmf_from_obj(val) if isinstance(val, dict) else parse_pmf(str(val))
        elif key == "grid":
            upd[key] = parse_grid(val)
        elif key == "s":
            upd[key] = parse_fractions(val)
        elif key == "point":
            upd[key] = parse_point(val)
        elif key in ("blocks", "seed", "resolution"):
            upd[key] = int(val)
        elif key == "tol":
            upd[key] = float(val)
        elif key == "mirrored":
            upd[key] = bool(val)
        else:
            upd[key] = val
    cfg = replace(cfg, **upd)
    if "format" not in values:
        cfg = replace(cfg, format="csv" if cfg.command == "sweep" else "json")
    if cfg.format not in ("json", "csv"):
        raise UsageError(f"unknown format {cfg.format!r}")
    if cfg.blocks < 1:
        raise UsageError("--blocks must be >= 1")
    return cfg


# ---------------------------------------------------------------------------
# commands; each returns (payload, exit code)


def _need_pmf(cfg: RunConfig) -> StatePmf:
    if cfg.pmf is None:
        raise UsageError(f"{cfg.command} needs --pmf")
    return cfg.pmf


def _pt(p) -> list[str]:
    return [str(p[0]), str(p[1])]


def cmd_region(cfg: RunConfig) -> tuple[Any, int]:
    p = _need_pmf(cfg)
    spec = region_inequalities(p)
    verts = region_vertices(p).vertices
    if cfg.format == "csv":
        return [("d1", "d2")] + [tuple(_pt(v)) for v in verts], EXIT_OK
    return {
        "pmf": p.as_dict(),
        "inequalities": [h.to_json() for h in spec.halfplanes],
        "vertices": [_pt(v) for v in verts],
        "sum_sdof": str(sum_sdof(p)),
    }, EXIT_OK


def cmd_compose(cfg: RunConfig) -> tuple[Any, int]:
    p = _need_pmf(cfg)
    if cfg.point is not None:
        allocs = [compose_point(p, cfg.point)]
    elif cfg.target in (None, "all"):
        allocs = [compose_corner(p, t) for t in applicable_targets(p)]
    else:
        allocs = [compose_corner(p, cfg.target)]
    info = classify(p)
    body = [allocation_to_json(a, p) for a in allocs]
    if cfg.format == "csv":
        rows = [("target", "scheme", "omega", "d1", "d2")]
        for a in body:
            for e in a["entries"]:
                rows.append((a["target"], e["label"], e["omega"], *a["achieved"]))
        return rows, EXIT_OK
    return {
        "pmf": p.as_dict(),
        "case": {"case": info.case, "subcase": info.subcase, "single_user": info.single_user, "relevance": info.relevance},
        "allocations": body,
    }, EXIT_OK


def cmd_verify(cfg: RunConfig) -> tuple[Any, int]:
    if not cfg.scheme:
        raise UsageError("verify needs --scheme")
    sid = SchemeId.parse(cfg.scheme)
    if sid.name == "S3_1" and sid.n is None:
        raise UsageError("S3_1 needs a block parameter, e.g. S3_1(n=3)")
    plan = build_plan(sid)
    pair = catalog_entry(sid).pair
    if cfg.mirrored:
        plan, pair = mirror_plan(plan), (pair[1], pair[0])
    report = verify_scheme(plan, (float(pair[0]), float(pair[1])), cfg.blocks, cfg.grid, cfg.seed, cfg.tol)
    report["expected_dof_exact"] = _pt(pair)
    code = EXIT_OK if report["pass"] else EXIT_FAIL
    if cfg.format == "csv":
        rows = [("P", "own_user1", "own_user2", "leak_user1", "leak_user2")]
        mi = report["mean_mi"]
        for i, power in enumerate(report["grid"]):
            rows.append((repr(power), *(repr(mi[k][i]) for k in ("own_user1", "own_user2", "leak_user1", "leak_user2"))))
        return rows, code
    return report, code


def sum_surface_rows(resolution: int) -> list[tuple]:
    rows: list[tuple] = [("lambda_p", "lambda_d", "sum_sdof")]
    for i in range(resolution + 1):
        for j in range(resolution + 1 - i):
            lp, ld = Fraction(i, resolution), Fraction(j, resolution)
            # the sum depends on the marginals only, so one representative pmf suffices
            p = symmetric_pmf(pp=lp, dd=ld, nn=1 - lp - ld)
            rows.append((str(lp), str(ld), str(sum_sdof(p))))
    return rows


def least_delayed(s: Fraction, lp: Fraction) -> Optional[Fraction]:
    """Smallest ``ld`` reaching sum ``s`` with perfect fraction ``lp``, or None if unreachable."""
    if lp < s - 1:
        return None
    ld = max(Fraction(0), (s - 2 * lp) / 2)
    return ld if lp + ld <= 1 else None


def tradeoff_rows(targets: Sequence[Fraction], resolution: int) -> list[tuple]:
    rows: list[tuple] = [("s", "lambda_p", "lambda_d_min", "feasible", "min_csit")]
    for s in targets:
        corner = min_csit(s)
        grid = sorted({Fraction(i, resolution) for i in range(resolution + 1)} | {corner[0]})
        for lp in grid:
            ld = least_delayed(s, lp)
            mark = int(ld is not None and (lp, ld) == corner)
            rows.append((str(s), str(lp), "" if ld is None else str(ld), int(ld is not None), mark))
    return rows


def cost_rows(resolution: int) -> list[tuple]:
    rows: list[tuple] = [("alpha", "normalized_cost")]
    for i in range(resolution + 1):
        a = Fraction(i, resolution)
        rows.append((str(a), str(cost_shape(a))))
    return rows


def cmd_sweep(cfg: RunConfig) -> tuple[Any, int]:
    if cfg.figure not in FIGURES:
        raise UsageError(f"sweep needs --figure from {FIGURES}")
    if cfg.resolution < 2:
        raise UsageError("--resolution must be >= 2")
    if cfg.figure == "sum_surface":
        rows = sum_surface_rows(cfg.resolution)
    elif cfg.figure == "tradeoff":
        rows = tradeoff_rows(cfg.s, cfg.resolution)
    else:
        rows = cost_rows(cfg.resolution)
    if cfg.format == "json":
        header, *data = rows
        return {"figure": cfg.figure, "rows": [dict(zip(header, r)) for r in data]}, EXIT_OK
    return rows, EXIT_OK


def cmd_synergy(cfg: RunConfig) -> tuple[Any, int]:
    cases = [("pmf", cfg.pmf)] if cfg.pmf is not None else [(name, validate_pmf(raw)) for name, raw in SYNERGY_EXAMPLES]
    table = []
    for name, p in cases:
        joint, separable = synergy_gap(p)
        table.append({"name": name, "pmf": p.as_dict(), "joint": str(joint), "separable": str(separable), "gain": str(joint - separable)})
    if cfg.format == "csv":
        return [("name", "joint", "separable", "gain")] + [(r["name"], r["joint"], r["separable"], r["gain"]) for r in table], EXIT_OK
    return {"synergy": table}, EXIT_OK


COMMANDS = {"region": cmd_region, "compose": cmd_compose, "verify": cmd_verify, "sweep": cmd_sweep, "synergy": cmd_synergy}


def render(payload: Any, fmt: str) -> str:
    if fmt == "csv":
        if not isinstance(payload, list):
            raise UsageError("this command has no CSV form")
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(payload)
        return buf.getvalue()
    return json.dumps(payload, indent=2) + "\n"


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        cfg = load_config(argv)
        payload, code = COMMANDS[cfg.command](cfg)
        text = render(payload, cfg.format)
    except (UsageError, AltCsitError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
