"""Gaussian mutual information on transfer models and d.o.f. slope estimation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .channel import block_seeds, sample_block
from .errors import BadGroup, GridTooSmall
from .schemes import SchemePlan, TransferModel, decodable, transfer_model

DEFAULT_GRID: tuple[float, ...] = tuple(10.0**k for k in range(2, 9))
DEFAULT_BLOCKS = 200
DEFAULT_TOL = 0.05

Group = Union[str, Sequence[int], np.ndarray]


@dataclass(frozen=True)
class MiQuery:
    model: TransferModel
    group: Group
    side: int
    power: float


def _group_cols(model: TransferModel, group: Group) -> np.ndarray:
    if isinstance(group, str):
        if group not in ("u", "v", "q"):
            raise BadGroup(f"unknown group {group!r}")
        cols = model.group(group)
    else:
        cols = np.asarray(group, dtype=int).reshape(-1)
    width = model.m1.shape[1]
    if cols.size == 0:
        raise BadGroup("empty group")
    if np.any(cols < 0) or np.any(cols >= width) or len(set(cols.tolist())) != cols.size:
        raise BadGroup("group columns out of range or repeated")
    return cols


def _logdet_curve(m: np.ndarray, powers: np.ndarray) -> np.ndarray:
    """``log det(I + P M M^H)`` for every ``P``, from the singular values of ``M``."""
    if m.size == 0:
        return np.zeros_like(powers)
    s2 = np.linalg.svd(m, compute_uv=False) ** 2
    return np.sum(np.log1p(np.outer(powers, s2)), axis=1)


def mi_curve(m: np.ndarray, cols: np.ndarray, powers: Sequence[float]) -> np.ndarray:
    """``I(group; out)`` in nats at each power, for symbols CN(0, P) and unit noise."""
    powers = np.asarray(powers, dtype=float)
    cols = cols[np.any(m[:, cols] != 0, axis=0)]
    if cols.size == 0:
        return np.zeros_like(powers)
    rest = np.setdiff1d(np.arange(m.shape[1]), cols)
    val = _logdet_curve(m, powers) - _logdet_curve(m[:, rest], powers)
    return np.maximum(val, 0.0)


def gaussian_mi(q: MiQuery) -> float:
    if not q.power > 0:
        raise ValueError("power must be positive")
    cols = _group_cols(q.model, q.group)
    return float(mi_curve(q.model.matrix(q.side), cols, [q.power])[0])


@dataclass(frozen=True)
class DofEstimate:
    slope: float
    intercept: float
    grid: tuple[tuple[float, float], ...]
    residual: float


def _check_grid(powers: Sequence[float]) -> None:
    p = np.asarray(powers, dtype=float)
    if p.size < 4:
        raise GridTooSmall("need at least 4 power points")
    if np.any(p <= 0) or np.any(np.diff(p) <= 0):
        raise GridTooSmall("powers must be positive and strictly increasing")
    if math.log10(p[-1] / p[0]) < 4 - 1e-9:
        raise GridTooSmall("power grid must span at least 4 decades")


def dof_estimate(points: Sequence[tuple[float, float]]) -> DofEstimate:
    """Least-squares slope of nats versus ``log P`` over the upper half of the grid."""
    _check_grid([p for p, _ in points])
    grid = tuple((math.log(p), float(v)) for p, v in points)
    top = grid[len(grid) // 2 :]
    x = np.array([g[0] for g in top])
    y = np.array([g[1] for g in top])
    xc = x - x.mean()
    slope = float(np.dot(xc, y - y.mean()) / np.dot(xc, xc))
    intercept = float(y.mean() - slope * x.mean())
    residual = float(np.max(np.abs(y - (slope * x + intercept))))
    return DofEstimate(slope, intercept, grid, residual)


@dataclass
class Sweep:
    """Block-averaged MI curves for one plan."""

    plan: SchemePlan
    grid: tuple[float, ...]
    n_blocks: int
    seed: int
    own: dict[int, np.ndarray] = field(default_factory=dict)  # user -> I(own msg; own receiver)
    cross: dict[int, np.ndarray] = field(default_factory=dict)  # user -> I(own msg; other receiver)
    decodable_rate: float = 0.0

    def slope(self, curve: np.ndarray) -> DofEstimate:
        return dof_estimate(list(zip(self.grid, curve.tolist())))


def sweep(plan: SchemePlan, n_blocks: int = DEFAULT_BLOCKS, grid: Sequence[float] = DEFAULT_GRID, seed: int = 0) -> Sweep:
    _check_grid(grid)
    if n_blocks < 1:
        raise ValueError("n_blocks must be >= 1")
    powers = np.asarray(grid, dtype=float)
    out = Sweep(plan, tuple(float(p) for p in grid), n_blocks, seed)
    sums = {k: np.zeros_like(powers) for k in ("own1", "own2", "cross1", "cross2")}
    ok = 0
    for s in block_seeds(seed, n_blocks):
        model = transfer_model(plan, sample_block(plan.n_B, s))
        ok += decodable(model, 1) and decodable(model, 2)
        for user, g in ((1, "u"), (2, "v")):
            cols = model.group(g)
            if cols.size == 0:
                continue
            sums[f"own{user}"] += mi_curve(model.matrix(user), cols, powers)
            sums[f"cross{user}"] += mi_curve(model.matrix(3 - user), cols, powers)
    for user in (1, 2):
        out.own[user] = sums[f"own{user}"] / n_blocks
        out.cross[user] = sums[f"cross{user}"] / n_blocks
    out.decodable_rate = ok / n_blocks
    return out


def leakage_dof(plan: SchemePlan, n_blocks: int = DEFAULT_BLOCKS, grid: Sequence[float] = DEFAULT_GRID, seed: int = 0) -> tuple[float, float]:
    """Slopes of ``I(u; Z | H)`` and ``I(v; Y | H)`` against ``log P`` (per block)."""
    sw = sweep(plan, n_blocks, grid, seed)
    return sw.slope(sw.cross[1]).slope, sw.slope(sw.cross[2]).slope


def message_dof(plan: SchemePlan, n_blocks: int = DEFAULT_BLOCKS, grid: Sequence[float] = DEFAULT_GRID, seed: int = 0) -> tuple[float, float]:
    """Slopes of ``I(u; Y | H)`` and ``I(v; Z | H)`` divided by the block length."""
    sw = sweep(plan, n_blocks, grid, seed)
    return sw.slope(sw.own[1]).slope / plan.n_B, sw.slope(sw.own[2]).slope / plan.n_B


def verify_scheme(
    plan: SchemePlan,
    expected: tuple[float, float],
    n_blocks: int = DEFAULT_BLOCKS,
    grid: Sequence[float] = DEFAULT_GRID,
    seed: int = 0,
    tol: float = DEFAULT_TOL,
) -> dict:
    """Sweep report with pass/fail against an expected d.o.f. pair."""
    sw = sweep(plan, n_blocks, grid, seed)
    own = [sw.slope(sw.own[u]) for u in (1, 2)]
    cross = [sw.slope(sw.cross[u]) for u in (1, 2)]
    d = [e.slope / plan.n_B for e in own]
    leak = [e.slope for e in cross]
    checks = {
        "decodable": sw.decodable_rate == 1.0,
        "message_dof": all(abs(d[i] - float(expected[i])) <= tol for i in range(2)),
        "leakage_dof": all(x <= tol for x in leak),
    }
    return {
        "scheme": str(plan.id),
        "mirrored": plan.mirrored,
        "n_B": plan.n_B,
        "n1": plan.n1,
        "n2": plan.n2,
        "grid": list(sw.grid),
        "n_blocks": n_blocks,
        "seed": seed,
        "mean_mi": {
            "own_user1": sw.own[1].tolist(),
            "own_user2": sw.own[2].tolist(),
            "leak_user1": sw.cross[1].tolist(),
            "leak_user2": sw.cross[2].tolist(),
        },
        "message_dof": d,
        "expected_dof": [float(x) for x in expected],
        "leakage_dof": leak,
        "decodable_rate": sw.decodable_rate,
        "tolerance": tol,
        "checks": checks,
        "pass": all(checks.values()),
    }
