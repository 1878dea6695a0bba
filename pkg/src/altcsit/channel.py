"""I.i.d. complex Gaussian fading blocks and the two-receiver MISO channel law."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import LengthMismatch, ZeroChannel

_TINY = 1e-14


@dataclass(frozen=True)
class ChannelBlock:
    """Channel rows for ``n_slots`` slots; ``h[r][t]`` is receiver ``r+1``'s 1x2 row at slot ``t+1``."""

    n_slots: int
    h1: np.ndarray  # shape (n_slots, 2)
    h2: np.ndarray
    seed: int

    def row(self, user: int, slot: int) -> np.ndarray:
        """Channel row of ``user`` (1 or 2) at ``slot`` (1-based)."""
        return (self.h1 if user == 1 else self.h2)[slot - 1]

    def to_json(self) -> str:
        pairs = lambda a: [[[float(z.real), float(z.imag)] for z in r] for r in a]  # noqa: E731
        return json.dumps({"n_slots": self.n_slots, "seed": self.seed, "h1": pairs(self.h1), "h2": pairs(self.h2)})


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def sample_block(n_slots: int, seed: int) -> ChannelBlock:
    """Draw CN(0,1) channel rows for both receivers, deterministically in ``seed``."""
    if n_slots < 1:
        raise ValueError("n_slots must be >= 1")
    rng = np.random.default_rng(seed)
    while True:
        h = _cn(rng, (2, n_slots, 2))
        # measure-zero degeneracies; resample rather than risk a false rank drop
        dets = h[0, :, 0] * h[1, :, 1] - h[0, :, 1] * h[1, :, 0]
        if np.min(np.abs(h)) >= _TINY and np.min(np.abs(dets)) >= _TINY:
            break
    return ChannelBlock(n_slots, h[0].copy(), h[1].copy(), seed)


def block_seeds(seed: int, count: int) -> list[int]:
    """Independent per-block seeds derived from one master seed."""
    children = np.random.SeedSequence(seed).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in children]


def orthogonal_beam(h: np.ndarray) -> np.ndarray:
    """Unit vector ``w`` with ``h @ w == 0`` for the plain (unconjugated) product."""
    h = np.asarray(h, dtype=complex).reshape(2)
    norm = np.linalg.norm(h)
    if norm == 0:
        raise ZeroChannel("orthogonal beam of a zero channel")
    return np.array([-h[1], h[0]]) / norm


def apply_channel(x: np.ndarray, block: ChannelBlock, noise_seed: Optional[int] = None) -> tuple[np.ndarray, np.ndarray]:
    """Outputs ``y(t) = h1(t) x(t) + n1(t)``, ``z(t) = h2(t) x(t) + n2(t)``.

    ``x`` has shape ``(n_slots, 2)``. ``noise_seed=None`` means noiseless.
    """
    x = np.asarray(x, dtype=complex)
    if x.shape != (block.n_slots, 2):
        raise LengthMismatch(f"signal shape {x.shape} vs block of {block.n_slots} slots")
    y = np.einsum("tk,tk->t", block.h1, x)
    z = np.einsum("tk,tk->t", block.h2, x)
    if noise_seed is not None:
        rng = np.random.default_rng(noise_seed)
        y = y + _cn(rng, block.n_slots)
        z = z + _cn(rng, block.n_slots)
    return y, z


def complex_gaussian(shape, variance: float, seed: int) -> np.ndarray:
    """CN(0, variance) draws."""
    return np.sqrt(variance) * _cn(np.random.default_rng(seed), shape)


def power_scale(coeffs: np.ndarray, P: float) -> float:
    """Amplitude factor that makes the expected average transmit power equal ``P``.

    ``coeffs`` has shape ``(n_slots, 2, n_symbols)``; symbols are i.i.d. with variance ``P``,
    so the expected per-slot power is ``P * ||coeffs[t]||_F^2``.
    """
    mean_sq = float(np.mean(np.sum(np.abs(coeffs) ** 2, axis=(1, 2))))
    return 1.0 if mean_sq == 0 else 1.0 / np.sqrt(mean_sq)
