"""Trajectory simulation for the Beta(2-a, a) n-coalescent.

Two modes are provided.  The spectrum mode tracks only the counts of blocks
of size 1..s plus one bucket of bigger blocks, which is exact for every
Z_{r,.} with r <= s (a block that once exceeds size s can never shrink) and
keeps the per-jump state O(s).  The exact mode keeps fully labeled
partitions and exists as a small-n oracle.

Seeding is counter-based: a root seed plus replicate index are fed through
numpy's SeedSequence, which is split into one stream for the jump sizes and
holding times and one for the block choices, so both modes can share an
identical jump-size sequence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .rates import AlphaModel, log_total_rate

__all__ = [
    "SpectrumState",
    "CoalescentPath",
    "LabeledPartition",
    "RescaledWalk",
    "path_seed_streams",
    "simulate_path",
    "simulate_partition",
    "order_r_lengths",
    "rescaled_walk",
    "dump_path_csv",
]

EXACT_MODE_CAP = 1000


def path_seed_streams(seed, replicate: int = 0):
    """Derive the (jump, choice) kernel seeds for one replicate.

    Both are uint32 words drawn from SeedSequence(seed, spawn_key=(replicate,)),
    so replicate r of root seed s is reproducible in isolation.
    """
    ss = np.random.SeedSequence(seed, spawn_key=(replicate,))
    state = ss.generate_state(2, np.uint32)
    return int(state[0]), int(state[1])


@dataclass(frozen=True)
class SpectrumState:
    """Counts of blocks of size 1..s plus the count of bigger blocks."""

    small_counts: np.ndarray
    big_count: int
    block_count: int
    leaves_n: int

    def __post_init__(self):
        if self.block_count < 1:
            raise ValueError("block_count must be >= 1")
        if int(np.sum(self.small_counts)) + self.big_count != self.block_count:
            raise ValueError("block_count must equal small counts plus big count")


@dataclass(frozen=True)
class LabeledPartition:
    """A partition of {1..n} into disjoint blocks of leaf labels."""

    blocks: tuple

    def validate(self, n: int) -> None:
        seen = set()
        for b in self.blocks:
            if seen & b:
                raise ValueError("blocks are not disjoint")
            seen |= b
        if seen != set(range(1, n + 1)):
            raise ValueError("blocks do not cover {1..n}")

    def spectrum(self, s: int) -> np.ndarray:
        out = np.zeros(s, dtype=np.int64)
        for b in self.blocks:
            if len(b) <= s:
                out[len(b) - 1] += 1
        return out


@dataclass
class CoalescentPath:
    """One realized trajectory of the coalescent.

    ``deltas[k-1]`` is the k-th jump size, ``block_counts[k]`` the block
    count after k jumps, ``hold_samples[k]`` the unit-exponential factor
    attached to the k-th holding period.  ``spectrum_rows`` holds Z_{r,k}
    for r <= s and all k when the path was recorded; streamed paths carry
    only the accumulated length sums.
    """

    alpha_model: AlphaModel
    leaves_n: int
    s: int
    deltas: np.ndarray
    block_counts: np.ndarray
    hold_samples: np.ndarray
    spectrum_rows: np.ndarray | None
    lengths_exponential: np.ndarray
    lengths_rao_blackwell: np.ndarray
    seed: object = None
    replicate: int = 0
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def tau_n(self) -> int:
        return len(self.deltas)

    def spectrum_state(self, k: int) -> SpectrumState:
        if self.spectrum_rows is None:
            raise ValueError("path was streamed; spectrum rows not recorded")
        small = self.spectrum_rows[k]
        x = int(self.block_counts[k])
        return SpectrumState(small, x - int(small.sum()), x, self.leaves_n)

    def log_rates_along_path(self) -> np.ndarray:
        """log lambda_{X_k} for k = 0..tau_n-1 (cached)."""
        if "log_rates" not in self._cache:
            self._cache["log_rates"] = log_total_rate(
                self.block_counts[:-1], self.alpha_model
            )
        return self._cache["log_rates"]

    def jump_times(self) -> np.ndarray:
        """T_0 = 0 and the successive jump times T_1..T_tau."""
        waits = self.hold_samples * np.exp(-self.log_rates_along_path())
        out = np.empty(self.tau_n + 1)
        out[0] = 0.0
        np.cumsum(waits, out=out[1:])
        return out


def simulate_path(
    n: int,
    model: AlphaModel,
    s: int = 1,
    seed=0,
    replicate: int = 0,
    record_spectrum: bool | None = None,
) -> CoalescentPath:
    """Simulate one trajectory and its order-r length sums for r <= s.

    record_spectrum defaults to True for n <= 10^4; streamed paths keep
    deltas, block counts and holding factors but drop the per-level
    spectrum rows.
    """
    if n < 2:
        raise ValueError(f"need n >= 2 leaves, got {n}")
    if not (1 <= s <= n):
        raise ValueError(f"need 1 <= s <= n, got s={s}, n={n}")
    if record_spectrum is None:
        record_spectrum = n <= 10_000
    seed_chain, seed_choice = path_seed_streams(seed, replicate)
    deltas, blocks, holds = _kernels.simulate_chain(n, model.alpha, seed_chain)
    ell_exp, ell_rb, zrows = _kernels.spectrum_pass(
        deltas, blocks, holds, n, s, model.alpha, seed_choice, record_spectrum
    )
    return CoalescentPath(
        alpha_model=model,
        leaves_n=n,
        s=s,
        deltas=deltas,
        block_counts=blocks,
        hold_samples=holds,
        spectrum_rows=zrows if record_spectrum else None,
        lengths_exponential=ell_exp,
        lengths_rao_blackwell=ell_rb,
        seed=seed,
        replicate=replicate,
    )


def simulate_partition(
    n: int,
    model: AlphaModel,
    seed=0,
    replicate: int = 0,
    s: int | None = None,
    cap: int = EXACT_MODE_CAP,
):
    """Exact labeled-partition chain sharing the spectrum mode's jump stream.

    Returns (partitions, path) where partitions is the list of
    LabeledPartition states after 0..tau_n jumps and path carries the
    induced spectrum rows.  Refuses n above the cap (default 1000).
    """
    if n > cap:
        raise ValueError(f"exact mode capped at n={cap}, got {n}")
    if n < 2:
        raise ValueError(f"need n >= 2 leaves, got {n}")
    if s is None:
        s = n
    if not (1 <= s <= n):
        raise ValueError(f"need 1 <= s <= n, got s={s}, n={n}")
    seed_chain, seed_choice = path_seed_streams(seed, replicate)
    deltas, blocks, holds = _kernels.simulate_chain(n, model.alpha, seed_chain)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed_choice)))

    current = [frozenset([i]) for i in range(1, n + 1)]
    partitions = [LabeledPartition(tuple(current))]
    tau = len(deltas)
    zrows = np.zeros((tau + 1, s), dtype=np.int64)
    zrows[0, 0] = n
    for k in range(tau):
        take = int(deltas[k]) + 1
        chosen = rng.choice(len(current), size=take, replace=False)
        merged = frozenset().union(*(current[i] for i in chosen))
        keep = [b for i, b in enumerate(current) if i not in set(chosen.tolist())]
        keep.append(merged)
        current = keep
        part = LabeledPartition(tuple(current))
        partitions.append(part)
        zrows[k + 1] = part.spectrum(s)

    log_rates = log_total_rate(blocks[:-1], model)
    inv_lam = np.exp(-log_rates)
    ell_exp = (zrows[:-1].T * (holds * inv_lam)).sum(axis=1)
    ell_rb = (zrows[:-1].T * inv_lam).sum(axis=1)
    path = CoalescentPath(
        alpha_model=model,
        leaves_n=n,
        s=s,
        deltas=deltas,
        block_counts=blocks,
        hold_samples=holds,
        spectrum_rows=zrows,
        lengths_exponential=ell_exp,
        lengths_rao_blackwell=ell_rb,
        seed=seed,
        replicate=replicate,
    )
    return partitions, path


def order_r_lengths(path: CoalescentPath, mode: str = "exponential") -> np.ndarray:
    """Order-r branch length sums (r = 1..s) of a simulated path.

    ``exponential`` returns sum_k Z_{r,k} W_k / lambda_{X_k}; the
    ``rao_blackwell`` mode replaces each W_k by its unit conditional mean,
    keeping the expectation while shrinking the variance.
    """
    if mode == "exponential":
        return path.lengths_exponential.copy()
    if mode == "rao_blackwell":
        return path.lengths_rao_blackwell.copy()
    raise ValueError(f"unknown mode {mode!r}")


def recompute_lengths(path: CoalescentPath, mode: str = "exponential") -> np.ndarray:
    """Recompute the length sums from recorded spectrum rows (oracle route)."""
    if path.spectrum_rows is None:
        raise ValueError("path was streamed; spectrum rows not recorded")
    inv_lam = np.exp(-path.log_rates_along_path())
    weights = inv_lam * path.hold_samples if mode == "exponential" else inv_lam
    if mode not in ("exponential", "rao_blackwell"):
        raise ValueError(f"unknown mode {mode!r}")
    return path.spectrum_rows[:-1].T @ weights


@dataclass
class RescaledWalk:
    """Step function t -> (n - gamma*(floor(nt) wedge tau) - X_{floor(nt) wedge tau}) / n^(1/alpha).

    values[k] is the walk after k jumps, i.e. the centered, n^(1/alpha)-scaled
    partial sum of jump sizes.
    """

    values: np.ndarray
    leaves_n: int
    alpha_model: AlphaModel

    @property
    def tau_n(self) -> int:
        return len(self.values) - 1

    def __call__(self, t: float) -> float:
        k = min(int(math.floor(self.leaves_n * t)), self.tau_n)
        return float(self.values[max(k, 0)])

    def at_cut(self) -> float:
        """Walk value at time 1/gamma (the plateau onset)."""
        return self(1.0 / self.alpha_model.gamma)


def rescaled_walk(path: CoalescentPath) -> RescaledWalk:
    """Exact partial-sum representation of the centered block-count walk."""
    model = path.alpha_model
    scale = path.leaves_n ** (-1.0 / model.alpha)
    vals = np.empty(path.tau_n + 1)
    vals[0] = 0.0
    np.cumsum((path.deltas - model.gamma) * scale, out=vals[1:])
    return RescaledWalk(vals, path.leaves_n, model)


def dump_path_csv(path: CoalescentPath, out_path) -> None:
    """Write a recorded path as CSV: k, X_k, Delta_k, Z_1..Z_s, W_k.

    Delta_0 is written as 0; the W column is empty on the final row.
    """
    if path.spectrum_rows is None:
        raise ValueError("path was streamed; spectrum rows not recorded")
    s = path.s
    header = ["k", "X_k", "Delta_k"] + [f"Z_{r}" for r in range(1, s + 1)] + ["W_k"]
    with open(out_path, "w", newline="") as fh:
        fh.write(",".join(header) + "\r\n")
        for k in range(path.tau_n + 1):
            row = [str(k), str(int(path.block_counts[k]))]
            row.append(str(int(path.deltas[k - 1])) if k >= 1 else "0")
            row.extend(str(int(z)) for z in path.spectrum_rows[k])
            row.append(
                format(path.hold_samples[k], ".17g") if k < path.tau_n else ""
            )
            fh.write(",".join(row) + "\r\n")
