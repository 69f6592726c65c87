"""Merger rates and jump-size laws of the Beta(2-a, a) block-counting chain.

All rate arithmetic is done in the log-gamma domain so that block counts up
to 1e7 neither overflow nor lose precision; only final ratios are
exponentiated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

__all__ = [
    "AlphaModel",
    "RateTable",
    "JumpLawSampler",
    "merger_rate",
    "log_merger_rate",
    "total_rate",
    "log_total_rate",
    "jump_distribution",
    "jump_probability",
    "limit_jump_law",
    "limit_jump_survivor",
    "limit_jump_table",
    "centering_constant",
]


@dataclass(frozen=True)
class AlphaModel:
    """Parameter bundle for a Beta(2-alpha, alpha) coalescent, 1 < alpha < 2.

    Derived quantities are fixed at construction:

    * ``gamma``: asymptotic mean jump size 1/(alpha-1),
    * ``one_over_alpha``: scaling exponent of the jump-size walk,
    * ``fluct_exponent``: 1 - alpha + 1/alpha, the order of the branch-length
      fluctuations,
    * ``centering_exponent``: 2 - alpha, the order of the branch lengths
      themselves.
    """

    alpha: float
    gamma: float = field(init=False)
    one_over_alpha: float = field(init=False)
    fluct_exponent: float = field(init=False)
    centering_exponent: float = field(init=False)

    def __post_init__(self):
        a = float(self.alpha)
        if not (1.0 < a < 2.0):
            raise ValueError(
                f"alpha must lie strictly inside (1, 2), got {self.alpha!r}"
            )
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "gamma", 1.0 / (a - 1.0))
        object.__setattr__(self, "one_over_alpha", 1.0 / a)
        object.__setattr__(self, "fluct_exponent", 1.0 - a + 1.0 / a)
        object.__setattr__(self, "centering_exponent", 2.0 - a)


def _check_mk(m: int, k: int) -> None:
    if m < 2:
        raise ValueError(f"block count m must be >= 2, got {m}")
    if k < 2 or k > m:
        raise ValueError(f"merger size k must satisfy 2 <= k <= m, got k={k}, m={m}")


def log_merger_rate(m: int, k: int, model: AlphaModel) -> float:
    """log of the rate at which a fixed k-set out of m blocks merges.

    The rate is B(k - alpha, m - k + alpha) / B(2 - alpha, alpha), written
    with log-gamma terms.
    """
    _check_mk(m, k)
    a = model.alpha
    return (
        gammaln(k - a)
        + gammaln(m - k + a)
        - gammaln(m)
        - gammaln(2.0 - a)
        - gammaln(a)
    )


def merger_rate(m: int, k: int, model: AlphaModel) -> float:
    """Rate lambda_{m,k} at which any fixed k of m blocks merge into one."""
    return math.exp(log_merger_rate(m, k, model))


def log_total_rate(m, model: AlphaModel):
    """log of the total coalescence rate from m blocks.

    The binomially weighted sum sum_k C(m,k) lambda_{m,k} telescopes to the
    closed form (m - 1) Gamma(m + alpha - 1) / (alpha Gamma(alpha) Gamma(m)),
    which is what makes simulation at block counts ~1e7 tractable.  Accepts
    scalars or arrays.
    """
    m = np.asarray(m, dtype=np.float64)
    if np.any(m < 2):
        raise ValueError("block count m must be >= 2")
    a = model.alpha
    out = (
        np.log(m - 1.0)
        + gammaln(m + a - 1.0)
        - gammaln(m)
        - math.log(a)
        - gammaln(a)
    )
    return out if out.ndim else float(out)


def total_rate(m, model: AlphaModel):
    """Total coalescence rate lambda_m = sum_k C(m,k) lambda_{m,k}."""
    return np.exp(log_total_rate(m, model))


def jump_probability(m: int, d, model: AlphaModel):
    """P(next jump removes d blocks | current block count m).

    Equals C(m, d+1) lambda_{m,d+1} / lambda_m; evaluated in log domain.
    Accepts a scalar or array of jump sizes d in {1, ..., m-1}.
    """
    d = np.asarray(d)
    if np.any((d < 1) | (d > m - 1)):
        raise ValueError("jump size d must lie in {1, ..., m-1}")
    a = model.alpha
    log_binom = gammaln(m + 1) - gammaln(d + 2.0) - gammaln(m - d + 0.0)
    log_rate = (
        gammaln(d + 1.0 - a)
        + gammaln(m - d - 1.0 + a)
        - gammaln(m)
        - gammaln(2.0 - a)
        - gammaln(a)
    )
    out = np.exp(log_binom + log_rate - log_total_rate(m, model))
    return out if out.ndim else float(out)


def jump_distribution(m: int, model: AlphaModel) -> np.ndarray:
    """Full jump-size distribution from m blocks, index d-1 holds P(d).

    Built from P(1|m) = alpha m / (2 (m + alpha - 2)) and the exact ratio
    recursion P(d+1)/P(d) = (m-d-1)(d+1-alpha) / ((d+2)(m-d-2+alpha)).
    """
    if m < 2:
        raise ValueError(f"block count m must be >= 2, got {m}")
    a = model.alpha
    if m == 2:
        return np.array([1.0])
    d = np.arange(1, m - 1, dtype=np.float64)
    ratios = (m - d - 1.0) * (d + 1.0 - a) / ((d + 2.0) * (m - d - 2.0 + a))
    p = np.empty(m - 1, dtype=np.float64)
    p[0] = a * m / (2.0 * (m + a - 2.0))
    p[1:] = p[0] * np.cumprod(ratios)
    return p


def limit_jump_law(j, model: AlphaModel):
    """Limiting jump-size law P(V = j) as the block count tends to infinity.

    P(V = j) = (alpha / Gamma(2-alpha)) * Gamma(j+1-alpha) / Gamma(j+2).
    """
    j = np.asarray(j)
    if np.any(j < 1):
        raise ValueError("jump size j must be >= 1")
    a = model.alpha
    out = np.exp(
        math.log(a) - gammaln(2.0 - a) + gammaln(j + 1.0 - a) - gammaln(j + 2.0)
    )
    return out if out.ndim else float(out)


def limit_jump_survivor(j, model: AlphaModel):
    """Exact tail P(V > j) = Gamma(j+2-alpha) / (Gamma(2-alpha) Gamma(j+2)).

    Obtained by telescoping the Gamma-ratio series; decays like j^-alpha.
    ``j = 0`` gives 1.
    """
    j = np.asarray(j)
    if np.any(j < 0):
        raise ValueError("j must be >= 0")
    a = model.alpha
    out = np.exp(gammaln(j + 2.0 - a) - gammaln(2.0 - a) - gammaln(j + 2.0))
    return out if out.ndim else float(out)


def limit_jump_table(model: AlphaModel, j_max: int) -> np.ndarray:
    """Vector of P(V = j) for j = 1..j_max."""
    return limit_jump_law(np.arange(1, j_max + 1), model)


def centering_constant(k: int, model: AlphaModel) -> float:
    """Deterministic centering constant for order-k branch lengths.

    c_k = alpha (alpha-1)^2 Gamma(k + alpha - 2) / k!.
    """
    if k < 1:
        raise ValueError(f"order k must be >= 1, got {k}")
    a = model.alpha
    return (
        a
        * (a - 1.0) ** 2
        * math.exp(gammaln(k + a - 2.0) - gammaln(k + 1.0))
    )


class JumpLawSampler:
    """Inverse-CDF sampler for the limiting jump law V.

    A survivor table covers j <= table_size; the rare deeper tail inverts
    the closed-form survivor by bisection.
    """

    def __init__(self, model: AlphaModel, table_size: int = 100_000):
        self.model = model
        self.table_size = int(table_size)
        j = np.arange(1, self.table_size + 1)
        # cdf[i] = P(V <= i+1)
        self._cdf = 1.0 - limit_jump_survivor(j, model)
        self._tail_u = self._cdf[-1]

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        u = rng.random(size)
        out = np.searchsorted(self._cdf, u, side="right") + 1
        deep = np.nonzero(u >= self._tail_u)[0]
        for idx in deep:
            out[idx] = self._invert_tail(u[idx])
        return out

    def _invert_tail(self, u: float) -> int:
        """Smallest j with P(V <= j) >= u, by bisection on the exact survivor.

        The survivor decays like j^-alpha, so the power-law inverse brackets
        the answer within a constant factor.
        """
        w = max(1.0 - u, 1e-280)
        a = self.model.alpha
        target = (w * math.exp(gammaln(2.0 - a))) ** (-1.0 / a)
        lo = self.table_size
        hi = max(int(4.0 * target) + 4, lo + 1)
        while limit_jump_survivor(hi, self.model) > w:
            hi *= 4
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if limit_jump_survivor(mid, self.model) <= w:
                hi = mid
            else:
                lo = mid
        return hi


@dataclass
class RateTable:
    """Dense per-state rate rows up to a block-count cap.

    Holds log lambda_{m,k} for 2 <= k <= m <= max_blocks, log lambda_m, and
    the per-m cumulative jump-size distributions used for inverse-CDF
    sampling.  Immutable after construction and safe to share across worker
    threads.  The simulation kernels themselves evaluate rates on the fly
    from the closed forms, so the table mainly serves inspection, oracle
    tests and CSV dumps.
    """

    alpha_model: AlphaModel
    max_blocks: int
    log_lambda_mk: list
    log_lambda_m: np.ndarray
    jump_cdf: list

    @classmethod
    def build(cls, model: AlphaModel, max_blocks: int) -> "RateTable":
        if max_blocks < 2:
            raise ValueError("max_blocks must be >= 2")
        a = model.alpha
        rows = [None, None]  # index by m
        cdfs = [None, None]
        log_lam = np.full(max_blocks + 1, np.nan)
        for m in range(2, max_blocks + 1):
            k = np.arange(2, m + 1, dtype=np.float64)
            rows.append(
                gammaln(k - a)
                + gammaln(m - k + a)
                - gammaln(m)
                - gammaln(2.0 - a)
                - gammaln(a)
            )
            log_lam[m] = log_total_rate(m, model)
            cdfs.append(np.cumsum(jump_distribution(m, model)))
        return cls(model, max_blocks, rows, log_lam, cdfs)

    def log_rate(self, m: int, k: int) -> float:
        _check_mk(m, k)
        if m > self.max_blocks:
            raise ValueError(f"m={m} exceeds table cap {self.max_blocks}")
        return float(self.log_lambda_mk[m][k - 2])

    def sample_jump(self, m: int, rng: np.random.Generator) -> int:
        """Draw one jump size from state m by inverse CDF."""
        if m <= self.max_blocks:
            return int(np.searchsorted(self.jump_cdf[m], rng.random(), side="right")) + 1
        return _walk_jump(m, self.alpha_model.alpha, rng.random())

    def dump_rate_row(self, m: int, out_path) -> None:
        """Write one rate row as CSV with columns m,k,lambda_mk."""
        if m > self.max_blocks:
            raise ValueError(f"m={m} exceeds table cap {self.max_blocks}")
        with open(out_path, "w", newline="") as fh:
            fh.write("m,k,lambda_mk\r\n")
            for k in range(2, m + 1):
                lam = math.exp(self.log_lambda_mk[m][k - 2])
                fh.write(f"{m},{k},{format(lam, '.17g')}\r\n")


def _walk_jump(m: int, alpha: float, u: float) -> int:
    """Exact inverse-CDF walk through the jump distribution at state m."""
    p = alpha * m / (2.0 * (m + alpha - 2.0))
    c = p
    d = 1
    while u > c and d < m - 1:
        p *= (m - d - 1.0) * (d + 1.0 - alpha) / ((d + 2.0) * (m - d - 2.0 + alpha))
        c += p
        d += 1
    return d
