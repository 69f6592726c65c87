"""Compiled hot loops: block-counting chain, size-spectrum pass, conditional MC.

The chain pass and the spectrum pass are split so that both the spectrum
simulator and the exact labeled-partition simulator can consume one shared
jump-size stream: pass one is seeded with the jump seed and produces
(deltas, blocks, holds); pass two is seeded independently and only resolves
which blocks participate in each merger.
"""
import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _draw_jump(m, alpha):
    """Inverse-CDF draw of the jump size from m blocks.

    Starts at P(1|m) = alpha m / (2(m+alpha-2)) and walks the exact ratio
    recursion; expected number of steps is the mean jump size 1/(alpha-1).
    """
    u = np.random.random()
    p = alpha * m / (2.0 * (m + alpha - 2.0))
    c = p
    d = 1
    while u > c and d < m - 1:
        p *= (m - d - 1.0) * (d + 1.0 - alpha) / ((d + 2.0) * (m - d - 2.0 + alpha))
        c += p
        d += 1
    return d


@njit(cache=True, nogil=True)
def simulate_chain(n, alpha, seed):
    """Simulate the block-counting chain from n blocks down to 1.

    Returns (deltas, blocks, holds): jump sizes (length tau), block counts
    X_0..X_tau, and unit-exponential holding factors W_0..W_{tau-1}.  Per
    jump the RNG is consumed in the order W, then the jump-size uniform.
    """
    np.random.seed(seed)
    deltas = np.empty(n - 1, np.int64)
    blocks = np.empty(n, np.int64)
    holds = np.empty(n - 1, np.float64)
    blocks[0] = n
    m = n
    k = 0
    while m > 1:
        holds[k] = np.random.exponential(1.0)
        d = _draw_jump(m, alpha)
        m -= d
        deltas[k] = d
        blocks[k + 1] = m
        k += 1
    return deltas[:k].copy(), blocks[: k + 1].copy(), holds[:k].copy()


@njit(cache=True, nogil=True, inline="always")
def _log_total_rate(m, alpha, lgam_alpha):
    return (
        math.log(m - 1.0)
        + math.lgamma(m + alpha - 1.0)
        - math.lgamma(m)
        - math.log(alpha)
        - lgam_alpha
    )


@njit(cache=True, nogil=True)
def _merge_draw(z, m, take, s):
    """Category-by-category hypergeometric draw of `take` merging blocks.

    z has s+1 entries: counts of blocks of size 1..s and of big blocks.
    Mutates z in place (removes participants) and returns the new block's
    size category: t-1 for a small block of size t, s for a big block.
    """
    pool = m
    left = take
    total_size = 0
    big_in = False
    for c in range(s + 1):
        if left == 0:
            break
        avail = z[c]
        rest = pool - avail
        if rest <= 0:
            h = left
        elif avail <= 0:
            h = 0
        else:
            h = np.random.hypergeometric(avail, rest, left)
        if h > 0:
            z[c] -= h
            left -= h
            if c < s:
                total_size += (c + 1) * h
            else:
                big_in = True
        pool = rest
    if big_in or total_size > s:
        return s
    return total_size - 1


@njit(cache=True, nogil=True)
def spectrum_pass(deltas, blocks, holds, n, s, alpha, seed, record):
    """Resolve block choices along a fixed chain and accumulate lengths.

    Returns (ell_exp, ell_rb, zrows): order-r length sums with exponential
    holding factors and with their unit conditional means (Rao-Blackwell),
    plus the spectrum rows Z_{r,k} (all k) when record is true, else a
    single dummy row.
    """
    np.random.seed(seed)
    tau = deltas.shape[0]
    z = np.zeros(s + 1, np.int64)
    z[0] = n
    ell_exp = np.zeros(s, np.float64)
    ell_rb = np.zeros(s, np.float64)
    if record:
        zrows = np.zeros((tau + 1, s), np.int64)
        zrows[0, 0] = n
    else:
        zrows = np.zeros((1, s), np.int64)
    lgam_alpha = math.lgamma(alpha)
    for k in range(tau):
        m = blocks[k]
        inv_lam = math.exp(-_log_total_rate(m, alpha, lgam_alpha))
        w = holds[k]
        for r in range(s):
            zr = z[r]
            if zr > 0:
                ell_exp[r] += zr * w * inv_lam
                ell_rb[r] += zr * inv_lam
        cat = _merge_draw(z, m, deltas[k] + 1, s)
        z[cat] += 1
        if record:
            for r in range(s):
                zrows[k + 1, r] = z[r]
    return ell_exp, ell_rb, zrows


@njit(cache=True, nogil=True)
def conditional_spectrum_mc(deltas, blocks, n, s, reps, seed):
    """Monte Carlo of the spectrum given a frozen jump-size sequence.

    Re-runs the block-choice randomness `reps` times and accumulates, for
    every level k and size r <= s, the sum and sum of squares of Z_{r,k}.
    """
    np.random.seed(seed)
    tau = deltas.shape[0]
    sums = np.zeros((tau + 1, s), np.float64)
    sqs = np.zeros((tau + 1, s), np.float64)
    z = np.zeros(s + 1, np.int64)
    for _ in range(reps):
        for c in range(s + 1):
            z[c] = 0
        z[0] = n
        sums[0, 0] += n
        sqs[0, 0] += float(n) * n
        for k in range(tau):
            cat = _merge_draw(z, blocks[k], deltas[k] + 1, s)
            z[cat] += 1
            for r in range(s):
                zr = z[r]
                if zr > 0:
                    sums[k + 1, r] += zr
                    sqs[k + 1, r] += float(zr) * zr
    return sums, sqs


@njit(cache=True, nogil=True)
def chain_summary(n, alpha, seed):
    """Tau_n and the jump-size partial sum statistics, without storing arrays.

    Returns (tau, sum_delta_minus_gamma_at_n_over_gamma, final_sum) where the
    middle entry is sum_{k <= floor(n/gamma) wedge tau} (Delta_k - gamma),
    i.e. the unnormalized walk value at time 1/gamma.
    """
    np.random.seed(seed)
    gamma = 1.0 / (alpha - 1.0)
    cut = int(n / gamma)
    m = n
    tau = 0
    acc = 0.0
    acc_cut = 0.0
    while m > 1:
        np.random.exponential(1.0)  # keep the stream layout of simulate_chain
        d = _draw_jump(m, alpha)
        m -= d
        tau += 1
        acc += d - gamma
        if tau <= cut:
            acc_cut = acc
    return tau, acc_cut, acc


@njit(cache=True, nogil=True)
def rb_lengths_stream(n, s, alpha, seed_chain, seed_choice):
    """One streamed replicate: chain + spectrum with no per-level storage.

    Returns (ell_exp, ell_rb, tau, walk_at_cut) where walk_at_cut is
    sum_{k <= floor(n/gamma) wedge tau} (Delta_k - gamma).
    """
    np.random.seed(seed_chain)
    gamma = 1.0 / (alpha - 1.0)
    lgam_alpha = math.lgamma(alpha)
    cut = int(n / gamma)
    z = np.zeros(s + 1, np.int64)
    deltas = np.empty(n - 1, np.int64)
    holds = np.empty(n - 1, np.float64)
    blocks = np.empty(n, np.int64)
    blocks[0] = n
    m = n
    tau = 0
    acc = 0.0
    acc_cut = 0.0
    while m > 1:
        holds[tau] = np.random.exponential(1.0)
        d = _draw_jump(m, alpha)
        deltas[tau] = d
        m -= d
        tau += 1
        blocks[tau] = m
        acc += d - gamma
        if tau <= cut:
            acc_cut = acc
    np.random.seed(seed_choice)
    z[0] = n
    ell_exp = np.zeros(s, np.float64)
    ell_rb = np.zeros(s, np.float64)
    for k in range(tau):
        mk = blocks[k]
        inv_lam = math.exp(-_log_total_rate(mk, alpha, lgam_alpha))
        w = holds[k]
        for r in range(s):
            zr = z[r]
            if zr > 0:
                ell_exp[r] += zr * w * inv_lam
                ell_rb[r] += zr * inv_lam
        cat = _merge_draw(z, mk, deltas[k] + 1, s)
        z[cat] += 1
    return ell_exp, ell_rb, tau, acc_cut
