"""Exact combinatorial formulas and approximants for order-r branch lengths.

The chain of objects, from exact to asymptotic:

* ``ell_tilde``: alpha Gamma(alpha) sum_k Z_{r,k} / X_k^alpha,
* ``ell_bar``: same with Z replaced by its conditional expectation given the
  block-count path, evaluated exactly by a per-composition dynamic program,
* ``ell_bar_symmetrized``: the m!-symmetrized single-sum form,
* ``split_lengths``: the V-weighted sums split at the cutoff level K_n,
* ``fluctuation_functional``: the first-order functional of the rescaled
  jump-size walk that drives the branch-length fluctuations.

Empty products evaluate to 1 and empty sums to 0 throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.special import gammaln

from .rates import AlphaModel, limit_jump_law
from .simulator import CoalescentPath

__all__ = [
    "Composition",
    "CutoffConfig",
    "compositions",
    "composition_weight",
    "subset_coefficient",
    "pi_product",
    "cond_expect_Z",
    "cond_expect_Z_profile",
    "ell_tilde",
    "ell_bar",
    "ell_bar_symmetrized",
    "split_lengths",
    "fluctuation_functional",
    "weighted_walk_sum",
    "weighted_increment_sum",
    "fluctuation_prediction",
    "centering_from_compositions",
]

MAX_ORDER = 6


@dataclass(frozen=True)
class Composition:
    """Ordered parts (r_1, ..., r_m), each >= 1, summing to r - 1."""

    parts: tuple

    def __post_init__(self):
        if any(p < 1 for p in self.parts):
            raise ValueError("composition parts must be >= 1")

    @property
    def m(self) -> int:
        return len(self.parts)

    def total(self) -> int:
        return sum(self.parts)


@dataclass(frozen=True)
class CutoffConfig:
    """Cutoff level K_n = floor(n/gamma - n^delta) with 1/alpha < delta < 1."""

    delta: float
    k_n: int

    @classmethod
    def for_model(cls, model: AlphaModel, n: int, delta: float = 0.8) -> "CutoffConfig":
        if not (1.0 / model.alpha < delta < 1.0):
            raise ValueError(
                f"delta must lie in (1/alpha, 1) = ({1.0/model.alpha:.4f}, 1), got {delta}"
            )
        k_n = int(math.floor(n / model.gamma - n**delta))
        if k_n < 1:
            raise ValueError(f"cutoff K_n = {k_n} < 1; n = {n} is too small for delta = {delta}")
        return cls(delta, k_n)


def compositions(total: int) -> list:
    """All ordered compositions of `total` into positive parts.

    compositions(0) is [()], the empty composition.
    """
    if total < 0:
        raise ValueError("total must be >= 0")
    if total == 0:
        return [()]
    out = []

    def rec(remaining, prefix):
        if remaining == 0:
            out.append(tuple(prefix))
            return
        for first in range(1, remaining + 1):
            rec(remaining - first, prefix + [first])

    rec(total, [])
    return out


def composition_weight(model: AlphaModel, r: int, parts: tuple) -> float:
    """Weight (1/m!) prod_p (r - r_1 - ... - r_p) P(V = r_p) of one composition."""
    if sum(parts) != r - 1:
        raise ValueError(f"parts {parts} do not sum to r-1 = {r-1}")
    w = 1.0 / math.factorial(len(parts))
    left = r
    for p in parts:
        left -= p
        w *= left * limit_jump_law(p, model)
    return w


def subset_coefficient(model: AlphaModel, parts: tuple, subset: tuple) -> float:
    """Alternating coefficient (-1)^|subset| / ((sum of chosen parts)(alpha-1) + 1).

    ``subset`` holds positions into ``parts``; the empty subset gives 1.
    """
    beta = sum(parts[p] for p in subset) * (model.alpha - 1.0)
    return (-1.0) ** len(subset) / (beta + 1.0)


# ---------------------------------------------------------------------------
# survival products along a path


def _log_survival_prefix(path: CoalescentPath, rho: int):
    """Prefix sums of log(1 - rho/X_l) and the first level where X_l <= rho.

    Returns (L, t) with L[l] = sum_{j<=l, j<t} log(1 - rho/X_j) for l < t and
    L[l] = -inf beyond; t = tau_n + 1 when X never dips to rho before
    absorption.
    """
    key = ("logsurv", rho)
    if key in path._cache:
        return path._cache[key]
    x = path.block_counts
    tau = path.tau_n
    # levels 1..tau; X strictly decreasing
    t = int(np.searchsorted(-x, -rho, side="left"))  # first index with X <= rho
    if t > tau:
        t = tau + 1
    L = np.full(tau + 1, -np.inf)
    L[0] = 0.0
    upto = min(t - 1, tau)
    if upto >= 1:
        L[1 : upto + 1] = np.cumsum(np.log1p(-float(rho) / x[1 : upto + 1]))
    path._cache[key] = (L, t)
    return L, t


def pi_product(path: CoalescentPath, j: int, k: int, r: int = 1) -> float:
    """Survival product prod_{i=j+1}^{k} (1 - r/X_i), exact, in log domain.

    The degenerate call j == k returns the empty product 1.  Raises if any
    factor would be <= 0, i.e. if X dips to r inside the range.
    """
    tau = path.tau_n
    if not (0 <= j <= k <= tau):
        raise ValueError(f"need 0 <= j <= k <= tau_n = {tau}, got j={j}, k={k}")
    if r < 1:
        raise ValueError("r must be >= 1")
    if j == k:
        return 1.0
    L, t = _log_survival_prefix(path, r)
    if k >= t:
        raise ValueError(
            f"factor 1 - {r}/X_i is nonpositive at level {t} (X = {int(path.block_counts[t])})"
        )
    return float(np.exp(L[k] - L[j]))


# ---------------------------------------------------------------------------
# conditional expectation of the spectrum given the block-count path


def _match_levels(path: CoalescentPath, value: int) -> np.ndarray:
    key = ("match", value)
    if key in path._cache:
        return path._cache[key]
    out = (path.deltas == value).astype(np.float64)
    path._cache[key] = out
    return out


def cond_expect_Z_profile(path: CoalescentPath, r: int, max_terms: float = 1e9) -> np.ndarray:
    """E[Z_{r,k} | X] for every level k = 0..tau_n, exactly.

    Each composition of r-1 contributes through a linear chain over merger
    levels; because the inter-merger survival products factor over prefix
    ratios, the chain collapses to cumulative sums, costing O(m tau) per
    composition instead of a sum over level tuples.  Levels where a survival
    factor would be nonpositive contribute zero, except that runs of
    back-to-back mergers carry no such factors and survive.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    if r > MAX_ORDER:
        raise ValueError(f"order r = {r} beyond the supported budget ({MAX_ORDER})")
    key = ("condZ", r)
    if key in path._cache:
        return path._cache[key]
    tau = path.tau_n
    n = path.leaves_n
    comps = compositions(r - 1)
    if tau * len(comps) * max(r, 1) > max_terms:
        raise ValueError("conditional-expectation evaluation beyond the term budget")
    x = path.block_counts.astype(np.float64)
    L1, t1 = _log_survival_prefix(path, 1)

    total_c = np.zeros(tau + 1)
    for parts in comps:
        m = len(parts)
        if m == 0:
            total_c += 1.0
            continue
        weight = 1.0
        left = r
        for p in parts:
            left -= p
            weight *= left
        # chain over merger levels; A[l] = contribution of histories whose
        # last merger sits at level l
        a_prev = np.zeros(tau + 1)
        a_prev[0] = 1.0
        remaining = r
        for p_idx, part in enumerate(parts):
            rho = remaining
            L, t = _log_survival_prefix(path, rho)
            match = _match_levels(path, part)
            a_new = np.zeros(tau + 1)
            upto = min(t - 1, tau)
            # carrier over previous levels l' < t
            carrier = np.zeros(tau + 1)
            if upto >= 0:
                carrier[: upto + 1] = a_prev[: upto + 1] * np.exp(-L[: upto + 1])
            prefix = np.cumsum(carrier)
            # merger levels l with l <= t: every gap index stays below the
            # boundary, so all previous l' <= l-1 enter via the prefix sum
            lmax = min(t, tau)
            if lmax >= 1:
                ls = np.arange(1, lmax + 1)
                a_new[1 : lmax + 1] = (
                    match[:lmax] * np.exp(L[ls - 1]) * prefix[ls - 1] / x[ls]
                )
            # beyond the boundary only back-to-back mergers survive (their
            # gap is empty, so no nonpositive survival factor is evaluated)
            if t + 1 <= tau:
                ls = np.arange(t + 1, tau + 1)
                a_new[t + 1 :] = match[t:] * a_prev[t:-1] / x[ls]
            a_prev = a_new
            remaining -= part
        # close with the trailing single-block survival up to each k
        carrier = np.zeros(tau + 1)
        upto = min(t1 - 1, tau)
        carrier[: upto + 1] = a_prev[: upto + 1] * np.exp(-L1[: upto + 1])
        total_c += weight * np.cumsum(carrier)

    profile = np.zeros(tau + 1)
    ks = np.arange(0, min(t1 - 1, tau) + 1)
    profile[ks] = x[ks] * np.exp(L1[ks]) * total_c[ks]
    profile[tau] = 1.0 if r == n else 0.0
    path._cache[key] = profile
    return profile


def cond_expect_Z(path: CoalescentPath, r: int, k: int, max_terms: float = 1e9) -> float:
    """E[Z_{r,k} | X] at one level k."""
    if not (0 <= k <= path.tau_n):
        raise ValueError(f"level k must lie in 0..tau_n = {path.tau_n}")
    return float(cond_expect_Z_profile(path, r, max_terms=max_terms)[k])


# ---------------------------------------------------------------------------
# length approximants


def _alpha_gamma(model: AlphaModel) -> float:
    return model.alpha * math.exp(gammaln(model.alpha))


def ell_tilde(path: CoalescentPath, r: int) -> float:
    """alpha Gamma(alpha) sum_{k<tau} Z_{r,k} / X_k^alpha from recorded rows."""
    if path.spectrum_rows is None:
        raise ValueError("path was streamed; spectrum rows not recorded")
    if not (1 <= r <= path.s):
        raise ValueError(f"r must lie in 1..s = {path.s}")
    model = path.alpha_model
    x = path.block_counts[:-1].astype(np.float64)
    z = path.spectrum_rows[:-1, r - 1]
    return _alpha_gamma(model) * float(np.sum(z * x**-model.alpha))


def ell_bar(path: CoalescentPath, r: int, max_terms: float = 1e9) -> float:
    """alpha Gamma(alpha) sum_{k<tau} E[Z_{r,k} | X] / X_k^alpha, exactly."""
    model = path.alpha_model
    prof = cond_expect_Z_profile(path, r, max_terms=max_terms)
    x = path.block_counts[:-1].astype(np.float64)
    return _alpha_gamma(model) * float(np.sum(prof[:-1] * x**-model.alpha))


def _inner_indicator_sums(path, parts, shifted: bool) -> np.ndarray:
    """G_p[k] = sum_{l<=k} (Pi_0^l)^{r_p} 1{Delta_l = r_p} / (X_{l-1} [+ r_p])."""
    tau = path.tau_n
    x = path.block_counts.astype(np.float64)
    L1, _ = _log_survival_prefix(path, 1)
    out = np.empty((len(parts), tau + 1))
    for i, part in enumerate(parts):
        match = _match_levels(path, part)
        terms = np.zeros(tau + 1)
        # level l contributes (Pi_0^l)^{r_p} 1{Delta_l = r_p} / X_{l-1}[+r_p];
        # L1 is finite for l <= tau-1 and the l = tau term is dropped since
        # it only feeds k = tau, which the callers exclude
        denom = x[: tau - 1] + (part if shifted else 0.0)
        terms[1:tau] = match[: tau - 1] * np.exp(part * L1[1:tau]) / denom
        out[i] = np.cumsum(terms)
    return out


def ell_bar_symmetrized(path: CoalescentPath, r: int, shifted_denominator: bool = True) -> float:
    """The m!-symmetrized indicator form of the conditional length sum.

    Replaces the ordered merger-level tuples by independent per-part sums;
    ``shifted_denominator`` selects 1/(X_{l-1} + r_p) (the displayed form)
    over 1/X_{l-1} (equivalent to first order).

    Tracks ell_bar to o(n^{1-alpha+1/alpha}) for r <= 3.  For r >= 4 the
    symmetrization is only approximate (see centering_from_compositions).
    """
    if r < 1 or r > MAX_ORDER:
        raise ValueError(f"r must lie in 1..{MAX_ORDER}")
    model = path.alpha_model
    tau = path.tau_n
    x = path.block_counts.astype(np.float64)
    L1, _ = _log_survival_prefix(path, 1)
    ks = np.arange(1, tau)
    outer = x[ks] ** (1.0 - model.alpha) * np.exp(L1[ks])
    total = 0.0
    for parts in compositions(r - 1):
        w = 1.0 / math.factorial(len(parts))
        left = r
        for p in parts:
            left -= p
            w *= left
        if parts:
            g = _inner_indicator_sums(path, parts, shifted_denominator)
            inner = np.prod(g[:, ks], axis=0)
        else:
            inner = 1.0
        total += w * float(np.sum(outer * inner))
    return _alpha_gamma(model) * total


def _v_weighted_inner(path, parts) -> np.ndarray:
    """G_p[k] = sum_{l=0}^{k-1} (Pi_0^l)^{r_p} / X_l for each part."""
    tau = path.tau_n
    x = path.block_counts.astype(np.float64)
    L1, _ = _log_survival_prefix(path, 1)
    out = np.empty((len(parts), tau + 1))
    for i, part in enumerate(parts):
        terms = np.zeros(tau + 1)
        terms[1:] = np.exp(part * L1[: tau]) / x[:tau]
        out[i] = np.cumsum(terms)
    return out


def split_lengths(path: CoalescentPath, r: int, parts: tuple, cutoff: CutoffConfig):
    """The V-weighted length sums of one composition, split at K_n.

    Returns (L1, L2) with
    L1 = sum_{k=1}^{K} X_k^{1-alpha} Pi_0^k prod_p sum_{l=0}^{k-1} (Pi_0^l)^{r_p}/X_l
    and L2 the matching sum over K < k < tau_n, where K = min(K_n, tau_n - 1).
    """
    if sum(parts) != r - 1:
        raise ValueError(f"parts {parts} do not sum to r-1 = {r-1}")
    model = path.alpha_model
    tau = path.tau_n
    x = path.block_counts.astype(np.float64)
    L1_log, _ = _log_survival_prefix(path, 1)
    ks = np.arange(1, tau)
    outer = x[ks] ** (1.0 - model.alpha) * np.exp(L1_log[ks])
    if parts:
        g = _v_weighted_inner(path, parts)
        inner = np.prod(g[:, ks], axis=0)
        terms = outer * inner
    else:
        terms = outer
    k_eff = min(cutoff.k_n, tau - 1)
    low = float(np.sum(terms[: k_eff])) if k_eff >= 1 else 0.0
    high = float(np.sum(terms[k_eff:]))
    return low, high


def _rescaled_walk_values(path: CoalescentPath) -> np.ndarray:
    """S^{(n)}_{l/n} for l = 0..tau_n (cached)."""
    if "walk" not in path._cache:
        model = path.alpha_model
        scale = path.leaves_n ** (-1.0 / model.alpha)
        path._cache["walk"] = (
            np.concatenate(([0.0], np.cumsum(path.deltas - model.gamma))) * scale
        )
    return path._cache["walk"]


def weighted_walk_sum(path: CoalescentPath, exponent: float, k_max: int) -> float:
    """(1/n) sum_{l=0}^{K} (1 - gamma l/n)^exponent * S^{(n)}_{l/n}."""
    model = path.alpha_model
    n = path.leaves_n
    k = min(k_max, path.tau_n)
    walk = _rescaled_walk_values(path)
    ls = np.arange(0, k + 1)
    w = (1.0 - model.gamma * ls / n) ** exponent
    return float(np.sum(w * walk[: k + 1])) / n


def weighted_increment_sum(path: CoalescentPath, exponent: float, k_max: int) -> float:
    """sum_{j=1}^{K} ((Delta_j - gamma)/n^{1/alpha}) (1 - gamma j/n)^exponent."""
    model = path.alpha_model
    n = path.leaves_n
    k = min(k_max, path.tau_n)
    scale = n ** (-1.0 / model.alpha)
    js = np.arange(1, k + 1)
    w = (1.0 - model.gamma * js / n) ** exponent
    return float(np.sum(w * (path.deltas[:k] - model.gamma) * scale))


def _saturating_integral(betas, lo: float, hi: float) -> float:
    """int_lo^hi prod_p (1 - x^{beta_p}) dx by subset expansion."""
    out = 0.0
    for size in range(0, len(betas) + 1):
        for subset in combinations(range(len(betas)), size):
            bq = sum(betas[q] for q in subset)
            out += (-1.0) ** size * (hi ** (bq + 1.0) - lo ** (bq + 1.0)) / (bq + 1.0)
    return out


def _effective_cutoff(path: CoalescentPath, cutoff: CutoffConfig) -> int:
    return min(cutoff.k_n, path.tau_n - 1)


def linearized_split(path: CoalescentPath, parts: tuple, cutoff: CutoffConfig):
    """First-order model of (L1, L2) for one composition.

    The pre-cutoff sum is expanded to first order in the walk S^{(n)} and the
    centered increments, with every level weight kept as an exact finite sum
    (no integral replacement).  The post-cutoff sum is modeled from the path
    state at the cutoff: each term equals
    gamma^(1-alpha) Pi_0^K (tau-K)^(1-alpha) and the inner sums grow from
    their cutoff values with the saturating profile 1 - u^{beta_p} in the
    remaining-fraction variable u.
    """
    model = path.alpha_model
    a, gamma, n = model.alpha, model.gamma, path.leaves_n
    tau = path.tau_n
    K = _effective_cutoff(path, cutoff)
    r = sum(parts) + 1
    betas = [p * (a - 1.0) for p in parts]

    deltas = path.deltas.astype(np.float64)
    walk = _rescaled_walk_values(path)
    w = n - gamma * np.arange(0.0, K + 1.0)
    invw = 1.0 / w
    d_sum = np.concatenate(([0.0], np.cumsum((deltas[:K] - gamma) * invw[1 : K + 1])))

    # pre-cutoff: sigma_p(k) = sum_{l<k} w_l^{beta_p-1} plus its first-order
    # fluctuation corrections u_p (walk) and v_p (increments)
    sig, flucts = [], []
    for b in betas:
        s_ = np.zeros(K + 1)
        s_[1:] = np.cumsum(w[:-1] ** (b - 1.0))
        sig.append(s_)
        uv = np.zeros(K + 1)
        uv[1:] = np.cumsum(
            -(b - 1.0) * n ** (1.0 / a) * walk[:K] * w[:K] ** (b - 2.0)
            + b * w[:K] ** (b - 1.0) * d_sum[:K]
        )
        flucts.append(uv)
    prod_all = np.ones(K + 1)
    for s_ in sig:
        prod_all *= s_
    low = float(np.sum(prod_all[1:])) + (a - 1.0) * float(
        np.sum(d_sum[1:] * prod_all[1:])
    )
    for j in range(len(parts)):
        q_prod = np.ones(K + 1)
        for q in range(len(parts)):
            if q != j:
                q_prod *= sig[q]
        low += float(np.sum(flucts[j][1:] * q_prod[1:]))
    low *= n ** (r * (1.0 - a))

    # post-cutoff: constant per-term level times the saturating inner profile
    if tau - 1 <= K:
        return low, 0.0
    log_pi, _ = _log_survival_prefix(path, 1)
    pi_k = math.exp(log_pi[K])
    pref = gamma ** (1.0 - a) * pi_k * (tau - K) ** (2.0 - a)
    if parts:
        inner = _v_weighted_inner(path, parts)
        a_vals = [float(inner[i][K]) for i in range(len(parts))]
        b_vals = [pi_k ** parts[i] / (gamma * betas[i]) for i in range(len(parts))]
        c_vals = [a_vals[i] + b_vals[i] for i in range(len(parts))]
        val = 0.0
        for size in range(0, len(parts) + 1):
            for subset in combinations(range(len(parts)), size):
                bq = sum(betas[q] for q in subset)
                term = (-1.0) ** size / (bq + 1.0)
                for q in subset:
                    term *= b_vals[q]
                for p in range(len(parts)):
                    if p not in subset:
                        term *= c_vals[p]
                val += term
        high = pref * val
    else:
        high = pref
    return low, high


def fluctuation_functional(
    path: CoalescentPath, parts: tuple, cutoff: CutoffConfig, form: str = "exact"
) -> float:
    """Fluctuation functional of one composition's length sums.

    The coefficient of n^(1-alpha+1/alpha) in L1 + L2 around the asymptotic
    deterministic part (1/gamma) prod(1/r_p) n^(2-alpha) int_0^1
    prod_p(1 - x^{beta_p}) dx.

    ``exact`` evaluates the first-order expansion with exact finite-n level
    weights (see linearized_split); ``limit`` assembles the n -> infinity
    weight functions from the alternating subset coefficient families:

    * walk sums (1/n) sum_l (1-gamma l/n)^{beta_j+beta_P-1} S_{l/n} with
      coefficients -((beta_j-1)/gamma) (-1)^|P| / (beta_P+1),
    * increment sums with the difference coefficients c(P) - c(P+{j}) at
      weight exponent beta_j + beta_P,
    * a global increment group carrying (1/gamma^2) times the subset
      coefficients,
    * minus (1/gamma) prod(1/r_p) times the walk value at time 1/gamma from
      the post-cutoff stretch.

    Both forms agree as n grows; the exact form converges much faster.
    """
    model = path.alpha_model
    gamma, a, n = model.gamma, model.alpha, path.leaves_n
    m = len(parts)
    betas = [p * (a - 1.0) for p in parts]
    prod_inv_parts = 1.0
    for p in parts:
        prod_inv_parts /= p

    if form == "exact":
        low, high = linearized_split(path, parts, cutoff)
        det_inf = (
            (1.0 / gamma)
            * prod_inv_parts
            * n ** (2.0 - a)
            * _saturating_integral(betas, 0.0, 1.0)
        )
        return (low + high - det_inf) / n**model.fluct_exponent
    if form != "limit":
        raise ValueError(f"unknown form {form!r}")

    k_eff = _effective_cutoff(path, cutoff)
    total = 0.0
    for j in range(m):
        beta_j = betas[j]
        prod_others = prod_inv_parts * parts[j]
        others = [q for q in range(m) if q != j]
        for size in range(0, m):
            for subset in combinations(others, size):
                beta_p = sum(betas[q] for q in subset)
                sign = (-1.0) ** size
                walk_part = (
                    -((beta_j - 1.0) / gamma)
                    * (sign / (beta_p + 1.0))
                    * weighted_walk_sum(path, beta_j + beta_p - 1.0, k_eff)
                )
                incr_part = (
                    (1.0 / gamma**2)
                    * sign
                    * (1.0 / (beta_p + 1.0) - 1.0 / (beta_p + beta_j + 1.0))
                    * weighted_increment_sum(path, beta_j + beta_p, k_eff)
                )
                total += prod_others * (walk_part + incr_part)

    glob = 0.0
    for size in range(0, m + 1):
        for subset in combinations(range(m), size):
            beta_q = sum(betas[q] for q in subset)
            glob += ((-1.0) ** size / (beta_q + 1.0)) * weighted_increment_sum(
                path, beta_q, k_eff
            )
    total += prod_inv_parts * glob / gamma**2

    # post-cutoff stretch: its term count tracks tau_n - K_n
    walk = _rescaled_walk_values(path)
    cut = min(int(path.leaves_n / gamma), path.tau_n)
    total -= prod_inv_parts * float(walk[cut]) / gamma
    return total


def fluctuation_prediction(
    path: CoalescentPath, r: int, cutoff: CutoffConfig, form: str = "exact"
) -> float:
    """Predicted (ell_r - c_r n^{2-alpha}) / n^{1-alpha+1/alpha} from the walk.

    alpha Gamma(alpha) times the composition-weighted fluctuation
    functionals; the composition-weighted deterministic parts reassemble
    c_r n^{2-alpha} exactly for r <= 3, so no separate centering correction
    appears.  For r >= 4 the symmetrized composition weights drift from the
    true centering at leading order (see centering_from_compositions), so
    the prediction is only meaningful for r <= 3.
    """
    model = path.alpha_model
    total = 0.0
    for parts in compositions(r - 1):
        total += composition_weight(model, r, parts) * fluctuation_functional(
            path, parts, cutoff, form=form
        )
    return _alpha_gamma(model) * total


def centering_from_compositions(model: AlphaModel, r: int) -> float:
    """Centering constant reassembled from the composition decomposition.

    alpha Gamma(alpha) (1/gamma) sum_comp w_comp prod_p(1/r_p)
    int_0^1 prod_p (1 - x^{r_p(alpha-1)}) dx, where the integral expands into
    subset coefficients.

    Equals centering_constant(r) identically for r <= 3.  For r >= 4 the
    m!-symmetrization behind composition_weight over-counts: compositions
    that are permutations of each other carry different weights while their
    ordered merger-level sums are not exchangeable, so the assembly drifts
    above the true constant (about 1% at r = 4, 8% at r = 6 for alpha = 1.5;
    replicate means of the simulated lengths side with centering_constant).
    """
    total = 0.0
    for parts in compositions(r - 1):
        w = composition_weight(model, r, parts)
        prod_inv = 1.0
        for p in parts:
            prod_inv /= p
        integral = 0.0
        for size in range(0, len(parts) + 1):
            for subset in combinations(range(len(parts)), size):
                integral += subset_coefficient(model, parts, subset)
        total += w * prod_inv * integral
    return _alpha_gamma(model) * total / model.gamma
