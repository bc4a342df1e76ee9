"""Nonparametric comparison machinery: Wilcoxon signed-rank, Holm correction,
and average-rank tables with significance lists."""

import numpy as np
from scipy.stats import norm, rankdata

EXACT_LIMIT = 25


def _exact_wplus_tail(double_ranks, w2):
    """P(W+ >= w2 / 2) under the null, with doubled (integer) ranks.

    Dynamic program over the distribution of the doubled signed-rank sum:
    each rank enters W+ independently with probability 1/2.
    """
    total = int(sum(double_ranks))
    counts = np.zeros(total + 1)
    counts[0] = 1.0
    for dr in double_ranks:
        dr = int(dr)
        shifted = np.zeros_like(counts)
        shifted[dr:] = counts[: total + 1 - dr]
        counts = counts + shifted
    counts /= counts.sum()
    w2 = int(round(w2))
    return float(counts[w2:].sum())


def wilcoxon_signed_rank(a, b, method="auto"):
    """Two-sided paired Wilcoxon p-value.

    Zero differences are dropped, ties get average ranks; exact null
    distribution for n <= 25, normal approximation with tie and continuity
    corrections above. ``method`` forces one path ("exact" / "approx").
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("samples must have equal length")
    d = a - b
    d = d[d != 0.0]
    n = len(d)
    if n == 0:
        return 1.0
    if n < 5:
        raise ValueError(f"need >= 5 non-zero differences, got {n}")
    ranks = rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    use_exact = n <= EXACT_LIMIT if method == "auto" else method == "exact"
    if use_exact:
        dbl = np.round(2.0 * ranks).astype(int)
        w2 = round(2.0 * w_plus)
        upper = _exact_wplus_tail(dbl, w2)
        # P(W+ <= w) via symmetry of the doubled-sum distribution
        total = int(dbl.sum())
        lower = _exact_wplus_tail(dbl, total - w2)
        return float(min(1.0, 2.0 * min(upper, lower)))
    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    tie_term = float(np.sum(tie_counts ** 3 - tie_counts)) / 48.0
    var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term
    if var <= 0:
        return 1.0
    z = (w_plus - mean - 0.5 * np.sign(w_plus - mean)) / np.sqrt(var)
    return float(min(1.0, 2.0 * norm.sf(abs(z))))


def holm_correction(pvalues):
    """Step-down Holm adjustment: sorted p_(i) * (m - i), running max, cap 1."""
    p = np.asarray(pvalues, dtype=float)
    if p.size == 0:
        raise ValueError("no p-values to adjust")
    m = len(p)
    order = np.argsort(p, kind="stable")
    adjusted = np.empty(m)
    running = 0.0
    for i, idx in enumerate(order):
        running = max(running, p[idx] * (m - i))
        adjusted[idx] = min(running, 1.0)
    return adjusted


def average_ranks(values):
    """Average per-case ranks of methods; larger metric => larger rank.

    ``values`` is (n_cases, n_methods). The best method per case receives rank
    n_methods (ties averaged), so higher average rank means better.
    """
    values = np.asarray(values, dtype=float)
    ranks = np.vstack([rankdata(row) for row in values])
    return ranks.mean(axis=0)


def significance_lists(values, alpha=0.05):
    """For each method, the indices of methods significantly better than it.

    Pairwise two-sided Wilcoxon over cases, Holm-corrected as one family;
    direction by mean per-case rank.
    """
    values = np.asarray(values, dtype=float)
    k = values.shape[1]
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    raw = []
    for i, j in pairs:
        try:
            raw.append(wilcoxon_signed_rank(values[:, i], values[:, j]))
        except ValueError:
            raw.append(1.0)
    adjusted = holm_correction(raw) if raw else np.array([])
    avg = average_ranks(values)
    better_than = [[] for _ in range(k)]
    for (i, j), p in zip(pairs, adjusted):
        if p < alpha:
            if avg[i] > avg[j]:
                better_than[j].append(i)
            elif avg[j] > avg[i]:
                better_than[i].append(j)
    return better_than
