"""Brute-force reference implementations used to check the package.

Everything here works on plain (value, variance) pairs with literal loops and
no imports from metakit, so the oracles stay independent of the code paths
they verify.
"""

import math


# --- effect-size formulas, transcribed literally -----------------------------


def ref_smd(ne, me, sde, nc, mc, sdc, hedges=False):
    sp = math.sqrt(((ne - 1) * sde**2 + (nc - 1) * sdc**2) / (ne + nc - 2))
    d = (me - mc) / sp
    if hedges:
        d *= 1 - 3 / (4 * (ne + nc - 2) - 1)
    return d, (ne + nc) / (ne * nc) + d**2 / (2 * (ne + nc))


def ref_md(ne, me, sde, nc, mc, sdc):
    return me - mc, sde**2 / ne + sdc**2 / nc


def ref_log_or(a, b, c, d):
    return math.log(a * d / (b * c)), 1 / a + 1 / b + 1 / c + 1 / d


def ref_log_rr(a, b, c, d):
    return math.log((a / (a + b)) / (c / (c + d))), 1 / a - 1 / (a + b) + 1 / c - 1 / (c + d)


def ref_fisher_z(r, n):
    return 0.5 * math.log((1 + r) / (1 - r)), 1 / (n - 3)


# --- pooling ------------------------------------------------------------------


def fixed_mean(values, variances):
    """Inverse-variance weighted mean, written as a literal loop."""
    num = 0.0
    den = 0.0
    for v, var in zip(values, variances):
        num += v / var
        den += 1.0 / var
    return num / den


def q_stat(values, variances):
    center = fixed_mean(values, variances)
    q = 0.0
    for v, var in zip(values, variances):
        q += (v - center) ** 2 / var
    return q


def dl_tau2(values, variances):
    q = q_stat(values, variances)
    k = len(values)
    sw = sum(1.0 / var for var in variances)
    sw2 = sum((1.0 / var) ** 2 for var in variances)
    c = sw - sw2 / sw
    return max(0.0, (q - (k - 1)) / c)


def random_mean(values, variances):
    tau2 = dl_tau2(values, variances)
    num = 0.0
    den = 0.0
    for v, var in zip(values, variances):
        w = 1.0 / (var + tau2)
        num += w * v
        den += w
    return num / den


def pooled_mean(values, variances, model):
    if model == "fixed":
        return fixed_mean(values, variances)
    return random_mean(values, variances)


def leave_one_out_means(values, variances, model):
    """Pooled mean of every (k-1)-subset, one per omitted index."""
    out = []
    for i in range(len(values)):
        vs = [v for j, v in enumerate(values) if j != i]
        ws = [w for j, w in enumerate(variances) if j != i]
        out.append(pooled_mean(vs, ws, model))
    return out


def _midranks(magnitudes):
    """1-based ranks of the given magnitudes; ties share their average rank."""
    order = sorted(range(len(magnitudes)), key=lambda i: magnitudes[i])
    ranks = [0.0] * len(magnitudes)
    pos = 0
    while pos < len(order):
        end = pos
        while end + 1 < len(order) and magnitudes[order[end + 1]] == magnitudes[order[pos]]:
            end += 1
        avg = (pos + end) / 2 + 1
        for j in range(pos, end + 1):
            ranks[order[j]] = avg
        pos = end + 1
    return ranks


def _round_half_away(x):
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def trim_and_fill_reference(values, variances, model="fixed", max_iterations=20):
    """Literal transcription of the iterative trim-and-fill procedure.

    Each pass pools the untrimmed studies with fixed weights, centers all
    studies at that estimate, ranks absolute deviations with midranks, and
    re-estimates the missing-study count via
    L0 = max(0, round_half_away((4*S - n(n+1)) / (2n - 1)))
    where S is the rank sum on the heavier side (detected on the first pass
    and then held fixed). Trimming removes the most extreme same-side
    studies; filling mirrors them about the final trimmed estimate.

    Returns a dict with side, k0, iterations, the imputed (value, variance)
    pairs, and the adjusted pooled mean over originals plus imputations.
    """
    n = len(values)
    side = None
    trimmed = 0
    iterations = 0
    converged = False
    while iterations < max_iterations:
        iterations += 1
        trim_idx = _extreme_indices(values, side, trimmed)
        keep_vals = [v for i, v in enumerate(values) if i not in trim_idx]
        keep_vars = [w for i, w in enumerate(variances) if i not in trim_idx]
        center = fixed_mean(keep_vals, keep_vars)
        centered = [v - center for v in values]
        ranks = _midranks([abs(c) for c in centered])
        s_right = sum(r for r, c in zip(ranks, centered) if c > 0)
        s_left = sum(r for r, c in zip(ranks, centered) if c < 0)
        if side is None:
            side = "right" if s_right >= s_left else "left"
        s = s_right if side == "right" else s_left
        same_side = sum(1 for c in centered if (c > 0 if side == "right" else c < 0))
        l0 = max(0, _round_half_away((4 * s - n * (n + 1)) / (2 * n - 1)))
        l0 = min(l0, same_side, n - 1)
        if l0 == trimmed:
            converged = True
            break
        trimmed = l0
    if not converged:
        raise RuntimeError(f"no convergence after {max_iterations} iterations; last k0={trimmed}")
    trim_idx = _extreme_indices(values, side, trimmed)
    keep_vals = [v for i, v in enumerate(values) if i not in trim_idx]
    keep_vars = [w for i, w in enumerate(variances) if i not in trim_idx]
    center = fixed_mean(keep_vals, keep_vars)
    imputed = [(2 * center - values[i], variances[i]) for i in sorted(trim_idx)]
    all_vals = list(values) + [v for v, _ in imputed]
    all_vars = list(variances) + [w for _, w in imputed]
    return {
        "side": side,
        "k0": trimmed,
        "iterations": iterations,
        "imputed": imputed,
        "adjusted": pooled_mean(all_vals, all_vars, model),
        "original": pooled_mean(list(values), list(variances), model),
    }


def _extreme_indices(values, side, count):
    """Indices of the `count` most extreme studies on `side` (by raw value).

    Ties go to the earlier input index on either side.
    """
    if count == 0 or side is None:
        return set()
    if side == "right":
        idx = sorted(range(len(values)), key=lambda i: (-values[i], i))
    else:
        idx = sorted(range(len(values)), key=lambda i: (values[i], i))
    return set(idx[:count])
