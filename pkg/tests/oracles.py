"""Independent reference computations used as test oracles.

Deliberately written with plain loops and the ``math`` module so they share
no code path with the vectorized implementations under test.
"""

import math
import statistics

import numpy as np


def normal_pdf(x, mu=0.0, sigma=1.0):
    z = (x - mu) / sigma
    return math.exp(-0.5 * z * z) / (sigma * math.sqrt(2 * math.pi))


def mixture_density(points, sigma, x):
    """Equal-weight isotropic normal mixture, product of per-dimension pdfs."""
    total = 0.0
    for y in points:
        term = 1.0
        for xi, yi in zip(x, y):
            term *= normal_pdf(xi, yi, sigma)
        total += term
    return total / len(points)


def log_mixture_density(points, sigma, x, floor=-1e12):
    d = len(x)
    exps = [-sum((xi - yi) ** 2 for xi, yi in zip(x, y)) / (2 * sigma * sigma) for y in points]
    m = max(exps)
    lse = m + math.log(math.fsum(math.exp(e - m) for e in exps))
    val = lse - math.log(len(points)) - 0.5 * d * math.log(2 * math.pi * sigma * sigma)
    return max(val, floor)


def cv_bandwidth(points, grid_size=10, folds=3, lo=0.1, hi=10.0, seed=0, floor=-1e12):
    """Exhaustive grid search; returns (chosen index, chosen bandwidth, grid)."""
    points = [list(map(float, p)) for p in points]
    n, d = len(points), len(points[0])
    stds = [statistics.stdev([p[k] for p in points]) for k in range(d)] if n > 1 else [0.0] * d
    ref = max(sum(stds) / d * (4.0 / ((d + 2) * n)) ** (1.0 / (d + 4)), 1e-6)
    a, b = math.log(lo * ref), math.log(hi * ref)
    if grid_size == 1:
        grid = [lo * ref]
    else:
        grid = [math.exp(a + (b - a) * k / (grid_size - 1)) for k in range(grid_size)]
    perm = list(np.random.default_rng(seed).permutation(n))
    # np.array_split semantics: the first n % folds folds get one extra element
    sizes = [n // folds + (1 if k < n % folds else 0) for k in range(folds)]
    fold_sets, start = [], 0
    for s in sizes:
        fold_sets.append(perm[start:start + s])
        start += s
    best_k, best_score = None, -math.inf
    for k, sigma in enumerate(grid):
        fold_means = []
        for held in fold_sets:
            held_set = set(held)
            train = [points[i] for i in range(n) if i not in held_set]
            vals = [log_mixture_density(train, sigma, points[i], floor) for i in held]
            fold_means.append(sum(vals) / len(vals))
        score = sum(fold_means) / folds
        if score > best_score:
            best_k, best_score = k, score
    return best_k, grid[best_k], grid


def fleiss_textbook(labels):
    """Fleiss' kappa from a list of per-item rater label lists."""
    categories = sorted({c for item in labels for c in item})
    N = len(labels)
    n = len(labels[0])
    counts = [[item.count(c) for c in categories] for item in labels]
    p = [sum(row[j] for row in counts) / (N * n) for j in range(len(categories))]
    P = [(sum(c * c for c in row) - n) / (n * (n - 1)) for row in counts]
    P_bar = sum(P) / N
    P_e = sum(pj * pj for pj in p)
    return (P_bar - P_e) / (1 - P_e)


def brute_score(predicted, gold):
    predicted = list(dict.fromkeys(predicted))
    gold = list(dict.fromkeys(gold))
    tp = sum(1 for p in predicted if p in gold)
    fp = sum(1 for p in predicted if p not in gold)
    fn = sum(1 for g in gold if g not in predicted)
    if not predicted and not gold:
        return 1.0, 1.0, 1.0, tp, fp, fn
    if not predicted or not gold:
        return 0.0, 0.0, 0.0, tp, fp, fn
    prec = tp / (tp + fp)
    rec = tp / (tp + fn)
    f = 0.0 if tp == 0 else 2 * prec * rec / (prec + rec)
    return prec, rec, f, tp, fp, fn


def trapezoid(f_values, xs):
    total = 0.0
    for i in range(1, len(xs)):
        total += (xs[i] - xs[i - 1]) * (f_values[i] + f_values[i - 1]) / 2
    return total
