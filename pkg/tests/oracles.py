"""Slow, independent reference computations used to check the library.

Nothing here imports guessleak. Everything is plain Python loops over the
definitions: permutations for guesswork, explicit sums for Renyi quantities,
truncated series for geometric expectations.
"""

from __future__ import annotations

import itertools
import math


def guesswork_by_permutations(p, h=lambda i: i):
    """min over all guessing orders of sum_i h(i) * p[order[i-1]]."""
    best = math.inf
    for order in itertools.permutations(range(len(p))):
        best = min(best, sum(h(i + 1) * p[k] for i, k in enumerate(order)))
    return best


def renyi_divergence(p, q, alpha):
    pairs = [(a, b) for a, b in zip(p, q) if a > 0]
    if alpha == math.inf:
        return max(math.log(a / b) if b > 0 else math.inf for a, b in pairs)
    if any(b == 0 for _, b in pairs) and alpha >= 1:
        return math.inf
    if alpha == 1:
        return sum(a * math.log(a / b) for a, b in pairs)
    s = sum(a**alpha * b ** (1 - alpha) for a, b in pairs if b > 0)
    if s == 0:
        return math.inf
    return math.log(s) / (alpha - 1)


def renyi_entropy(p, alpha):
    p = [a for a in p if a > 0]
    if alpha == math.inf:
        return -math.log(max(p))
    if alpha == 1:
        return -sum(a * math.log(a) for a in p)
    return math.log(sum(a**alpha for a in p)) / (1 - alpha)


def arimoto_cond_entropy(pxy, alpha):
    """alpha/(1-alpha) log sum_y P_Y(y) ||P_{X|Y=y}||_alpha, over outputs with P_Y > 0."""
    nx, ny = len(pxy), len(pxy[0])
    total = 0.0
    for y in range(ny):
        py = sum(pxy[x][y] for x in range(nx))
        if py == 0:
            continue
        norm = sum((pxy[x][y] / py) ** alpha for x in range(nx) if pxy[x][y] > 0) ** (1 / alpha)
        total += py * norm
    return alpha / (1 - alpha) * math.log(total)


def arimoto_mi(pxy, alpha):
    px = [sum(row) for row in pxy]
    return renyi_entropy(px, alpha) - arimoto_cond_entropy(pxy, alpha)


def expected_v_geometric(q, rho, tol=1e-15):
    """sum_k q (1-q)^(k-1) binom(k + rho - 1, rho), summed until terms vanish."""
    total, k = 0.0, 1
    while True:
        lb = math.lgamma(k + rho) - math.lgamma(rho + 1) - math.lgamma(k)
        term = q * (1 - q) ** (k - 1) * math.exp(lb)
        total += term
        if k > 10 and term < tol * total:
            return total
        k += 1


def shattered_guesswork_ratio(px, post, i, m, h):
    """Materialize both shattered distributions and guess them in sorted order."""

    def shatter(p):
        out = [v for k, v in enumerate(p) if k != i] + [p[i] / m] * m
        return sorted(out, reverse=True)

    num = sum(h(r + 1) * v for r, v in enumerate(shatter(px)))
    den = sum(h(r + 1) * v for r, v in enumerate(shatter(post)))
    return num / den


def guesswork_ratio_for_channel(pxy, v, h=lambda i: i):
    """log min_G E[h(G(U))] - log sum_y min_G E[h(G(U)) ; Y = y] by permutations."""
    nx, ny, nu = len(pxy), len(pxy[0]), len(v[0])
    puy = [[sum(v[x][u] * pxy[x][y] for x in range(nx)) for y in range(ny)] for u in range(nu)]
    pu = [sum(row) for row in puy]
    num = guesswork_by_permutations(pu, h)
    den = sum(guesswork_by_permutations([puy[u][y] for u in range(nu)], h) for y in range(ny))
    if num == den == 0:
        # h(1) = 0 and U is certain: no cost either way
        return 0.0
    return math.log(num / den)


def split_brute_force(pu, step):
    """min of gamma(A)/2 + gamma(B)/2 over A on a grid with A <= 2 P_U, sum A = 1."""
    n = len(pu)
    res = round(1 / step)
    best = math.inf
    for comp in itertools.product(range(res + 1), repeat=n - 1):
        last = res - sum(comp)
        if last < 0:
            continue
        a = [c / res for c in comp] + [last / res]
        b = [2 * p - x for p, x in zip(pu, a)]
        if min(b) < -1e-12:
            continue
        b = [max(x, 0.0) for x in b]
        ga = sum((k + 1) * x for k, x in enumerate(sorted(a, reverse=True)))
        gb = sum((k + 1) * x for k, x in enumerate(sorted(b, reverse=True)))
        best = min(best, ga / 2 + gb / 2)
    return best
