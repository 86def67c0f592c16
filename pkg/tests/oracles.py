"""Slow, independent reference implementations used to check the library.

Nothing here imports projdebias; each function follows the textbook
definition as literally as possible.
"""

from __future__ import annotations

import itertools
import math


def dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def norm(u):
    return math.sqrt(dot(u, u))


def cos(u, v):
    return dot(u, v) / (norm(u) * norm(v))


def tukey_depth_brute(q, P, grid=7200):
    """Closed-halfplane depth of ``q``: minimum over a fine angular grid plus
    every critical angle (normals perpendicular to ``p - q``) and a small
    rotation either side of each."""
    angles = [2 * math.pi * i / grid for i in range(grid)]
    for p in P:
        dx, dy = p[0] - q[0], p[1] - q[1]
        if dx == 0 and dy == 0:
            continue
        base = math.atan2(dy, dx)
        for off in (math.pi / 2, -math.pi / 2):
            for tiny in (0.0, 1e-7, -1e-7):
                angles.append(base + off + tiny)
    best = len(P)
    for a in angles:
        u = (math.cos(a), math.sin(a))
        c = sum(1 for p in P if (p[0] - q[0]) * u[0] + (p[1] - q[1]) * u[1] >= -1e-12)
        best = min(best, c)
    return best


def best_line_errors_brute(Pminus, Pplus, grid=720):
    """Fewest misclassifications of any oriented line (or constant rule),
    by sweeping a dense set of normal directions and every threshold."""
    pts = [(p, 0) for p in Pminus] + [(p, 1) for p in Pplus]
    best = min(len(Pminus), len(Pplus))
    dirs = [2 * math.pi * i / grid for i in range(grid)]
    for (a, _), (b, _) in itertools.combinations(pts, 2):
        dx, dy = b[0] - a[0], b[1] - a[1]
        if dx or dy:
            base = math.atan2(dy, dx) + math.pi / 2
            dirs.extend(base + t for t in (1e-6, -1e-6, math.pi + 1e-6, math.pi - 1e-6))
    for ang in dirs:
        u = (math.cos(ang), math.sin(ang))
        proj = sorted(((p[0] * u[0] + p[1] * u[1]), lab) for p, lab in pts)
        vals = [v for v, _ in proj]
        cuts = [vals[0] - 1] + [0.5 * (vals[i] + vals[i + 1]) for i in range(len(vals) - 1)] + [vals[-1] + 1]
        for c in cuts:
            err = sum(1 for v, lab in proj if (v >= c) != (lab == 1))
            best = min(best, err)
    return best


def weat_by_hand(X, Y, A, B):
    """Effect size, numerator and sample stdev from raw vectors."""

    def s(w):
        return sum(cos(w, a) for a in A) / len(A) - sum(cos(w, b) for b in B) / len(B)

    sx = [s(x) for x in X]
    sy = [s(y) for y in Y]
    allv = sx + sy
    mean = sum(allv) / len(allv)
    sd = math.sqrt(sum((v - mean) ** 2 for v in allv) / (len(allv) - 1))
    num = sum(sx) / len(sx) - sum(sy) / len(sy)
    return num / sd, num, sd


def average_ranks(values):
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        r = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = r
        i = j + 1
    return ranks


def spearman_by_hand(a, b):
    ra, rb = average_ranks(a), average_ranks(b)
    ma, mb = sum(ra) / len(ra), sum(rb) / len(rb)
    num = sum((x - ma) * (y - mb) for x, y in zip(ra, rb))
    den = math.sqrt(sum((x - ma) ** 2 for x in ra) * sum((y - mb) ** 2 for y in rb))
    return num / den


def v_measure_by_hand(true, pred):
    n = len(true)
    C = sorted(set(true))
    K = sorted(set(pred))
    a = {(c, k): 0 for c in C for k in K}
    for t, p in zip(true, pred):
        a[(t, p)] += 1
    nc = {c: sum(a[(c, k)] for k in K) for c in C}
    nk = {k: sum(a[(c, k)] for c in C) for k in K}
    H_C = -sum(nc[c] / n * math.log(nc[c] / n) for c in C)
    H_K = -sum(nk[k] / n * math.log(nk[k] / n) for k in K)
    H_CK = -sum(a[(c, k)] / n * math.log(a[(c, k)] / nk[k]) for c in C for k in K if a[(c, k)])
    H_KC = -sum(a[(c, k)] / n * math.log(a[(c, k)] / nc[c]) for c in C for k in K if a[(c, k)])
    h = 1.0 if H_C == 0 else 1 - H_CK / H_C
    c = 1.0 if H_K == 0 else 1 - H_KC / H_K
    v = 0.0 if h + c == 0 else 2 * h * c / (h + c)
    return v, h, c


def gap_rms_by_hand(rows, g0, g1):
    """``rows`` are (true, predicted, group) triples."""
    profs = sorted({t for t, _, _ in rows})
    gaps = []
    for p in profs:
        tp = {}
        for grp in (g0, g1):
            sel = [r for r in rows if r[0] == p and r[2] == grp]
            if not sel:
                break
            tp[grp] = sum(1 for r in sel if r[1] == p) / len(sel)
        else:
            gaps.append(tp[g0] - tp[g1])
    return math.sqrt(sum(g * g for g in gaps) / len(gaps)), gaps
