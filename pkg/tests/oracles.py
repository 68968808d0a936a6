"""Independent reference implementations used only by the tests.

Each oracle takes a deliberately different route from the code it checks:
recursion or exhaustive enumeration instead of tables, scalar loops instead
of vectorized numpy, decimal arithmetic instead of fractions.
"""

from __future__ import annotations

import math
from decimal import ROUND_FLOOR, ROUND_HALF_UP, Decimal
from functools import lru_cache
from itertools import product


def levenshtein(a, b) -> int:
    """Textbook recursive edit distance with memoization."""
    a, b = tuple(a), tuple(b)

    @lru_cache(maxsize=None)
    def d(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        return min(
            d(i - 1, j) + 1,
            d(i, j - 1) + 1,
            d(i - 1, j - 1) + (a[i - 1] != b[j - 1]),
        )

    return d(len(a), len(b))


def levenshtein_exhaustive(a, b) -> int:
    """Minimum cost over every alignment, enumerated as edit-operation strings.

    Only usable for very short inputs; validates :func:`levenshtein` itself.
    """
    best = [math.inf]

    def walk(i, j, cost):
        if cost >= best[0]:
            return
        if i == len(a) and j == len(b):
            best[0] = cost
            return
        if i < len(a) and j < len(b):
            walk(i + 1, j + 1, cost + (a[i] != b[j]))
        if i < len(a):
            walk(i + 1, j, cost + 1)
        if j < len(b):
            walk(i, j + 1, cost + 1)

    walk(0, 0, 0)
    return int(best[0])


def monotone_paths(n: int, m: int):
    """Every path from (0,0) to (n-1,m-1) with steps (1,0), (0,1), (1,1)."""
    def rec(i, j):
        if (i, j) == (n - 1, m - 1):
            yield [(i, j)]
            return
        for di, dj in ((1, 1), (1, 0), (0, 1)):
            ni, nj = i + di, j + dj
            if ni < n and nj < m:
                for tail in rec(ni, nj):
                    yield [(i, j)] + tail

    yield from rec(0, 0)


def euclid(u, v) -> float:
    return math.sqrt(sum((float(x) - float(y)) ** 2 for x, y in zip(u, v)))


def dtw_bruteforce(ref, hyp, dist=euclid) -> float:
    ref, hyp = list(ref), list(hyp)
    return min(
        math.fsum(dist(ref[i], hyp[j]) for i, j in path)
        for path in monotone_paths(len(ref), len(hyp))
    )


def disc_score_loop(y) -> float:
    total = 0.0
    for v in y:
        total += (float(v) - 1.0) ** 2
    return 1.0 - total / len(y)


def conv1d_loops(x, weight, bias, stride=1, dilation=1, groups=1, padding=0):
    """Nested-loop grouped/dilated cross-correlation over Python lists."""
    c_in = len(x)
    length = len(x[0])
    c_out = len(weight)
    c_group = len(weight[0])
    kernel = len(weight[0][0])
    out_per_group = c_out // groups
    l_out = (length + 2 * padding - dilation * (kernel - 1) - 1) // stride + 1
    out = []
    for o in range(c_out):
        g = o // out_per_group
        row = []
        for t in range(l_out):
            acc = float(bias[o]) if bias is not None else 0.0
            for c in range(c_group):
                ch = g * c_group + c
                for k in range(kernel):
                    pos = t * stride + k * dilation - padding
                    if 0 <= pos < length:
                        acc += float(weight[o][c][k]) * float(x[ch][pos])
            row.append(acc)
        out.append(row)
    assert c_in == groups * c_group
    return out


def avg_pool_loops(x, kernel, stride, padding):
    length = len(x[0])
    l_out = (length + 2 * padding - kernel) // stride + 1
    out = []
    for row in x:
        vals = []
        for t in range(l_out):
            acc = 0.0
            count = 0
            for k in range(kernel):
                pos = t * stride + k - padding
                if 0 <= pos < length:
                    acc += row[pos]
                    count += 1
            vals.append(acc / count)
        out.append(vals)
    return out


def forward_loops(layers, tensors, samples, disc_index=0):
    x = [list(map(float, samples))]
    for i, spec in enumerate(layers):
        if spec.kind == "conv1d":
            w = tensors[spec.weight or f"d{disc_index}.l{i}.weight"].tolist()
            b = tensors[spec.bias or f"d{disc_index}.l{i}.bias"].tolist()
            x = conv1d_loops(x, w, b, spec.stride, spec.dilation, spec.groups, spec.padding)
        elif spec.kind == "leaky_relu":
            x = [[v if v >= 0 else spec.slope * v for v in row] for row in x]
        else:
            x = avg_pool_loops(x, spec.kernel, spec.stride, spec.padding)
    return x[0]


def conv_length_enumerated(length, kernel, stride, dilation, padding) -> int:
    """Count output positions by sliding the dilated kernel over the padded input."""
    padded = length + 2 * padding
    count = 0
    start = 0
    while start + dilation * (kernel - 1) < padded:
        count += 1
        start += stride
    return count


def split_counts_decimal(n: int, fractions=("0.9", "0.05", "0.05")) -> tuple[int, int, int]:
    train = (Decimal(fractions[0]) * n).to_integral_value(rounding=ROUND_FLOOR)
    valid = (Decimal(fractions[1]) * n).to_integral_value(rounding=ROUND_HALF_UP)
    return int(train), int(valid), n - int(train) - int(valid)


def bleu_reference(refs, hyps, max_n=4) -> float:
    """Corpus BLEU from explicit n-gram lists, written independently of the package."""
    match = [0] * max_n
    total = [0] * max_n
    r_len = c_len = 0
    for r, h in zip(refs, hyps):
        r_len += len(r)
        c_len += len(h)
        for n in range(1, max_n + 1):
            h_ngrams = [tuple(h[i:i + n]) for i in range(len(h) - n + 1)]
            r_ngrams = [tuple(r[i:i + n]) for i in range(len(r) - n + 1)]
            for g in set(h_ngrams):
                match[n - 1] += min(h_ngrams.count(g), r_ngrams.count(g))
            total[n - 1] += len(h_ngrams)
    used = [(m, t) for m, t in zip(match, total) if t > 0]
    if c_len == 0 or any(m == 0 for m, _ in used):
        return 0.0
    geo = math.exp(sum(math.log(m / t) for m, t in used) / len(used))
    bp = 1.0 if c_len > r_len else math.exp(1 - r_len / c_len)
    return bp * geo


def grid(*axes):
    return list(product(*axes))
