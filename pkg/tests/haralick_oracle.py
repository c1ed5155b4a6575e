"""Naive reference implementations of GLCM construction and the 13 texture
coefficients, written with explicit Python loops and kept deliberately
independent of the package's vectorized code."""

import math

OFFSETS = {0: (0, 1), 45: (-1, 1), 90: (-1, 0), 135: (-1, -1)}


def glcm_oracle(quant, mask, direction, levels, distance=1):
    """Symmetrized, normalized co-occurrence matrix via pixel-by-pixel loops."""
    h = len(quant)
    w = len(quant[0])
    dy, dx = OFFSETS[direction]
    dy, dx = dy * distance, dx * distance
    counts = [[0] * levels for _ in range(levels)]
    total = 0
    for y in range(h):
        for x in range(w):
            ny, nx = y + dy, x + dx
            if not (0 <= ny < h and 0 <= nx < w):
                continue
            if not (mask[y][x] and mask[ny][nx]):
                continue
            i, j = quant[y][x], quant[ny][nx]
            counts[i][j] += 1
            counts[j][i] += 1
            total += 2
    if total == 0:
        return counts, 0
    p = [[counts[i][j] / total for j in range(levels)] for i in range(levels)]
    return p, total


def haralick_oracle(p):
    """The 13 coefficients from a normalized matrix, by direct formula."""
    levels = len(p)
    px = [sum(p[i][j] for j in range(levels)) for i in range(levels)]
    py = [sum(p[i][j] for i in range(levels)) for j in range(levels)]
    mu_x = sum(i * px[i] for i in range(levels))
    mu_y = sum(j * py[j] for j in range(levels))
    var_x = sum((i - mu_x) ** 2 * px[i] for i in range(levels))
    var_y = sum((j - mu_y) ** 2 * py[j] for j in range(levels))

    asm = sum(p[i][j] ** 2 for i in range(levels) for j in range(levels))
    contrast = sum(
        (i - j) ** 2 * p[i][j] for i in range(levels) for j in range(levels)
    )
    sx, sy = math.sqrt(var_x), math.sqrt(var_y)
    if sx > 0 and sy > 0:
        corr = (
            sum(i * j * p[i][j] for i in range(levels) for j in range(levels))
            - mu_x * mu_y
        ) / (sx * sy)
    else:
        corr = 0.0
    variance = sum(
        (i - mu_x) ** 2 * p[i][j] for i in range(levels) for j in range(levels)
    )
    idm = sum(
        p[i][j] / (1 + (i - j) ** 2) for i in range(levels) for j in range(levels)
    )

    p_sum = [0.0] * (2 * levels - 1)
    p_diff = [0.0] * levels
    for i in range(levels):
        for j in range(levels):
            p_sum[i + j] += p[i][j]
            p_diff[abs(i - j)] += p[i][j]

    sum_avg = sum(k * p_sum[k] for k in range(len(p_sum)))
    sum_var = sum((k - sum_avg) ** 2 * p_sum[k] for k in range(len(p_sum)))
    sum_ent = -sum(v * math.log(v) for v in p_sum if v > 0)
    entropy = -sum(
        p[i][j] * math.log(p[i][j])
        for i in range(levels)
        for j in range(levels)
        if p[i][j] > 0
    )
    mu_d = sum(k * p_diff[k] for k in range(levels))
    diff_var = sum((k - mu_d) ** 2 * p_diff[k] for k in range(levels))
    diff_ent = -sum(v * math.log(v) for v in p_diff if v > 0)

    hx = -sum(v * math.log(v) for v in px if v > 0)
    hy = -sum(v * math.log(v) for v in py if v > 0)
    hxy1 = -sum(
        p[i][j] * math.log(px[i] * py[j])
        for i in range(levels)
        for j in range(levels)
        if p[i][j] > 0
    )
    hxy2 = -sum(
        px[i] * py[j] * math.log(px[i] * py[j])
        for i in range(levels)
        for j in range(levels)
        if px[i] * py[j] > 0
    )
    denom = max(hx, hy)
    imc1 = (entropy - hxy1) / denom if denom > 0 else 0.0
    imc2 = math.sqrt(max(0.0, 1.0 - math.exp(-2.0 * (hxy2 - entropy))))

    return [
        asm, contrast, corr, variance, idm, sum_avg, sum_var,
        sum_ent, entropy, diff_var, diff_ent, imc1, imc2,
    ]
