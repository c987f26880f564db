"""Independent scalar-loop reference implementations used only by tests.

Everything here is intentionally naive (nested Python loops, no shared code
with the package math paths) so the fast implementations are checked
against a second derivation of each definition.
"""

import math

import numpy as np


def cubic_weight(t, a=-0.5):
    t = abs(t)
    if t <= 1.0:
        return (a + 2.0) * t**3 - (a + 3.0) * t**2 + 1.0
    if t < 2.0:
        return a * t**3 - 5.0 * a * t**2 + 8.0 * a * t - 4.0 * a
    return 0.0


def resize_oracle(data, out_h, out_w, antialias=True, a=-0.5):
    """Direct per-output-pixel weighted sum over the separable kernel."""
    c, h, w = data.shape

    def axis_taps(n_in, n_out):
        scale = n_out / n_in
        s = scale if (antialias and scale < 1.0) else 1.0
        width = 4.0 / s
        taps = int(math.ceil(width)) + 2
        rows = []
        for i in range(n_out):
            u = (i + 0.5) / scale - 0.5
            left = math.floor(u - width / 2.0)
            idx = [left + k for k in range(taps)]
            wts = [s * cubic_weight(s * (u - j), a) for j in idx]
            total = sum(wts)
            wts = [v / total for v in wts]
            idx = [min(max(j, 0), n_in - 1) for j in idx]
            rows.append((idx, wts))
        return rows

    rows = axis_taps(h, out_h)
    cols = axis_taps(w, out_w)
    out = np.zeros((c, out_h, out_w))
    for ch in range(c):
        for oy in range(out_h):
            iy, wy = rows[oy]
            for ox in range(out_w):
                ix, wx = cols[ox]
                acc = 0.0
                for jy, vy in zip(iy, wy):
                    for jx, vx in zip(ix, wx):
                        acc += vy * vx * data[ch, jy, jx]
                out[ch, oy, ox] = acc
    return out


def conv2d_oracle(x, weight, bias, stride=1, padding=0):
    """Four-nested-loop direct cross-correlation."""
    c, h, w = x.shape
    k, _, f, _ = weight.shape
    ho = (h + 2 * padding - f) // stride + 1
    wo = (w + 2 * padding - f) // stride + 1
    xp = np.pad(x, ((0, 0), (padding, padding), (padding, padding)))
    out = np.zeros((k, ho, wo))
    for kk in range(k):
        for y in range(ho):
            for xx in range(wo):
                acc = bias[kk]
                for cc in range(c):
                    for i in range(f):
                        for j in range(f):
                            acc += xp[cc, y * stride + i, xx * stride + j] * weight[kk, cc, i, j]
                out[kk, y, xx] = acc
    return out


def gaussian_window(n=11, sigma=1.5):
    half = (n - 1) / 2.0
    w = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            w[i, j] = math.exp(-((i - half) ** 2 + (j - half) ** 2) / (2 * sigma**2))
    return w / w.sum()


def ssim_oracle(a, b, k1=0.01, k2=0.03, dyn=1.0, n=11, sigma=1.5):
    """Per-window moment computation with explicit loops."""
    h, w = a.shape
    win = gaussian_window(n, sigma)
    c1 = (k1 * dyn) ** 2
    c2 = (k2 * dyn) ** 2
    vals = np.zeros((h - n + 1, w - n + 1))
    for y in range(h - n + 1):
        for x in range(w - n + 1):
            pa = a[y:y + n, x:x + n]
            pb = b[y:y + n, x:x + n]
            mu_a = float((win * pa).sum())
            mu_b = float((win * pb).sum())
            var_a = float((win * pa * pa).sum()) - mu_a**2
            var_b = float((win * pb * pb).sum()) - mu_b**2
            cov = float((win * pa * pb).sum()) - mu_a * mu_b
            vals[y, x] = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)
                          / ((mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)))
    return vals.mean(), vals


def dists_terms_oracle(fm_a, fm_b, c1=1e-6, c2=1e-6):
    """Per-channel texture/structure terms with scalar loops over one map."""
    ch = fm_a.shape[0]
    texture = np.zeros(ch)
    structure = np.zeros(ch)
    for c in range(ch):
        xa = fm_a[c].ravel()
        xb = fm_b[c].ravel()
        n = xa.size
        mu_a = sum(xa) / n
        mu_b = sum(xb) / n
        var_a = sum((v - mu_a) ** 2 for v in xa) / n
        var_b = sum((v - mu_b) ** 2 for v in xb) / n
        cov = sum((p - mu_a) * (q - mu_b) for p, q in zip(xa, xb)) / n
        texture[c] = (2 * mu_a * mu_b + c1) / (mu_a**2 + mu_b**2 + c1)
        structure[c] = (2 * cov + c2) / (var_a + var_b + c2)
    return texture, structure


def mean_cov_oracle(rows):
    """Two-pass scalar mean and unbiased covariance."""
    rows = [list(map(float, r)) for r in rows]
    n = len(rows)
    d = len(rows[0])
    mean = [sum(r[j] for r in rows) / n for j in range(d)]
    cov = np.zeros((d, d))
    for i in range(d):
        for j in range(d):
            cov[i, j] = sum((r[i] - mean[i]) * (r[j] - mean[j]) for r in rows) / (n - 1)
    return np.array(mean), cov


def jacobi_eigh(m, sweeps=100, tol=1e-14):
    """Cyclic Jacobi eigensolver for small symmetric matrices; independent
    of numpy.linalg."""
    a = np.array(m, dtype=float)
    n = a.shape[0]
    v = np.eye(n)
    for _ in range(sweeps):
        off = math.sqrt(sum(a[i, j] ** 2 for i in range(n) for j in range(n) if i != j))
        if off < tol:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * a[p, q])
                if abs(theta) > 1e150:   # sqrt(theta**2) would overflow
                    t = 1.0 / (2.0 * theta)
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta**2 + 1))
                c = 1.0 / math.sqrt(t**2 + 1)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot
    return np.diag(a).copy(), v


def sqrtm_oracle(m):
    vals, vecs = jacobi_eigh(m)
    vals = np.clip(vals, 0.0, None)
    return vecs @ np.diag(np.sqrt(vals)) @ vecs.T


def fid_oracle(mean_a, cov_a, mean_b, cov_b):
    """Trace formula evaluated with the Jacobi-based square root."""
    root_a = sqrtm_oracle(cov_a)
    inner = sqrtm_oracle(root_a @ cov_b @ root_a)
    diff = np.asarray(mean_a) - np.asarray(mean_b)
    return float(diff @ diff + np.trace(cov_a) + np.trace(cov_b) - 2.0 * np.trace(inner))
