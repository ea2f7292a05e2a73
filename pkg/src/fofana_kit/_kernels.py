"""Compiled inner loops.

Every kernel works on 2D arrays; 1D data is passed with a leading axis of
length one. Accumulations use error-free transformations (two-sum) with a
fixed traversal order, so results do not depend on threading.
"""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True, inline="always")
def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


@njit(cache=True, nogil=True, inline="always")
def _dd_add(ah, al, bh, bl):
    s, e = _two_sum(ah, bh)
    e += al + bl
    hi = s + e
    return hi, e - (hi - s)


@njit(cache=True, nogil=True)
def row_prefix(field):
    """Compensated prefix sums along the last axis; shape (ny, nx + 1)."""
    ny, nx = field.shape
    hi = np.zeros((ny, nx + 1))
    lo = np.zeros((ny, nx + 1))
    for i in range(ny):
        s = 0.0
        c = 0.0
        for j in range(nx):
            s, e = _two_sum(s, field[i, j])
            c += e
            hi[i, j + 1] = s
            lo[i, j + 1] = c
    return hi, lo


@njit(cache=True, nogil=True)
def table_prefix(field):
    """Double-double summed-area table; shape (ny + 1, nx + 1)."""
    ny, nx = field.shape
    rh, rl = row_prefix(field)
    hi = np.zeros((ny + 1, nx + 1))
    lo = np.zeros((ny + 1, nx + 1))
    for i in range(ny):
        for j in range(nx + 1):
            hi[i + 1, j], lo[i + 1, j] = _dd_add(hi[i, j], lo[i, j], rh[i, j], rl[i, j])
    return hi, lo


@njit(cache=True, nogil=True, inline="always")
def _box(hi, lo, a, b, c, d):
    if b <= a or d <= c:
        return 0.0
    sh, sl = _dd_add(hi[b, d], lo[b, d], -hi[a, d], -lo[a, d])
    sh, sl = _dd_add(sh, sl, -hi[b, c], -lo[b, c])
    sh, sl = _dd_add(sh, sl, hi[a, c], lo[a, c])
    # the field is nonnegative; cancellation residue below the table's precision can dip under 0
    return max(sh + sl, 0.0)


@njit(cache=True, nogil=True)
def table_query(hi, lo, i0, i1, j0, j1):
    """Box sums over rows [i0, i1) and columns [j0, j1); arrays of bounds."""
    m = i0.shape[0]
    out = np.zeros(m)
    for k in range(m):
        out[k] = _box(hi, lo, i0[k], i1[k], j0[k], j1[k])
    return out


@njit(cache=True, nogil=True)
def disk_sums(hi, lo, halfwidths, pad_y, pad_x):
    """Sums of a field over index disks centred at every cell of a padded grid.

    ``hi``/``lo`` come from :func:`row_prefix`. ``halfwidths[k]`` is the row
    half-width at vertical offset ``k - R``. Cells outside the field are 0.
    """
    ny = hi.shape[0]
    nx = hi.shape[1] - 1
    nk = halfwidths.shape[0]
    R = (nk - 1) // 2
    oy_n = ny + 2 * pad_y
    ox_n = nx + 2 * pad_x
    out = np.zeros((oy_n, ox_n))
    for oy in range(oy_n):
        cy = oy - pad_y
        for ox in range(ox_n):
            cx = ox - pad_x
            s = 0.0
            c = 0.0
            for k in range(nk):
                iy = cy + k - R
                if iy < 0 or iy >= ny:
                    continue
                w = halfwidths[k]
                a = max(cx - w, 0)
                b = min(cx + w + 1, nx)
                if b <= a:
                    continue
                v = (hi[iy, b] - hi[iy, a]) + (lo[iy, b] - lo[iy, a])
                s, e = _two_sum(s, v)
                c += e
            out[oy, ox] = max(s + c, 0.0)
    return out


@njit(cache=True, nogil=True)
def sparse_max_table(field):
    """Row-wise sparse table for O(1) range-maximum queries."""
    ny, nx = field.shape
    levels = 1
    while (1 << levels) <= nx:
        levels += 1
    table = np.zeros((levels, ny, nx))
    table[0] = field
    for lv in range(1, levels):
        span = 1 << (lv - 1)
        for i in range(ny):
            for j in range(nx - (1 << lv) + 1):
                table[lv, i, j] = max(table[lv - 1, i, j], table[lv - 1, i, j + span])
    return table


@njit(cache=True, nogil=True)
def disk_maxima(table, halfwidths, pad_y, pad_x):
    """Maximum of a nonnegative field over index disks on a padded grid."""
    ny = table.shape[1]
    nx = table.shape[2]
    nk = halfwidths.shape[0]
    R = (nk - 1) // 2
    oy_n = ny + 2 * pad_y
    ox_n = nx + 2 * pad_x
    out = np.zeros((oy_n, ox_n))
    for oy in range(oy_n):
        cy = oy - pad_y
        for ox in range(ox_n):
            cx = ox - pad_x
            best = 0.0
            for k in range(nk):
                iy = cy + k - R
                if iy < 0 or iy >= ny:
                    continue
                w = halfwidths[k]
                a = max(cx - w, 0)
                b = min(cx + w + 1, nx)
                if b <= a:
                    continue
                span = b - a
                lv = 0
                while (2 << lv) <= span:
                    lv += 1
                v = max(table[lv, iy, a], table[lv, iy, b - (1 << lv)])
                if v > best:
                    best = v
            out[oy, ox] = best
    return out


@njit(cache=True, nogil=True)
def maximal_naive(absf, off_y, off_x, ends, keep_averages):
    """Centred discrete maximal function by direct enumeration.

    Offsets are sorted by distance; ``ends[j]`` is the number of offsets in
    the j-th ball, which is also its cell count on the infinite lattice.
    Each average is clamped to the largest value seen in its ball, a bound
    the exact average obeys and rounding could otherwise break.
    """
    ny, nx = absf.shape
    nr = ends.shape[0]
    out = absf.copy()
    if keep_averages:
        avgs = np.zeros((nr, ny, nx))
    else:
        avgs = np.zeros((0, ny, nx))
    for y in range(ny):
        for x in range(nx):
            s = 0.0
            c = 0.0
            k = 0
            best = out[y, x]
            top = 0.0
            for j in range(nr):
                end = ends[j]
                while k < end:
                    yy = y + off_y[k]
                    xx = x + off_x[k]
                    if 0 <= yy < ny and 0 <= xx < nx:
                        v = absf[yy, xx]
                        s, e = _two_sum(s, v)
                        c += e
                        if v > top:
                            top = v
                    k += 1
                avg = min((s + c) / end, top)
                if keep_averages:
                    avgs[j, y, x] = avg
                if avg > best:
                    best = avg
            out[y, x] = best
    return out, avgs


@njit(cache=True, nogil=True)
def maximal_cubes(absf, hi, lo, inner, outer, dim, keep_averages):
    """Cube maximal function from a summed-area table of ``absf``.

    For each radius j, averages over the inscribed (half-side ``inner[j]``)
    and circumscribed (half-side ``outer[j]``) cubes both enter the maximum.
    Averages are clamped to ``max(absf)`` against upward rounding.
    """
    ny, nx = absf.shape
    nr = inner.shape[0]
    out = absf.copy()
    top = absf.max() if absf.size else 0.0
    if keep_averages:
        avgs = np.zeros((2, nr, ny, nx))
    else:
        avgs = np.zeros((2, 0, ny, nx))
    for y in range(ny):
        for x in range(nx):
            best = out[y, x]
            for j in range(nr):
                for side in range(2):
                    w = inner[j] if side == 0 else outer[j]
                    wy = w if dim == 2 else 0
                    total = _box(hi, lo, max(y - wy, 0), min(y + wy + 1, ny),
                                 max(x - w, 0), min(x + w + 1, nx))
                    avg = min(total / (2 * w + 1) ** dim, top)
                    if keep_averages:
                        avgs[side, j, y, x] = avg
                    if avg > best:
                        best = avg
            out[y, x] = best
    return out, avgs
