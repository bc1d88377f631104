"""
numba kernels for the median filter fast paths.

Both kernels take an edge-padded image of shape
``(height + window - 1, width + window - 1)`` where output pixel ``(y, x)``
reads the padded block ``[y, y + window) x [x, x + window)``, and return the
lower median (order statistic ``(window**2 - 1) // 2``) of every block.

Each kernel cuts the output into tiles (histogram path) or rows (sorted path)
that rebuild their own state, so the ``prange`` split gives the same bits as a
sequential run.
"""

import numpy as np
from numba import njit, prange

# Column histogram bins held per tile; bounds tile width for 16-bit codes.
_TILE_BUDGET = 1 << 22
_MIN_TILE_WIDTH = 32
_MIN_TILE_ROWS = 64


@njit(cache=True, nogil=True)
def _fine_shift(nbins):
    # half the code bits: coarse and fine levels of about sqrt(nbins) bins each
    bits = 0
    while (1 << bits) < nbins:
        bits += 1
    return (bits + 1) // 2


@njit(cache=True, nogil=True)
def _median_tile(codes, window, nbins, shift, y0, y1, x0, x1, out):
    block = 1 << shift
    nblocks = (nbins + block - 1) >> shift
    rank = (window * window - 1) // 2
    ncols = x1 - x0 + window - 1

    col_fine = np.zeros((ncols, nbins), dtype=np.int32)
    col_coarse = np.zeros((ncols, nblocks), dtype=np.int32)
    for j in range(ncols):
        for dy in range(window):
            c = codes[y0 + dy, x0 + j]
            col_fine[j, c] += 1
            col_coarse[j, c >> shift] += 1

    win_coarse = np.zeros(nblocks, dtype=np.int32)
    win_fine = np.zeros(nbins, dtype=np.int32)
    # stamp[b] = x at which win_fine's slice for coarse bin b was last exact, -1 = stale
    stamp = np.empty(nblocks, dtype=np.int64)

    for y in range(y0, y1):
        if y > y0:
            for j in range(ncols):
                old = codes[y - 1, x0 + j]
                new = codes[y + window - 1, x0 + j]
                col_fine[j, old] -= 1
                col_coarse[j, old >> shift] -= 1
                col_fine[j, new] += 1
                col_coarse[j, new >> shift] += 1

        win_coarse[:] = 0
        for j in range(window):
            for b in range(nblocks):
                win_coarse[b] += col_coarse[j, b]
        stamp[:] = -1

        for x in range(x1 - x0):
            if x > 0:
                enter, leave = x + window - 1, x - 1
                for b in range(nblocks):
                    win_coarse[b] += col_coarse[enter, b] - col_coarse[leave, b]

            below = 0
            b = 0
            while below + win_coarse[b] <= rank:
                below += win_coarse[b]
                b += 1

            lo = b << shift
            hi = min(lo + block, nbins)
            s = stamp[b]
            if s < 0 or x - s >= window:
                for v in range(lo, hi):
                    win_fine[v] = 0
                for j in range(x, x + window):
                    for v in range(lo, hi):
                        win_fine[v] += col_fine[j, v]
            else:
                for p in range(s + 1, x + 1):
                    enter, leave = p + window - 1, p - 1
                    for v in range(lo, hi):
                        win_fine[v] += col_fine[enter, v] - col_fine[leave, v]
            stamp[b] = x

            m = lo
            while below + win_fine[m] <= rank:
                below += win_fine[m]
                m += 1
            out[y, x0 + x] = m


@njit(cache=True, parallel=True, nogil=True)
def histogram_median(codes, window, nbins):
    """Constant-time (column histogram) median over integer codes in ``[0, nbins)``.

    Every image column keeps a histogram of its ``window`` codes that slides
    down one row with one add and one remove. The window histogram moves right
    by adding the entering column's histogram and subtracting the leaving
    one's. Histograms are two-level: the coarse level is updated per pixel,
    and a fine slice is refreshed only for the coarse bin holding the median.
    Per-pixel cost depends on ``nbins`` but not on the window.
    """
    height = codes.shape[0] - window + 1
    width = codes.shape[1] - window + 1
    shift = _fine_shift(nbins)
    tile_w = min(width, max(_MIN_TILE_WIDTH, _TILE_BUDGET // nbins))
    tile_h = min(height, max(_MIN_TILE_ROWS, (tile_w + window) * nbins // (16 * tile_w)))
    tiles_x = (width + tile_w - 1) // tile_w
    tiles_y = (height + tile_h - 1) // tile_h
    out = np.empty((height, width), dtype=np.int32)

    for t in prange(tiles_x * tiles_y):
        y0 = (t // tiles_x) * tile_h
        x0 = (t % tiles_x) * tile_w
        _median_tile(
            codes, window, nbins, shift,
            y0, min(height, y0 + tile_h), x0, min(width, x0 + tile_w), out,
        )

    return out


@njit(cache=True, parallel=True, nogil=True)
def sorted_window_median(values, window):
    """Exact sliding median for arbitrary floats.

    Keeps the window sorted; each slide removes and inserts one column by
    binary search and shifting.
    """
    height = values.shape[0] - window + 1
    width = values.shape[1] - window + 1
    n = window * window
    rank = (n - 1) // 2
    out = np.empty((height, width), dtype=np.float64)

    for y in prange(height):
        buf = np.sort(values[y:y + window, 0:window].copy().ravel())
        out[y, 0] = buf[rank]

        for x in range(1, width):
            for dy in range(window):
                old = values[y + dy, x - 1]
                i = np.searchsorted(buf, old)
                for k in range(i, n - 1):
                    buf[k] = buf[k + 1]
                new = values[y + dy, x + window - 1]
                j = np.searchsorted(buf[:n - 1], new)
                for k in range(n - 1, j, -1):
                    buf[k] = buf[k - 1]
                buf[j] = new
            out[y, x] = buf[rank]

    return out
