"""Pure numpy implementations of the hot kernels.

Used when the compiled ``_ckernels`` extension is unavailable, or when
``V2VCHAN_PURE_PYTHON=1`` is set. Signatures mirror the extension.
"""
import numpy as np

# fractional offsets below this are the grid point itself; avoids subnormal underflow
SNAP = 1e-15


def _sin_pi_offset(j, f):
    # sin(pi * (j - f)) for integer j, exact zero when f == 0.
    # 1 - f is exact for f in [0.5, 1), which keeps full relative precision near f -> 1.
    sign = np.where(np.mod(j, 2) == 0, -1.0, 1.0)
    return sign * np.sin(np.pi * np.minimum(f, 1.0 - f))


def accumulate_lanczos(out, x, g, support):
    """Add Lanczos-windowed sinc pulses at fractional bin positions ``x`` into ``out``.

    out : (n, M) complex128, modified in place
    x : (n, L) float64 delay positions in bins
    g : (n, L) complex128 path gains
    """
    n, m = out.shape
    a = int(support)
    base = np.floor(x)
    f = x - base
    f = np.where(f < SNAP, 0.0, f)
    j = np.arange(-a + 1, a + 1)
    d = j[None, None, :] - f[..., None]
    on_grid = f[..., None] == 0.0
    with np.errstate(invalid="ignore", divide="ignore"):
        core = _sin_pi_offset(j[None, None, :], f[..., None]) / (np.pi * d)
        window = np.sin(np.pi * d / a) / (np.pi * d / a)
    w = np.where(on_grid, (j == 0)[None, None, :].astype(float), core * window)
    bins = np.mod(base.astype(np.int64)[..., None] + j[None, None, :], m)
    rows = np.arange(n, dtype=np.int64)[:, None, None]
    flat = (rows * m + bins).ravel()
    contrib = (g[..., None] * w).ravel()
    out += (np.bincount(flat, weights=contrib.real, minlength=n * m)
            + 1j * np.bincount(flat, weights=contrib.imag, minlength=n * m)).reshape(n, m)


def accumulate_dirichlet(out, x, g):
    """Add periodic-sinc (band-limited, period M bins) pulses into ``out``."""
    n, m = out.shape
    half = m // 2
    base = np.floor(x).astype(np.int64)
    f = x - base
    f = np.where(f < SNAP, 0.0, f)
    bins = np.arange(m, dtype=np.int64)
    for i in range(n):
        j = bins[None, :] - base[i][:, None]
        j = np.mod(j + half, m) - half
        d = j - f[i][:, None]
        num = _sin_pi_offset(j, f[i][:, None])
        with np.errstate(invalid="ignore", divide="ignore"):
            if m % 2:
                w = num / (m * np.sin(np.pi * d / m))
            else:
                w = num / (m * np.tan(np.pi * d / m))
        w = np.where(d == 0.0, 1.0, w)
        out[i] += g[i] @ w


def row_spread(power, axis):
    """Per-row weighted standard deviation of ``axis`` under weights ``power``.

    Returns ``(sigma, total)``; rows with zero total get ``sigma = 0``.
    """
    power = np.asarray(power, dtype=np.float64)
    axis = np.asarray(axis, dtype=np.float64)
    total = power.sum(axis=1)
    safe = np.where(total > 0, total, 1.0)
    mean = (power @ axis) / safe
    dev = axis[None, :] - mean[:, None]
    var = np.einsum("ij,ij->i", power, dev * dev) / safe
    sigma = np.sqrt(np.maximum(var, 0.0))
    sigma[total <= 0] = 0.0
    return sigma, total
