"""Pure-NumPy implementations of the simulation hot kernels.

Same contract as the compiled module ``gpplab._native``; see
``gpplab.backend`` for how one of the two is selected at import time.

Kernel family codes: 0 = Laplace, 1 = Gaussian.  All routines are
deterministic transforms of their inputs; random draws happen outside.
"""
import numpy as np

KIND_LAPLACE = 0
KIND_GAUSSIAN = 1

_INV_SQRT_2PI = 0.3989422804014327


def kernel_pdf(kind, x):
    """Density of the built-in smoothing kernel, vectorized."""
    x = np.asarray(x, dtype=np.float64)
    if kind == KIND_LAPLACE:
        return 0.5 * np.exp(-np.abs(x))
    if kind == KIND_GAUSSIAN:
        return _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    raise ValueError(f"unknown kernel kind {kind}")


def sup_inf_grid(kind, s, fabs, t, beta):
    """Pointwise sup and inf over the grid of fabs[i] * psi(s_j - beta*t[i]).

    Parameters
    ----------
    s : (ns,) float64
        Evaluation points (quadrature nodes or sampled mixing values).
    fabs : (nt,) float64
        Nonnegative weights |f(t_i)| on the grid.
    t : (nt,) float64
        The uniform grid i/N, including both endpoints.
    beta : float
        Scale parameter of the shift family.

    Returns
    -------
    (sup, inf) : pair of (ns,) float64 arrays
    """
    s = np.ascontiguousarray(s, dtype=np.float64)
    out_sup = np.empty(s.shape, dtype=np.float64)
    out_inf = np.empty(s.shape, dtype=np.float64)
    shift = beta * t
    # chunked so the (ns, nt) intermediate stays small
    step = max(1, 8_000_000 // max(len(t), 1))
    for i in range(0, len(s), step):
        block = fabs[None, :] * kernel_pdf(kind, s[i : i + step, None] - shift[None, :])
        out_sup[i : i + step] = block.max(axis=1)
        out_inf[i : i + step] = block.min(axis=1)
    return out_sup, out_inf


def sup_inf_const(kind, s, t, beta):
    """Grid sup/inf of psi(s_j - beta*t[i]) for the constant weight 1.

    Exploits unimodality of psi: the grid infimum sits at an endpoint of the
    grid and the supremum at one of the two grid points bracketing s/beta.
    Bit-identical to ``sup_inf_grid`` with unit weights.
    """
    s = np.ascontiguousarray(s, dtype=np.float64)
    n = len(t) - 1
    p0 = kernel_pdf(kind, s)
    p1 = kernel_pdf(kind, s - beta * t[n])
    inf = np.minimum(p0, p1)
    # nearest grid indices to the unimodal peak at t = s/beta
    pos = np.clip(np.floor(s / beta * n), 0, n - 1).astype(np.intp)
    sup = np.maximum(
        kernel_pdf(kind, s - beta * t[pos]),
        kernel_pdf(kind, s - beta * t[pos + 1]),
    )
    return sup, inf


def paths_matrix(kind, s, t, beta, inv_g):
    """Generator paths psi(s_j - beta*t[i]) * inv_g[j] as an (ns, nt) matrix."""
    s = np.ascontiguousarray(s, dtype=np.float64)
    return kernel_pdf(kind, s[:, None] - (beta * t)[None, :]) * inv_g[:, None]
