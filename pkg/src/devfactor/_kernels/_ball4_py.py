"""NumPy fallback kernels for the axially symmetric quadrature fast path."""

import numpy as np

KIND_ONE = 0
KIND_INV_SQUARE = 1
KIND_AXIAL_COMPONENT = 2


def reduce_axial(kind, p, ell, r, x, w_fine, w_coarse):
    """Evaluate a built-in rational integrand on the (r, x) product grid and
    reduce over the angular weights.

    kind selects the integrand profile at radius r and axial cosine x:
    1 for KIND_ONE, 1/(r^2 - 2*p*r*x + ell)^2 for KIND_INV_SQUARE, and that
    times r*x for KIND_AXIAL_COMPONENT.  Returns (fine, coarse, bad) where
    fine/coarse are the angular sums against w_fine/w_coarse per radius and
    bad is None, or the (r, x) pair of the first non-finite value (fine and
    coarse are then None).
    """
    r = np.asarray(r, dtype=float)
    x = np.asarray(x, dtype=float)
    if kind == KIND_ONE:
        vals = np.ones((r.size, x.size))
    elif kind in (KIND_INV_SQUARE, KIND_AXIAL_COMPONENT):
        rr = r[:, None]
        xx = x[None, :]
        d = rr * rr - (2.0 * p) * rr * xx + ell
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = 1.0 / (d * d)
            if kind == KIND_AXIAL_COMPONENT:
                vals = (rr * xx) * vals
    else:
        raise ValueError(f"unknown integrand kind {kind}")
    if not np.isfinite(vals).all():
        i, j = np.argwhere(~np.isfinite(vals))[0]
        return None, None, (float(r[i]), float(x[j]))
    return vals @ w_fine, vals @ w_coarse, None
