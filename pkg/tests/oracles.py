"""Independent loop-based reference implementations.

Nothing here touches numpy's vectorized reductions or the library's Table
code: every quantity is a plain Python sum over itertools.product.
"""
from __future__ import annotations

import itertools
import math


def _iter(shape):
    return itertools.product(*(range(s) for s in shape))


def marginal(p, shape, keep):
    """dict {index tuple over `keep`: mass} by direct summation."""
    out = {}
    for idx in _iter(shape):
        key = tuple(idx[k] for k in keep)
        out[key] = out.get(key, 0.0) + float(p[idx])
    return out


def H(p, shape, keep):
    h = 0.0
    for m in marginal(p, shape, keep).values():
        if m > 0:
            h -= m * math.log2(m)
    return h


def I(p, shape, a, b):
    return H(p, shape, a) + H(p, shape, b) - H(p, shape, tuple(a) + tuple(b))


def CI(p, shape, a, b, c):
    c = tuple(c)
    return (H(p, shape, tuple(a) + c) + H(p, shape, tuple(b) + c)
            - H(p, shape, tuple(a) + tuple(b) + c) - H(p, shape, c))


def gp_df_joint(w2, w3, p_x1, p_u, table):
    """p(x1, y2, u, x2, y3) as a dict, straight from the factorization."""
    nx1, ny2 = w2.shape
    nu = p_u.shape[-1]
    nx2, ny3 = w3.shape[1], w3.shape[-1]
    out = {}
    for x1, y2, u, y3 in itertools.product(range(nx1), range(ny2), range(nu), range(ny3)):
        x2 = int(table[u, x1, y2])
        m = float(p_x1[x1]) * float(w2[x1, y2]) * float(p_u[x1, y2, u]) * float(w3[x1, x2, y2, y3])
        key = (x1, y2, u, x2, y3)
        out[key] = out.get(key, 0.0) + m
    return out, (nx1, ny2, nu, nx2, ny3)


def dict_to_dense(d, shape):
    import numpy as np
    a = np.zeros(shape)
    for k, v in d.items():
        a[k] += v
    return a


def gp_df_terms(w2, w3, p_x1, p_u, table):
    """(I(X1;Y2), I(X1,U;Y3) - I(U;Y2|X1), I(X1;Y2) + I(X1;Y3|X2,Y2)) by summation."""
    d, shape = gp_df_joint(w2, w3, p_x1, p_u, table)
    p = dict_to_dense(d, shape)
    X1, Y2, U, X2, Y3 = range(5)
    first = I(p, shape, (X1,), (Y2,))
    second = I(p, shape, (X1, U), (Y3,)) - CI(p, shape, (U,), (Y2,), (X1,))
    nub_first = first + CI(p, shape, (X1,), (Y3,), (X2, Y2))
    return first, second, nub_first


def cutset_terms(w2, w3, p_x1, p_x2):
    import numpy as np
    nx1, ny2 = w2.shape
    nx2, ny3 = w3.shape[1], w3.shape[-1]
    shape = (nx1, ny2, nx2, ny3)
    p = np.zeros(shape)
    for x1, y2, x2, y3 in _iter(shape):
        p[x1, y2, x2, y3] = p_x1[x1] * w2[x1, y2] * p_x2[x1, y2, x2] * w3[x1, x2, y2, y3]
    X1, Y2, X2, Y3 = range(4)
    return (I(p, shape, (X1, X2), (Y3,)),
            I(p, shape, (X1,), (Y2,)) + CI(p, shape, (X1,), (Y3,), (X2, Y2)))
