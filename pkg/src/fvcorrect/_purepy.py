"""Interpreted twins of the compiled kernels, used when the extension is absent."""
import numpy as np


def thomas(sub, diag, sup, rhs):
    n = diag.shape[0]
    x = np.empty(n)
    if n == 0:
        return x
    sub, diag, sup, rhs = sub.tolist(), diag.tolist(), sup.tolist(), rhs.tolist()
    c = [0.0] * n
    d = [0.0] * n
    denom = diag[0]
    if denom == 0.0:
        raise ZeroDivisionError("zero pivot at row 0")
    c[0] = sup[0] / denom if n > 1 else 0.0
    d[0] = rhs[0] / denom
    for i in range(1, n):
        denom = diag[i] - sub[i - 1] * c[i - 1]
        if denom == 0.0:
            raise ZeroDivisionError(f"zero pivot at row {i}")
        c[i] = sup[i] / denom if i < n - 1 else 0.0
        d[i] = (rhs[i] - sub[i - 1] * d[i - 1]) / denom
    x[n - 1] = d[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def five_point_apply(center, west, east, south, north, x, out):
    np.multiply(center, x, out=out)
    out[1:, :] -= west[1:, :] * x[:-1, :]
    out[:-1, :] -= east[:-1, :] * x[1:, :]
    out[:, 1:] -= south[:, 1:] * x[:, :-1]
    out[:, :-1] -= north[:, :-1] * x[:, 1:]
    return out
