"""Pure-numpy twin of the compiled residual kernel.

The arithmetic here mirrors ``_kernels.pyx`` expression by expression (same
operand order, left-associated sums, no fused multiply-add), so both backends
produce bit-identical residual matrices.
"""

import numpy as np

TRANSFER = 0
EPIPOLAR = 1

_UNDERFLOW = 1e-300


def _epipolar(model, x, y, xp, yp):
    f00, f01, f02 = model[0, 0], model[0, 1], model[0, 2]
    f10, f11, f12 = model[1, 0], model[1, 1], model[1, 2]
    f20, f21, f22 = model[2, 0], model[2, 1], model[2, 2]
    fx0 = f00 * x + f01 * y + f02
    fx1 = f10 * x + f11 * y + f12
    fx2 = f20 * x + f21 * y + f22
    ftx0 = f00 * xp + f10 * yp + f20
    ftx1 = f01 * xp + f11 * yp + f21
    num = xp * fx0 + yp * fx1 + fx2
    den = fx0 * fx0 + fx1 * fx1 + ftx0 * ftx0 + ftx1 * ftx1
    den_safe = np.where(den < _UNDERFLOW, 1.0, den)
    return np.where(den < _UNDERFLOW, np.inf, (num * num) / den_safe)


def _transfer(model, x, y, xp, yp):
    h00, h01, h02 = model[0, 0], model[0, 1], model[0, 2]
    h10, h11, h12 = model[1, 0], model[1, 1], model[1, 2]
    h20, h21, h22 = model[2, 0], model[2, 1], model[2, 2]
    m0 = h00 * x + h01 * y + h02
    m1 = h10 * x + h11 * y + h12
    m2 = h20 * x + h21 * y + h22
    e0 = yp * m2 - m1
    e1 = m0 - xp * m2
    j00 = yp * h20 - h10
    j01 = yp * h21 - h11
    j10 = h00 - xp * h20
    j11 = h01 - xp * h21
    a = j00 * j00 + j01 * j01 + m2 * m2
    b = j00 * j10 + j01 * j11
    d = j10 * j10 + j11 * j11 + m2 * m2
    det = a * d - b * b
    det_safe = np.where(det < _UNDERFLOW, 1.0, det)
    quad = e0 * (d * e0 - b * e1) + e1 * (a * e1 - b * e0)
    r = quad / det_safe
    r = np.where(r < 0.0, 0.0, r)
    return np.where(det < _UNDERFLOW, np.inf, r)


def residuals_one(code, model, src, dst, out):
    x, y = src[:, 0], src[:, 1]
    xp, yp = dst[:, 0], dst[:, 1]
    if code == EPIPOLAR:
        out[:] = _epipolar(model, x, y, xp, yp)
    else:
        out[:] = _transfer(model, x, y, xp, yp)


def fill_matrix(code, mats, pairs, positions, visibility, out_values, out_missing):
    num_hyp = mats.shape[0]
    vis = visibility.astype(bool)
    for k in range(num_hyp):
        f1, f2 = int(pairs[k, 0]), int(pairs[k, 1])
        mask = vis[:, f1] & vis[:, f2]
        if not mask.any():
            continue
        x = positions[mask, f1, 0]
        y = positions[mask, f1, 1]
        xp = positions[mask, f2, 0]
        yp = positions[mask, f2, 1]
        if code == EPIPOLAR:
            out_values[mask, k] = _epipolar(mats[k], x, y, xp, yp)
        else:
            out_values[mask, k] = _transfer(mats[k], x, y, xp, yp)
        out_missing[mask, k] = 0
