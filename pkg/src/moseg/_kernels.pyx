# cython: boundscheck=False, wraparound=False, nonecheck=False, cdivision=True
"""Compiled residual kernel: Sampson errors for all points x hypotheses.

Twin of ``_kernels_py``; keep the arithmetic in the two files identical.
"""

from libc.math cimport INFINITY

TRANSFER = 0
EPIPOLAR = 1

cdef double _UNDERFLOW = 1e-300


cdef inline double _epipolar_one(const double* f, double x, double y,
                                 double xp, double yp) nogil:
    cdef double fx0 = f[0] * x + f[1] * y + f[2]
    cdef double fx1 = f[3] * x + f[4] * y + f[5]
    cdef double fx2 = f[6] * x + f[7] * y + f[8]
    cdef double ftx0 = f[0] * xp + f[3] * yp + f[6]
    cdef double ftx1 = f[1] * xp + f[4] * yp + f[7]
    cdef double num = xp * fx0 + yp * fx1 + fx2
    cdef double den = fx0 * fx0 + fx1 * fx1 + ftx0 * ftx0 + ftx1 * ftx1
    if den < _UNDERFLOW:
        return INFINITY
    return (num * num) / den


cdef inline double _transfer_one(const double* h, double x, double y,
                                 double xp, double yp) nogil:
    cdef double m0 = h[0] * x + h[1] * y + h[2]
    cdef double m1 = h[3] * x + h[4] * y + h[5]
    cdef double m2 = h[6] * x + h[7] * y + h[8]
    cdef double e0 = yp * m2 - m1
    cdef double e1 = m0 - xp * m2
    cdef double j00 = yp * h[6] - h[3]
    cdef double j01 = yp * h[7] - h[4]
    cdef double j10 = h[0] - xp * h[6]
    cdef double j11 = h[1] - xp * h[7]
    cdef double a = j00 * j00 + j01 * j01 + m2 * m2
    cdef double b = j00 * j10 + j01 * j11
    cdef double d = j10 * j10 + j11 * j11 + m2 * m2
    cdef double det = a * d - b * b
    cdef double quad
    cdef double r
    if det < _UNDERFLOW:
        return INFINITY
    quad = e0 * (d * e0 - b * e1) + e1 * (a * e1 - b * e0)
    r = quad / det
    if r < 0.0:
        r = 0.0
    return r


def residuals_one(int code, double[:, ::1] model, double[:, ::1] src,
                  double[:, ::1] dst, double[::1] out):
    cdef Py_ssize_t n = src.shape[0]
    cdef Py_ssize_t i
    cdef const double* m = &model[0, 0]
    with nogil:
        if code == 1:
            for i in range(n):
                out[i] = _epipolar_one(m, src[i, 0], src[i, 1], dst[i, 0], dst[i, 1])
        else:
            for i in range(n):
                out[i] = _transfer_one(m, src[i, 0], src[i, 1], dst[i, 0], dst[i, 1])


def fill_matrix(int code, double[:, :, ::1] mats, long long[:, ::1] pairs,
                double[:, :, ::1] positions, unsigned char[:, ::1] visibility,
                double[:, ::1] out_values, unsigned char[:, ::1] out_missing):
    cdef Py_ssize_t num_hyp = mats.shape[0]
    cdef Py_ssize_t num_pts = positions.shape[0]
    cdef Py_ssize_t k, i
    cdef long long f1, f2
    cdef const double* m
    with nogil:
        for k in range(num_hyp):
            f1 = pairs[k, 0]
            f2 = pairs[k, 1]
            m = &mats[k, 0, 0]
            if code == 1:
                for i in range(num_pts):
                    if visibility[i, f1] and visibility[i, f2]:
                        out_values[i, k] = _epipolar_one(
                            m, positions[i, f1, 0], positions[i, f1, 1],
                            positions[i, f2, 0], positions[i, f2, 1])
                        out_missing[i, k] = 0
            else:
                for i in range(num_pts):
                    if visibility[i, f1] and visibility[i, f2]:
                        out_values[i, k] = _transfer_one(
                            m, positions[i, f1, 0], positions[i, f1, 1],
                            positions[i, f2, 0], positions[i, f2, 1])
                        out_missing[i, k] = 0
