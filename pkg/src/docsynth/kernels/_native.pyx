# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Semantics mirror ``_python.py`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()

NAME = "native"


def thin(plane):
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] src = np.asarray(plane, dtype=np.uint8)
    cdef Py_ssize_t h = src.shape[0], w = src.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] p = np.zeros((h + 2, w + 2), dtype=np.uint8)
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] mark = np.zeros((h + 2, w + 2), dtype=np.uint8)
    cdef Py_ssize_t i, j
    cdef int step, b, a, c1, c2, changed, any_marked
    cdef int p2, p3, p4, p5, p6, p7, p8, p9
    for i in range(h):
        for j in range(w):
            p[i + 1, j + 1] = 1 if src[i, j] != 0 else 0

    while True:
        changed = 0
        for step in range(2):
            any_marked = 0
            for i in range(1, h + 1):
                for j in range(1, w + 1):
                    if p[i, j] == 0:
                        continue
                    p2 = p[i - 1, j]
                    p3 = p[i - 1, j + 1]
                    p4 = p[i, j + 1]
                    p5 = p[i + 1, j + 1]
                    p6 = p[i + 1, j]
                    p7 = p[i + 1, j - 1]
                    p8 = p[i, j - 1]
                    p9 = p[i - 1, j - 1]
                    b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9
                    if b < 2 or b > 6:
                        continue
                    a = ((p2 == 0 and p3 == 1) + (p3 == 0 and p4 == 1) + (p4 == 0 and p5 == 1)
                         + (p5 == 0 and p6 == 1) + (p6 == 0 and p7 == 1) + (p7 == 0 and p8 == 1)
                         + (p8 == 0 and p9 == 1) + (p9 == 0 and p2 == 1))
                    if a != 1:
                        continue
                    if step == 0:
                        c1 = p2 * p4 * p6
                        c2 = p4 * p6 * p8
                    else:
                        c1 = p2 * p4 * p8
                        c2 = p2 * p6 * p8
                    if c1 == 0 and c2 == 0:
                        mark[i, j] = 1
                        any_marked = 1
            if any_marked:
                changed = 1
                for i in range(1, h + 1):
                    for j in range(1, w + 1):
                        if mark[i, j]:
                            p[i, j] = 0
                            mark[i, j] = 0
        if not changed:
            break
    return np.ascontiguousarray(p[1:h + 1, 1:w + 1])


cdef inline double _tap(const cnp.uint8_t[:, ::1] img, Py_ssize_t yy, Py_ssize_t xx,
                        Py_ssize_t h, Py_ssize_t w, double fill) noexcept nogil:
    if xx < 0 or xx >= w or yy < 0 or yy >= h:
        return fill
    return <double>img[yy, xx]


cdef inline cnp.uint8_t _bilinear(const cnp.uint8_t[:, ::1] img, double x, double y,
                                  Py_ssize_t h, Py_ssize_t w, double fill) noexcept nogil:
    cdef double x0f = floor(x), y0f = floor(y)
    cdef double fx = x - x0f, fy = y - y0f
    cdef Py_ssize_t x0 = <Py_ssize_t>x0f, y0 = <Py_ssize_t>y0f
    cdef double p00 = _tap(img, y0, x0, h, w, fill)
    cdef double p01 = _tap(img, y0, x0 + 1, h, w, fill)
    cdef double p10 = _tap(img, y0 + 1, x0, h, w, fill)
    cdef double p11 = _tap(img, y0 + 1, x0 + 1, h, w, fill)
    cdef double gx = 1.0 - fx, gy = 1.0 - fy
    cdef double v = gy * (gx * p00 + fx * p01) + fy * (gx * p10 + fx * p11)
    v = floor(v + 0.5)
    if v < 0:
        v = 0
    elif v > 255:
        v = 255
    return <cnp.uint8_t>v


cdef inline cnp.uint8_t _nearest(const cnp.uint8_t[:, ::1] img, double x, double y,
                                 Py_ssize_t h, Py_ssize_t w, cnp.uint8_t fill) noexcept nogil:
    cdef Py_ssize_t xi = <Py_ssize_t>floor(x + 0.5)
    cdef Py_ssize_t yi = <Py_ssize_t>floor(y + 0.5)
    if xi < 0 or xi >= w or yi < 0 or yi >= h:
        return fill
    return img[yi, xi]


def warp_affine(img, inv, int out_h, int out_w, int fill, bint nearest):
    cdef const cnp.uint8_t[:, ::1] src = np.ascontiguousarray(img, dtype=np.uint8)
    cdef double[::1] m = np.ascontiguousarray(inv, dtype=np.float64).reshape(-1)
    out = np.empty((out_h, out_w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] dst = out
    cdef Py_ssize_t h = src.shape[0], w = src.shape[1], i, j
    cdef double x, y, xo, yo
    cdef double m00 = m[0], m01 = m[1], m02 = m[2], m10 = m[3], m11 = m[4], m12 = m[5]
    with nogil:
        for i in range(out_h):
            yo = <double>i
            for j in range(out_w):
                xo = <double>j
                x = m00 * xo + m01 * yo + m02
                y = m10 * xo + m11 * yo + m12
                if nearest:
                    dst[i, j] = _nearest(src, x, y, h, w, <cnp.uint8_t>fill)
                else:
                    dst[i, j] = _bilinear(src, x, y, h, w, <double>fill)
    return out


def remap(img, map_x, map_y, int fill, bint nearest):
    cdef const cnp.uint8_t[:, ::1] src = np.ascontiguousarray(img, dtype=np.uint8)
    cdef const double[:, ::1] mx = np.ascontiguousarray(map_x, dtype=np.float64)
    cdef const double[:, ::1] my = np.ascontiguousarray(map_y, dtype=np.float64)
    cdef Py_ssize_t out_h = mx.shape[0], out_w = mx.shape[1]
    out = np.empty((out_h, out_w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] dst = out
    cdef Py_ssize_t h = src.shape[0], w = src.shape[1], i, j
    with nogil:
        for i in range(out_h):
            for j in range(out_w):
                if nearest:
                    dst[i, j] = _nearest(src, mx[i, j], my[i, j], h, w, <cnp.uint8_t>fill)
                else:
                    dst[i, j] = _bilinear(src, mx[i, j], my[i, j], h, w, <double>fill)
    return out
