# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-window kernels; same contracts as ``kernels._reference``.

Inputs must be C-contiguous float64 with finite entries (the t-score kernel
writes NaN markers but never reads them).
"""

from libc.math cimport sqrt

import numpy as np


def sum_power(const double[:, ::1] y, const double[:, ::1] cos_tab, const double[:, ::1] sin_tab):
    cdef Py_ssize_t n_links = y.shape[0]
    cdef Py_ssize_t n = y.shape[1]
    cdef Py_ssize_t n_freq = cos_tab.shape[0]
    out = np.zeros(n_freq, dtype=np.float64)
    cdef double[::1] acc = out
    cdef Py_ssize_t l, f, k
    cdef double re, im, w
    for l in range(n_links):
        for f in range(n_freq):
            re = 0.0
            im = 0.0
            for k in range(n):
                w = y[l, k]
                re += w * cos_tab[f, k]
                im += w * sin_tab[f, k]
            acc[f] += re * re + im * im
    return out


def link_power(const double[:, ::1] y, const double[::1] cos_row, const double[::1] sin_row):
    cdef Py_ssize_t n_links = y.shape[0]
    cdef Py_ssize_t n = y.shape[1]
    out = np.empty(n_links, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t l, k
    cdef double re, im, w
    for l in range(n_links):
        re = 0.0
        im = 0.0
        for k in range(n):
            w = y[l, k]
            re += w * cos_row[k]
            im += w * sin_row[k]
        o[l] = re * re + im * im
    return out


def t_score_matrix(const double[:, ::1] r, Py_ssize_t q, double epsilon):
    cdef Py_ssize_t n_links = r.shape[0]
    cdef Py_ssize_t n = r.shape[1]
    out = np.full((n_links, n), np.nan)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t l, j, k
    cdef double mb, ma, vb, va, d, den
    if n < 2 * q:
        return out
    for l in range(n_links):
        for j in range(q, n - q + 1):
            mb = 0.0
            ma = 0.0
            for k in range(j - q, j):
                mb += r[l, k]
            for k in range(j, j + q):
                ma += r[l, k]
            mb /= q
            ma /= q
            vb = 0.0
            va = 0.0
            for k in range(j - q, j):
                d = r[l, k] - mb
                vb += d * d
            for k in range(j, j + q):
                d = r[l, k] - ma
                va += d * d
            vb /= q - 1
            va /= q - 1
            den = sqrt((vb + va) / q)
            if den < epsilon:
                den = epsilon
            o[l, j] = (mb - ma) / den
    return out
