# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: strided 1-D convolution and sum-of-rays fading."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin

NAME = "cython"


def conv1d_forward(cnp.ndarray x_in, cnp.ndarray w_in, cnp.ndarray b_in, int stride):
    cdef double[:, :, ::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef double[:, :, ::1] w = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef double[::1] b = np.ascontiguousarray(b_in, dtype=np.float64)
    cdef Py_ssize_t nb = x.shape[0], ci = x.shape[1], L = x.shape[2]
    cdef Py_ssize_t co = w.shape[0], k = w.shape[2]
    cdef Py_ssize_t lo = (L - k) // stride + 1
    out = np.empty((nb, co, lo), dtype=np.float64)
    cdef double[:, :, ::1] y = out
    cdef Py_ssize_t ib, io, il, ii, ik
    cdef double acc
    for ib in range(nb):
        for io in range(co):
            for il in range(lo):
                acc = b[io]
                for ii in range(ci):
                    for ik in range(k):
                        acc += w[io, ii, ik] * x[ib, ii, il * stride + ik]
                y[ib, io, il] = acc
    return out


def conv1d_backward(cnp.ndarray x_in, cnp.ndarray w_in, cnp.ndarray dy_in, int stride):
    cdef double[:, :, ::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef double[:, :, ::1] w = np.ascontiguousarray(w_in, dtype=np.float64)
    cdef double[:, :, ::1] dy = np.ascontiguousarray(dy_in, dtype=np.float64)
    cdef Py_ssize_t nb = x.shape[0], ci = x.shape[1], L = x.shape[2]
    cdef Py_ssize_t co = w.shape[0], k = w.shape[2]
    cdef Py_ssize_t lo = dy.shape[2]
    dx_out = np.zeros((nb, ci, L), dtype=np.float64)
    dw_out = np.zeros((co, ci, k), dtype=np.float64)
    db_out = np.zeros(co, dtype=np.float64)
    cdef double[:, :, ::1] dx = dx_out
    cdef double[:, :, ::1] dw = dw_out
    cdef double[::1] db = db_out
    cdef Py_ssize_t ib, io, il, ii, ik
    cdef double g
    for ib in range(nb):
        for io in range(co):
            for il in range(lo):
                g = dy[ib, io, il]
                db[io] += g
                for ii in range(ci):
                    for ik in range(k):
                        dw[io, ii, ik] += g * x[ib, ii, il * stride + ik]
                        dx[ib, ii, il * stride + ik] += g * w[io, ii, ik]
    return dx_out, dw_out, db_out


def fading_series(cnp.ndarray amps_in, cnp.ndarray phases_in,
                  cnp.ndarray dopplers_in, cnp.ndarray t_in):
    cdef double[::1] amps = np.ascontiguousarray(amps_in, dtype=np.float64)
    cdef double[::1] phases = np.ascontiguousarray(phases_in, dtype=np.float64)
    cdef double[::1] dopplers = np.ascontiguousarray(dopplers_in, dtype=np.float64)
    cdef double[::1] t = np.ascontiguousarray(t_in, dtype=np.float64)
    cdef Py_ssize_t nr = amps.shape[0], nt = t.shape[0]
    out = np.empty(nt, dtype=np.complex128)
    cdef double complex[::1] g = out
    cdef Py_ssize_t ir, it
    cdef double re, im, arg, twopi = 2.0 * np.pi
    for it in range(nt):
        re = 0.0
        im = 0.0
        for ir in range(nr):
            arg = phases[ir] + twopi * dopplers[ir] * t[it]
            re += amps[ir] * cos(arg)
            im += amps[ir] * sin(arg)
        g[it] = re + 1j * im
    return out
