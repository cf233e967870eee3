"""Compiled inner loops over rotation-pair generators.

States are ``(n_det, k)`` C-contiguous arrays, one column per reference.
All loops run in a fixed order so results are bit-reproducible.
"""
import numba
import numpy as np


@numba.njit(cache=True)
def rotate(psi, lo, hi, src, dst, sgn, theta):
    c = np.cos(theta)
    s = np.sin(theta)
    k = psi.shape[1]
    for t in range(lo, hi):
        a = src[t]
        b = dst[t]
        ss = sgn[t] * s
        for col in range(k):
            x = psi[a, col]
            y = psi[b, col]
            psi[a, col] = c * x - ss * y
            psi[b, col] = c * y + ss * x


@numba.njit(cache=True)
def evolve(psi, ids, thetas, ptr, src, dst, sgn):
    for m in range(len(ids) - 1, -1, -1):
        j = ids[m]
        rotate(psi, ptr[j], ptr[j + 1], src, dst, sgn, thetas[m])


@numba.njit(cache=True)
def _pair_inner(psi, sigma, weights, lo, hi, src, dst, sgn):
    # sum_i w_i <sigma_i | A psi_i>
    k = psi.shape[1]
    acc = 0.0
    for t in range(lo, hi):
        a = src[t]
        b = dst[t]
        sg = sgn[t]
        for col in range(k):
            acc += weights[col] * sg * (sigma[b, col] * psi[a, col] - sigma[a, col] * psi[b, col])
    return acc


@numba.njit(cache=True)
def gradient(psi, sigma, weights, ids, thetas, ptr, src, dst, sgn, out):
    """Backward sweep; ``psi = U phi`` and ``sigma = H psi`` on entry (both overwritten)."""
    for m in range(len(ids)):
        j = ids[m]
        out[m] = 2.0 * _pair_inner(psi, sigma, weights, ptr[j], ptr[j + 1], src, dst, sgn)
        rotate(psi, ptr[j], ptr[j + 1], src, dst, sgn, -thetas[m])
        rotate(sigma, ptr[j], ptr[j + 1], src, dst, sgn, -thetas[m])


@numba.njit(cache=True)
def screen(psi, sigma, weights, ptr, src, dst, sgn, out):
    for j in range(len(ptr) - 1):
        out[j] = 2.0 * _pair_inner(psi, sigma, weights, ptr[j], ptr[j + 1], src, dst, sgn)
