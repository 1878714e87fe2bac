"""Compiled inner loops of the collapsed Gibbs sampler."""

import math

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def sweep(words, docs, z, n_dk, n_kw, n_k, alpha, beta, vbeta, uniforms, cdf):
    """Resample every token once, in corpus order.

    ``uniforms`` holds one U[0,1) draw per token; ``cdf`` is scratch space of
    length T.
    """
    T = n_k.shape[0]
    for i in range(words.shape[0]):
        w = words[i]
        d = docs[i]
        k = z[i]
        n_dk[d, k] -= 1
        n_kw[k, w] -= 1
        n_k[k] -= 1

        total = 0.0
        for t in range(T):
            total += (n_dk[d, t] + alpha) * (n_kw[t, w] + beta) / (n_k[t] + vbeta)
            cdf[t] = total
        u = uniforms[i] * total
        k = T - 1
        for t in range(T):
            if u < cdf[t]:
                k = t
                break

        z[i] = k
        n_dk[d, k] += 1
        n_kw[k, w] += 1
        n_k[k] += 1


@numba.njit(cache=True, nogil=True)
def joint_log_likelihood(n_dk, n_kw, n_k, n_d, alpha, beta):
    """log p(w, z | alpha, beta) with phi and theta integrated out."""
    D, T = n_dk.shape
    V = n_kw.shape[1]
    lg_beta = math.lgamma(beta)
    lg_alpha = math.lgamma(alpha)
    ll = 0.0
    for k in range(T):
        ll += math.lgamma(V * beta) - math.lgamma(n_k[k] + V * beta)
        for w in range(V):
            c = n_kw[k, w]
            if c > 0:
                ll += math.lgamma(c + beta) - lg_beta
    for d in range(D):
        ll += math.lgamma(T * alpha) - math.lgamma(n_d[d] + T * alpha)
        for k in range(T):
            c = n_dk[d, k]
            if c > 0:
                ll += math.lgamma(c + alpha) - lg_alpha
    return ll


@numba.njit(cache=True, nogil=True)
def run_chain(words, docs, z, n_dk, n_kw, n_k, n_d, alpha, beta, uniforms, trace):
    """Run ``uniforms.shape[0]`` sweeps, recording the joint log-likelihood after each."""
    vbeta = n_kw.shape[1] * beta
    cdf = np.empty(n_k.shape[0])
    for it in range(uniforms.shape[0]):
        sweep(words, docs, z, n_dk, n_kw, n_k, alpha, beta, vbeta, uniforms[it], cdf)
        trace[it] = joint_log_likelihood(n_dk, n_kw, n_k, n_d, alpha, beta)
