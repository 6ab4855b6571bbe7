"""Divided differences and the spectral-sum routes for derivatives.

Divided differences are evaluated over sorted nodes with a confluent
fallback: once two spanning nodes are closer than ``tau_confl`` relative,
the table entry switches to the analytic derivative at the midpoint. That
makes both the triangular path evaluation and the eigenbasis formulas
robust against (near-)repeated eigenvalues, provided the scalar function
can supply derivatives of the needed order.
"""
from __future__ import annotations

import math
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    ComplexityRefusal,
    DimensionMismatch,
    EmptyIndex,
    MissingJetTerm,
    NotTriangular,
)
from .funcs import ScalarFunction
from .linalg import SpectralDecomp, as_matrix
from .multiindex import MultiIndex, as_index, order, t_permutations

TAU_CONFL = 1e-8

DEFAULT_COST_CAP = 1e7


def divided_difference(
    f: ScalarFunction, nodes: Sequence[complex], tau_confl: float = TAU_CONFL
) -> complex:
    """Divided difference f[x_0, ..., x_m] with confluent handling.

    Nodes are sorted lexicographically by (real, imag) first, so clustered
    nodes sit next to each other and the confluent branch sees them as one
    group. A span whose endpoints satisfy ``|hi - lo| <= tau_confl * (1 +
    |lo|)`` is filled with ``f.deriv(mid, span) / span!``.
    """
    xs = sorted((complex(z) for z in nodes), key=lambda z: (z.real, z.imag))
    m = len(xs)
    if m == 0:
        raise DimensionMismatch("divided difference needs at least one node")
    col = [f.eval(x) for x in xs]
    for span in range(1, m):
        nxt = []
        for i in range(m - span):
            lo, hi = xs[i], xs[i + span]
            if abs(hi - lo) <= tau_confl * (1.0 + abs(lo)):
                mid = 0.5 * (lo + hi)
                nxt.append(f.deriv(mid, span) / math.factorial(span))
            else:
                nxt.append((col[i + 1] - col[i]) / (hi - lo))
        col = nxt
    return complex(col[0])


def descloux_eval(
    f: ScalarFunction, u, tau_confl: float = TAU_CONFL
) -> np.ndarray:
    """Evaluate f on an upper triangular matrix by summing increasing paths.

    Entry (i, j) collects, over every strictly increasing index path from i
    to j, the product of the corresponding entries of ``u`` times the
    divided difference of f over the diagonal entries the path visits.
    Zero entries prune the walk, and divided differences are cached per
    index tuple, so the cost is driven by the sparsity between i and j.
    """
    u = as_matrix(u, "u")
    if np.any(np.tril(u, -1) != 0):
        raise NotTriangular("matrix has nonzero entries below the diagonal")
    n = u.shape[0]
    lam = np.diag(u)
    cache: dict[tuple[int, ...], complex] = {}

    def dd(idx: tuple[int, ...]) -> complex:
        val = cache.get(idx)
        if val is None:
            val = divided_difference(f, [lam[t] for t in idx], tau_confl)
            cache[idx] = val
        return val

    def path_sum(cur: int, j: int, prod: complex, idx: tuple[int, ...]) -> complex:
        total = 0.0 + 0.0j
        direct = u[cur, j]
        if direct != 0:
            total += prod * direct * dd(idx + (j,))
        for mid in range(cur + 1, j):
            w = u[cur, mid]
            if w != 0:
                total += path_sum(mid, j, prod * w, idx + (mid,))
        return total

    out = np.zeros_like(u)
    for i in range(n):
        out[i, i] = f.eval(lam[i])
    for span in range(1, n):
        for i in range(n - span):
            j = i + span
            out[i, j] = path_sum(i, j, 1.0 + 0.0j, (i,))
    return out


def first_dd_table(
    f: ScalarFunction, lam: np.ndarray, tau_confl: float = TAU_CONFL
) -> np.ndarray:
    """Matrix of first divided differences f[lam_i, lam_j]."""
    n = lam.shape[0]
    out = np.empty((n, n), dtype=np.complex128)
    for i in range(n):
        for j in range(i, n):
            val = divided_difference(f, [lam[i], lam[j]], tau_confl)
            out[i, j] = val
            out[j, i] = val
    return out


def _dd_tensor(
    f: ScalarFunction, lam: np.ndarray, m: int, tau_confl: float
) -> np.ndarray:
    """Tensor of divided differences over all (m+1)-tuples of eigenvalues.

    Divided differences are symmetric in their nodes, so values are cached
    per sorted index multiset.
    """
    n = lam.shape[0]
    cache: dict[tuple[int, ...], complex] = {}
    out = np.empty((n,) * (m + 1), dtype=np.complex128)
    for idx in np.ndindex(out.shape):
        key = tuple(sorted(idx))
        val = cache.get(key)
        if val is None:
            val = divided_difference(f, [lam[t] for t in key], tau_confl)
            cache[key] = val
        out[idx] = val
    return out


def dk_first_order(
    f: ScalarFunction,
    d: SpectralDecomp,
    u_alpha,
    tau_confl: float = TAU_CONFL,
) -> np.ndarray:
    """First derivative of f at a Hermitian point from its eigensystem.

    ``u_alpha`` is the direction already rotated to the eigenbasis
    (``d.to_eigenbasis``); the result is rotated back to the original basis.
    In the eigenbasis the derivative is the Hadamard product with the first
    divided-difference table.
    """
    u_alpha = as_matrix(u_alpha, "u_alpha")
    dd1 = first_dd_table(f, d.eigenvalues, tau_confl)
    return d.from_eigenbasis(dd1 * u_alpha)


def dk_second_order(
    f: ScalarFunction,
    d: SpectralDecomp,
    u_beta,
    u_gamma,
    u_alpha,
    tau_confl: float = TAU_CONFL,
) -> np.ndarray:
    """Second mixed derivative from the eigensystem.

    ``u_beta`` and ``u_gamma`` are the two first-order path terms and
    ``u_alpha`` the second-order (cross) term, all in the eigenbasis. The
    eigenbasis result couples the pair through second divided differences
    in both orders; it is rotated back before returning.
    """
    u_alpha = as_matrix(u_alpha, "u_alpha")
    u_beta = as_matrix(u_beta, "u_beta")
    u_gamma = as_matrix(u_gamma, "u_gamma")
    lam = d.eigenvalues
    dd1 = first_dd_table(f, lam, tau_confl)
    dd2 = _dd_tensor(f, lam, 2, tau_confl)
    m = dd1 * u_alpha
    m = m + np.einsum("ik,kj,ikj->ij", u_beta, u_gamma, dd2)
    m = m + np.einsum("ik,kj,ikj->ij", u_gamma, u_beta, dd2)
    return d.from_eigenbasis(m)


def jet_to_eigenbasis(d: SpectralDecomp, terms: Mapping[MultiIndex, np.ndarray]) -> dict[MultiIndex, np.ndarray]:
    """Rotate every jet term to the eigenbasis once, for reuse across routes."""
    return {as_index(t): d.to_eigenbasis(m) for t, m in terms.items()}


def dk_general(
    f: ScalarFunction,
    d: SpectralDecomp,
    jet_eigen: Mapping[MultiIndex, np.ndarray],
    alpha: Sequence[int],
    tau_confl: float = TAU_CONFL,
    cost_cap: float = DEFAULT_COST_CAP,
) -> np.ndarray:
    """Mixed partial derivative of any order from the eigensystem.

    ``jet_eigen`` maps multi-indices to path derivatives rotated to the
    eigenbasis. For each ordered splitting of ``alpha`` into m nonzero
    pieces, the corresponding eigenbasis factors are chained and weighted
    by the (m+1)-node divided-difference tensor. Cost grows as n^(m+1);
    requests beyond ``cost_cap`` raise ComplexityRefusal.
    """
    alpha = as_index(alpha)
    m_total = order(alpha)
    if m_total == 0:
        raise EmptyIndex("derivative request must have order >= 1")
    n = d.dim
    if float(n) ** (m_total + 1) > cost_cap:
        raise ComplexityRefusal(
            f"n^(|alpha|+1) = {n}^{m_total + 1} exceeds cost cap {cost_cap:.0e}"
        )

    def lookup(t: MultiIndex) -> np.ndarray:
        hit = jet_eigen.get(t)
        if hit is None:
            raise MissingJetTerm(f"eigenbasis jet has no term for multi-index {t}")
        return as_matrix(hit, f"jet term {t}")

    lam = d.eigenvalues
    total = np.zeros((n, n), dtype=np.complex128)
    letters = "abcdefghij"
    for m in range(1, m_total + 1):
        tuples = t_permutations(alpha, m)
        if not tuples:
            continue
        dd = _dd_tensor(f, lam, m, tau_confl)
        pair_spec = ",".join(letters[i] + letters[i + 1] for i in range(m))
        spec = f"{pair_spec},{letters[:m + 1]}->{letters[0]}{letters[m]}"
        for t in tuples:
            us = [lookup(ti) for ti in t]
            total += np.einsum(spec, *us, dd)
    return d.from_eigenbasis(total)
