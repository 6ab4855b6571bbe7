"""Complex-step style derivative approximations built from block embeddings.

A multicomplex number with units j_1, ..., j_L (each squaring to -1) is
represented as a block matrix of its coefficients; applying a matrix
function to that representation and reading one block realizes high-order
step derivatives without subtractive cancellation. The same mechanism with
an exact triangular inner level gives the hybrid scheme. Plain central
differences and the classic imaginary-step trick are provided alongside as
baselines; each choice is selectable through a StepScheme value.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .blocktri import PathJet
from .errors import DimensionMismatch, NotReal
from .linalg import as_matrix, assemble_2x2, extract_block, frobenius
from .multiindex import as_index, order, split_last

DEFAULT_H_FIRST = 1e-8
DEFAULT_H_SECOND = 1e-5

STEP_KINDS = ("regular_cs", "block_cs", "hybrid", "central_fd", "blocktri_exact")

MatrixCallable = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class StepScheme:
    """A named approximation route plus its step size.

    ``blocktri_exact`` ignores the step; every other kind requires h > 0.
    """

    kind: str
    h: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in STEP_KINDS:
            raise DimensionMismatch(f"unknown scheme kind {self.kind!r}; choices: {STEP_KINDS}")
        if self.kind != "blocktri_exact" and not self.h > 0.0:
            raise DimensionMismatch(f"scheme {self.kind!r} needs a positive step, got {self.h}")


def _warn_if_step_underflows(h: float, scale: float) -> None:
    tiny = float(np.finfo(np.float64).tiny)
    if h * h <= tiny * max(scale, 1.0):
        warnings.warn(
            f"step {h:.3e} squares below the normal floating range at scale {scale:.3e}; "
            "results will be dominated by rounding",
            RuntimeWarning,
            stacklevel=3,
        )


def block_embed(coeffs: Mapping[int, np.ndarray], levels: int) -> np.ndarray:
    """Block-matrix representation of a matrix-valued multicomplex number.

    ``coeffs`` maps a bitmask over the imaginary units to its coefficient
    matrix (mask 0 is the real part). Block (r, c) of the result carries
    the coefficient for mask ``r ^ c``, with one sign flip per unit of that
    mask already set in r. One level with ``{0: a, 1: b}`` gives
    ``[[a, b], [-b, a]]``.
    """
    if levels < 1:
        raise DimensionMismatch(f"need at least one level, got {levels}")
    if not coeffs:
        raise DimensionMismatch("no coefficients given")
    nb = 1 << levels
    mats: dict[int, np.ndarray] = {}
    n = None
    for mask, m in coeffs.items():
        if not 0 <= int(mask) < nb:
            raise DimensionMismatch(f"coefficient mask {mask} out of range for {levels} levels")
        a = as_matrix(m, f"coefficient {mask}")
        if n is None:
            n = a.shape[0]
        elif a.shape[0] != n:
            raise DimensionMismatch(f"coefficient {mask} has dim {a.shape[0]}, expected {n}")
        mats[int(mask)] = a
    x = np.zeros((nb * n, nb * n), dtype=np.complex128)
    for r in range(nb):
        for c in range(nb):
            m = mats.get(r ^ c)
            if m is None:
                continue
            sign = 1.0
            mask = r ^ c
            for i in range(levels):
                if mask >> i & 1 and r >> i & 1:
                    sign = -sign
            x[r * n:(r + 1) * n, c * n:(c + 1) * n] = sign * m
    return x


def multicomplex_embed(jet_terms: Sequence[np.ndarray], h: float) -> np.ndarray:
    """Embed a base matrix and step directions, one fresh unit per direction.

    ``jet_terms`` is ``(a0, e1, ..., ej)``; level i carries ``h * e_i`` on
    its own unit, so the result is the recursion
    ``X_i = [[X_{i-1}, I (x) h E_i], [-I (x) h E_i, X_{i-1}]]`` written out
    as a single ``2^j n`` by ``2^j n`` matrix.
    """
    if len(jet_terms) < 2:
        raise DimensionMismatch(
            f"need a base matrix and at least one direction, got {len(jet_terms)} term(s)"
        )
    coeffs: dict[int, np.ndarray] = {0: as_matrix(jet_terms[0], "a0")}
    for i, e in enumerate(jet_terms[1:], start=1):
        coeffs[1 << (i - 1)] = h * as_matrix(e, f"e{i}")
    return block_embed(coeffs, levels=len(jet_terms) - 1)


def cs_frechet_1(
    f: MatrixCallable, a0, e1, h: float = DEFAULT_H_FIRST
) -> np.ndarray:
    """First directional derivative by a one-level block step.

    Works for complex inputs, unlike the regular complex step: the step
    lives on a fresh unit, not on the matrix's own imaginary part.
    """
    a0 = as_matrix(a0, "a0")
    e1 = as_matrix(e1, "e1")
    _warn_if_step_underflows(h, frobenius(a0))
    x = block_embed({0: a0, 1: h * e1}, levels=1)
    return extract_block(f(x), 0, 1, a0.shape[0]) / h


def cs_frechet_2(
    f: MatrixCallable, a0, e1, e2, h: float = DEFAULT_H_SECOND
) -> np.ndarray:
    """Second directional derivative by a two-level block step."""
    a0 = as_matrix(a0, "a0")
    e1 = as_matrix(e1, "e1")
    e2 = as_matrix(e2, "e2")
    _warn_if_step_underflows(h, frobenius(a0))
    x = block_embed({0: a0, 1: h * e1, 2: h * e2}, levels=2)
    return extract_block(f(x), 0, 3, a0.shape[0]) / (h * h)


def _split_second_order(jet: PathJet, alpha) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    alpha = as_index(alpha)
    if order(alpha) != 2:
        raise DimensionMismatch(f"second-order scheme needs |alpha| = 2, got {alpha}")
    beta, gamma = split_last(alpha)
    return jet.base, jet.term(beta), jet.term(gamma), jet.term(alpha)


def cs_partial_2(
    f: MatrixCallable, jet: PathJet, alpha, h: float = DEFAULT_H_SECOND
) -> np.ndarray:
    """Second-order partial derivative by a two-level block step.

    The jet's cross term rides on the product of both units so the chain
    rule's path-curvature contribution is included. A repeated index
    (e.g. alpha = (2, 0)) is handled by splitting it into two unit steps
    in the same direction.
    """
    a0, a_beta, a_gamma, a_alpha = _split_second_order(jet, alpha)
    _warn_if_step_underflows(h, frobenius(a0))
    x = block_embed(
        {0: a0, 1: h * a_beta, 2: h * a_gamma, 3: h * h * a_alpha}, levels=2
    )
    return extract_block(f(x), 0, 3, jet.dim) / (h * h)


def hybrid_partial_2(
    f: MatrixCallable, jet: PathJet, alpha, h: float = DEFAULT_H_SECOND
) -> np.ndarray:
    """Second-order partial derivative: exact triangular level inside one
    block step level.

    The inner doubling differentiates exactly in the first split direction;
    the outer unit steps in the second. Only one factor of h appears, so
    the truncation behaves like a first derivative's while computing a
    second derivative.
    """
    a0, a_beta, a_gamma, a_alpha = _split_second_order(jet, alpha)
    _warn_if_step_underflows(h, frobenius(a0))
    n = jet.dim
    zero = np.zeros((n, n), dtype=np.complex128)
    inner0 = assemble_2x2(a0, a_beta, zero, a0)
    inner1 = assemble_2x2(a_gamma, a_alpha, zero, a_gamma)
    x = block_embed({0: inner0, 1: h * inner1}, levels=1)
    return extract_block(f(x), 0, 3, n) / h


def central_fd_1(f: MatrixCallable, a0, e1, h: float) -> np.ndarray:
    """Two-point central difference for a first directional derivative."""
    a0 = as_matrix(a0, "a0")
    e1 = as_matrix(e1, "e1")
    _warn_if_step_underflows(h, frobenius(a0))
    return (f(a0 + h * e1) - f(a0 - h * e1)) / (2.0 * h)


def _infer_second_order_index(jet: PathJet):
    twos = sorted(t for t in jet.terms if order(t) == 2)
    if len(twos) != 1:
        raise DimensionMismatch(
            f"jet stores {len(twos)} order-2 terms; pass alpha explicitly"
        )
    return twos[0]


def central_fd_2_mixed(f: MatrixCallable, jet: PathJet, h: float, alpha=None) -> np.ndarray:
    """Four-point stencil for a second-order partial derivative.

    Evaluates the second-order path surrogate at the four corners
    (+-h, +-h); the cross term enters with the product of the two signs.
    When ``alpha`` is omitted the jet must store exactly one order-2 term,
    which is taken as the target index.
    """
    if alpha is None:
        alpha = _infer_second_order_index(jet)
    a0, a_beta, a_gamma, a_alpha = _split_second_order(jet, alpha)
    _warn_if_step_underflows(h, frobenius(a0))
    h2 = h * h
    app = f(a0 + h * a_beta + h * a_gamma + h2 * a_alpha)
    apm = f(a0 + h * a_beta - h * a_gamma - h2 * a_alpha)
    amp = f(a0 - h * a_beta + h * a_gamma - h2 * a_alpha)
    amm = f(a0 - h * a_beta - h * a_gamma + h2 * a_alpha)
    return (app - apm - amp + amm) / (4.0 * h2)


def regular_cs_1(
    f: MatrixCallable, a0, e1, h: float = DEFAULT_H_FIRST, imag_tol: float = 1e-14
) -> np.ndarray:
    """Classic complex step: imaginary part of f(a0 + i h e1) over h.

    Only meaningful when the data is real, because the step shares the
    matrix's own imaginary unit; complex inputs raise NotReal.
    """
    a0 = as_matrix(a0, "a0")
    e1 = as_matrix(e1, "e1")
    if np.max(np.abs(a0.imag)) > imag_tol or np.max(np.abs(e1.imag)) > imag_tol:
        raise NotReal("regular complex step requires real input matrices")
    _warn_if_step_underflows(h, frobenius(a0))
    return np.imag(f(a0.real + 1j * h * e1.real)) / h
