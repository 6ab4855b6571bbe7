"""Derivatives of spectral projectors and eigenvectors of Hermitian pencils.

The density matrix P = theta(mu - H) is a matrix function of H with a step
scalar function, so its parameter derivatives follow from the eigenbasis
divided-difference formulas; the step function's divided differences have
closed forms driven only by which side of the chemical potential each
eigenvalue sits on. Eigenvector corrections for a simple lowest eigenvalue
come from differentiating the rank-one projector applied to the unperturbed
vector, which keeps everything free of phase choices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGroundState, DomainError, TooCloseToMu
from .funcs import ScalarFunction
from .linalg import SpectralDecomp, as_matrix, require_hermitian

GAP_MIN = 1e-8


def step_function(mu: float) -> ScalarFunction:
    """Indicator of (-inf, mu) as a ScalarFunction.

    Derivatives of positive order are zero away from mu and undefined at
    mu itself (DomainError); the divided-difference code never needs them
    at mu when the spectrum respects the protection band.
    """

    def ev(x: complex) -> complex:
        return 1.0 + 0.0j if complex(x).real < mu else 0.0 + 0.0j

    def dv(x: complex, order: int) -> complex:
        if complex(x).real == mu:
            raise DomainError(f"step function is not differentiable at mu = {mu}")
        return 0.0 + 0.0j

    return ScalarFunction(name=f"step(mu={mu})", eval_fn=ev, deriv_fn=dv)


def _check_band(values, mu: float, gap_min: float) -> None:
    arr = np.atleast_1d(np.asarray(values, dtype=np.float64))
    dist = np.abs(arr - mu)
    if np.any(dist <= 0.5 * gap_min):
        worst = float(dist.min())
        raise TooCloseToMu(
            f"eigenvalue within {worst:.3e} of mu = {mu}; protection band is {0.5 * gap_min:.1e}"
        )


@dataclass(frozen=True)
class ChemicalPotentialSplit:
    """Occupied/virtual classification of a spectrum against mu."""

    mu: float
    n_occ: int
    gap: float


def split_at_mu(
    d: SpectralDecomp, mu: float, gap_min: float = GAP_MIN
) -> ChemicalPotentialSplit:
    """Classify eigenvalues as below/above mu, enforcing the protection band."""
    _check_band(d.eigenvalues, mu, gap_min)
    n_occ = int(np.sum(d.eigenvalues < mu))
    gap = float(np.min(np.abs(d.eigenvalues - mu)))
    return ChemicalPotentialSplit(mu=mu, n_occ=n_occ, gap=gap)


def step_divdiff_1(
    li: float, lj: float, mu: float, gap_min: float = GAP_MIN
) -> float:
    """First divided difference of the step function: -1/|li - lj| when the
    nodes straddle mu, else 0."""
    _check_band([li, lj], mu, gap_min)
    if (li < mu) == (lj < mu):
        return 0.0
    return -1.0 / abs(li - lj)


def step_divdiff_2(
    li: float, lj: float, lk: float, mu: float, gap_min: float = GAP_MIN
) -> float:
    """Second divided difference of the step function.

    Zero unless exactly one node sits on its own side of mu; then the value
    is +-1 over the product of that node's distances to the other two,
    negative when the lone node is above mu. Symmetric in the nodes.
    """
    _check_band([li, lj, lk], mu, gap_min)
    nodes = np.array([li, lj, lk], dtype=np.float64)
    above = nodes >= mu
    n_above = int(above.sum())
    if n_above in (0, 3):
        return 0.0
    if n_above == 1:
        lone = float(nodes[above][0])
        rest = nodes[~above]
        sign = -1.0
    else:
        lone = float(nodes[~above][0])
        rest = nodes[above]
        sign = 1.0
    return sign / float(np.prod(np.abs(lone - rest)))


def _step_dd1_table(lam: np.ndarray, mu: float, gap_min: float) -> np.ndarray:
    _check_band(lam, mu, gap_min)
    below = lam < mu
    diff = lam[:, None] - lam[None, :]
    opposite = below[:, None] != below[None, :]
    table = np.zeros_like(diff)
    table[opposite] = -1.0 / np.abs(diff[opposite])
    return table


def density_matrix(d: SpectralDecomp, mu: float) -> np.ndarray:
    """Spectral projector onto eigenvalues below mu."""
    occ = (d.eigenvalues < mu).astype(np.complex128)
    q = d.vectors
    return (q * occ) @ q.conj().T


def density_deriv_1(
    d: SpectralDecomp, h_alpha, mu: float, gap_min: float = GAP_MIN
) -> np.ndarray:
    """First parameter derivative of the density matrix.

    ``h_alpha`` is the Hamiltonian's derivative in the original basis. Only
    occupied-virtual blocks survive, weighted by -1 over the level spacing.
    """
    h_alpha = require_hermitian(as_matrix(h_alpha, "h_alpha"))
    table = _step_dd1_table(d.eigenvalues, mu, gap_min)
    u_alpha = d.to_eigenbasis(h_alpha)
    return d.from_eigenbasis(table * u_alpha)


def density_deriv_2(
    d: SpectralDecomp,
    h_beta,
    h_gamma,
    h_alpha,
    mu: float,
    gap_min: float = GAP_MIN,
) -> np.ndarray:
    """Second mixed parameter derivative of the density matrix.

    ``h_beta`` and ``h_gamma`` are the first derivatives of H along the two
    split directions, ``h_alpha`` the second (cross) derivative, all in the
    original basis. The closed form works block-wise in the eigenbasis with
    occupied/virtual masks; it matches the generic divided-difference route
    but needs only the level spacings.
    """
    h_beta = require_hermitian(as_matrix(h_beta, "h_beta"))
    h_gamma = require_hermitian(as_matrix(h_gamma, "h_gamma"))
    h_alpha = require_hermitian(as_matrix(h_alpha, "h_alpha"))
    lam = d.eigenvalues
    n = d.dim
    table = _step_dd1_table(lam, mu, gap_min)
    ne = int(np.sum(lam < mu))
    occ_mask = np.zeros(n)
    occ_mask[:ne] = 1.0
    occ = np.diag(occ_mask).astype(np.complex128)
    vir = np.eye(n, dtype=np.complex128) - occ

    ub = d.to_eigenbasis(h_beta)
    ug = d.to_eigenbasis(h_gamma)
    ua = d.to_eigenbasis(h_alpha)
    vb = table * ub
    vg = table * ug

    v = table * ua
    v = v + table * (occ @ vb @ ug @ vir - occ @ ub @ vg @ vir)
    v = v + table * (vir @ ub @ vg @ occ - vir @ vb @ ug @ occ)
    v = v + vir @ vb @ vg @ vir - occ @ vb @ vg @ occ
    v = v + table * (occ @ vg @ ub @ vir - occ @ ug @ vb @ vir)
    v = v + table * (vir @ ug @ vb @ occ - vir @ vg @ ub @ occ)
    v = v + vir @ vg @ vb @ vir - occ @ vg @ vb @ occ
    return d.from_eigenbasis(v)


def _ground_state_parts(
    d: SpectralDecomp, h1, gap_min: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray] | None:
    """Validate the gap and return (q, denominators, eigenbasis h1)."""
    h1 = require_hermitian(as_matrix(h1, "h1"))
    if d.dim == 1:
        return None
    lam = d.eigenvalues
    if lam[1] - lam[0] <= gap_min:
        raise DegenerateGroundState(
            f"lowest gap {lam[1] - lam[0]:.3e} is within gap_min = {gap_min:.1e}"
        )
    u = d.to_eigenbasis(h1)
    denom = lam[1:] - lam[0]
    return d.vectors, denom, u


def eigvec_correction_1(
    d: SpectralDecomp, h1, gap_min: float = GAP_MIN
) -> np.ndarray:
    """First derivative of P(eps) q1: the ground-state vector's response.

    Differentiates the projected vector rather than a normalized eigenvector,
    which removes the phase ambiguity; the result coincides with the
    phase-fixed eigenvector derivative.
    """
    parts = _ground_state_parts(d, h1, gap_min)
    if parts is None:
        return np.zeros(1, dtype=np.complex128)
    q, denom, u = parts
    coeff = -u[1:, 0] / denom
    return q[:, 1:] @ coeff


def eigvec_correction_2(
    d: SpectralDecomp, h1, gap_min: float = GAP_MIN
) -> np.ndarray:
    """Second derivative of P(eps) q1 for a linear pencil H + eps H1.

    Along q1 the result dips by the squared first-order weight; across the
    excited states it mixes second-order channels with a factor 2 because
    this is a derivative, not a series coefficient.
    """
    parts = _ground_state_parts(d, h1, gap_min)
    if parts is None:
        return np.zeros(1, dtype=np.complex128)
    q, denom, u = parts
    u10 = u[1:, 0]
    w = u10 / denom
    coeff = 2.0 * (u[1:, 1:] @ w) / denom
    coeff = coeff - 2.0 * u10 * u[0, 0] / denom**2
    along_q1 = -2.0 * float(np.sum((u10.conj() * u10).real / denom**2))
    return q[:, 1:] @ coeff + along_q1 * q[:, 0]
