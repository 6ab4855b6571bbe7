"""Block upper triangular construction of matrix function derivatives.

Embedding the derivative data of a matrix path into a block matrix of
doubled size once per derivative order turns differentiation into a single
function evaluation: the requested derivative is the top-right block of
``f`` applied to the embedding. The same machinery evaluates multilinear
directional derivatives, and a partition sum converts those back into
mixed partial derivatives, giving two independent exact routes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyIndex,
    MissingJetTerm,
    NotDag,
    OrderExceeded,
)
from .linalg import as_matrix, extract_block
from .multiindex import (
    MultiIndex,
    as_index,
    order,
    resolve_request,
    s_partitions,
    unit,
)

MAX_ORDER = 6

MatrixCallable = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class PathJet:
    """Derivatives of a matrix path A(x) at a point, keyed by multi-index.

    ``terms[t]`` holds the partial derivative of A with multi-index t; the
    zero index (the base point) is mandatory. Lookups of absent indices
    raise MissingJetTerm unless the jet was built with ``missing_is_zero``,
    which is the right setting for paths known to be multilinear.
    """

    terms: Mapping[MultiIndex, np.ndarray]
    order: int
    missing_is_zero: bool = False
    nvars: int = field(init=False)
    dim: int = field(init=False)

    def __post_init__(self) -> None:
        if not self.terms:
            raise MissingJetTerm("jet has no terms")
        normalized: dict[MultiIndex, np.ndarray] = {}
        nvars = None
        dim = None
        for key, val in self.terms.items():
            t = as_index(key, "jet key")
            if nvars is None:
                nvars = len(t)
            elif len(t) != nvars:
                raise DimensionMismatch(f"jet keys mix lengths {nvars} and {len(t)}")
            m = as_matrix(val, f"jet term {t}")
            if dim is None:
                dim = m.shape[0]
            elif m.shape[0] != dim:
                raise DimensionMismatch(f"jet term {t} has dim {m.shape[0]}, expected {dim}")
            if order(t) > self.order:
                raise OrderExceeded(f"jet term {t} exceeds declared order {self.order}")
            normalized[t] = m
        if self.order < 1:
            raise OrderExceeded(f"jet order must be >= 1, got {self.order}")
        zero = (0,) * nvars
        if zero not in normalized:
            raise MissingJetTerm("jet is missing the base point (zero multi-index)")
        object.__setattr__(self, "terms", normalized)
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "dim", dim)

    @property
    def base(self) -> np.ndarray:
        return self.terms[(0,) * self.nvars]

    def term(self, t: Sequence[int]) -> np.ndarray:
        key = as_index(t, "jet lookup")
        if len(key) != self.nvars:
            raise DimensionMismatch(f"jet lookup {key} has {len(key)} vars, jet has {self.nvars}")
        hit = self.terms.get(key)
        if hit is not None:
            return hit
        if self.missing_is_zero:
            return np.zeros((self.dim, self.dim), dtype=np.complex128)
        raise MissingJetTerm(f"jet has no term for multi-index {key}")


def jet_from_directions(a0: np.ndarray, es: Sequence[np.ndarray]) -> PathJet:
    """Jet of the multilinear path A + sum_i x_i E_i (mixed terms vanish)."""
    a0 = as_matrix(a0, "a0")
    k = len(es)
    if k == 0:
        raise EmptyIndex("need at least one direction")
    terms: dict[MultiIndex, np.ndarray] = {(0,) * k: a0}
    for i, e in enumerate(es):
        terms[unit(k, i + 1)] = as_matrix(e, f"e{i + 1}")
    return PathJet(terms=terms, order=k, missing_is_zero=True)


def build_xk(jet: PathJet, dirs: Sequence[int]) -> np.ndarray:
    """Block upper triangular embedding for the directions ``dirs``.

    Level i doubles the matrix; block (r, c) of the result is the jet term
    whose multi-index collects one unit per level set in c but not in r,
    and is zero unless the bits of r are a subset of the bits of c. Bit 0
    corresponds to ``dirs[0]``.
    """
    dirs = tuple(int(d) for d in dirs)
    k = len(dirs)
    if k < 1:
        raise EmptyIndex("need at least one direction")
    if k > MAX_ORDER:
        raise OrderExceeded(f"order {k} exceeds the supported maximum {MAX_ORDER}")
    for d in dirs:
        if not 1 <= d <= jet.nvars:
            raise DimensionMismatch(f"direction {d} out of range 1..{jet.nvars}")
    n = jet.dim
    nb = 1 << k
    full = nb - 1
    x = np.zeros((nb * n, nb * n), dtype=np.complex128)
    for r in range(nb):
        for c in range(nb):
            if r & (c ^ full):
                continue
            diff = c & ~r
            t = [0] * jet.nvars
            for lev in range(k):
                if diff >> lev & 1:
                    t[dirs[lev] - 1] += 1
            x[r * n:(r + 1) * n, c * n:(c + 1) * n] = jet.term(tuple(t))
    return x


def partial_via_blocktri(
    f: MatrixCallable,
    jet: PathJet,
    alpha: Sequence[int] | None = None,
    dirs: Sequence[int] | None = None,
) -> np.ndarray:
    """Mixed partial derivative of f(A(x)) read off one block evaluation."""
    _, d = resolve_request(alpha, dirs, jet.nvars)
    x = build_xk(jet, d)
    fx = f(x)
    return extract_block(fx, 0, (1 << len(d)) - 1, jet.dim)


def frechet_via_blocktri(
    f: MatrixCallable, a0: np.ndarray, es: Sequence[np.ndarray]
) -> np.ndarray:
    """k-th derivative of f at a0 in directions es (symmetric multilinear)."""
    jet = jet_from_directions(a0, es)
    return partial_via_blocktri(f, jet, dirs=tuple(range(1, len(es) + 1)))


def partial_via_frechet_sum(
    f: MatrixCallable, jet: PathJet, alpha: Sequence[int]
) -> np.ndarray:
    """Mixed partial derivative as a sum of directional derivatives.

    Sums, over every splitting of ``alpha`` into i nonzero pieces, the i-th
    directional derivative of f at the base point along the corresponding
    jet terms. Terms are accumulated in canonical order (i ascending,
    splittings in their canonical order), so results are bit-reproducible.
    """
    alpha = as_index(alpha)
    m = order(alpha)
    if m == 0:
        raise EmptyIndex("derivative request must have order >= 1")
    a0 = jet.base
    total = np.zeros((jet.dim, jet.dim), dtype=np.complex128)
    for i in range(1, m + 1):
        for part in s_partitions(alpha, i):
            es = [jet.term(t) for t in part]
            total += frechet_via_blocktri(f, a0, es)
    return total


def longest_path(adj) -> int:
    """Number of vertices on a longest path of a strictly upper triangular DAG.

    A single vertex with no edges counts 1. Nonzero entries on or below the
    diagonal raise NotDag.
    """
    a = np.asarray(adj)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"adjacency must be square, got shape {a.shape}")
    edges = a != 0
    n = edges.shape[0]
    if np.any(np.tril(edges)):
        raise NotDag("adjacency has entries on or below the diagonal")
    best = np.ones(n, dtype=np.int64)
    for j in range(n):
        preds = np.nonzero(edges[:, j])[0]
        if preds.size:
            best[j] = 1 + int(best[preds].max())
    return int(best.max()) if n else 0
