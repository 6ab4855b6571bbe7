"""Block upper triangular embeddings and the partition-sum route."""
import numpy as np
import pytest

from matderiv import (
    PathJet,
    build_xk,
    frechet_via_blocktri,
    get_function,
    jet_from_directions,
    longest_path,
    matrix_exp,
    partial_via_blocktri,
    partial_via_frechet_sum,
)
from matderiv.errors import (
    DimensionMismatch,
    EmptyIndex,
    MissingJetTerm,
    NotDag,
    OrderExceeded,
)
from matderiv.linalg import extract_block, frobenius
from matderiv.multiindex import iter_sub_indices


def rand_complex(rng, n):
    return rng.uniform(-0.5, 0.5, (n, n)) + 1j * rng.uniform(-0.5, 0.5, (n, n))


def complete_jet(rng, n, alpha):
    terms = {t: rand_complex(rng, n) for t in iter_sub_indices(alpha)}
    return PathJet(terms=terms, order=sum(alpha))


def test_pathjet_requires_base():
    with pytest.raises(MissingJetTerm):
        PathJet(terms={(1,): np.eye(2)}, order=1)


def test_pathjet_rejects_order_overflow():
    with pytest.raises(OrderExceeded):
        PathJet(terms={(0,): np.eye(2), (2,): np.eye(2)}, order=1)


def test_pathjet_rejects_mixed_dims():
    with pytest.raises(DimensionMismatch):
        PathJet(terms={(0,): np.eye(2), (1,): np.eye(3)}, order=1)


def test_pathjet_missing_term_policies():
    strict = PathJet(terms={(0, 0): np.eye(2)}, order=2)
    with pytest.raises(MissingJetTerm):
        strict.term((1, 0))
    loose = PathJet(terms={(0, 0): np.eye(2)}, order=2, missing_is_zero=True)
    np.testing.assert_array_equal(loose.term((1, 0)), np.zeros((2, 2)))


def test_build_xk_one_level():
    rng = np.random.default_rng(0)
    a = rand_complex(rng, 3)
    e = rand_complex(rng, 3)
    jet = PathJet(terms={(0,): a, (1,): e}, order=1)
    x = build_xk(jet, (1,))
    expected = np.block([[a, e], [np.zeros((3, 3)), a]])
    np.testing.assert_array_equal(x, expected)


def test_build_xk_two_levels_layout():
    rng = np.random.default_rng(1)
    n = 2
    jet = complete_jet(rng, n, (1, 1))
    a = jet.term((0, 0))
    ab = jet.term((1, 0))
    ag = jet.term((0, 1))
    ax = jet.term((1, 1))
    x = build_xk(jet, (1, 2))
    z = np.zeros((n, n))
    # first direction on the inner doubling, second on the outer
    expected = np.block([
        [a, ab, ag, ax],
        [z, a, z, ag],
        [z, z, a, ab],
        [z, z, z, a],
    ])
    np.testing.assert_array_equal(x, expected)


def test_build_xk_repeated_direction():
    rng = np.random.default_rng(2)
    n = 2
    jet = complete_jet(rng, n, (2,))
    a = jet.term((0,))
    a1 = jet.term((1,))
    a2 = jet.term((2,))
    x = build_xk(jet, (1, 1))
    z = np.zeros((n, n))
    expected = np.block([
        [a, a1, a1, a2],
        [z, a, z, a1],
        [z, z, a, a1],
        [z, z, z, a],
    ])
    np.testing.assert_array_equal(x, expected)


def test_build_xk_zero_directions_block_diagonal():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    jet = PathJet(terms={(0,): a}, order=2, missing_is_zero=True)
    x = build_xk(jet, (1, 1))
    np.testing.assert_array_equal(x, np.kron(np.eye(4), a.astype(complex)))


def test_build_xk_validates_input():
    jet = PathJet(terms={(0,): np.eye(2)}, order=1, missing_is_zero=True)
    with pytest.raises(EmptyIndex):
        build_xk(jet, ())
    with pytest.raises(DimensionMismatch):
        build_xk(jet, (2,))
    deep = PathJet(terms={(0,): np.eye(2)}, order=7, missing_is_zero=True)
    with pytest.raises(OrderExceeded):
        build_xk(deep, (1,) * 7)


def test_diagonal_blocks_carry_f_of_base():
    rng = np.random.default_rng(3)
    jet = complete_jet(rng, 3, (1, 1))
    f = get_function("exp")
    fx = f(build_xk(jet, (1, 2)))
    fa = f(jet.base)
    for i in range(4):
        blk = extract_block(fx, i, i, 3)
        assert frobenius(blk - fa) <= 1e-12 * max(frobenius(fa), 1.0)


def test_frechet_exp_at_zero():
    e = np.array([[0.0, 1.0], [1.0, 0.0]])
    out = frechet_via_blocktri(get_function("exp"), np.zeros((2, 2)), (e,))
    np.testing.assert_allclose(out, e, atol=1e-14)


def test_frechet_square_closed_form():
    rng = np.random.default_rng(4)
    a = rand_complex(rng, 4)
    e = rand_complex(rng, 4)
    out = frechet_via_blocktri(get_function("x^2"), a, (e,))
    np.testing.assert_allclose(out, a @ e + e @ a, atol=1e-13)


def test_frechet_second_order_square_closed_form():
    rng = np.random.default_rng(5)
    a = rand_complex(rng, 3)
    e1 = rand_complex(rng, 3)
    e2 = rand_complex(rng, 3)
    out = frechet_via_blocktri(get_function("x^2"), a, (e1, e2))
    np.testing.assert_allclose(out, e1 @ e2 + e2 @ e1, atol=1e-13)


def test_frechet_linearity():
    rng = np.random.default_rng(6)
    a = rand_complex(rng, 3)
    e1 = rand_complex(rng, 3)
    e2 = rand_complex(rng, 3)
    f = get_function("exp")
    c1, c2 = 0.7, -1.3
    left = frechet_via_blocktri(f, a, (c1 * e1 + c2 * e2,))
    right = c1 * frechet_via_blocktri(f, a, (e1,)) + c2 * frechet_via_blocktri(f, a, (e2,))
    assert frobenius(left - right) <= 1e-12 * max(frobenius(right), 1.0)


def test_frechet_second_order_symmetry():
    rng = np.random.default_rng(7)
    a = rand_complex(rng, 3)
    e1 = rand_complex(rng, 3)
    e2 = rand_complex(rng, 3)
    f = get_function("cos")
    l12 = frechet_via_blocktri(f, a, (e1, e2))
    l21 = frechet_via_blocktri(f, a, (e2, e1))
    assert frobenius(l12 - l21) <= 1e-11 * max(frobenius(l12), 1.0)


def test_partial_scalar_references():
    jet = PathJet(terms={(0,): np.zeros((1, 1)), (1,): np.ones((1, 1))}, order=1)
    out = partial_via_blocktri(get_function("exp"), jet, alpha=(1,))
    np.testing.assert_allclose(out[0, 0], 1.0, atol=1e-14)
    jet = PathJet(terms={(0,): np.ones((1, 1)), (1,): np.ones((1, 1))}, order=1)
    out = partial_via_blocktri(get_function("cos"), jet, alpha=(1,))
    np.testing.assert_allclose(out[0, 0], -np.sin(1.0), rtol=1e-13)


def test_partial_accepts_dirs():
    rng = np.random.default_rng(8)
    jet = complete_jet(rng, 2, (1, 1))
    f = get_function("exp")
    by_alpha = partial_via_blocktri(f, jet, alpha=(1, 1))
    by_dirs = partial_via_blocktri(f, jet, dirs=(1, 2))
    np.testing.assert_array_equal(by_alpha, by_dirs)


def test_route_equivalence_blocktri_vs_partition_sum():
    rng = np.random.default_rng(9)
    fns = ["exp", "cos", "x^2", "x^3"]
    alphas = [(1,), (2,), (3,), (1, 1), (2, 1), (1, 1, 1)]
    for i in range(24):
        n = int(rng.integers(2, 5))
        alpha = alphas[i % len(alphas)]
        jet = complete_jet(rng, n, alpha)
        f = get_function(fns[i % len(fns)])
        a = partial_via_blocktri(f, jet, alpha=alpha)
        b = partial_via_frechet_sum(f, jet, alpha)
        assert frobenius(a - b) <= 1e-9 * max(frobenius(a), 1.0)


def test_truncation_insensitivity_vs_polynomial_path():
    # the derivative only sees the stored partials, so differencing the
    # explicit multilinear path must reproduce it
    rng = np.random.default_rng(10)
    n = 3
    jet = complete_jet(rng, n, (1, 1))
    f = get_function("exp")
    exact = partial_via_blocktri(f, jet, alpha=(1, 1))

    def path(x, y):
        return (jet.term((0, 0)) + x * jet.term((1, 0)) + y * jet.term((0, 1))
                + x * y * jet.term((1, 1)))

    h = 1e-3
    fd = (f(path(h, h)) - f(path(h, -h)) - f(path(-h, h)) + f(path(-h, -h))) / (4 * h * h)
    assert frobenius(fd - exact) <= 1e-5 * max(frobenius(exact), 1.0)


def test_higher_order_terms_do_not_leak():
    # jet entries above the requested order cannot influence the result
    rng = np.random.default_rng(11)
    n = 2
    base_terms = {t: rand_complex(rng, n) for t in iter_sub_indices((1, 1))}
    plain = PathJet(terms=base_terms, order=2)
    padded_terms = dict(base_terms)
    padded_terms[(2, 1)] = 1e6 * rand_complex(rng, n)
    padded = PathJet(terms=padded_terms, order=3)
    f = get_function("cos")
    np.testing.assert_array_equal(
        partial_via_blocktri(f, plain, alpha=(1, 1)),
        partial_via_blocktri(f, padded, alpha=(1, 1)),
    )


def test_jet_from_directions_matches_manual():
    rng = np.random.default_rng(12)
    a = rand_complex(rng, 2)
    e1 = rand_complex(rng, 2)
    e2 = rand_complex(rng, 2)
    jet = jet_from_directions(a, (e1, e2))
    np.testing.assert_array_equal(jet.term((1, 0)), e1.astype(complex))
    np.testing.assert_array_equal(jet.term((1, 1)), np.zeros((2, 2)))
    f = get_function("exp")
    via_jet = partial_via_blocktri(f, jet, alpha=(1, 1))
    direct = frechet_via_blocktri(f, a, (e1, e2))
    np.testing.assert_allclose(via_jet, direct, atol=1e-13)


def test_longest_path_basics():
    assert longest_path(np.zeros((1, 1))) == 1
    chain = np.diag(np.ones(3), 1)
    assert longest_path(chain) == 4
    two_chains = np.zeros((4, 4))
    two_chains[0, 1] = 1.0
    two_chains[2, 3] = 1.0
    assert longest_path(two_chains) == 2


def test_longest_path_rejects_cycles_and_diagonal():
    with pytest.raises(NotDag):
        longest_path(np.array([[0.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(NotDag):
        longest_path(np.array([[1.0]]))


def test_exp_of_x1_matches_quadrature_free_series():
    # sanity anchor: d/dt exp(tA) at t=0 equals A for a plain matrix path
    rng = np.random.default_rng(13)
    a = rand_complex(rng, 3)
    jet = PathJet(terms={(0,): np.zeros((3, 3)), (1,): a}, order=1)
    out = partial_via_blocktri(get_function("exp"), jet, alpha=(1,))
    np.testing.assert_allclose(out, a, atol=1e-13)
    assert np.allclose(matrix_exp(np.zeros((3, 3))), np.eye(3))
