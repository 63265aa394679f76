import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import fields, random_field
from liechart import builtins as B
from liechart.factorization import (
    FilteredBasis,
    FlatBasis,
    NotInAlgebra,
    convergence_report,
    decompose,
    dilation_conjugate_diffeo,
    factorize,
    iterate_step,
    reconstruct,
    verify_split_bounds,
)
from liechart.flows import FormalDiffeo, compose, exp_field, one_minus_then_exp
from liechart.formal_algebra import (
    FormalVectorField,
    banach_norm,
    canonical_field,
    degree_norms,
    dilation_conjugate,
    weighted_basis_field,
)
from liechart.prolongation import build_filtered_basis
from liechart.rational import Q


def one_d(N, coeffs):
    """sum_n coeffs[n] x^(n+1) d_x, the index convention of the 1D formulas."""
    return FormalVectorField(1, N, [{(n + 1,): c for n, c in coeffs.items()}])


def nonzero_q(rng):
    return Q(rng.choice([-1, 1]) * rng.randint(1, 9), rng.randint(1, 9))


@pytest.mark.parametrize("seed", range(10))
def test_one_dimensional_split_p2(seed):
    rng = random.Random(seed)
    N = 10
    a = {n: nonzero_q(rng) for n in range(2, N)}
    b = {n: nonzero_q(rng) for n in range(2, N)}
    c = {n: nonzero_q(rng) for n in range(3, N)}
    eps3, eps4 = one_d(N, b), one_d(N, c)
    res = decompose(one_d(N, a), FilteredBasis(1, [eps3, eps4]), 2)
    k3 = a[2] / b[2]
    k4 = (a[3] - a[2] / b[2] * b[3]) / c[3]
    assert res.X == eps3.scale(k3) + eps4.scale(k4)
    alpha = {n: a[n] - a[2] * b[n] / b[2] - a[3] * c[n] / c[3] + a[2] * b[3] * c[n] / (b[2] * c[3]) for n in range(4, N)}
    assert res.Y == one_d(N, alpha)


@pytest.mark.parametrize("seed", range(10))
def test_one_dimensional_split_p3(seed):
    rng = random.Random(100 + seed)
    N = 12
    a = {n: nonzero_q(rng) for n in range(3, N)}
    c = {n: nonzero_q(rng) for n in range(3, N)}
    d = {n: nonzero_q(rng) for n in range(4, N)}
    f = {n: nonzero_q(rng) for n in range(5, N)}
    e4, e5, e6 = one_d(N, c), one_d(N, d), one_d(N, f)
    res = decompose(one_d(N, a), FilteredBasis(1, [e6, e4, e5]), 3)
    k4 = a[3] / c[3]
    k5 = (a[4] - a[3] / c[3] * c[4]) / d[4]
    k6 = (a[5] - a[3] / c[3] * c[5] - (a[4] - a[3] / c[3] * c[4]) * d[5] / d[4]) / f[5]
    assert res.X == e4.scale(k4) + e5.scale(k5) + e6.scale(k6)
    alpha = {
        n: a[n]
        - a[3] / c[3] * c[n]
        - (a[4] - a[3] / c[3] * c[4]) * d[n] / d[4]
        - (a[5] - a[3] / c[3] * c[5] - (a[4] - a[3] / c[3] * c[4]) * d[5] / d[4]) * f[n] / f[5]
        for n in range(6, N)
    }
    assert res.Y == one_d(N, alpha)


@given(st.integers(0, 10**6))
def test_one_dimensional_remainder_bound_p2(seed):
    # with |b_n/b_2|, |c_n/c_3| <= 1: |alpha_n| <= |a_n| + |a_3| + 2|a_2|
    rng = random.Random(seed)
    N = 9
    a = {n: nonzero_q(rng) for n in range(2, N)}
    b = {2: Q(1), **{n: Q(rng.randint(-9, 9), 9) for n in range(3, N)}}
    c = {3: Q(1), **{n: Q(rng.randint(-9, 9), 9) for n in range(4, N)}}
    res = decompose(one_d(N, a), FilteredBasis(1, [one_d(N, b), one_d(N, c)]), 2)
    for n in range(4, N):
        alpha = res.Y.components[0].get((n + 1,), Q(0))
        assert abs(alpha) <= abs(a[n]) + abs(a[3]) + 2 * abs(a[2])


@given(st.data())
def test_flat_split_is_verbatim(data):
    Z = data.draw(fields(N=8, lo=2))
    p = Z.filtration_order if not Z.is_zero() else 1
    res = decompose(Z, FlatBasis(Z.nu, 8), p)
    assert res.X == Z.degree_range(p + 1, 2 * p)
    assert res.X + res.Y == Z
    assert res.Y.is_zero() or res.Y.filtration_order >= 2 * p


def test_zero_split():
    res = decompose(FormalVectorField.zero(2, 6), FlatBasis(2, 6), 1)
    assert res.X.is_zero() and res.Y.is_zero()


def test_not_in_algebra():
    N = 8
    basis = FilteredBasis(1, [one_d(N, {2: Q(1), 4: Q(3)})])
    with pytest.raises(NotInAlgebra) as info:
        decompose(one_d(N, {2: Q(1), 3: Q(1)}), basis, 2)
    assert info.value.degree == 4


def test_not_in_algebra_reports_step():
    N = 6
    basis = FilteredBasis.from_solutions(build_filtered_basis(B.divergence_free(), N, N), 2, N)
    # x -> x + x^2 does not preserve volume
    phi = FormalDiffeo(2, N, [{(1, 0): 1, (2, 0): 1}, {(0, 1): 1}])
    with pytest.raises(NotInAlgebra) as info:
        factorize(phi, basis, N)
    assert info.value.step == 0 and info.value.degree == 2


def test_dependent_leading_parts_rejected():
    with pytest.raises(ValueError):
        FilteredBasis(1, [one_d(6, {2: Q(1)}), one_d(6, {2: Q(2), 3: Q(1)})])


@given(st.data())
def test_split_bounds_on_random_fields(data):
    Z = data.draw(fields(N=10, lo=2, max_terms=8))
    if Z.is_zero():
        return
    rho = data.draw(st.sampled_from([Q(4), Q(5), Q(9, 2)]))
    M = banach_norm(Z, rho)
    cert = verify_split_bounds(decompose(Z, FlatBasis(Z.nu, 10)), rho, M)
    assert cert.holds


def test_split_bounds_on_canonical_field():
    Z = canonical_field(1, 4, 2, 12, nu=2).expand()
    res = decompose(Z, FlatBasis(2, 12), 2)
    cert = verify_split_bounds(res, 4, 1)
    assert cert.holds and cert.y_norm <= Q(3, 2)
    assert res.X == Z.degree_range(3, 4)
    with pytest.raises(ValueError):
        verify_split_bounds(res, 3, 1)


def test_split_violation_names_degree():
    Z = one_d(6, {1: Q(1)})
    res = decompose(Z, FlatBasis(1, 6), 1)
    cert = verify_split_bounds(res, 4, Q(1, 100))
    assert not cert.holds and cert.x_violations == [2]


@given(st.data())
def test_iterate_step_doubles_order(data):
    nu = data.draw(st.integers(1, 2))
    Z = data.draw(fields(nu=nu, N=8, lo=2))
    if Z.is_zero():
        return
    p = Z.filtration_order
    phi = FormalDiffeo.id_minus(Z)
    step = iterate_step(phi, FlatBasis(nu, 8), p)
    W = step.phi_next.id_minus_self()
    assert W.is_zero() or W.filtration_order >= 2 * p
    assert step.phi_next == compose(phi, exp_field(step.X))


def test_iterate_step_on_pure_window_matches_identity_oracle():
    # Z purely in degrees p+1..2p: Phi_{i+1} = (id - X) o Exp X
    X = FormalVectorField(2, 9, [{(2, 0): 1, (1, 1): -2}, {(0, 2): Q(1, 3)}])
    step = iterate_step(FormalDiffeo.id_minus(X), FlatBasis(2, 9), 1)
    assert step.X == X
    assert step.phi_next == one_minus_then_exp(X)


def test_iterate_step_on_identity():
    ident = FormalDiffeo.identity(2, 6)
    step = iterate_step(ident, FlatBasis(2, 6), 1)
    assert step.X.is_zero() and step.phi_next == ident


def test_inverse_exponential_recovers_the_field():
    v = weighted_basis_field(2, 10, 0, (1, 1))
    phi = exp_field(-v)
    res = factorize(phi, FlatBasis(2, 10))
    assert res.v[0] == -v and all(w.is_zero() for w in res.v[1:])
    assert reconstruct(res.v, 10, 2) == phi


def test_mobius_map_factor():
    N = 16
    phi = FormalDiffeo(1, N, [{(k,): 1 for k in range(1, N + 1)}])
    res = factorize(phi, FlatBasis(1, N))
    assert res.v == [FormalVectorField(1, N, [{(2,): 1}])]
    assert phi == exp_field(res.v[0])


def test_identity_has_no_factors():
    res = factorize(FormalDiffeo.identity(3, 8), FlatBasis(3, 8))
    assert res.v == [] and convergence_report(res, 1).rows == []


def test_linear_part_must_be_identity():
    with pytest.raises(ValueError):
        factorize(FormalDiffeo(1, 4, [{(1,): 2}]), FlatBasis(1, 4))


@given(st.data())
def test_round_trip_flat(data):
    nu = data.draw(st.integers(1, 2))
    N = data.draw(st.integers(2, 9))
    Z = data.draw(fields(nu=nu, N=N, lo=2, max_terms=8))
    phi = FormalDiffeo.id_minus(Z)
    res = factorize(phi, FlatBasis(nu, N))
    assert reconstruct(res.v, N, nu) == phi
    assert res.residual.is_identity()
    for i, v in enumerate(res.v):
        # step i covers degrees 2^i + 1 .. 2^(i+1)
        assert all(2**i < d <= 2 ** (i + 1) for d in v.degrees())


def test_round_trip_exponential_of_random_field(rng):
    for nu in (1, 2):
        u = random_field(rng, nu, 12, lo=2, terms=6)
        phi = exp_field(u)
        assert reconstruct(factorize(phi, FlatBasis(nu, 12)).v, 12, nu) == phi


def test_reconstruct_basics():
    assert reconstruct([], 5, 2) == FormalDiffeo.identity(2, 5)
    v = FormalVectorField(2, 7, [{(1, 1): 1}, {(3, 0): -2}])
    assert reconstruct([v], 7) == exp_field(v)
    late = FormalVectorField(2, 7, [{(8, 0): 0}, {}])  # nothing below degree 8
    far = FormalVectorField(2, 9, [{(8, 0): 1}, {}])
    assert reconstruct([v, far.with_truncation(7)], 7) == reconstruct([v], 7)
    assert late.is_zero()


def _algebra_basis(system, N):
    return FilteredBasis.from_solutions(build_filtered_basis(system, N, N), 2, N)


def _algebra_diffeo(basis, rng, N):
    els = basis.elements
    u = els[0].scale(0)
    w = els[0].scale(0)
    for e in rng.sample(els, 4):
        u = u + e.scale(Q(rng.randint(-3, 3), rng.randint(1, 3)))
    for e in rng.sample(els, 3):
        w = w + e.scale(Q(rng.randint(-3, 3), rng.randint(1, 3)))
    return compose(exp_field(u), exp_field(w))


@pytest.mark.parametrize(
    "system,N", [(B.cauchy_riemann(), 9), (B.divergence_free(), 7), (B.weighted_divergence_free(), 7)]
)
def test_round_trip_in_sub_algebras(system, N, rng):
    basis = _algebra_basis(system, N)
    for _ in range(3):
        phi = _algebra_diffeo(basis, rng, N)
        res = factorize(phi, basis, N)
        assert reconstruct(res.v, N, 2) == phi
        for i, v in enumerate(res.v):
            if not v.is_zero():
                assert 2**i < v.leading_degree <= 2 ** (i + 1)


def test_section_is_independent_of_element_order(rng):
    N = 8
    basis = _algebra_basis(B.cauchy_riemann(), N)
    shuffled = list(basis.elements)
    rng.shuffle(shuffled)
    other = FilteredBasis(2, shuffled, N)
    phi = _algebra_diffeo(basis, rng, N)
    assert factorize(phi, basis, N).v == factorize(phi, other, N).v


def test_factorization_commutes_with_dilation(rng):
    N = 8
    basis = _algebra_basis(B.weighted_divergence_free(), N)
    phi = _algebra_diffeo(basis, rng, N)
    lam = Q(1, 3)
    scaled = FilteredBasis(2, [dilation_conjugate(e, lam) for e in basis.elements], N)
    a = factorize(phi, basis, N).v
    b = factorize(dilation_conjugate_diffeo(phi, lam), scaled, N).v
    assert b == [dilation_conjugate(v, lam) for v in a]


def test_normalized_basis_is_bounded():
    N = 10
    # x^2/(1 - 3x) d_x and x^3 d_x: growth rate exactly 3
    basis = FilteredBasis(1, [one_d(N, {n: Q(3) ** (n - 1) for n in range(1, N)}), one_d(N, {2: Q(1)})])
    assert basis.growth_rate() == pytest.approx(3)
    assert not basis.is_bounded(1) and basis.is_bounded(3)
    norm, lam = basis.normalized()
    assert lam <= Q(1, 3) and norm.is_bounded(1)
    assert all(degree_norms(e)[e.leading_degree] == 1 for e in norm.elements)
    assert _algebra_basis(B.weighted_divergence_free(), 7).is_bounded(1)


def test_convergence_report_flat(rng):
    N = 16
    for nu in (1, 2):
        Z = random_field(rng, nu, N, lo=2, terms=10)
        res = factorize(FormalDiffeo.id_minus(Z), FlatBasis(nu, N))
        rep = convergence_report(res, 4)
        assert rep.seed_index == 2 and rep.rows and rep.all_within
        assert rep.rho_limit > 4 and rep.rho_limit < float("inf")


def test_convergence_report_flags_small_seed_bound(rng):
    Z = random_field(rng, 1, 16, lo=2, terms=10)
    res = factorize(FormalDiffeo.id_minus(Z), FlatBasis(1, 16))
    measured = float(banach_norm(res.residues[2], Q(4)))
    rep = convergence_report(res, 4, M0=measured / 2)
    assert not rep.rows[0].z_ok
