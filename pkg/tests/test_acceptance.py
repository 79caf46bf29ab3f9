"""Acceptance suite: one test per criterion, tolerances pinned.

Run `pytest -v tests/test_acceptance.py` for the per-criterion verdict
lines.  Randomness is seeded; every expected value is either frozen from
an independent oracle or asserted against a closed-form bound.
"""

import math
import random
import time

import numpy as np
import pytest

from periodist import expr as ex
from periodist.corona import (
    CoronaWitness,
    certify_witness,
    check_corona_window,
    is_unit,
    solve_bezout,
    verify_bezout,
    witness_from_bezout,
)
from periodist.exp_type import poly_bezout_check, polynomial_reducer_search, standard_identity
from periodist.fourier import CoefficientMap, PeriodBasis, coeffs_from_samples, sample_grid, synthesize
from periodist.lattice import ball_iter, shell_count_bound
from periodist.sequences import (
    SlowSequence,
    combine,
    constant,
    coordinate,
    exp_decay_sequence,
    fast_exp_decay,
    from_values,
    indicator_expr,
    pairing,
    poly_envelope,
)
from periodist.stable_rank import clip_below, q_algebra_violation, reduce_pair, weak_star_gap

LOG2 = math.log(2.0)

# Window radii per dimension keep every family inside the R <= 50 budget
# while holding the point counts tractable in three dimensions.
RADII = {1: 50, 2: 20, 3: 10}


def dyadic(rng, lo=-16, hi=16):
    value = 0
    while value == 0:
        value = rng.randint(lo, hi)
    return value / 8.0


def power_of_two(rng):
    return 2.0 ** rng.randint(-3, 2)


def random_plain_member(rng, d):
    """An uncertified family member: any moderate-growth expression."""
    kind = rng.randrange(6)
    if kind == 0:
        return constant(complex(dyadic(rng), dyadic(rng)), d)
    if kind == 1:
        return coordinate(rng.randrange(d), d) * constant(dyadic(rng), d)
    if kind == 2:
        seq = coordinate(rng.randrange(d), d)
        return seq * seq + constant(dyadic(rng), d)
    if kind == 3:
        return SlowSequence.from_expr(ex.Norm1(), d) * constant(complex(0, dyadic(rng)), d)
    if kind == 4:
        base = coordinate(rng.randrange(d), d) + constant(complex(dyadic(rng), dyadic(rng)), d)
        return base.conjugate()
    return -poly_envelope(rng.randrange(3), d)


def random_certified_member(rng, d):
    """A member from the certified-floor whitelist; carries the witness."""
    kind = rng.randrange(5)
    if kind == 0:
        sign = rng.choice([1.0, -1.0, 1.0j])
        return constant(sign * power_of_two(rng), d)
    if kind == 1:
        return poly_envelope(rng.randint(0, 3), d)
    if kind == 2:
        return random_plain_member(rng, d).phase_factor()
    if kind == 3:
        return clip_below(random_plain_member(rng, d), power_of_two(rng))
    inner = clip_below(coordinate(rng.randrange(d), d), power_of_two(rng))
    return inner.reciprocal(1.0 / inner.cert.M, inner.cert.k)


def build_families(seed=20240817):
    rng = random.Random(seed)
    plan = [(1, 50), (2, 35), (3, 20)]
    families = []
    for d, count in plan:
        for i in range(count):
            size = 1 + i % 4
            members = [random_certified_member(rng, d)]
            members += [random_plain_member(rng, d) for _ in range(size - 1)]
            rng.shuffle(members)
            families.append((members, d, RADII[d]))
    return families


def solve_all(families):
    solved = []
    for members, d, radius in families:
        witness = certify_witness(members)
        assert witness is not None, "generator must emit a certified member"
        cofactors = solve_bezout(members, witness)
        solved.append((members, d, radius, witness, cofactors))
    return solved


def test_criterion_1_bezout_exactness():
    start = time.monotonic()
    families = build_families()
    assert len(families) >= 100
    solved = solve_all(families)
    worst = 0.0
    for members, _, radius, _, cofactors in solved:
        residual = verify_bezout(members, cofactors, radius)
        worst = max(worst, residual)
        assert residual <= 1e-12
    elapsed = time.monotonic() - start
    assert elapsed <= 10.0, f"took {elapsed:.2f}s"
    assert worst <= 1e-12


def test_criterion_2_witness_round_trip():
    for members, _, _, witness, cofactors in solve_all(build_families()):
        recovered = witness_from_bezout(cofactors)
        count = len(members)
        assert recovered.delta <= witness.delta * count * (1.0 + 1e-12)
        assert recovered.K >= witness.K
        check = check_corona_window(members, recovered.delta, recovered.K, 50)
        assert check.holds, f"floor lost at {check.first_violation}"


def unimodular_pairs(seed=97):
    """Manufactured pairs (a2 := 1 - b1 a1) plus solver-produced pairs."""
    rng = random.Random(seed)
    pairs = []
    for _ in range(60):
        a1 = coordinate(0) * constant(complex(dyadic(rng), dyadic(rng)) / 2.0, 1)
        a1 = a1 + constant(complex(dyadic(rng), dyadic(rng)), 1)
        b1 = constant(complex(dyadic(rng), dyadic(rng)) / 2.0, 1)
        a2 = constant(1.0, 1) + combine("neg", b1 * a1)
        b2 = constant(1.0, 1)
        pairs.append((a1, a2, b1, b2, 1, 50))
    for _ in range(40):
        d = rng.choice([1, 2])
        members = [random_certified_member(rng, d), random_plain_member(rng, d)]
        witness = certify_witness(members)
        cofactors = solve_bezout(members, witness)
        pairs.append((*members, *cofactors, d, RADII[d]))
    return pairs


def test_criterion_3_reduction_constants():
    pairs = unimodular_pairs()
    assert len(pairs) >= 100
    epsilons = [0.25, 0.125, 0.375]
    for i, (a1, a2, b1, b2, d, radius) in enumerate(pairs):
        eps = epsilons[i % len(epsilons)]
        trace = reduce_pair(a1, a2, b1, b2, epsilon=eps, radius=radius)
        drift = combine(
            "mul",
            combine("add", trace.clipped_cofactor, combine("neg", trace.scaled_cofactor)),
            trace.normalized_first,
        )
        perturbed = constant(1.0, d) + drift
        floor = float(np.abs(perturbed.window(radius)).min())
        assert floor >= 1.0 - 2.0 * eps
        if eps == 0.25:
            assert floor >= 0.5
        unit = is_unit(trace.result, trace.result_inverse_witness, radius=radius)
        assert unit.invertible, f"pair {i}: witness fails at {unit.first_violation}"
        recon = combine(
            "mul",
            trace.clipped_cofactor.reciprocal(eps, 0),
            trace.normalizer,
            perturbed,
        )
        residual = float(np.abs(trace.result.window(radius) - recon.window(radius)).max())
        assert residual <= 1e-10


def test_criterion_4_approximation_rate():
    b = fast_exp_decay(LOG2)
    a = coordinate(0)
    for eps in (1.0, 0.5, 0.25, 0.125):
        result = weak_star_gap(clip_below(a, eps), a, b, 50)
        assert result.gap == eps  # single moved term, at the origin
    rng = random.Random(404)
    for _ in range(30):
        seq = random_plain_member(rng, 1)
        eps = power_of_two(rng)
        result = weak_star_gap(clip_below(seq, eps), seq, b, 50)
        assert result.gap <= 2.0 * eps * b.abs_sum_bound()


def test_criterion_5_not_a_q_algebra():
    for delta in (1.0, 0.5, 0.1):
        for order in (0, 1, 2, 3, 5):
            hit = q_algebra_violation(1.0, delta, order, 40)
            assert hit is not None, f"no violation for delta={delta}, K={order}"
            norm = abs(hit[0])
            assert norm <= 40
            assert math.exp(-norm) < delta * (1.0 + norm) ** (-order)

    # pairing gap of exp(-eps|n|) against 1 shrinks linearly in eps:
    # |exp(-eps|n|) - 1| <= eps |n| turns the gap into eps times the
    # certified weighted modulus sum of the test data
    b = fast_exp_decay(LOG2)
    partial = sum(n * (1.0 + n) ** (-3) for n in range(1, 2001))
    cubic_weighted_sum = 2.0 * partial + 2.0 / 2001.0  # both signs, tail bound
    constant_from_seminorm = b.seminorm_bound(3) * cubic_weighted_sum
    one = constant(1.0, 1)
    for eps in (0.1, 0.01):
        gap = weak_star_gap(exp_decay_sequence(eps), one, b, 60).gap
        assert gap <= constant_from_seminorm * eps
        assert gap <= b.weighted_abs_sum_bound() * eps


def test_criterion_6_fourier_round_trip():
    rng = random.Random(66)
    np_rng = np.random.default_rng(66)
    cases = 0
    translation_checks = 0
    while cases < 50:
        d = 1 if cases < 25 else 2
        matrix = np.eye(d) + 0.25 * np_rng.uniform(-1.0, 1.0, size=(d, d))
        if np.linalg.cond(matrix) > 8.0:
            continue
        basis = PeriodBasis(matrix)
        stored = {}
        for _ in range(rng.randint(1, 7)):
            index = tuple(rng.randint(-3, 3) for _ in range(d))
            stored[index] = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
        coeffs = CoefficientMap.from_dict(stored, d)
        count = 8
        grid = sample_grid(basis, count).reshape(-1, d)
        samples = synthesize(basis, coeffs, grid).reshape((count,) * d)
        back = coeffs_from_samples(basis, samples)
        for index, value in stored.items():
            assert abs(back.coeffs[index] - value) <= 1e-12
        extras = [abs(v) for k, v in back.coeffs.items() if k not in stored]
        assert not extras or max(extras) <= 1e-12
        xs = np_rng.uniform(-1.5, 1.5, size=(2, d))
        base = synthesize(basis, coeffs, xs)
        for row in basis.matrix:
            shifted = synthesize(basis, coeffs, xs + row)
            assert np.abs(shifted - base).max() <= 1e-10
        translation_checks += len(xs)
        cases += 1
    assert translation_checks >= 100


def test_criterion_7_polynomial_identity_and_sweep():
    p, q, f, g = standard_identity()
    check = poly_bezout_check(p, q, f, g)
    assert check.exact
    assert check.max_residual == 0.0
    report = polynomial_reducer_search(3)
    assert report.units_found == 0
    assert report.all_nonconstant
    assert report.max_root_residual <= 1e-9


def finite_modification(rng):
    """A dyadic constant altered at a few points, as tree and as dict."""
    base = dyadic(rng)
    table = {}
    for _ in range(rng.randint(0, 3)):
        table[(rng.randint(-6, 6),)] = dyadic(rng)
    seq = constant(base, 1)
    for point, value in table.items():
        bump_tree = SlowSequence.from_expr(indicator_expr(point), 1)
        seq = seq + constant(value - base, 1) * bump_tree
    return seq, base, table


def test_criterion_8_brute_force_oracle_equivalence():
    rng = random.Random(1789)
    radius = 10
    window = list(ball_iter(1, radius))
    for case in range(1000):
        seq, base, table = finite_modification(rng)
        values = {point: table.get(point, base) for point in window}
        # the tree and the dictionary agree bit for bit on dyadics
        for point in window:
            assert seq.eval(point) == values[point]

        delta = 2.0 ** rng.randint(-3, 1)
        order = rng.randint(0, 2)
        check = check_corona_window([seq], delta, order, radius)
        brute_hit = None
        for point in window:
            floor = delta * (1.0 + abs(point[0])) ** (-order)
            if abs(values[point]) < floor:
                brute_hit = point
                break
        assert check.holds == (brute_hit is None)
        assert check.first_violation == brute_hit

        unit = is_unit(seq, CoronaWitness(delta, order), radius=radius)
        assert unit.invertible == (brute_hit is None)
        if unit.invertible:
            for point in window[:: 7]:
                inverse = unit.inverse.eval(point)
                assert abs(inverse - 1.0 / values[point]) <= 1e-12 * (
                    1.0 + abs(inverse)
                )

        test_data = {
            (rng.randint(-radius, radius),): dyadic(rng) for _ in range(rng.randint(1, 4))
        }
        fast = from_values(test_data, 1)
        expected = sum(values[p] * v for p, v in test_data.items())
        got = pairing(seq, fast, radius).value
        assert abs(got - expected) <= 1e-12


def test_criterion_9_shell_bound_oracle():
    for d in (1, 2, 3):
        top = 50
        axes = [np.arange(-top, top + 1)] * d
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)
        norms = np.abs(mesh).sum(axis=1)
        counts = np.bincount(norms, minlength=top + 1)
        for r in range(top + 1):
            assert counts[r] <= shell_count_bound(d, r)
