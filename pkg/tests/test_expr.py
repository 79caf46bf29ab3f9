"""Expression-tree nodes: evaluation, conventions, certificates, wire format."""

import cmath
import random

import numpy as np
import pytest

from periodist import expr as ex
from periodist.errors import CertificateError, InputError, WitnessViolation
from periodist.lattice import ball
from periodist.sequences import SlowSequence


def ev(node, index):
    return ex.evaluate(node, index)


# -- pointwise semantics ------------------------------------------------


def test_const_and_coord():
    assert ev(ex.Const(2.0, -1.0), (5,)) == 2.0 - 1.0j
    assert ev(ex.Coord(0), (-7,)) == -7.0
    assert ev(ex.Coord(1), (3, 4)) == 4.0


def test_norm_and_envelopes():
    assert ev(ex.Norm1(), (-2, 3)) == 5.0
    assert ev(ex.PolyEnv(2), (-2, 3)) == 36.0
    assert ev(ex.ExpDecay(1.0), (0,)) == 1.0
    assert ev(ex.ExpDecay(0.6931471805599453), (3,)) == pytest.approx(0.125)


def test_add_mul_neg_conj():
    n = ex.Add((ex.Coord(0), ex.Const(1.0, 0.0)))
    assert ev(n, (4,)) == 5.0
    m = ex.Mul((ex.Coord(0), ex.Coord(0)))
    assert ev(m, (-3,)) == 9.0
    assert ev(ex.Neg(ex.Coord(0)), (2,)) == -2.0
    assert ev(ex.Conj(ex.Const(1.0, 2.0)), (0,)) == 1.0 - 2.0j


def test_abs_arg_phase_conventions():
    assert ev(ex.Abs(ex.Const(-3.0, 4.0)), (0,)) == 5.0
    # principal argument lands in (-pi, pi]; zero maps to zero
    assert ev(ex.Arg(ex.Const(-3.0, 0.0)), (0,)) == cmath.pi
    assert ev(ex.Arg(ex.Const(0.0, 0.0)), (0,)) == 0.0
    assert ev(ex.Arg(ex.Const(0.0, -1.0)), (0,)) == -cmath.pi / 2
    # the phase factor is exp(-i arg): modulus one, and 1 at the origin value
    p = ev(ex.Phase(ex.Const(-3.0, 0.0)), (0,))
    assert abs(p) == pytest.approx(1.0, abs=1e-15)
    assert ev(ex.Phase(ex.Const(0.0, 0.0)), (0,)) == 1.0


def test_negative_real_with_signed_zero_imag():
    # complex(-3, -0.0) must still report +pi, not -pi
    assert ev(ex.Arg(ex.Const(-3.0, -0.0)), (0,)) == cmath.pi


def test_clip_replaces_strictly_below_level():
    clip = ex.Clip(ex.Coord(0), 1.0)
    assert ev(clip, (0,)) == 1.0          # |0| < 1: replaced
    assert ev(clip, (1,)) == 1.0          # |1| >= 1: kept
    assert ev(clip, (-1,)) == -1.0        # boundary values are kept
    assert ev(clip, (5,)) == 5.0
    half = ex.Clip(ex.Const(0.25, 0.0), 0.5)
    assert ev(half, (0,)) == 0.5


def test_recip_and_zero_guard():
    r = ex.Recip(ex.Const(4.0, 0.0), 0.25, 0)
    assert ev(r, (0,)) == 0.25
    bad = ex.Recip(ex.Coord(0), 1.0, 0)
    with pytest.raises(WitnessViolation) as info:
        ev(bad, (0,))
    assert info.value.index == (0,)


def test_grid_matches_scalar_on_random_trees():
    # vectorised and pointwise evaluation may differ by an ulp in the
    # trig kernels (numpy vs cmath), nothing more
    rng = random.Random(401)
    points, norms = ball(2, 6)
    for _ in range(30):
        node = random_tree(rng, dimension=2, depth=3)
        grid = ex.evaluate_grid(node, points, norms)
        for row, value in zip(points, grid):
            scalar = ev(node, tuple(int(c) for c in row))
            assert abs(complex(value) - scalar) <= 1e-14 * max(1.0, abs(scalar))


def random_tree(rng, dimension, depth):
    if depth == 0:
        leaf = rng.randrange(4)
        if leaf == 0:
            return ex.Const(rng.randint(-4, 4) / 2.0, rng.randint(-4, 4) / 2.0)
        if leaf == 1:
            return ex.Coord(rng.randrange(dimension))
        if leaf == 2:
            return ex.Norm1()
        return ex.PolyEnv(rng.randrange(3))
    inner = rng.randrange(6)
    if inner == 0:
        return ex.Add(tuple(random_tree(rng, dimension, depth - 1) for _ in range(2)))
    if inner == 1:
        return ex.Mul(tuple(random_tree(rng, dimension, depth - 1) for _ in range(2)))
    if inner == 2:
        return ex.Neg(random_tree(rng, dimension, depth - 1))
    if inner == 3:
        return ex.Abs(random_tree(rng, dimension, depth - 1))
    if inner == 4:
        return ex.Phase(random_tree(rng, dimension, depth - 1))
    return ex.Clip(random_tree(rng, dimension, depth - 1), 0.5)


# -- growth certificates ------------------------------------------------


def test_cert_composition_table():
    one = ex.Const(1.0, 0.0)
    assert ex.composed_cert(ex.Add((one, one))) == (2.0, 0)
    assert ex.composed_cert(ex.Coord(0)) == (1.0, 1)
    assert ex.composed_cert(ex.Norm1()) == (1.0, 1)
    assert ex.composed_cert(ex.PolyEnv(3)) == (1.0, 3)
    assert ex.composed_cert(ex.ExpDecay(2.0)) == (1.0, 0)
    assert ex.composed_cert(ex.Mul((ex.Coord(0), ex.Coord(0)))) == (1.0, 2)
    coord = ex.Coord(0)
    assert ex.composed_cert(ex.Neg(coord)) == (1.0, 1)
    assert ex.composed_cert(ex.Conj(coord)) == (1.0, 1)
    assert ex.composed_cert(ex.Abs(coord)) == (1.0, 1)
    assert ex.composed_cert(ex.Phase(coord)) == (1.0, 0)
    assert ex.composed_cert(ex.Arg(coord)) == (cmath.pi, 0)
    assert ex.composed_cert(ex.Clip(coord, 0.5)) == (1.0, 1)
    assert ex.composed_cert(ex.Clip(ex.Const(0.0, 0.0), 2.0)) == (2.0, 0)
    assert ex.composed_cert(ex.Recip(ex.PolyEnv(1), 0.5, 2)) == (2.0, 2)


def test_cert_is_sound_on_random_trees():
    rng = random.Random(402)
    points, norms = ball(1, 40)
    for _ in range(40):
        node = random_tree(rng, dimension=1, depth=3)
        m, k = ex.composed_cert(node)
        values = np.abs(ex.evaluate_grid(node, points, norms))
        assert (values <= m * (1.0 + norms) ** k * (1.0 + 1e-12)).all()


def test_nonneg_and_lower_bound_whitelist():
    assert ex.is_nonneg_real(ex.Const(2.0, 0.0))
    assert not ex.is_nonneg_real(ex.Const(-1.0, 0.0))
    assert ex.is_nonneg_real(ex.Abs(ex.Coord(0)))
    assert ex.is_nonneg_real(ex.Add((ex.PolyEnv(1), ex.Abs(ex.Coord(0)))))
    assert not ex.is_nonneg_real(ex.Coord(0))

    assert ex.lower_bound_cert(ex.Const(0.5, 0.0)) == (0.5, 0)
    assert ex.lower_bound_cert(ex.Const(0.0, 0.0)) is None
    assert ex.lower_bound_cert(ex.PolyEnv(2)) == (1.0, 0)
    assert ex.lower_bound_cert(ex.Phase(ex.Coord(0))) == (1.0, 0)
    assert ex.lower_bound_cert(ex.Clip(ex.Coord(0), 0.25)) == (0.25, 0)
    assert ex.lower_bound_cert(ex.Coord(0)) is None
    # reciprocal of a bounded-growth tree: floor 1/M at order k
    assert ex.lower_bound_cert(ex.Recip(ex.PolyEnv(1), 0.9, 1)) == (1.0, 1)
    # sums of nonnegative terms inherit the best member floor
    floor = ex.lower_bound_cert(ex.Add((ex.PolyEnv(1), ex.Abs(ex.Coord(0)))))
    assert floor == (1.0, 0)


# -- wire format --------------------------------------------------------

ALL_KINDS = [
    ex.Const(1.5, -0.5),
    ex.Coord(1),
    ex.Norm1(),
    ex.PolyEnv(2),
    ex.ExpDecay(0.75),
    ex.Add((ex.Coord(0), ex.Const(1.0, 0.0))),
    ex.Mul((ex.Coord(0), ex.Norm1())),
    ex.Neg(ex.Coord(0)),
    ex.Conj(ex.Const(0.0, 1.0)),
    ex.Abs(ex.Coord(1)),
    ex.Arg(ex.Const(-1.0, 0.0)),
    ex.Phase(ex.Coord(0)),
    ex.Clip(ex.Coord(0), 0.5),
    ex.Recip(ex.PolyEnv(1), 1.0, 1),
]


@pytest.mark.parametrize("node", ALL_KINDS, ids=lambda n: type(n).__name__)
def test_json_round_trip(node):
    wire = ex.to_json(node)
    back, cert, claims = ex.parse_node(wire)
    assert back == node
    assert ex.to_json(back) == wire
    assert cert == ex.composed_cert(node)


def test_parse_reports_field_paths():
    with pytest.raises(InputError) as info:
        ex.parse_node({"kind": "coord"})
    assert "axis" in str(info.value)
    with pytest.raises(InputError) as info:
        ex.parse_node({"kind": "add", "args": [{"kind": "coord", "axis": 0}, 7]})
    assert "args[1]" in str(info.value)
    with pytest.raises(InputError):
        ex.parse_node({"kind": "wibble"})
    with pytest.raises(InputError):
        ex.parse_node({"kind": "clip", "arg": {"kind": "norm1"}, "eps": -1.0})


def test_claimed_certificates_are_collected_and_checked():
    wire = {
        "kind": "add",
        "args": [
            {"kind": "coord", "axis": 0, "cert": {"M": 1.0, "k": 1}},
            {"kind": "const", "re": 1.0, "im": 0.0},
        ],
    }
    node, cert, claims = ex.parse_node(wire)
    assert len(claims) == 1
    # a false claim is rejected when the sequence is built from the wire form
    bad = {"expr": {"kind": "norm1"}, "cert": {"M": 1.0, "k": 0}}
    with pytest.raises(CertificateError):
        SlowSequence.from_json(bad, 1)


def test_nodes_are_immutable():
    node = ex.Const(1.0, 0.0)
    with pytest.raises(Exception):
        node.re = 2.0


def test_max_axis():
    assert ex.max_axis(ex.Coord(3)) == 3
    assert ex.max_axis(ex.Add((ex.Coord(0), ex.Coord(2)))) == 2
    assert ex.max_axis(ex.Norm1()) == -1
