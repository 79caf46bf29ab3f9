"""Corona-type lower bounds and explicit Bezout solving.

A family a_1, ..., a_N of slowly growing sequences admits cofactors with
sum b_i * a_i = 1 exactly when the combined modulus stays above a
polynomially decaying floor:

    |a_1(n)| + ... + |a_N(n)| >= delta * (1 + |n|_1)^(-K).

The witness (delta, K) is either verified exhaustively on a window or
certified syntactically from invertible leaf forms (nonzero constants,
polynomial envelopes, clipped values, reciprocals of certified-growth
trees, and nonnegative sums containing one of these).

The solver writes down the cofactors in closed form:

    b_i(n) = exp(-i * Arg(a_i(n))) / (|a_1(n)| + ... + |a_N(n)|),

each carrying the growth certificate (1/delta, K).  Conversely, bounded
cofactors for a Bezout identity yield a witness with delta = 1 / max M_i
and K = max k_i.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .errors import DimensionMismatch, InputError, MathFailure
from .lattice import LatticeIndex, ball
from .sequences import GrowthCertificate, SlowSequence, _eval_points, combine

# Witness provenance labels.
WINDOW_VERIFIED = "window-verified"
CERTIFIED = "certified"


@dataclass(frozen=True)
class CoronaWitness:
    """Floor claim sum |a_i(n)| >= delta * (1 + |n|_1)^(-K)."""

    delta: float
    K: int
    status: str = WINDOW_VERIFIED
    radius: int = 0

    def __post_init__(self):
        if not self.delta > 0:
            raise InputError("witness delta must be > 0")
        if self.K < 0:
            raise InputError("witness order K must be >= 0")
        if self.status not in (WINDOW_VERIFIED, CERTIFIED):
            raise InputError(f"unknown witness status '{self.status}'")

    def floor_at(self, norms: np.ndarray) -> np.ndarray:
        return self.delta * (1.0 + norms) ** (-float(self.K))


@dataclass(frozen=True)
class WindowCheck:
    holds: bool
    first_violation: LatticeIndex | None


def _family_dimension(family: list[SlowSequence]) -> int:
    if not family:
        raise InputError("family must be non-empty")
    dimension = family[0].dimension
    if any(s.dimension != dimension for s in family):
        raise DimensionMismatch("family members must share a dimension")
    return dimension


def combined_modulus(family: list[SlowSequence], radius: int, threads: int = 1) -> np.ndarray:
    """sum_i |a_i(n)| over the window, in canonical scan order."""
    dimension = _family_dimension(family)
    points, norms = ball(dimension, radius)
    total = np.zeros(points.shape[0])
    for member in family:
        total += np.abs(_eval_points(member.expr, points, norms, threads))
    return total


def check_corona_window(
    family: list[SlowSequence],
    delta: float,
    K: int,
    radius: int,
    threads: int = 1,
) -> WindowCheck:
    """Exhaustively test the corona floor on the 1-norm ball.

    The comparison is exact double comparison; the first violation (in
    canonical scan order) is reported when the floor fails.
    """
    witness = CoronaWitness(delta, K)
    dimension = _family_dimension(family)
    points, norms = ball(dimension, radius)
    total = np.zeros(points.shape[0])
    for member in family:
        total += np.abs(_eval_points(member.expr, points, norms, threads))
    bad = total < witness.floor_at(norms)
    if bad.any():
        where = int(np.argmax(bad))
        return WindowCheck(False, tuple(int(c) for c in points[where]))
    return WindowCheck(True, None)


def certify_witness(family: list[SlowSequence]) -> CoronaWitness | None:
    """Syntactic witness from the recognised invertible forms, if any.

    The combined modulus dominates each member's modulus, so a certified
    pointwise lower bound for any single member certifies the family.
    Among the certified members the flattest floor (smallest K, then
    largest delta) is returned.
    """
    _family_dimension(family)
    best: tuple[float, int] | None = None
    for member in family:
        bound = ex.lower_bound_cert(member.expr)
        if bound is None:
            continue
        if best is None or (bound[1], -bound[0]) < (best[1], -best[0]):
            best = bound
    if best is None:
        return None
    return CoronaWitness(best[0], best[1], status=CERTIFIED)


def solve_bezout(
    family: list[SlowSequence],
    witness: CoronaWitness,
    verify_radius: int | None = None,
    threads: int = 1,
) -> list[SlowSequence]:
    """Closed-form cofactors b_i with sum b_i * a_i = 1.

    Each cofactor is phase(a_i) divided by the combined modulus, carried
    as an expression tree whose reciprocal node records the witness; the
    composed growth certificate of every cofactor is (1/delta, K).  With
    ``verify_radius`` set, the witness is first checked on that window and
    a violation raises MathFailure.
    """
    dimension = _family_dimension(family)
    if verify_radius is not None:
        check = check_corona_window(
            family, witness.delta, witness.K, verify_radius, threads
        )
        if not check.holds:
            raise MathFailure(
                f"corona floor (delta={witness.delta}, K={witness.K}) fails at "
                f"lattice index {check.first_violation}"
            )
    moduli = [combine("abs", member) for member in family]
    total = moduli[0] if len(moduli) == 1 else combine("add", *moduli)
    denominator = total.reciprocal(witness.delta, witness.K)
    return [combine("mul", combine("phase", member), denominator) for member in family]


def verify_bezout(
    family: list[SlowSequence],
    cofactors: list[SlowSequence],
    radius: int,
    threads: int = 1,
) -> float:
    """Max residual |sum b_i(n) a_i(n) - 1| over the window."""
    if len(family) != len(cofactors):
        raise InputError("family and cofactors must have matching lengths")
    dimension = _family_dimension(list(family) + list(cofactors))
    points, norms = ball(dimension, radius)
    total = np.zeros(points.shape[0], dtype=np.complex128)
    for member, cofactor in zip(family, cofactors):
        total += _eval_points(member.expr, points, norms, threads) * _eval_points(
            cofactor.expr, points, norms, threads
        )
    return float(np.abs(total - 1.0).max())


def witness_from_bezout(cofactors: list[SlowSequence]) -> CoronaWitness:
    """Witness extracted from cofactor growth certificates.

    If sum b_i a_i = 1 with |b_i(n)| <= M_i (1+|n|_1)^(k_i), then the
    combined modulus of the family is at least 1 / (max M_i) times
    (1+|n|_1)^(-max k_i).  Status is window-verified with radius 0; the
    caller re-verifies on whatever window it cares about.
    """
    if not cofactors:
        raise InputError("cofactor list must be non-empty")
    top = max(c.cert.M for c in cofactors)
    order = max(c.cert.k for c in cofactors)
    return CoronaWitness(1.0 / top, order, status=WINDOW_VERIFIED, radius=0)


@dataclass(frozen=True)
class UnitCheck:
    invertible: bool
    inverse: SlowSequence | None
    first_violation: LatticeIndex | None = None


def is_unit(
    a: SlowSequence,
    witness: CoronaWitness,
    radius: int = 50,
    threads: int = 1,
) -> UnitCheck:
    """Invertibility of a single sequence under a witness.

    The witness is checked exhaustively on the window; on success the
    explicit inverse phase(a) / |a| is returned with growth certificate
    (1/delta, K).  On failure no inverse is produced.
    """
    check = check_corona_window([a], witness.delta, witness.K, radius, threads)
    if not check.holds:
        return UnitCheck(False, None, check.first_violation)
    inverse = combine("mul", combine("phase", a), combine("abs", a).reciprocal(witness.delta, witness.K))
    return UnitCheck(True, inverse, None)
