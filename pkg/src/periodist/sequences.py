"""Polynomial-growth and rapidly decreasing sequences on the integer lattice.

Two value types:

* ``SlowSequence``: an expression tree together with a growth certificate
  ``(M, k)`` claiming ``|a(n)| <= M * (1 + |n|_1)^k``.  Certificates
  compose syntactically (sum, product, clip, reciprocal, ...) and can be
  spot-checked exhaustively on any window.

* ``FastSequence``: an expression tree together with decay data strong
  enough to bound every weighted sup ``p_k(b) = sup (1+|n|_1)^k |b(n)|``:
  either a declared finite support radius, or an exponential envelope
  ``|b(n)| <= C * (1+|n|_1)^j * exp(-rate*|n|_1)``.

The pairing ``<a, b> = sum a(n) b(n)`` is evaluated by truncation over a
1-norm ball, and the discarded tail is bounded using the fast factor's
decay at order ``k + d + 1`` together with the shell-count bound
``2^d (1+r)^(d-1)``; the leftover geometric-type sum is dominated by
``1/(1+R)``.  All certified bounds are inflated by a tiny relative slack
so double rounding can never push them below the true value.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import expr as ex
from .errors import CertificateError, DimensionMismatch, InputError
from .lattice import LatticeIndex, ball

# Relative inflation applied to certified bounds.  Large enough to absorb
# accumulated double rounding in the series loops, small enough to be
# invisible next to every tolerance in use.
_SLACK = 1.0 + 1e-11

_CHUNK = 1 << 16


def _bump(x: float) -> float:
    return x * _SLACK


def _eval_points(node: ex.Node, points: np.ndarray, norms: np.ndarray, threads: int = 1) -> np.ndarray:
    """Evaluate a tree over a block of points, optionally in parallel.

    Chunking is identical for every thread count, so results are
    bit-for-bit reproducible regardless of the worker cap.
    """
    count = points.shape[0]
    slices = [slice(i, min(i + _CHUNK, count)) for i in range(0, count, _CHUNK)]
    if threads <= 1 or len(slices) == 1:
        parts = [ex.evaluate_grid(node, points[s], norms[s]) for s in slices]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda s: ex.evaluate_grid(node, points[s], norms[s]), slices))
    return parts[0] if len(parts) == 1 else np.concatenate(parts)


def window_values(node: ex.Node, dimension: int, radius: int, threads: int = 1) -> np.ndarray:
    """Values of a tree over the 1-norm ball, in canonical scan order."""
    points, norms = ball(dimension, radius)
    return _eval_points(node, points, norms, threads)


# ---------------------------------------------------------------------------
# Certified bounds for polynomial-times-exponential envelopes.
# ---------------------------------------------------------------------------


def poly_exp_sup(order: int, rate: float, start: float = 0.0) -> float:
    """Certified sup over real r >= start of (1+r)^order * exp(-rate*r)."""
    if not rate > 0:
        raise InputError("rate must be > 0")
    peak = order / rate - 1.0
    if peak <= start:
        value = (1.0 + start) ** order * math.exp(-rate * start)
    else:
        value = (order / rate) ** order * math.exp(rate - order)
    return _bump(value)


def poly_exp_series_bound(order: int, rate: float) -> float:
    """Certified upper bound for sum over r >= 0 of (1+r)^order * exp(-rate*r).

    Terms are summed until their ratio drops under a threshold strictly
    between exp(-rate) and 1, then the remainder is dominated by a
    geometric series at that threshold.
    """
    if not rate > 0:
        raise InputError("rate must be > 0")
    stop = (1.0 + math.exp(-rate)) / 2.0
    total = 0.0
    r = 0
    while True:
        term = (1.0 + r) ** order * math.exp(-rate * r)
        ratio = ((2.0 + r) / (1.0 + r)) ** order * math.exp(-rate)
        if ratio <= stop:
            total += term + term * ratio / (1.0 - ratio)
            return _bump(total)
        total += term
        r += 1
        if r > 1_000_000:
            raise InputError("series bound failed to converge")


# ---------------------------------------------------------------------------
# Growth certificates and slowly growing sequences.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GrowthCertificate:
    """Claim |a(n)| <= M * (1 + |n|_1)^k."""

    M: float
    k: int

    def __post_init__(self):
        if not self.M > 0:
            raise InputError("certificate constant M must be > 0")
        if self.k < 0:
            raise InputError("certificate order k must be >= 0")

    def bound_at(self, norms: np.ndarray) -> np.ndarray:
        return self.M * (1.0 + norms) ** self.k


@dataclass(frozen=True)
class CertificateCheck:
    holds: bool
    first_violation: LatticeIndex | None
    max_ratio: float


@dataclass(frozen=True)
class SlowSequence:
    """Expression tree plus growth certificate, over Z^dimension."""

    expr: ex.Node
    dimension: int
    cert: GrowthCertificate

    def __post_init__(self):
        if self.dimension < 1:
            raise InputError("dimension must be >= 1")
        if ex.max_axis(self.expr) >= self.dimension:
            raise DimensionMismatch(
                f"expression references axis {ex.max_axis(self.expr)} "
                f"but dimension is {self.dimension}"
            )

    # -- construction -------------------------------------------------

    @staticmethod
    def from_expr(tree: ex.Node, dimension: int) -> "SlowSequence":
        m, k = ex.composed_cert(tree)
        return SlowSequence(tree, dimension, GrowthCertificate(m, k))

    @staticmethod
    def with_claimed_cert(
        tree: ex.Node,
        dimension: int,
        cert: GrowthCertificate,
        check_radius: int = 8,
    ) -> "SlowSequence":
        """Attach a user-supplied certificate after an exhaustive window check."""
        seq = SlowSequence(tree, dimension, cert)
        check = seq.check_certificate(check_radius)
        if not check.holds:
            raise CertificateError(
                f"claimed certificate (M={cert.M}, k={cert.k}) fails at "
                f"lattice index {check.first_violation}"
            )
        return seq

    @staticmethod
    def from_json(obj, dimension: int, check_radius: int = 8) -> "SlowSequence":
        """Parse the wire format; claimed certificates are window-checked."""
        if not isinstance(obj, dict):
            raise InputError("slow sequence: expected an object")
        node, (m, k), claims = ex.parse_node(obj if "kind" in obj else obj.get("expr", {}))
        if isinstance(obj, dict) and "kind" not in obj and "cert" in obj:
            cert_obj = obj["cert"]
            claimed = GrowthCertificate(
                float(cert_obj.get("M", m)), int(cert_obj.get("k", k))
            )
            claims = claims + [(node, claimed.M, claimed.k, "expr")]
            m, k = claimed.M, claimed.k
        for sub, cm, ck, path in claims:
            sub_seq = SlowSequence(sub, dimension, GrowthCertificate(cm, ck))
            check = sub_seq.check_certificate(check_radius)
            if not check.holds:
                raise CertificateError(
                    f"{path}: claimed certificate (M={cm}, k={ck}) fails at "
                    f"lattice index {check.first_violation}"
                )
        return SlowSequence(node, dimension, GrowthCertificate(m, k))

    def to_json(self) -> dict:
        return {
            "expr": ex.to_json(self.expr),
            "cert": {"M": self.cert.M, "k": self.cert.k},
        }

    # -- evaluation ---------------------------------------------------

    def eval(self, index: LatticeIndex) -> complex:
        index = tuple(int(c) for c in index)
        if len(index) != self.dimension:
            raise DimensionMismatch(
                f"index has dimension {len(index)}, sequence has {self.dimension}"
            )
        return ex.evaluate(self.expr, index)

    def window(self, radius: int, threads: int = 1) -> np.ndarray:
        """Values over the 1-norm ball in canonical scan order."""
        return window_values(self.expr, self.dimension, radius, threads)

    def check_certificate(
        self, radius: int, rel_tol: float = 1e-12, threads: int = 1
    ) -> CertificateCheck:
        """Exhaustively check the certificate on the window of this radius."""
        points, norms = ball(self.dimension, radius)
        values = np.abs(_eval_points(self.expr, points, norms, threads))
        ratios = values / self.cert.bound_at(norms)
        max_ratio = float(ratios.max())
        bad = ratios > 1.0 + rel_tol
        if bad.any():
            where = int(np.argmax(bad))
            return CertificateCheck(False, tuple(int(c) for c in points[where]), max_ratio)
        return CertificateCheck(True, None, max_ratio)

    # -- pointwise algebra (certificates compose at the sequence level,
    #    so claimed certificates on the operands are respected) --------

    def __add__(self, other: "SlowSequence") -> "SlowSequence":
        return combine("add", self, other)

    def __mul__(self, other: "SlowSequence") -> "SlowSequence":
        return combine("mul", self, other)

    def __neg__(self) -> "SlowSequence":
        return combine("neg", self)

    def conjugate(self) -> "SlowSequence":
        return combine("conj", self)

    def modulus(self) -> "SlowSequence":
        return combine("abs", self)

    def phase_factor(self) -> "SlowSequence":
        return combine("phase", self)

    def argument(self) -> "SlowSequence":
        return SlowSequence(ex.Arg(self.expr), self.dimension, GrowthCertificate(math.pi, 0))

    def clip_below(self, eps: float) -> "SlowSequence":
        cert = GrowthCertificate(max(self.cert.M, eps), self.cert.k)
        return SlowSequence(ex.Clip(self.expr, eps), self.dimension, cert)

    def reciprocal(self, delta: float, K: int) -> "SlowSequence":
        """Reciprocal under the witness |a(n)| >= delta * (1+|n|_1)^(-K)."""
        cert = GrowthCertificate(1.0 / delta, K)
        return SlowSequence(ex.Recip(self.expr, delta, K), self.dimension, cert)


_COMBINE_OPS = ("add", "mul", "neg", "conj", "abs", "phase")


def combine(op: str, *seqs: SlowSequence) -> SlowSequence:
    """Pointwise combination with syntactic certificate composition.

    Rules: add -> (sum of M, max of k); mul -> (product of M, sum of k);
    neg / conj / abs keep (M, k); phase -> (1, 0).
    """
    if op not in _COMBINE_OPS:
        raise InputError(f"unknown combine op '{op}'")
    if not seqs:
        raise InputError("combine needs at least one sequence")
    dimension = seqs[0].dimension
    if any(s.dimension != dimension for s in seqs):
        raise DimensionMismatch("combine arguments must share a dimension")
    if op in ("neg", "conj", "abs", "phase"):
        if len(seqs) != 1:
            raise InputError(f"combine '{op}' takes exactly one sequence")
        (s,) = seqs
        node_cls = {"neg": ex.Neg, "conj": ex.Conj, "abs": ex.Abs, "phase": ex.Phase}[op]
        cert = GrowthCertificate(1.0, 0) if op == "phase" else s.cert
        return SlowSequence(node_cls(s.expr), dimension, cert)
    if len(seqs) < 2:
        raise InputError(f"combine '{op}' needs at least two sequences")
    exprs = tuple(s.expr for s in seqs)
    if op == "add":
        cert = GrowthCertificate(sum(s.cert.M for s in seqs), max(s.cert.k for s in seqs))
        return SlowSequence(ex.Add(exprs), dimension, cert)
    m = 1.0
    for s in seqs:
        m *= s.cert.M
    cert = GrowthCertificate(m, sum(s.cert.k for s in seqs))
    return SlowSequence(ex.Mul(exprs), dimension, cert)


# -- convenience constructors ----------------------------------------------


def constant(value: complex, dimension: int = 1) -> SlowSequence:
    value = complex(value)
    return SlowSequence.from_expr(ex.Const(value.real, value.imag), dimension)


def coordinate(axis: int, dimension: int | None = None) -> SlowSequence:
    if dimension is None:
        dimension = axis + 1
    return SlowSequence.from_expr(ex.Coord(axis), dimension)


def norm_sequence(dimension: int = 1) -> SlowSequence:
    return SlowSequence.from_expr(ex.Norm1(), dimension)


def poly_envelope(k: int, dimension: int = 1) -> SlowSequence:
    return SlowSequence.from_expr(ex.PolyEnv(k), dimension)


def exp_decay_sequence(rate: float, dimension: int = 1) -> SlowSequence:
    return SlowSequence.from_expr(ex.ExpDecay(rate), dimension)


# ---------------------------------------------------------------------------
# Rapidly decreasing sequences.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayBound:
    """Envelope |b(n)| <= C * (1+|n|_1)^j * exp(-rate * |n|_1)."""

    C: float
    j: int
    rate: float

    def __post_init__(self):
        if not self.C > 0:
            raise InputError("decay amplitude must be > 0")
        if self.j < 0:
            raise InputError("decay polynomial order must be >= 0")
        if not self.rate > 0:
            raise InputError("decay rate must be > 0")


@dataclass(frozen=True)
class FastSequence:
    """Expression tree with decay data bounding every seminorm p_k.

    At least one of ``decay`` (exponential envelope) or ``support``
    (declared finite support radius in the 1-norm) must be present.
    Declared support means the claim ``b(n) = 0 for |n|_1 > support``.
    """

    expr: ex.Node
    dimension: int
    decay: DecayBound | None = None
    support: int | None = None

    def __post_init__(self):
        if self.dimension < 1:
            raise InputError("dimension must be >= 1")
        if self.decay is None and self.support is None:
            raise InputError("a fast sequence needs a decay envelope or a declared support")
        if self.support is not None and self.support < 0:
            raise InputError("support radius must be >= 0")
        if ex.max_axis(self.expr) >= self.dimension:
            raise DimensionMismatch(
                f"expression references axis {ex.max_axis(self.expr)} "
                f"but dimension is {self.dimension}"
            )

    def eval(self, index: LatticeIndex) -> complex:
        index = tuple(int(c) for c in index)
        if len(index) != self.dimension:
            raise DimensionMismatch(
                f"index has dimension {len(index)}, sequence has {self.dimension}"
            )
        return ex.evaluate(self.expr, index)

    def window(self, radius: int, threads: int = 1) -> np.ndarray:
        return window_values(self.expr, self.dimension, radius, threads)

    def seminorm_bound(self, k: int) -> float:
        """Certified upper bound on p_k(b) = sup (1+|n|_1)^k |b(n)|."""
        if k < 0:
            raise InputError("seminorm order must be >= 0")
        best = math.inf
        if self.support is not None:
            points, norms = ball(self.dimension, self.support)
            values = np.abs(_eval_points(self.expr, points, norms))
            best = min(best, _bump(float(((1.0 + norms) ** k * values).max())))
        if self.decay is not None:
            best = min(best, _bump(self.decay.C * poly_exp_sup(k + self.decay.j, self.decay.rate)))
        return best

    def abs_sum_bound(self) -> float:
        """Certified upper bound on the full sum of |b(n)| over Z^d."""
        best = math.inf
        if self.support is not None:
            points, norms = ball(self.dimension, self.support)
            values = np.abs(_eval_points(self.expr, points, norms))
            best = min(best, _bump(float(values.sum())))
        if self.decay is not None:
            d, j = self.dimension, self.decay.j
            series = poly_exp_series_bound(d - 1 + j, self.decay.rate)
            best = min(best, _bump(self.decay.C * 2**d * series))
        return best

    def weighted_abs_sum_bound(self) -> float:
        """Certified upper bound on the sum of |n|_1 * |b(n)| over Z^d."""
        best = math.inf
        if self.support is not None:
            points, norms = ball(self.dimension, self.support)
            values = np.abs(_eval_points(self.expr, points, norms))
            best = min(best, _bump(float((norms * values).sum())))
        if self.decay is not None:
            d, j = self.dimension, self.decay.j
            # r * count(d, r) <= 2^d (1+r)^d, absorbing one envelope power.
            series = poly_exp_series_bound(d + j, self.decay.rate)
            best = min(best, _bump(self.decay.C * 2**d * series))
        return best

    def to_json(self) -> dict:
        out: dict = {"expr": ex.to_json(self.expr)}
        if self.decay is not None:
            out["decay"] = {"C": self.decay.C, "j": self.decay.j, "rate": self.decay.rate}
        if self.support is not None:
            out["support"] = self.support
        return out

    @staticmethod
    def from_json(obj, dimension: int) -> "FastSequence":
        if not isinstance(obj, dict):
            raise InputError("fast sequence: expected an object")
        node, _, _ = ex.parse_node(obj.get("expr", obj))
        decay = None
        if "decay" in obj:
            d = obj["decay"]
            decay = DecayBound(float(d["C"]), int(d["j"]), float(d["rate"]))
        support = int(obj["support"]) if "support" in obj else None
        return FastSequence(node, dimension, decay=decay, support=support)


def fast_exp_decay(rate: float, dimension: int = 1, amplitude: complex = 1.0) -> FastSequence:
    """The sequence amplitude * exp(-rate * |n|_1) with its exact envelope."""
    amplitude = complex(amplitude)
    tree: ex.Node = ex.ExpDecay(rate)
    if amplitude != 1.0:
        tree = ex.Mul((ex.Const(amplitude.real, amplitude.imag), tree))
    return FastSequence(tree, dimension, decay=DecayBound(abs(amplitude) or 1.0, 0, rate))


def _shifted_norm_expr(point: LatticeIndex) -> ex.Node:
    """Expression for |n - point|_1 built from coordinate shifts."""
    if all(c == 0 for c in point):
        return ex.Norm1()
    terms: list[ex.Node] = []
    for axis, c in enumerate(point):
        base: ex.Node = ex.Coord(axis)
        if c != 0:
            base = ex.Add((base, ex.Const(-float(c))))
        terms.append(ex.Abs(base))
    return terms[0] if len(terms) == 1 else ex.Add(tuple(terms))


def indicator_expr(point: LatticeIndex) -> ex.Node:
    """Expression equal to 1 at `point` and 0 elsewhere.

    Uses the clip primitive: |n - point|_1 minus its clipped-at-1/2 copy is
    -1/2 exactly at the point and 0 elsewhere; scaling by -2 normalises.
    """
    shifted = _shifted_norm_expr(point)
    return ex.Mul((ex.Const(-2.0), ex.Add((shifted, ex.Neg(ex.Clip(shifted, 0.5))))))


def indicator(point: LatticeIndex, dimension: int | None = None) -> FastSequence:
    point = tuple(int(c) for c in point)
    if dimension is None:
        dimension = len(point)
    if len(point) != dimension:
        raise DimensionMismatch("indicator point has the wrong dimension")
    return FastSequence(indicator_expr(point), dimension, support=sum(abs(c) for c in point))


def from_values(values: dict[LatticeIndex, complex], dimension: int) -> FastSequence:
    """Finitely supported sequence from an explicit index -> value map."""
    items = sorted(
        ((tuple(int(c) for c in k), complex(v)) for k, v in values.items()),
        key=lambda kv: (sum(abs(c) for c in kv[0]), kv[0]),
    )
    terms: list[ex.Node] = []
    radius = 0
    for point, value in items:
        if len(point) != dimension:
            raise DimensionMismatch("value map key has the wrong dimension")
        if value == 0:
            continue
        radius = max(radius, sum(abs(c) for c in point))
        terms.append(ex.Mul((ex.Const(value.real, value.imag), indicator_expr(point))))
    if not terms:
        return FastSequence(ex.Const(0.0), dimension, support=0)
    tree = terms[0] if len(terms) == 1 else ex.Add(tuple(terms))
    return FastSequence(tree, dimension, support=radius)


# ---------------------------------------------------------------------------
# Seminorms and the duality pairing.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeminormResult:
    sup_on_window: float
    certified_bound: float


def seminorm(b: FastSequence, k: int, radius: int, threads: int = 1) -> SeminormResult:
    """Weighted sup p_k(b) over the window, plus a certified global bound."""
    if k < 0:
        raise InputError("seminorm order must be >= 0")
    if radius < 0:
        raise InputError("radius must be >= 0")
    points, norms = ball(b.dimension, radius)
    values = np.abs(_eval_points(b.expr, points, norms, threads))
    sup = float(((1.0 + norms) ** k * values).max())
    if b.support is not None and b.support <= radius:
        outside = 0.0
    elif b.decay is not None:
        outside = _bump(
            b.decay.C * poly_exp_sup(k + b.decay.j, b.decay.rate, start=float(radius))
        )
    else:
        outside = b.seminorm_bound(k)
    return SeminormResult(sup, max(_bump(sup), outside))


@dataclass(frozen=True)
class PairingResult:
    value: complex
    radius: int
    tail_bound: float


def pairing(a: SlowSequence, b: FastSequence, radius: int, threads: int = 1) -> PairingResult:
    """Truncated duality pairing sum over |n|_1 <= radius with a tail bound.

    The tail over |n|_1 > radius is bounded by
    M * p-bound(k + d + 1) * 2^d / (1 + radius), combining the growth
    certificate of ``a``, the decay of ``b`` at order k + d + 1, and the
    shell-count bound.  A declared support inside the window makes it 0.
    """
    if a.dimension != b.dimension:
        raise DimensionMismatch("pairing arguments must share a dimension")
    if radius < 0:
        raise InputError("radius must be >= 0")
    points, norms = ball(a.dimension, radius)
    left = _eval_points(a.expr, points, norms, threads)
    right = _eval_points(b.expr, points, norms, threads)
    value = complex(np.sum(left * right))
    if b.support is not None and b.support <= radius:
        tail = 0.0
    else:
        d = a.dimension
        heavy = b.seminorm_bound(a.cert.k + d + 1)
        tail = _bump(a.cert.M * heavy * 2**d / (1.0 + radius))
    return PairingResult(value, radius, tail)
