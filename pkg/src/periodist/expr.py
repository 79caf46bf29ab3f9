"""Closed-form expression trees over integer lattice indices.

A tree denotes a complex-valued function of a lattice index ``n`` in
``Z^d``.  Nodes are immutable; building a combination never mutates its
inputs, and no symbolic simplification is attempted.  The node kinds are

    Const(re, im)        the constant re + i*im
    Coord(axis)          the coordinate n[axis]
    Norm1()              the 1-norm of n
    PolyEnv(k)           the polynomial envelope (1 + |n|_1)^k
    ExpDecay(rate)       exp(-rate * |n|_1), rate > 0
    Add(args) Mul(args)  pointwise sum / product, n-ary
    Neg(a) Conj(a)       pointwise negation / complex conjugate
    Abs(a)               pointwise modulus
    Arg(a)               principal argument in (-pi, pi], with Arg(0) = 0
    Phase(a)             exp(-i * Arg(a(n))); multiplying by the original
                         value recovers its modulus
    Clip(a, eps)         a(n) where |a(n)| >= eps, else the real value eps
    Recip(a, delta, K)   1 / a(n), carrying the claim
                         |a(n)| >= delta * (1 + |n|_1)^(-K)

Every tree composes a growth certificate (M, k) claiming
``|value(n)| <= M * (1 + |n|_1)^k``.  Certificates are syntactic claims:
they are exact in real arithmetic and are additionally spot-checked on
finite windows by the callers that rely on them.

Evaluation comes in two flavours with identical semantics: ``evaluate``
for a single index and ``evaluate_grid`` for a block of indices held in a
numpy array.  The grid path is what window scans use.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InputError, WitnessViolation
from .lattice import LatticeIndex


def principal_arg(z: complex) -> float:
    """Principal argument in (-pi, pi], with the convention Arg(0) = 0.

    A negative-zero imaginary part would flip the branch cut for negative
    reals, so real values are normalised to +0.0 imaginary first.
    """
    if z == 0:
        return 0.0
    if z.imag == 0:
        z = complex(z.real, 0.0)
    return cmath.phase(z)


def _principal_arg_grid(values: np.ndarray) -> np.ndarray:
    cleaned = np.where(values.imag == 0, values.real + 0.0j, values)
    out = np.angle(cleaned)
    return np.where(values == 0, 0.0, out)


class Node:
    """Base class for expression-tree nodes."""

    __slots__ = ()

    def children(self) -> tuple["Node", ...]:
        return ()

    # Subclasses implement _eval / _eval_grid / _cert_from.

    def _cert_from(self, child_certs: list[tuple[float, int]]) -> tuple[float, int]:
        raise NotImplementedError

    def _eval(self, index: LatticeIndex, radius: int) -> complex:
        raise NotImplementedError

    def _eval_grid(self, points: np.ndarray, norms: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass(frozen=True)
class Const(Node):
    re: float
    im: float = 0.0

    @property
    def value(self) -> complex:
        return complex(self.re, self.im)

    def _cert_from(self, child_certs):
        mag = abs(self.value)
        # The zero constant still needs a positive bound constant.
        return (mag if mag > 0 else 1.0, 0)

    def _eval(self, index, radius):
        return self.value

    def _eval_grid(self, points, norms):
        return np.full(points.shape[0], self.value, dtype=np.complex128)


@dataclass(frozen=True)
class Coord(Node):
    axis: int

    def __post_init__(self):
        if self.axis < 0:
            raise InputError("coordinate axis must be >= 0")

    def _cert_from(self, child_certs):
        return (1.0, 1)

    def _eval(self, index, radius):
        if self.axis >= len(index):
            raise DimensionMismatch(
                f"coordinate axis {self.axis} out of range for dimension {len(index)}"
            )
        return complex(index[self.axis])

    def _eval_grid(self, points, norms):
        if self.axis >= points.shape[1]:
            raise DimensionMismatch(
                f"coordinate axis {self.axis} out of range for dimension {points.shape[1]}"
            )
        return points[:, self.axis].astype(np.complex128)


@dataclass(frozen=True)
class Norm1(Node):
    def _cert_from(self, child_certs):
        return (1.0, 1)

    def _eval(self, index, radius):
        return complex(radius)

    def _eval_grid(self, points, norms):
        return norms.astype(np.complex128)


@dataclass(frozen=True)
class PolyEnv(Node):
    k: int

    def __post_init__(self):
        if self.k < 0:
            raise InputError("polynomial envelope order must be >= 0")

    def _cert_from(self, child_certs):
        return (1.0, self.k)

    def _eval(self, index, radius):
        return complex((1 + radius) ** self.k)

    def _eval_grid(self, points, norms):
        return ((1.0 + norms) ** self.k).astype(np.complex128)


@dataclass(frozen=True)
class ExpDecay(Node):
    rate: float

    def __post_init__(self):
        if not self.rate > 0:
            raise InputError("decay rate must be > 0")

    def _cert_from(self, child_certs):
        return (1.0, 0)

    def _eval(self, index, radius):
        return complex(math.exp(-self.rate * radius))

    def _eval_grid(self, points, norms):
        return np.exp(-self.rate * norms).astype(np.complex128)


@dataclass(frozen=True)
class Add(Node):
    args: tuple[Node, ...]

    def __post_init__(self):
        if len(self.args) < 1:
            raise InputError("sum needs at least one argument")

    def children(self):
        return self.args

    def _cert_from(self, child_certs):
        return (sum(m for m, _ in child_certs), max(k for _, k in child_certs))

    def _eval(self, index, radius):
        return sum((a._eval(index, radius) for a in self.args), complex(0))

    def _eval_grid(self, points, norms):
        out = self.args[0]._eval_grid(points, norms).copy()
        for a in self.args[1:]:
            out += a._eval_grid(points, norms)
        return out


@dataclass(frozen=True)
class Mul(Node):
    args: tuple[Node, ...]

    def __post_init__(self):
        if len(self.args) < 1:
            raise InputError("product needs at least one argument")

    def children(self):
        return self.args

    def _cert_from(self, child_certs):
        m = 1.0
        for c, _ in child_certs:
            m *= c
        return (m, sum(k for _, k in child_certs))

    def _eval(self, index, radius):
        out = complex(1)
        for a in self.args:
            out *= a._eval(index, radius)
        return out

    def _eval_grid(self, points, norms):
        out = self.args[0]._eval_grid(points, norms).copy()
        for a in self.args[1:]:
            out *= a._eval_grid(points, norms)
        return out


@dataclass(frozen=True)
class Neg(Node):
    arg: Node

    def children(self):
        return (self.arg,)

    def _cert_from(self, child_certs):
        return child_certs[0]

    def _eval(self, index, radius):
        return -self.arg._eval(index, radius)

    def _eval_grid(self, points, norms):
        return -self.arg._eval_grid(points, norms)


@dataclass(frozen=True)
class Conj(Node):
    arg: Node

    def children(self):
        return (self.arg,)

    def _cert_from(self, child_certs):
        return child_certs[0]

    def _eval(self, index, radius):
        return self.arg._eval(index, radius).conjugate()

    def _eval_grid(self, points, norms):
        return np.conj(self.arg._eval_grid(points, norms))


@dataclass(frozen=True)
class Abs(Node):
    arg: Node

    def children(self):
        return (self.arg,)

    def _cert_from(self, child_certs):
        return child_certs[0]

    def _eval(self, index, radius):
        return complex(abs(self.arg._eval(index, radius)))

    def _eval_grid(self, points, norms):
        return np.abs(self.arg._eval_grid(points, norms)).astype(np.complex128)


@dataclass(frozen=True)
class Arg(Node):
    arg: Node

    def children(self):
        return (self.arg,)

    def _cert_from(self, child_certs):
        return (math.pi, 0)

    def _eval(self, index, radius):
        return complex(principal_arg(self.arg._eval(index, radius)))

    def _eval_grid(self, points, norms):
        return _principal_arg_grid(self.arg._eval_grid(points, norms)).astype(np.complex128)


@dataclass(frozen=True)
class Phase(Node):
    arg: Node

    def children(self):
        return (self.arg,)

    def _cert_from(self, child_certs):
        return (1.0, 0)

    def _eval(self, index, radius):
        return cmath.exp(-1j * principal_arg(self.arg._eval(index, radius)))

    def _eval_grid(self, points, norms):
        return np.exp(-1j * _principal_arg_grid(self.arg._eval_grid(points, norms)))


@dataclass(frozen=True)
class Clip(Node):
    arg: Node
    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise InputError("clip level must be > 0")

    def children(self):
        return (self.arg,)

    def _cert_from(self, child_certs):
        m, k = child_certs[0]
        return (max(m, self.eps), k)

    def _eval(self, index, radius):
        v = self.arg._eval(index, radius)
        return v if abs(v) >= self.eps else complex(self.eps)

    def _eval_grid(self, points, norms):
        v = self.arg._eval_grid(points, norms)
        return np.where(np.abs(v) >= self.eps, v, complex(self.eps))


@dataclass(frozen=True)
class Recip(Node):
    """Pointwise reciprocal, annotated with a lower-bound witness.

    The witness claims |arg(n)| >= delta * (1 + |n|_1)^(-K), which makes
    (1/delta, K) a growth certificate for the reciprocal.  Evaluating at a
    point where the argument vanishes raises WitnessViolation.
    """

    arg: Node
    delta: float
    K: int

    def __post_init__(self):
        if not self.delta > 0:
            raise InputError("inverse witness delta must be > 0")
        if self.K < 0:
            raise InputError("inverse witness order must be >= 0")

    def children(self):
        return (self.arg,)

    def _cert_from(self, child_certs):
        return (1.0 / self.delta, self.K)

    def _eval(self, index, radius):
        v = self.arg._eval(index, radius)
        if v == 0:
            raise WitnessViolation(tuple(index))
        return 1.0 / v

    def _eval_grid(self, points, norms):
        v = self.arg._eval_grid(points, norms)
        zero = v == 0
        if zero.any():
            where = int(np.argmax(zero))
            raise WitnessViolation(tuple(int(c) for c in points[where]))
        return 1.0 / v


def evaluate(node: Node, index: LatticeIndex) -> complex:
    """Evaluate a tree at one lattice index.  Pure and deterministic."""
    index = tuple(int(c) for c in index)
    radius = sum(abs(c) for c in index)
    return node._eval(index, radius)


def evaluate_grid(node: Node, points: np.ndarray, norms: np.ndarray | None = None) -> np.ndarray:
    """Evaluate a tree on a block of lattice points (shape count x dimension)."""
    if norms is None:
        norms = np.abs(points).sum(axis=1)
    return node._eval_grid(points, norms)


def composed_cert(node: Node) -> tuple[float, int]:
    """Growth certificate (M, k) composed syntactically from the leaves."""
    child_certs = [composed_cert(c) for c in node.children()]
    return node._cert_from(child_certs)


def max_axis(node: Node) -> int:
    """Largest coordinate axis referenced anywhere in the tree, or -1."""
    best = node.axis if isinstance(node, Coord) else -1
    for c in node.children():
        best = max(best, max_axis(c))
    return best


# ---------------------------------------------------------------------------
# Certified structural facts: nonnegativity and pointwise lower bounds.
# ---------------------------------------------------------------------------


def is_nonneg_real(node: Node) -> bool:
    """True when the tree provably takes values in [0, inf) at every index.

    Conservative: False only means "not established syntactically".
    """
    if isinstance(node, Const):
        return node.im == 0 and node.re >= 0
    if isinstance(node, (Norm1, PolyEnv, ExpDecay, Abs)):
        return True
    if isinstance(node, (Add, Mul)):
        return all(is_nonneg_real(a) for a in node.args)
    if isinstance(node, Conj):
        return is_nonneg_real(node.arg)
    if isinstance(node, Clip):
        return is_nonneg_real(node.arg)
    if isinstance(node, Recip):
        return is_nonneg_real(node.arg)
    return False


def lower_bound_cert(node: Node) -> tuple[float, int] | None:
    """Certified pointwise lower bound |value(n)| >= delta * (1+|n|_1)^(-K).

    Returns (delta, K) for the recognised invertible forms, None otherwise.
    Recognised: nonzero constants, polynomial envelopes, phase factors,
    clipped values, reciprocals of certified-growth trees, modulus /
    negation / conjugate wrappers, products of recognised forms, and sums
    of nonnegative terms at least one of which is recognised.
    """
    if isinstance(node, Const):
        mag = abs(node.value)
        return (mag, 0) if mag > 0 else None
    if isinstance(node, PolyEnv):
        return (1.0, 0)
    if isinstance(node, Phase):
        return (1.0, 0)
    if isinstance(node, Clip):
        return (node.eps, 0)
    if isinstance(node, Recip):
        m, k = composed_cert(node.arg)
        return (1.0 / m, k)
    if isinstance(node, (Abs, Neg, Conj)):
        return lower_bound_cert(node.arg)
    if isinstance(node, Mul):
        delta, order = 1.0, 0
        for a in node.args:
            lb = lower_bound_cert(a)
            if lb is None:
                return None
            delta *= lb[0]
            order += lb[1]
        return (delta, order)
    if isinstance(node, Add):
        if not all(is_nonneg_real(a) for a in node.args):
            return None
        best: tuple[float, int] | None = None
        for a in node.args:
            lb = lower_bound_cert(a)
            if lb is None:
                continue
            if best is None or (lb[1], -lb[0]) < (best[1], -best[0]):
                best = lb
        return best
    return None


# ---------------------------------------------------------------------------
# JSON serialization.  The wire format mirrors the node kinds one to one;
# any node may carry an optional "cert": {"M":..., "k":...} claim which the
# sequence layer verifies on a window before trusting.
# ---------------------------------------------------------------------------

CertClaim = tuple[Node, float, int, str]


def to_json(node: Node) -> dict:
    """Serialize a tree to the JSON wire format (plain dicts, no certs)."""
    if isinstance(node, Const):
        return {"kind": "const", "re": node.re, "im": node.im}
    if isinstance(node, Coord):
        return {"kind": "coord", "axis": node.axis}
    if isinstance(node, Norm1):
        return {"kind": "norm1"}
    if isinstance(node, PolyEnv):
        return {"kind": "polyenv", "k": node.k}
    if isinstance(node, ExpDecay):
        return {"kind": "expdecay", "rate": node.rate}
    if isinstance(node, Add):
        return {"kind": "add", "args": [to_json(a) for a in node.args]}
    if isinstance(node, Mul):
        return {"kind": "mul", "args": [to_json(a) for a in node.args]}
    if isinstance(node, Neg):
        return {"kind": "neg", "arg": to_json(node.arg)}
    if isinstance(node, Conj):
        return {"kind": "conj", "arg": to_json(node.arg)}
    if isinstance(node, Abs):
        return {"kind": "abs", "arg": to_json(node.arg)}
    if isinstance(node, Arg):
        return {"kind": "arg", "arg": to_json(node.arg)}
    if isinstance(node, Phase):
        return {"kind": "phase", "arg": to_json(node.arg)}
    if isinstance(node, Clip):
        return {"kind": "clip", "arg": to_json(node.arg), "eps": node.eps}
    if isinstance(node, Recip):
        return {
            "kind": "recip",
            "arg": to_json(node.arg),
            "witness": {"delta": node.delta, "K": node.K},
        }
    raise InputError(f"cannot serialize node of type {type(node).__name__}")


def _expect(obj: dict, key: str, path: str):
    if key not in obj:
        raise InputError(f"{path}: missing field '{key}'")
    return obj[key]


def _number(obj: dict, key: str, path: str) -> float:
    v = _expect(obj, key, path)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InputError(f"{path}.{key}: expected a number, got {type(v).__name__}")
    return float(v)


def _integer(obj: dict, key: str, path: str) -> int:
    v = _expect(obj, key, path)
    if isinstance(v, bool) or not isinstance(v, int):
        raise InputError(f"{path}.{key}: expected an integer, got {type(v).__name__}")
    return v


def parse_node(obj, path: str = "expr") -> tuple[Node, tuple[float, int], list[CertClaim]]:
    """Parse the JSON wire format.

    Returns ``(node, effective_cert, claims)`` where ``effective_cert`` is the
    composed growth certificate with any user-supplied "cert" overrides
    substituted in, and ``claims`` lists every overridden subtree so callers
    can window-check the claims before relying on them.
    """
    if not isinstance(obj, dict):
        raise InputError(f"{path}: expected an object, got {type(obj).__name__}")
    kind = _expect(obj, "kind", path)
    claims: list[CertClaim] = []

    def parse_children(key: str) -> tuple[list[Node], list[tuple[float, int]]]:
        raw = _expect(obj, key, path)
        if not isinstance(raw, list) or not raw:
            raise InputError(f"{path}.{key}: expected a non-empty array")
        nodes, certs = [], []
        for i, child in enumerate(raw):
            node_i, cert_i, claims_i = parse_node(child, f"{path}.{key}[{i}]")
            nodes.append(node_i)
            certs.append(cert_i)
            claims.extend(claims_i)
        return nodes, certs

    def parse_child(key: str = "arg") -> tuple[Node, tuple[float, int]]:
        node_c, cert_c, claims_c = parse_node(_expect(obj, key, path), f"{path}.{key}")
        claims.extend(claims_c)
        return node_c, cert_c

    child_certs: list[tuple[float, int]] = []
    if kind == "const":
        node: Node = Const(_number(obj, "re", path), _number(obj, "im", path))
    elif kind == "coord":
        node = Coord(_integer(obj, "axis", path))
    elif kind == "norm1":
        node = Norm1()
    elif kind == "polyenv":
        node = PolyEnv(_integer(obj, "k", path))
    elif kind == "expdecay":
        node = ExpDecay(_number(obj, "rate", path))
    elif kind == "add":
        nodes, child_certs = parse_children("args")
        node = Add(tuple(nodes))
    elif kind == "mul":
        nodes, child_certs = parse_children("args")
        node = Mul(tuple(nodes))
    elif kind in ("neg", "conj", "abs", "arg", "phase"):
        child, cert = parse_child()
        child_certs = [cert]
        node = {"neg": Neg, "conj": Conj, "abs": Abs, "arg": Arg, "phase": Phase}[kind](child)
    elif kind == "clip":
        child, cert = parse_child()
        child_certs = [cert]
        node = Clip(child, _number(obj, "eps", path))
    elif kind == "recip":
        child, cert = parse_child()
        child_certs = [cert]
        witness = _expect(obj, "witness", path)
        if not isinstance(witness, dict):
            raise InputError(f"{path}.witness: expected an object")
        node = Recip(
            child,
            _number(witness, "delta", f"{path}.witness"),
            _integer(witness, "K", f"{path}.witness"),
        )
    else:
        raise InputError(f"{path}: unknown node kind '{kind}'")

    effective = node._cert_from(child_certs)
    if "cert" in obj:
        cert_obj = obj["cert"]
        if not isinstance(cert_obj, dict):
            raise InputError(f"{path}.cert: expected an object")
        claimed_m = _number(cert_obj, "M", f"{path}.cert")
        claimed_k = _integer(cert_obj, "k", f"{path}.cert")
        if not claimed_m > 0 or claimed_k < 0:
            raise InputError(f"{path}.cert: need M > 0 and k >= 0")
        claims.append((node, claimed_m, claimed_k, path))
        effective = (claimed_m, claimed_k)
    return node, effective, claims
