"""Bridge between lattice coefficient sequences and periodic functions.

A full-rank period matrix A (rows are the transposed period vectors)
fixes the geometry.  Frequencies live on the dual lattice: the dual point
of an integer index m is v = A^{-1} m, which pairs integrally with every
period row.  Sampling a periodic function on the fractional grid
x_j = A^T (j / N), j in [0, N)^d, turns coefficient extraction into a
plain d-dimensional DFT with the forward 1/N^d normalisation:

    coeff(m) = (1/N^d) * sum_j samples[j] * exp(-2*pi*i * m.j / N)

reported on the centred index window [-floor(N/2), ceil(N/2) - 1]^d.
Frequencies at or beyond the Nyquist index alias; keeping the spectrum
inside the window is the caller's responsibility.  Synthesis is the
finite sum of exp(2*pi*i * (A^{-1} m) . x) weighted by the coefficients,
and is invariant under translation by any period vector.

The all-ones coefficient sequence is the identity for pointwise
coefficient multiplication; its action on test data is the Dirac-comb
sum of samples at the dual points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError, MathFailure
from .lattice import LatticeIndex
from .sequences import (
    FastSequence,
    GrowthCertificate,
    PairingResult,
    SlowSequence,
    _bump,
    constant,
    pairing,
)

NORMALIZATION = "forward-1/N^d"
ALIASING_NOTE = "frequencies outside the centred window alias; caller keeps spectra inside"


class PeriodBasis:
    """Invertible period matrix with its validated inverse.

    The determinant must stay away from zero (|det| >= det_tol, default
    1e-9) and the computed inverse must reproduce the identity to 1e-12
    per entry, otherwise the basis is rejected.
    """

    def __init__(self, matrix, det_tol: float = 1e-9):
        array = np.asarray(matrix, dtype=float)
        if array.ndim != 2 or array.shape[0] != array.shape[1] or array.shape[0] < 1:
            raise InputError("period matrix must be square and non-empty")
        det = float(np.linalg.det(array))
        if abs(det) < det_tol:
            raise InputError(f"period matrix is numerically singular (|det| = {abs(det):.3e})")
        inverse = np.linalg.inv(array)
        residual = float(np.abs(array @ inverse - np.eye(array.shape[0])).max())
        if residual > 1e-12:
            raise InputError(
                f"period matrix inverse residual {residual:.3e} exceeds 1e-12"
            )
        array.setflags(write=False)
        inverse.setflags(write=False)
        self.matrix = array
        self.inverse = inverse
        self.dimension = array.shape[0]
        self.det = det

    def __repr__(self):
        return f"PeriodBasis({self.matrix.tolist()})"


def dual_point(basis: PeriodBasis, index: LatticeIndex) -> np.ndarray:
    """Dual lattice point v = A^{-1} m; pairs integrally with the periods.

    The integrality a_k . v = m_k is re-checked to 1e-9 and a failure
    (ill-conditioned basis) raises MathFailure.
    """
    m = np.asarray(index, dtype=float)
    if m.shape != (basis.dimension,):
        raise InputError("index has the wrong dimension for this basis")
    v = basis.inverse @ m
    residual = float(np.abs(basis.matrix @ v - m).max())
    if residual > 1e-9:
        raise MathFailure(f"dual point integrality residual {residual:.3e} exceeds 1e-9")
    return v


def sample_grid(basis: PeriodBasis, count: int) -> np.ndarray:
    """Sampling points x_j = A^T (j / count), shape (count,)*d + (d,)."""
    if count < 1:
        raise InputError("grid count must be >= 1")
    d = basis.dimension
    axes = [np.arange(count, dtype=float) / count] * d
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    return mesh @ basis.matrix  # (A^T j/N)_a = sum_b A[b, a] j_b / N


@dataclass(frozen=True)
class CoefficientMap:
    """Finitely stored coefficient sequence with a growth certificate."""

    coeffs: dict[LatticeIndex, complex]
    dimension: int
    cert: GrowthCertificate

    def __post_init__(self):
        for index in self.coeffs:
            if len(index) != self.dimension:
                raise InputError("coefficient index has the wrong dimension")

    @staticmethod
    def from_dict(coeffs: dict[LatticeIndex, complex], dimension: int) -> "CoefficientMap":
        clean = {
            tuple(int(c) for c in k): complex(v) for k, v in coeffs.items()
        }
        top = max((abs(v) for v in clean.values()), default=1.0)
        return CoefficientMap(clean, dimension, GrowthCertificate(top if top > 0 else 1.0, 0))

    def items_in_scan_order(self):
        return sorted(
            self.coeffs.items(), key=lambda kv: (sum(abs(c) for c in kv[0]), kv[0])
        )

    def check_growth(self) -> bool:
        """Certificate soundness on every stored index."""
        for index, value in self.coeffs.items():
            norm = sum(abs(c) for c in index)
            if abs(value) > self.cert.M * (1.0 + norm) ** self.cert.k * (1.0 + 1e-12):
                return False
        return True

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "coeffs": {
                ",".join(str(c) for c in index): [value.real, value.imag]
                for index, value in self.items_in_scan_order()
            },
            "cert": {"M": self.cert.M, "k": self.cert.k},
        }

    @staticmethod
    def from_json(obj) -> "CoefficientMap":
        if not isinstance(obj, dict) or "coeffs" not in obj:
            raise InputError("coefficient map: expected an object with 'coeffs'")
        dimension = int(obj.get("dimension", 1))
        coeffs = {}
        for key, value in obj["coeffs"].items():
            try:
                index = tuple(int(part) for part in str(key).split(","))
            except ValueError as err:
                raise InputError(f"coefficient map: bad index key '{key}'") from err
            if not isinstance(value, (list, tuple)) or len(value) != 2:
                raise InputError(f"coefficient map: value for '{key}' must be [re, im]")
            coeffs[index] = complex(float(value[0]), float(value[1]))
        return CoefficientMap.from_dict(coeffs, dimension)


def centred_window(count: int) -> tuple[int, int]:
    """Inclusive index range [-floor(N/2), ceil(N/2) - 1] per axis."""
    return (-(count // 2), (count + 1) // 2 - 1)


def coeffs_from_samples(basis: PeriodBasis, samples) -> CoefficientMap:
    """Coefficients of a trig polynomial from its values on the sampling grid.

    `samples` must be a cubic complex array of shape (N,)*d holding the
    function values at x_j = A^T (j/N) in row-major j order.
    """
    array = np.asarray(samples, dtype=np.complex128)
    d = basis.dimension
    if array.ndim != d:
        raise InputError(f"samples must be {d}-dimensional for this basis")
    count = array.shape[0]
    if any(s != count for s in array.shape):
        raise InputError("samples must be a cubic array (equal length per axis)")
    spectrum = np.fft.fftn(array) / float(count**d)
    lo, hi = centred_window(count)
    coeffs: dict[LatticeIndex, complex] = {}
    for index in np.ndindex(*array.shape):
        centred = tuple(i if i <= hi else i - count for i in index)
        coeffs[centred] = complex(spectrum[index])
    return CoefficientMap.from_dict(coeffs, d)


def synthesize(basis: PeriodBasis, coeffs: CoefficientMap, x):
    """Finite sum of coefficients times exp(2*pi*i * (A^{-1} m) . x).

    Accepts a single point (shape (d,)) returning a complex value, or a
    stack of points (shape (count, d)) returning a complex array.
    Invariant under adding any period vector to x.
    """
    if coeffs.dimension != basis.dimension:
        raise InputError("coefficient map and basis dimensions differ")
    points = np.asarray(x, dtype=float)
    single = points.ndim == 1
    if single:
        points = points[None, :]
    if points.ndim != 2 or points.shape[1] != basis.dimension:
        raise InputError("evaluation points must have the basis dimension")
    items = coeffs.items_in_scan_order()
    if not items:
        values = np.zeros(points.shape[0], dtype=np.complex128)
        return complex(values[0]) if single else values
    indices = np.array([index for index, _ in items], dtype=float)
    alphas = np.array([value for _, value in items], dtype=np.complex128)
    duals = basis.inverse @ indices.T  # shape (d, count_m)
    phases = np.exp(2j * math.pi * (points @ duals))
    values = phases @ alphas
    return complex(values[0]) if single else values


def comb_identity(dimension: int = 1) -> SlowSequence:
    """All-ones coefficient sequence: the pointwise multiplication identity.

    Its action on test data is the Dirac comb (plain sum of the samples
    at the dual points).
    """
    return constant(1.0, dimension)


def distribution_action(
    coeffs: "CoefficientMap | SlowSequence",
    test: FastSequence,
    radius: int,
    threads: int = 1,
) -> PairingResult:
    """Action of a coefficient sequence on samples of a test function.

    `test` holds the test-function samples at the dual points, indexed by
    the integer index m.  A SlowSequence coefficient argument (such as
    the all-ones identity) is paired directly; a finitely stored map is
    summed over its stored indices inside the window with the same style
    of certified tail bound.
    """
    if isinstance(coeffs, SlowSequence):
        return pairing(coeffs, test, radius, threads)
    if coeffs.dimension != test.dimension:
        raise InputError("coefficient map and test data dimensions differ")
    if radius < 0:
        raise InputError("radius must be >= 0")
    total = complex(0.0)
    largest = 0
    for index, value in coeffs.items_in_scan_order():
        norm = sum(abs(c) for c in index)
        largest = max(largest, norm)
        if norm <= radius:
            total += value * test.eval(index)
    if largest <= radius:
        tail = 0.0
    else:
        d = coeffs.dimension
        heavy = test.seminorm_bound(coeffs.cert.k + d + 1)
        tail = _bump(coeffs.cert.M * heavy * 2**d / (1.0 + radius))
    return PairingResult(total, radius, tail)
