"""JSON-driven command line front end.

Usage:

    periodist <command> --spec job.json [--window R] [--epsilon E]
                        [--format json|csv] [--out path]

The job file carries a ``dimension``, an ``inputs`` object with named
sequences (expression trees in the wire format), and a ``params`` object
with command-specific numbers (delta, K, epsilon, R, N, rate, maxDegree,
tolerance).  ``--window`` and ``--epsilon`` override the corresponding
params.  Reports echo the inputs (sample arrays are summarised), record
the resolved parameters and the global defaults (R = 50, dimension = 1),
and are byte-identical across repeated runs on the same inputs.

Exit codes: 0 on success, 1 on input errors (malformed files, rejected
certificates), 2 on mathematical failure (a violated floor, a residual
above tolerance, a missing violation for the floor demo).

The environment variable PERIODIST_THREADS caps worker parallelism for
window scans; it never changes any reported number.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import exp_type, fourier
from .corona import (
    CoronaWitness,
    certify_witness,
    check_corona_window,
    solve_bezout,
    verify_bezout,
    witness_from_bezout,
)
from .errors import CertificateError, InputError, MathFailure, PeriodistError, WitnessViolation
from .lattice import ball
from .sequences import FastSequence, SlowSequence, _eval_points, combine, constant, pairing
from .stable_rank import approx_by_invertibles, q_algebra_violation, reduce_pair, weak_star_gap

DEFAULT_RADIUS = 50
DEFAULT_DIMENSION = 1

COMMANDS = (
    "check-growth",
    "corona-check",
    "bezout-solve",
    "bezout-verify",
    "reduce",
    "approx",
    "gap",
    "qdemo",
    "fourier-coeffs",
    "fourier-synth",
    "pair",
    "exp-demo",
)


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with the input-error code."""

    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _complex_pair(value: complex) -> list[float]:
    return [value.real, value.imag]


def _finite_or_none(value: float):
    return value if math.isfinite(value) else None


def _thread_cap() -> int:
    raw = os.environ.get("PERIODIST_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise InputError(f"PERIODIST_THREADS must be an integer, got '{raw}'")


class Job:
    """Parsed job file plus resolved parameters."""

    def __init__(self, command: str, spec_path: str, args):
        self.command = command
        self.path = Path(spec_path)
        try:
            text = self.path.read_text()
        except OSError as err:
            raise InputError(f"cannot read spec file '{spec_path}': {err}")
        try:
            self.raw = json.loads(text)
        except json.JSONDecodeError as err:
            raise InputError(
                f"{spec_path}: invalid JSON at line {err.lineno}, column {err.colno}: {err.msg}"
            )
        if not isinstance(self.raw, dict):
            raise InputError(f"{spec_path}: top level must be an object")
        declared = self.raw.get("command")
        if declared is not None and declared != command:
            raise InputError(
                f"{spec_path}: file declares command '{declared}' but '{command}' was invoked"
            )
        self.inputs = self.raw.get("inputs", {})
        if not isinstance(self.inputs, dict):
            raise InputError(f"{spec_path}: 'inputs' must be an object")
        self.params = self.raw.get("params", {})
        if not isinstance(self.params, dict):
            raise InputError(f"{spec_path}: 'params' must be an object")
        self.dimension = int(self.raw.get("dimension", DEFAULT_DIMENSION))
        if self.dimension < 1:
            raise InputError("dimension must be >= 1")
        radius = args.window if args.window is not None else self.params.get("R", DEFAULT_RADIUS)
        self.radius = int(radius)
        if self.radius < 0:
            raise InputError("window radius must be >= 0")
        eps = args.epsilon if args.epsilon is not None else self.params.get("epsilon")
        self.epsilon = float(eps) if eps is not None else None
        self.threads = _thread_cap()

    # -- typed accessors ----------------------------------------------

    def param_float(self, name: str, default=None) -> float:
        value = self.params.get(name, default)
        if value is None:
            raise InputError(f"params.{name}: required")
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InputError(f"params.{name}: expected a number")
        return float(value)

    def param_int(self, name: str, default=None) -> int:
        value = self.params.get(name, default)
        if value is None:
            raise InputError(f"params.{name}: required")
        if isinstance(value, bool) or not isinstance(value, int):
            raise InputError(f"params.{name}: expected an integer")
        return int(value)

    def input_obj(self, name: str):
        if name not in self.inputs:
            raise InputError(f"inputs.{name}: required")
        return self.inputs[name]

    def slow(self, name: str) -> SlowSequence:
        return SlowSequence.from_json(self.input_obj(name), self.dimension)

    def slow_family(self, name: str) -> list[SlowSequence]:
        raw = self.input_obj(name)
        if not isinstance(raw, list) or not raw:
            raise InputError(f"inputs.{name}: expected a non-empty array of sequences")
        return [SlowSequence.from_json(item, self.dimension) for item in raw]

    def fast(self, name: str) -> FastSequence:
        return FastSequence.from_json(self.input_obj(name), self.dimension)

    def basis(self) -> fourier.PeriodBasis:
        raw = self.input_obj("period_matrix")
        if not isinstance(raw, list):
            raise InputError("inputs.period_matrix: expected a matrix (array of rows)")
        return fourier.PeriodBasis(raw)

    def samples(self, dimension: int) -> np.ndarray:
        raw = self.input_obj("samples")
        if isinstance(raw, dict):
            if "file" not in raw or "shape" not in raw:
                raise InputError("inputs.samples: binary form needs 'file' and 'shape'")
            shape = tuple(int(s) for s in raw["shape"])
            path = Path(raw["file"])
            if not path.is_absolute():
                path = self.path.parent / path
            try:
                flat = np.fromfile(path, dtype="<c16")
            except OSError as err:
                raise InputError(f"inputs.samples: cannot read '{path}': {err}")
            expected = int(np.prod(shape)) if shape else 0
            if flat.size != expected:
                raise InputError(
                    f"inputs.samples: file holds {flat.size} values, shape needs {expected}"
                )
            return flat.reshape(shape)
        return np.asarray(_parse_complex_array(raw, dimension, "inputs.samples"), dtype=np.complex128)

    def echo_inputs(self) -> dict:
        echoed = {}
        for key, value in self.inputs.items():
            if key == "samples":
                if isinstance(value, dict):
                    echoed[key] = {"source": str(value.get("file")), "shape": value.get("shape")}
                else:
                    shape, node = [], value
                    for _ in range(self.dimension):
                        if not isinstance(node, list):
                            break
                        shape.append(len(node))
                        node = node[0]
                    echoed[key] = {"source": "inline", "shape": shape}
            else:
                echoed[key] = value
        return echoed


def _parse_complex_leaf(value, where: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(float(value), 0.0)
    if (
        isinstance(value, list)
        and len(value) == 2
        and all(isinstance(part, (int, float)) and not isinstance(part, bool) for part in value)
    ):
        return complex(float(value[0]), float(value[1]))
    raise InputError(f"{where}: expected a number or an [re, im] pair")


def _parse_complex_array(raw, depth: int, where: str):
    if depth == 0:
        return _parse_complex_leaf(raw, where)
    if not isinstance(raw, list) or not raw:
        raise InputError(f"{where}: expected a non-empty array nested {depth} deep")
    return [_parse_complex_array(item, depth - 1, f"{where}[{i}]") for i, item in enumerate(raw)]


def _witness_json(witness: CoronaWitness) -> dict:
    return {
        "delta": witness.delta,
        "K": witness.K,
        "status": witness.status,
        "radius": witness.radius,
    }


# ---------------------------------------------------------------------------
# Command handlers.  Each returns (results, verdict) with verdict one of
# "pass", "fail", or None for compute-only commands.
# ---------------------------------------------------------------------------


def _run_check_growth(job: Job):
    seq = job.slow("a")
    check = seq.check_certificate(job.radius, threads=job.threads)
    results = {
        "cert": {"M": seq.cert.M, "k": seq.cert.k},
        "holds": check.holds,
        "first_violation": list(check.first_violation) if check.first_violation else None,
        "max_ratio": check.max_ratio,
    }
    return results, ("pass" if check.holds else "fail")


def _run_corona_check(job: Job):
    family = job.slow_family("a")
    delta = job.param_float("delta")
    order = job.param_int("K")
    check = check_corona_window(family, delta, order, job.radius, job.threads)
    results = {
        "delta": delta,
        "K": order,
        "holds": check.holds,
        "first_violation": list(check.first_violation) if check.first_violation else None,
    }
    return results, ("pass" if check.holds else "fail")


def _resolve_witness(job: Job, family: list[SlowSequence]) -> CoronaWitness:
    if "delta" in job.params or "K" in job.params:
        delta = job.param_float("delta")
        order = job.param_int("K")
        check = check_corona_window(family, delta, order, job.radius, job.threads)
        if not check.holds:
            raise MathFailure(
                f"corona floor (delta={delta}, K={order}) fails at "
                f"lattice index {check.first_violation}"
            )
        return CoronaWitness(delta, order, radius=job.radius)
    witness = certify_witness(family)
    if witness is None:
        raise MathFailure(
            "no witness: supply params.delta and params.K or include a certified form"
        )
    return witness


def _run_bezout_solve(job: Job):
    family = job.slow_family("a")
    witness = _resolve_witness(job, family)
    cofactors = solve_bezout(family, witness)
    residual = verify_bezout(family, cofactors, job.radius, job.threads)
    tolerance = job.param_float("tolerance", 1e-12)
    results = {
        "witness": _witness_json(witness),
        "cofactors": [c.to_json() for c in cofactors],
        "recovered_witness": _witness_json(witness_from_bezout(cofactors)),
        "self_residual": residual,
        "tolerance": tolerance,
    }
    return results, ("pass" if residual <= tolerance else "fail")


def _run_bezout_verify(job: Job):
    family = job.slow_family("a")
    cofactors = job.slow_family("b")
    residual = verify_bezout(family, cofactors, job.radius, job.threads)
    tolerance = job.param_float("tolerance", 1e-12)
    results = {
        "max_residual": residual,
        "tolerance": tolerance,
        "recovered_witness": _witness_json(witness_from_bezout(cofactors)),
    }
    return results, ("pass" if residual <= tolerance else "fail")


def _run_reduce(job: Job):
    a1, a2 = job.slow("a1"), job.slow("a2")
    b1, b2 = job.slow("b1"), job.slow("b2")
    epsilon = job.epsilon if job.epsilon is not None else 0.25
    tolerance = job.param_float("tolerance", 1e-12)
    trace = reduce_pair(a1, a2, b1, b2, epsilon, job.radius, tolerance, job.threads)

    # Window diagnostics: the perturbed identity floor and the agreement
    # of the result with its invertible factorisation.
    drift = combine(
        "mul",
        combine("add", trace.clipped_cofactor, combine("neg", trace.scaled_cofactor)),
        trace.normalized_first,
    )
    perturbed = combine("add", constant(1.0, a1.dimension), drift)
    points, norms = ball(a1.dimension, job.radius)
    perturbed_values = np.abs(_eval_points(perturbed.expr, points, norms, job.threads))
    min_floor = float(perturbed_values.min())
    witness = trace.result_inverse_witness
    factorisation = combine(
        "mul",
        trace.clipped_cofactor.reciprocal(trace.epsilon, 0),
        trace.normalizer,
        perturbed,
    )
    delta_values = np.abs(
        _eval_points(trace.result.expr, points, norms, job.threads)
        - _eval_points(factorisation.expr, points, norms, job.threads)
    )
    factorisation_residual = float(delta_values.max())
    results = {
        "epsilon": trace.epsilon,
        "result": trace.result.to_json(),
        "multiplier": trace.multiplier.to_json(),
        "inverse_witness": _witness_json(witness),
        "witness_factors": {
            name: {"delta": pair[0], "K": pair[1]}
            for name, pair in trace.witness_factors.items()
        },
        "min_perturbed_identity": min_floor,
        "floor_target": 1.0 - 2.0 * trace.epsilon,
        "factorization_residual": factorisation_residual,
    }
    ok = min_floor >= 1.0 - 2.0 * trace.epsilon and factorisation_residual <= 1e-10
    return results, ("pass" if ok else "fail")


def _run_approx(job: Job):
    seq = job.slow("a")
    epsilons = job.params.get("epsilons")
    if epsilons is None:
        epsilons = [job.epsilon if job.epsilon is not None else 0.25]
    if not isinstance(epsilons, list) or not epsilons:
        raise InputError("params.epsilons: expected a non-empty array")
    items = []
    ok = True
    points, norms = ball(seq.dimension, job.radius)
    base = _eval_points(seq.expr, points, norms, job.threads)
    for clipped, witness in approx_by_invertibles(seq, [float(e) for e in epsilons]):
        moved = _eval_points(clipped.expr, points, norms, job.threads)
        max_change = float(np.abs(moved - base).max())
        eps = witness.delta
        ok = ok and max_change <= 2.0 * eps
        items.append(
            {
                "epsilon": eps,
                "witness": _witness_json(witness),
                "max_change_on_window": max_change,
                "sequence": clipped.to_json(),
            }
        )
    return {"items": items}, ("pass" if ok else "fail")


def _run_gap(job: Job):
    x, y = job.slow("x"), job.slow("y")
    test = job.fast("b")
    result = weak_star_gap(x, y, test, job.radius, job.threads)
    bound = _finite_or_none(result.bound)
    results = {
        "gap": result.gap,
        "bound": bound,
        "bound_finite": bound is not None,
        "tail_bound": result.tail_bound,
    }
    verdict = None
    if bound is not None:
        verdict = "pass" if result.gap <= result.bound else "fail"
    return results, verdict


def _run_qdemo(job: Job):
    rate = job.param_float("rate", 1.0)
    delta = job.param_float("delta")
    order = job.param_int("K")
    n_max = job.param_int("nMax", 40)
    hit = q_algebra_violation(rate, delta, order, n_max, job.dimension)
    results = {
        "rate": rate,
        "delta": delta,
        "K": order,
        "nMax": n_max,
        "found": hit is not None,
        "index": list(hit) if hit is not None else None,
        "norm": sum(abs(c) for c in hit) if hit is not None else None,
    }
    return results, ("pass" if hit is not None else "fail")


def _run_fourier_coeffs(job: Job):
    basis = job.basis()
    samples = job.samples(basis.dimension)
    coeffs = fourier.coeffs_from_samples(basis, samples)
    count = samples.shape[0]
    lo, hi = fourier.centred_window(count)
    results = {
        "coefficients": coeffs.to_json(),
        "metadata": {
            "normalization": fourier.NORMALIZATION,
            "grid_count": count,
            "centred_window": [lo, hi],
            "aliasing": fourier.ALIASING_NOTE,
        },
    }
    return results, None


def _run_fourier_synth(job: Job):
    basis = job.basis()
    coeffs = fourier.CoefficientMap.from_json(job.input_obj("coeffs"))
    raw_points = job.input_obj("points")
    if not isinstance(raw_points, list) or not raw_points:
        raise InputError("inputs.points: expected a non-empty array of points")
    points = np.asarray(raw_points, dtype=float)
    if points.ndim == 1:
        points = points[:, None] if basis.dimension == 1 else points[None, :]
    values = fourier.synthesize(basis, coeffs, points)
    results = {"values": [_complex_pair(complex(v)) for v in np.atleast_1d(values)]}
    return results, None


def _run_pair(job: Job):
    seq = job.slow("a")
    test = job.fast("b")
    result = pairing(seq, test, job.radius, job.threads)
    results = {
        "value": _complex_pair(result.value),
        "tail_bound": result.tail_bound,
    }
    return results, None


def _run_exp_demo(job: Job):
    max_degree = job.param_int("maxDegree", 3)
    p, q, f, g = exp_type.standard_identity()
    check = exp_type.poly_bezout_check(p, q, f, g)
    report = exp_type.polynomial_reducer_search(max_degree)
    results = {
        "identity_residual": check.max_residual,
        "identity_exact": check.exact,
        "search": {
            "max_degree": report.max_degree,
            "candidates_checked": report.candidates_checked,
            "units_found": report.units_found,
            "all_nonconstant": report.all_nonconstant,
            "fixed_low_coefficients": {
                str(power): _complex_pair(value)
                for power, value in sorted(report.fixed_low_coefficients.items())
            },
            "max_root_residual": report.max_root_residual,
        },
    }
    ok = (
        check.max_residual == 0.0
        and report.units_found == 0
        and report.all_nonconstant
        and report.max_root_residual <= 1e-9
    )
    return results, ("pass" if ok else "fail")


_HANDLERS = {
    "check-growth": _run_check_growth,
    "corona-check": _run_corona_check,
    "bezout-solve": _run_bezout_solve,
    "bezout-verify": _run_bezout_verify,
    "reduce": _run_reduce,
    "approx": _run_approx,
    "gap": _run_gap,
    "qdemo": _run_qdemo,
    "fourier-coeffs": _run_fourier_coeffs,
    "fourier-synth": _run_fourier_synth,
    "pair": _run_pair,
    "exp-demo": _run_exp_demo,
}


def _flatten(prefix: str, value, rows: list[tuple[str, str]]):
    if isinstance(value, dict):
        for key in value:
            _flatten(f"{prefix}.{key}" if prefix else str(key), value[key], rows)
    elif isinstance(value, list):
        for i, item in enumerate(value):
            _flatten(f"{prefix}[{i}]", item, rows)
    else:
        rows.append((prefix, value if isinstance(value, str) else json.dumps(value)))


def render_report(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    rows: list[tuple[str, str]] = []
    _flatten("", {"command": report["command"], "verdict": report["verdict"], **report["results"]}, rows)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["key", "value"])
    writer.writerows(rows)
    return buffer.getvalue()


def build_parser() -> _Parser:
    parser = _Parser(prog="periodist", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--spec", required=True, help="job file (JSON)")
        cmd.add_argument("--window", type=int, default=None, help="truncation radius override")
        cmd.add_argument("--epsilon", type=float, default=None, help="epsilon override")
        cmd.add_argument("--format", choices=("json", "csv"), default="json")
        cmd.add_argument("--out", default=None, help="write the report here instead of stdout")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        job = Job(args.command, args.spec, args)
        results, verdict = _HANDLERS[args.command](job)
    except (InputError, CertificateError) as err:
        print(f"periodist: input error: {err}", file=sys.stderr)
        return 1
    except (MathFailure, WitnessViolation) as err:
        print(f"periodist: mathematical failure: {err}", file=sys.stderr)
        return 2
    except PeriodistError as err:
        print(f"periodist: input error: {err}", file=sys.stderr)
        return 1
    report = {
        "command": job.command,
        "dimension": job.dimension,
        "params": {
            "R": job.radius,
            **({"epsilon": job.epsilon} if job.epsilon is not None else {}),
            **{
                key: value
                for key, value in sorted(job.params.items())
                if key not in ("R", "epsilon")
            },
        },
        "defaults": {"R": DEFAULT_RADIUS, "dimension": DEFAULT_DIMENSION},
        "threads": job.threads,
        "inputs": job.echo_inputs(),
        "results": results,
        "verdict": verdict,
    }
    payload = render_report(report, args.format)
    if args.out:
        Path(args.out).write_bytes(payload.encode())
    else:
        sys.stdout.write(payload)
    return 2 if verdict == "fail" else 0


if __name__ == "__main__":
    sys.exit(main())
