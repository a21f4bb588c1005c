"""Command-line front end.

Systems are read either from a JSON system document or from a model string
``family[:key=value,...]``, e.g. ``noisy-boxworld:lambda=1/2`` or
``polygon:n=5``.  Exact numbers are written as ``"p/q"`` strings.

Exit codes: 0 success, 2 validation failure, 3 domain error, 4 parse error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from fractions import Fraction
from typing import Optional, Sequence

from . import bell, linalg
from .errors import GptConeError, NotAMeasurement
from .geometry import ConeV
from .gpt_core import JointState, System, check_no_signalling, validate_system
from .models import Family, ModelSpec, build, symmetries_for
from .restriction import (check_bit_symmetry_pairs, is_strongly_self_dual_rep, pairs_transitive,
                          self_dualize)
from .scalar import epsilon, format_scalar, parse_scalar, vec
from .tensor import (TensorKind, classify_extremals, counterexample_state, maximally_entangled,
                     membership, reference_states, spekkens_entangled_state, tensor)

SCHEMA_VERSION = "1"

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_DOMAIN = 3
EXIT_PARSE = 4


class ParseError(Exception):
    """Malformed input document, model string or number."""


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------


def _num(x):
    return format_scalar(x)


def _nums(v: Sequence) -> list:
    return [_num(x) for x in v]


def _parse_num(x):
    if isinstance(x, bool):
        raise ParseError(f"not a number: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return x
    if isinstance(x, str):
        try:
            return parse_scalar(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"not a number: {x!r}") from exc
    raise ParseError(f"not a number: {x!r}")


def _parse_vec(values) -> tuple:
    if not isinstance(values, list):
        raise ParseError(f"expected a coordinate array, got {values!r}")
    return tuple(_parse_num(x) for x in values)


def system_document(system: System) -> dict:
    exact = system.exact
    doc = {
        "schema_version": SCHEMA_VERSION,
        "dim": system.dim,
        "scalar_mode": "rational" if exact else "float",
        "state_rays": [_nums(r) for r in system.state_cone.rays],
        "effect_rays": [_nums(r) for r in system.effect_cone.rays],
        "effect_vertices": [_nums(e) for e in sorted(system.effect_vertices)],
        "unit": _nums(system.unit),
        "label": system.label,
    }
    if not exact:
        doc["epsilon"] = epsilon()
    if system.spec is not None:
        doc["model"] = system.spec.to_json()
    return doc


def load_system_document(doc: dict) -> System:
    try:
        dim = int(doc["dim"])
        states = [_parse_vec(r) for r in doc["state_rays"]]
        effects = [_parse_vec(r) for r in doc["effect_rays"]]
        unit = _parse_vec(doc["unit"])
        spec = ModelSpec.from_json(doc["model"]) if "model" in doc else None
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed system document: {exc}") from exc
    if doc.get("scalar_mode") == "float":
        states = [tuple(float(x) for x in r) for r in states]
        effects = [tuple(float(x) for x in r) for r in effects]
        unit = tuple(float(x) for x in unit)
    system = System(ConeV(states, dim=dim), ConeV(effects, dim=dim), unit,
                    doc.get("label", ""), spec)
    report = validate_system(system)
    if not report.passed:
        raise ValidationFailed(report_document(report))
    return system


def joint_state_document(w: JointState) -> dict:
    n, m = w.shape
    return {"shape": [n, m], "entries": _nums(w.flat)}


def load_joint_state(doc) -> JointState:
    try:
        if isinstance(doc, dict):
            n, m = doc["shape"]
            return JointState.from_flat(_parse_vec(doc["entries"]), int(n), int(m))
        return JointState([_parse_vec(row) for row in doc])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed joint state: {exc}") from exc


def _jsonable(x):
    if isinstance(x, (Fraction, float)):
        return _num(x)
    if isinstance(x, (list, tuple)):
        return [_jsonable(y) for y in x]
    if isinstance(x, (str, int, bool)) or x is None:
        return x
    return str(x)


def report_document(report) -> list:
    return [{"name": name, "passed": c.passed, "witnesses": _jsonable(c.witnesses)}
            for name, c in sorted(report.checks.items())]


class ValidationFailed(Exception):
    def __init__(self, checks):
        super().__init__("system failed validation")
        self.checks = checks


# ---------------------------------------------------------------------------
# inputs
# ---------------------------------------------------------------------------


_PARAM_NAMES = {"lambda": "lambda", "n": "n", "d": "d", "representation": "representation"}


def parse_model(text: str) -> ModelSpec:
    family, _, rest = text.partition(":")
    try:
        fam = Family(family)
    except ValueError as exc:
        raise ParseError(f"unknown model family {family!r}") from exc
    params = {}
    for item in filter(None, rest.split(",")):
        key, sep, value = item.partition("=")
        if not sep or key not in _PARAM_NAMES:
            raise ParseError(f"bad model parameter {item!r}")
        if key == "representation":
            params[key] = value
        elif key == "lambda":
            params[key] = _parse_num(value)
        else:
            try:
                params[key] = int(value)
            except ValueError as exc:
                raise ParseError(f"{key} must be an integer, got {value!r}") from exc
    return ModelSpec(fam, params)


def _read_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def load_system(ref: str) -> System:
    """A system from a document path or a model string."""
    if os.path.exists(ref):
        return load_system_document(_read_json(ref))
    return build(parse_model(ref))


def _digest(ref: str) -> str:
    if os.path.exists(ref):
        with open(ref, "rb") as fh:
            return "sha256:" + hashlib.sha256(fh.read()).hexdigest()
    return "model:" + ref


# ---------------------------------------------------------------------------
# named joint states
# ---------------------------------------------------------------------------


NAMED_STATES = {
    "octahedron-entangled": spekkens_entangled_state,
    "counterexample": counterexample_state,
}
# short aliases kept for compatibility with existing command lines
NAMED_STATES["eq31"] = NAMED_STATES["octahedron-entangled"]
NAMED_STATES["eq28"] = NAMED_STATES["counterexample"]


def load_state_ref(ref: str, system: Optional[System] = None, lam=None) -> JointState:
    if ref == "phi":
        if system is None:
            raise ParseError("state 'phi' needs a model")
        return maximally_entangled(system, lam)
    if ref in NAMED_STATES:
        return NAMED_STATES[ref]()
    if not os.path.exists(ref):
        raise ParseError(f"unknown state {ref!r}")
    return load_joint_state(_read_json(ref))


def load_measurements(path: str, ua: Sequence, ub: Sequence) -> tuple:
    """``{"A": [e_A0, e_A1], "B": [e_B0, e_B1]}``; each entry is the first
    effect of a binary measurement ``{e, u - e}``."""
    doc = _read_json(path)
    try:
        a, b = doc["A"], doc["B"]
        if len(a) != 2 or len(b) != 2:
            raise NotAMeasurement("need exactly two measurements per side")
        return (tuple(bell.Measurement.binary(_parse_vec(e), ua) for e in a)
                + tuple(bell.Measurement.binary(_parse_vec(e), ub) for e in b))
    except (KeyError, TypeError) as exc:
        raise ParseError(f"malformed measurement file: {exc}") from exc


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def _result(command: str, inputs: dict, outputs: dict, started: float) -> dict:
    return {"schema_version": SCHEMA_VERSION, "command": command, "inputs": inputs,
            "outputs": outputs, "timing": {"seconds": round(time.perf_counter() - started, 6)}}


def _emit(doc, out: Optional[str]) -> None:
    text = doc if isinstance(doc, str) else json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _model_from_args(args) -> ModelSpec:
    params = {}
    if args.lam is not None:
        params["lambda"] = _parse_num(args.lam)
    if args.n is not None:
        params["n"] = args.n
    if args.d is not None:
        params["d"] = args.d
    if args.representation is not None:
        params["representation"] = args.representation
    try:
        return ModelSpec(Family(args.family), params)
    except ValueError as exc:
        raise ParseError(f"unknown model family {args.family!r}") from exc


def cmd_model(args) -> int:
    system = build(_model_from_args(args))
    if args.self_dualize:
        system = self_dualize(system).system
    _emit(system_document(system), args.out)
    return EXIT_OK


def cmd_tensor(args) -> int:
    started = time.perf_counter()
    a, b = load_system(args.a), load_system(args.b)
    joint = tensor(a, b, args.kind)
    rays = joint.state_cone.rays
    outputs = {"kind": joint.kind.value, "shape": list(joint.shape),
               "count": len(rays), "rays": [_nums(r) for r in rays]}
    if args.classify:
        if args.symmetries:
            gens = [linalg.matrix([_parse_vec(row) for row in g])
                    for g in _read_json(args.symmetries)]
            sym = gens
        else:
            sa, sb = symmetries_for(a), symmetries_for(b)
            if sa is None or sb is None:
                raise ParseError("no built-in symmetries for these systems; pass --symmetries")
            sym = (list(sa), list(sb))
        classes = classify_extremals(joint, sym, references=reference_states(a, b))
        outputs["orbits"] = [{"label": c.label, "size": c.orbit_size,
                              "representative": joint_state_document(c.representative)}
                             for c in classes.classes]
    inputs = {"A": _digest(args.a), "B": _digest(args.b)}
    _emit(_result("tensor", inputs, outputs, started), args.out)
    return EXIT_OK


def _chsh_document(r: bell.ChshResult) -> dict:
    return {"S": _num(r.S),
            "correlators": _nums(r.correlators),
            "state": joint_state_document(r.state),
            "measurements": [[_nums(m.e0), _nums(m.e1)] for m in r.measurements]}


def _joint_for(spec: ModelSpec, kind):
    s = build(spec)
    return s, tensor(s, s, kind)


def cmd_chsh(args) -> int:
    started = time.perf_counter()
    base = parse_model(args.model)
    if args.lam is not None:
        base = ModelSpec(base.family, {**base.params, "lambda": _parse_num(args.lam)})
    if args.sweep_lambda:
        if not args.maximize:
            raise ParseError("--sweep-lambda needs --maximize")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["lambda", "S"])
        for item in args.sweep_lambda.split(","):
            lam = _parse_num(item.strip())
            spec = ModelSpec(base.family, {**base.params, "lambda": lam})
            if base.family == Family.NOISY_BOXWORLD and lam == 1:
                spec = ModelSpec(Family.BOXWORLD)
            _, joint = _joint_for(spec, args.kind)
            writer.writerow([_num(lam), _num(bell.max_chsh(joint).S)])
        _emit(buf.getvalue(), args.out)
        return EXIT_OK
    system, joint = None, None
    if args.maximize:
        system, joint = _joint_for(base, args.kind)
        result = bell.max_chsh(joint, include_trivial=args.include_trivial)
    else:
        if not (args.state and args.measurements):
            raise ParseError("give --maximize, or both --state and --measurements")
        system = build(base)
        state = load_state_ref(args.state, system, base.params.get("lambda"))
        ms = load_measurements(args.measurements, system.unit, system.unit)
        for m in ms:
            m.check_allowed(system)
        result = bell.chsh(state, *ms)
    inputs = {"model": args.model}
    if args.state:
        inputs["state"] = _digest(args.state)
    if args.measurements:
        inputs["measurements"] = _digest(args.measurements)
    _emit(_result("chsh", inputs, _chsh_document(result), started), args.out)
    return EXIT_OK


def _check(name: str, passed: bool, witness=None) -> dict:
    return {"name": name, "passed": bool(passed), "witnesses": witness or []}


def _suite_consistency(system: System, args) -> list:
    sym = symmetries_for(system) or ()
    return report_document(validate_system(system, sym))


def _suite_selfdual(system: System, args) -> list:
    checks = [_check("strongly-self-dual", is_strongly_self_dual_rep(system))]
    pairs = check_bit_symmetry_pairs(system)
    missing = [_nums(p.state) for p in pairs if not p.found]
    checks.append(_check("distinguishable-partners", not missing, missing))
    sym = symmetries_for(system)
    if sym is not None and system.exact and not missing:
        checks.append(_check("bit-symmetry", pairs_transitive(system, sym)))
    return checks


def _suite_nosignal(system: System, args) -> list:
    if not args.state:
        raise ParseError("the nosignal suite needs --state")
    w = load_state_ref(args.state, system, system.spec.params.get("lambda") if system.spec else None)
    if args.effect:
        effects = [_parse_vec(json.loads(args.effect))]
    else:
        effects = [e for e in system.effect_vertices]
    checks = []
    for side in ("A", "B"):
        ok = True
        for e in effects:
            e = vec(e)
            ok = ok and check_no_signalling(w, [e, tuple(u - x for u, x in zip(system.unit, e))],
                                            side, system.unit)
        checks.append(_check(f"no-signalling-{side}", ok))
    return checks


def _suite_theorem3(system: System, args) -> list:
    if not args.state:
        raise ParseError("the theorem3 suite needs --state")
    w = load_state_ref(args.state, system, system.spec.params.get("lambda") if system.spec else None)
    joint = tensor(system, system, TensorKind.MAX_GENERALIZED)
    res = membership(joint, w)
    witnesses = [{"side": v.side, "effect": _nums(v.effect),
                  "conditional": _nums(v.conditional),
                  "normalized": _nums(v.normalized) if v.normalized is not None else None}
                 for v in res.violations]
    return [_check("generalized-max-membership", res.member, witnesses)]


SUITES = {
    "consistency": _suite_consistency,
    "selfdual": _suite_selfdual,
    "nosignal": _suite_nosignal,
    "theorem3": _suite_theorem3,
}


def cmd_check(args) -> int:
    started = time.perf_counter()
    system = load_system(args.system)
    checks = SUITES[args.suite](system, args)
    inputs = {"system": _digest(args.system)}
    if args.state:
        inputs["state"] = _digest(args.state)
    outputs = {"suite": args.suite, "checks": checks,
               "passed": all(c["passed"] for c in checks)}
    _emit(_result("check", inputs, outputs, started), args.out)
    return EXIT_OK if outputs["passed"] else EXIT_VALIDATION


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gptcone",
                                description="Generalized probabilistic theories with restricted effects.")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("model", help="build a model and write its system document")
    m.add_argument("family", choices=[f.value for f in Family])
    m.add_argument("--lambda", dest="lam")
    m.add_argument("--n", type=int)
    m.add_argument("--d", type=int)
    m.add_argument("--representation", choices=["standard", "orthant"])
    m.add_argument("--self-dualize", action="store_true")
    m.add_argument("-o", "--out")
    m.set_defaults(func=cmd_model)

    t = sub.add_parser("tensor", help="compose two systems")
    t.add_argument("a", help="system document or model string")
    t.add_argument("b", help="system document or model string")
    t.add_argument("--kind", default=TensorKind.MAX_GENERALIZED.value,
                   choices=[k.value for k in TensorKind])
    t.add_argument("--classify", action="store_true")
    t.add_argument("--symmetries", help="JSON list of generator matrices")
    t.add_argument("-o", "--out")
    t.set_defaults(func=cmd_tensor)

    c = sub.add_parser("chsh", help="CHSH value of a state or its maximum")
    c.add_argument("--model", required=True, help="model string, e.g. noisy-boxworld:lambda=1/2")
    c.add_argument("--lambda", dest="lam")
    c.add_argument("--kind", default=TensorKind.MAX_GENERALIZED.value,
                   choices=[k.value for k in TensorKind])
    c.add_argument("--maximize", action="store_true")
    c.add_argument("--include-trivial", action="store_true",
                   help="also optimize over the measurements {0, u}")
    c.add_argument("--sweep-lambda", help="comma-separated noise values; writes CSV")
    c.add_argument("--state", help="octahedron-entangled, counterexample, phi or a joint-state JSON file")
    c.add_argument("--measurements", help="JSON file {\"A\": [e0, e1], \"B\": [e0, e1]}")
    c.add_argument("-o", "--out")
    c.set_defaults(func=cmd_chsh)

    k = sub.add_parser("check", help="run a check suite")
    k.add_argument("system", help="system document or model string")
    k.add_argument("--suite", required=True, choices=sorted(SUITES))
    k.add_argument("--state", help="octahedron-entangled, counterexample, phi or a joint-state JSON file")
    k.add_argument("--effect", help="JSON effect array for the nosignal suite")
    k.add_argument("-o", "--out")
    k.set_defaults(func=cmd_check)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationFailed as exc:
        _emit({"schema_version": SCHEMA_VERSION, "validation": exc.checks}, None)
        print("validation failed", file=sys.stderr)
        return EXIT_VALIDATION
    except (GptConeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
