"""Command-line interface.

Exit codes: 0 ok, 2 invalid input, 3 model not admissible, 4 statistical
failure, 5 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import io
import json
import logging
import math
import sys
import warnings

import numpy as np

from . import analysis, lhv, povm, quantum
from .errors import InvalidRange, NotAdmissible, OptimizerDidNotConverge, ProtocolMismatch, SingletLhvError

log = logging.getLogger("singlet_lhv")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NOT_ADMISSIBLE = 3
EXIT_STATISTICAL = 4
EXIT_IO = 5

MC_SIGMAS = 5.0
EXACT_TOL = 1e-12
SWEEP_HEADER = ("kappa", "r_alice_pct", "r_bob_pct")


class CliError(Exception):
    def __init__(self, code, report):
        super().__init__(report.get("reason", ""))
        self.code = code
        self.report = report


# --- argument parsing --------------------------------------------------------


def _floats(text: str, n: int, what: str) -> list[float]:
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"{what}: expected {n} comma-separated numbers, got {text!r}")
    if len(vals) != n:
        raise argparse.ArgumentTypeError(f"{what}: expected {n} comma-separated numbers, got {text!r}")
    return vals


def direction_arg(text: str) -> list[float]:
    return _floats(text, 3, "direction")


def effect_arg(text: str) -> list[float]:
    return _floats(text, 5, "effect a0,mu,x,y,z")


def pair_arg(text: str) -> list[float]:
    return _floats(text, 2, "bias,unsharpness pair")


def order_arg(text: str) -> tuple[int, int]:
    a, b = _floats(text, 2, "quadrature order")
    return int(a), int(b)


def _direction(vec) -> povm.Direction:
    n = math.sqrt(sum(v * v for v in vec))
    if abs(n - 1.0) > 1e-6 and n >= povm.ZERO_NORM:
        log.warning("direction %s has norm %.6g; normalizing", ",".join(map(repr, vec)), n)
    return povm.Direction.of(vec)


def _effect(vals) -> povm.Effect:
    a0, mu, *vec = vals
    return povm.make_effect(a0, mu, _direction(vec))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default=None, help="output format")
    common.add_argument("--seed", type=int, default=0, help="random seed (unsigned 64-bit)")
    common.add_argument("--out", default=None, help="write output to this path instead of stdout")
    common.add_argument("--no-timestamp", action="store_true", help="omit the timestamp field")

    p = argparse.ArgumentParser(
        prog="singlet-lhv",
        description="Singlet statistics and local hidden-variable models for restricted qubit POVMs.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", parents=[common], help="check an effect against the parameter triangle")
    v.add_argument("--a0", type=float, required=True)
    v.add_argument("--mu", type=float, required=True)
    v.add_argument("--dir", type=direction_arg, required=True, metavar="X,Y,Z")

    q = sub.add_parser("qstats", parents=[common], help="singlet joint distribution for two effects")
    q.add_argument("--alice", type=effect_arg, required=True, metavar="A0,MU,X,Y,Z")
    q.add_argument("--bob", type=effect_arg, required=True, metavar="B0,MU,X,Y,Z")

    ver = sub.add_parser("verify", parents=[common], help="compare quantum and LHV statistics")
    ver.add_argument("--alice", type=effect_arg, required=True, metavar="A0,MU,X,Y,Z")
    ver.add_argument("--bob", type=effect_arg, required=True, metavar="B0,MU,X,Y,Z")
    model = ver.add_mutually_exclusive_group(required=True)
    model.add_argument("--kappa", type=float)
    model.add_argument("--eta", type=float)
    ver.add_argument("--protocol-mu", type=float, default=None,
                     help="Alice unsharpness fixed by the eta protocol (default: Alice's mu)")
    ver.add_argument("--samples", type=int, default=10**6)
    ver.add_argument("--order", type=order_arg, default=(64, 128), metavar="NTHETA,NPHI")
    ver.add_argument("--workers", type=int, default=1)

    sw = sub.add_parser("sweep", parents=[common], help="restriction percentages over a kappa grid")
    sw.add_argument("--kappa-min", type=float, default=0.1)
    sw.add_argument("--kappa-max", type=float, default=2.0)
    sw.add_argument("--steps", type=int, default=191)

    ch = sub.add_parser("chsh", parents=[common], help="maximize CHSH over measurement directions")
    for name in ("alice0", "alice1", "bob0", "bob1"):
        ch.add_argument(f"--{name}", type=pair_arg, required=True, metavar="T0,MU")
    ch.add_argument("--restarts", type=int, default=32)

    jm = sub.add_parser("jm", parents=[common], help="joint measurability of two unsharp spin observables")
    jm.add_argument("--mu1", type=float, required=True)
    jm.add_argument("--dir1", type=direction_arg, required=True, metavar="X,Y,Z")
    jm.add_argument("--mu2", type=float, required=True)
    jm.add_argument("--dir2", type=direction_arg, required=True, metavar="X,Y,Z")
    return p


# --- commands ----------------------------------------------------------------


def _effect_dict(e: povm.Effect) -> dict:
    return {"a0": e.a0, "mu": e.mu, "dir": list(e.dir)}


def cmd_validate(args) -> dict:
    report = {"command": "validate", "a0": args.a0, "mu": args.mu, "dir": list(args.dir)}
    try:
        e = povm.make_effect(args.a0, args.mu, _direction(args.dir))
    except SingletLhvError as exc:
        report.update(valid=False, error=type(exc).__name__, reason=getattr(exc, "reason", "") or str(exc))
        raise CliError(EXIT_INVALID, report)
    sf = povm.spectral_decompose(e)
    report.update(
        valid=True,
        dir=list(e.dir),
        projective=e.is_projective,
        unsharp_spin=e.is_unsharp_spin,
        spectral={"weight_plus": sf.weight_plus, "weight_minus": sf.weight_minus, "axis": list(sf.axis)},
    )
    return report


def _scenario(args) -> quantum.Scenario:
    try:
        return quantum.Scenario(_effect(args.alice), _effect(args.bob))
    except SingletLhvError as exc:
        raise CliError(EXIT_INVALID, {"command": args.command, "error": type(exc).__name__, "reason": str(exc)})


def cmd_qstats(args) -> dict:
    s = _scenario(args)
    joint = quantum.singlet_joint(s)
    oracle = quantum.singlet_joint_oracle(s)
    return {
        "command": "qstats",
        "alice": _effect_dict(s.alice),
        "bob": _effect_dict(s.bob),
        "joint": joint.as_dict(),
        "correlator": quantum.correlator(s),
        "oracle_max_abs_diff": joint.max_abs_diff(oracle),
    }


def _model(args, s):
    if args.kappa is not None:
        m = lhv.KappaModel(args.kappa)
        label, alt = m.labels
        return m, {"family": "kappa", "kappa": m.kappa, "label": label, "alt_label": alt}
    mu_p = s.alice.mu if args.protocol_mu is None else args.protocol_mu
    m = lhv.EtaModel(args.eta, mu_p)
    return m, {"family": "eta", "eta": m.eta, "mu_a_protocol": m.mu_a_protocol}


def cmd_verify(args) -> dict:
    s = _scenario(args)
    base = {"command": "verify", "alice": _effect_dict(s.alice), "bob": _effect_dict(s.bob)}
    try:
        model, model_info = _model(args, s)
    except ValueError as exc:
        raise CliError(EXIT_INVALID, {**base, "error": "InvalidModel", "reason": str(exc)})
    base["model"] = model_info
    try:
        lhv.require_admissible(model, s)
    except ProtocolMismatch as exc:
        raise CliError(EXIT_NOT_ADMISSIBLE, {**base, "error": "ProtocolMismatch", "reason": str(exc)})
    except NotAdmissible as exc:
        raise CliError(EXIT_NOT_ADMISSIBLE, {
            **base, "error": "NotAdmissible", "violations": list(exc.violations), "reason": str(exc),
        })
    if args.samples < 1:
        raise CliError(EXIT_INVALID, {**base, "error": "ZeroSamples", "reason": "samples must be >= 1"})

    qm = quantum.singlet_joint(s)
    exact = lhv.exact_lhv_joint(model, s)
    try:
        quad = lhv.quadrature_lhv_joint(model, s, args.order)
    except ValueError as exc:
        raise CliError(EXIT_INVALID, {**base, "error": "InvalidOrder", "reason": str(exc)})
    sim = lhv.simulate_lhv(model, s, args.samples, args.seed, workers=args.workers)

    exact_err = qm.max_abs_diff(exact)
    z = []
    for est, se, ref in zip(sim.estimates.as_array(), sim.standard_errors, qm.as_array()):
        if se > 0:
            z.append(float((est - ref) / se))
        else:
            z.append(0.0 if abs(est - ref) <= EXACT_TOL else math.inf)
    mc_ok = all(abs(v) <= MC_SIGMAS for v in z)
    exact_ok = exact_err <= EXACT_TOL
    report = {
        **base,
        "rows": {
            "quantum": qm.as_dict(),
            "exact_lhv": exact.as_dict(),
            "quadrature_lhv": quad.as_dict(),
            "mc_lhv": sim.estimates.as_dict(),
            "mc_lhv_se": dict(zip(quantum.CELLS, sim.standard_errors)),
        },
        "exact_max_abs_diff": exact_err,
        "quadrature_max_abs_diff": exact.max_abs_diff(quad),
        "mc_z": dict(zip(quantum.CELLS, z)),
        "samples": sim.samples,
        "seed": sim.seed,
        "exact_ok": exact_ok,
        "mc_ok": mc_ok,
    }
    if not (exact_ok and mc_ok):
        report["error"] = "StatisticalFailure"
        raise CliError(EXIT_STATISTICAL, report)
    return report


def cmd_sweep(args) -> dict:
    try:
        rows = analysis.kappa_sweep(args.kappa_min, args.kappa_max, args.steps)
    except InvalidRange as exc:
        raise CliError(EXIT_INVALID, {"command": "sweep", "error": "InvalidRange", "reason": str(exc)})
    return {
        "command": "sweep",
        "rows": [{"kappa": r.kappa, "r_alice_pct": r.r_alice, "r_bob_pct": r.r_bob} for r in rows],
    }


def cmd_chsh(args) -> dict:
    alice = [args.alice0, args.alice1]
    bob = [args.bob0, args.bob1]
    try:
        for t0, mu in alice + bob:
            povm.make_effect(t0, mu, povm.Z)
    except SingletLhvError as exc:
        raise CliError(EXIT_INVALID, {"command": "chsh", "error": type(exc).__name__, "reason": str(exc)})
    if args.restarts < 1:
        raise CliError(EXIT_INVALID, {"command": "chsh", "error": "InvalidRestarts", "reason": "restarts must be >= 1"})
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", OptimizerDidNotConverge)
        res = quantum.chsh_max(alice, bob, restarts=args.restarts, seed=args.seed)
    for w in caught:
        log.warning("%s", w.message)
    interval = lhv.common_kappa(alice, bob)
    return {
        "command": "chsh",
        "value": res.value,
        "directions": {k: list(d) for k, d in zip(("alice0", "alice1", "bob0", "bob1"), res.directions)},
        "exceeds_local_bound": res.value > 2.0 + 1e-9,
        "reaches_quantum_max": res.value >= 2.0 * math.sqrt(2.0) - 1e-6,
        "kappa_model_exists": interval is not None,
        "kappa_interval": None if interval is None else [interval.lo, interval.hi],
        "regime": "local" if res.value <= 2.0 + 1e-9 else "nonlocal",
        "converged": res.converged,
        "restarts": args.restarts,
        "seed": args.seed,
    }


def cmd_jm(args) -> dict:
    report = {"command": "jm", "mu1": args.mu1, "dir1": list(args.dir1), "mu2": args.mu2, "dir2": list(args.dir2)}
    try:
        d1, d2 = _direction(args.dir1), _direction(args.dir2)
        verdict = povm.jointly_measurable(args.mu1, d1, args.mu2, d2)
    except SingletLhvError as exc:
        raise CliError(EXIT_INVALID, {**report, "error": type(exc).__name__, "reason": str(exc)})
    report.update(value=povm.joint_measurability_value(args.mu1, d1, args.mu2, d2), bound=2.0,
                  jointly_measurable=verdict)
    return report


COMMANDS = {
    "validate": cmd_validate,
    "qstats": cmd_qstats,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
    "chsh": cmd_chsh,
    "jm": cmd_jm,
}


# --- output ------------------------------------------------------------------


def _json_default(o):
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def to_json(report: dict) -> str:
    return json.dumps(report, indent=2, default=_json_default) + "\n"


def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return json.dumps(v)
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, (list, tuple)) and all(not isinstance(v, (dict, list)) for v in obj):
        yield prefix[:-1], ",".join(_fmt(v) for v in obj)
    elif isinstance(obj, (list, tuple)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix[:-1], _fmt(obj)


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if report.get("command") == "sweep" and "rows" in report:
        w.writerow(SWEEP_HEADER)
        for row in report["rows"]:
            w.writerow([_fmt(row[k]) for k in SWEEP_HEADER])
        return buf.getvalue()
    w.writerow(("key", "value"))
    for k, v in _flatten(report):
        w.writerow((k, v))
    return buf.getvalue()


def emit(report: dict, args) -> int:
    if not args.no_timestamp:
        report["timestamp"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    fmt = args.format or ("csv" if args.command == "sweep" else "json")
    text = to_csv(report) if fmt == "csv" else to_json(report)
    if args.out is None:
        sys.stdout.write(text)
        return EXIT_OK
    try:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        log.error("cannot write %s: %s", args.out, exc)
        return EXIT_IO
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if not 0 <= args.seed < 2**64:
            raise CliError(EXIT_INVALID, {"command": args.command, "error": "InvalidSeed",
                                          "reason": "seed must be an unsigned 64-bit integer"})
        report = COMMANDS[args.command](args)
        code = EXIT_OK
    except CliError as exc:
        report, code = exc.report, exc.code
    io_code = emit(report, args)
    return io_code or code


if __name__ == "__main__":
    sys.exit(main())
