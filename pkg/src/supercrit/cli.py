"""Command-line entry point: ``supercrit <command> --config <path> [flags]``.

Exit status: 0 on success, 2 for configuration or hypothesis errors, 3 when
the solver does not converge.  Artifacts are assembled in memory and written
only after a command succeeds, so a failed run leaves no partial output.
"""

from __future__ import annotations

import argparse
import copy
import json
import logging
import os
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import export

log = logging.getLogger("supercrit")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3
COMMANDS = ("verify-algebra", "reduce", "solve", "certify", "lift", "oracle")

DEFAULTS = {
    "seed": 0,
    "out": "supercrit-out",
    "problem": {"type": "plain", "p": 4.0, "a": 0.0, "K": "one", "dilation": "oracle"},
    "solver": {"h": 1 / 64, "tol_opt": 1e-8, "max_iterations": 400, "path_segments": 64,
               "mode": "positive", "axis": 0, "symmetry": "none", "polish": True,
               "cut_cell": True, "linear_solver": "auto"},
    "certify": {"theorem": "1.2"},
    "lift": {"samples": 100, "h_fd": 1e-4, "margin": 3.0},
    "oracle": {"kind": "dilation", "d": 2, "radius": 1.0, "tol": 1e-10},
    "algebra": {"samples": 10000},
}


class ConfigError(ValueError):
    pass


class NotConverged(RuntimeError):
    pass


# -- configuration ----------------------------------------------------------------------


def schema() -> dict:
    return json.loads(resources.files("supercrit").joinpath("config.schema.json").read_text())


def _line_of(text: str, path) -> int:
    """Best-effort source line of a JSON path, located by scanning for its keys."""
    pos = 0
    for key in path:
        if isinstance(key, str):
            found = text.find(json.dumps(key), pos)
            if found < 0:
                break
            pos = found
    return text.count("\n", 0, pos) + 1


def load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    validate(data, text, path)
    return data


def validate(data, text: str = "", source: str = "<config>") -> None:
    import jsonschema

    validator = jsonschema.Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.path)))
    if errors:
        err = errors[0]
        path = list(err.path)
        if err.validator == "additionalProperties":
            extra = [k for k in err.instance if k not in err.schema.get("properties", {})]
            path = path + extra[:1]
        line = _line_of(text, path) if text else 1
        where = "/".join(map(str, err.path)) or "<root>"
        raise ConfigError(f"{source}:{line}: {where}: {err.message}")


def resolve(config: dict, args) -> dict:
    """Merge defaults, the config file and command-line overrides."""
    out = copy.deepcopy(DEFAULTS)
    for key, value in config.items():
        if isinstance(value, dict):
            out.setdefault(key, {}).update(value)
        else:
            out[key] = value
    out["command"] = args.command
    if args.out is not None:
        out["out"] = args.out
    if args.seed is not None:
        out["seed"] = args.seed
    if args.h is not None:
        out["solver"]["h"] = args.h
    if args.p is not None:
        out["problem"]["p"] = args.p
    validate(out, source="<resolved>")
    return out


# -- builders ---------------------------------------------------------------------------


def _profile(cfg):
    from .geometry import make_profile

    if "profile" not in cfg:
        raise ConfigError("this command needs a 'profile' section")
    params = dict(cfg["profile"])
    kind = params.pop("kind")
    density = params.pop("density", 1.0)
    try:
        return make_profile(kind, density=density, **params)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"profile: {exc}") from exc


def _K(name, dim):
    if name == "one":
        return None, None
    if name == "first_squared":
        def K(x):
            return x[:, 0] ** 2

        def gradK(x):
            g = np.zeros_like(x)
            g[:, 0] = 2 * x[:, 0]
            return g

        return K, gradK
    raise ConfigError(f"unknown K {name!r}")


def _model(name):
    from .algebra import NOMINAL_DILATION, ORACLE_DILATION

    return ORACLE_DILATION if name == "oracle" else NOMINAL_DILATION


def _problem(cfg):
    from .reduction import RotationalSpec, hopf_reduce, plain_problem, symmetry_reduce

    pc = cfg["problem"]
    prof = _profile(cfg)
    p = float(pc["p"])
    kind = pc["type"]
    if kind == "plain":
        return plain_problem(prof, p)
    if kind == "hopf":
        return hopf_reduce(prof, pc["a"], p, _model(pc["dilation"]))
    if "ks" not in pc or "N" not in pc:
        raise ConfigError("rotational problems need 'ks' and 'N'")
    K, gradK = _K(pc["K"], prof.dimension)
    spec = RotationalSpec(tuple(pc["ks"]), pc["N"], prof, K, gradK)
    return symmetry_reduce(spec, p)


def _options(cfg):
    from .solver.variational import SolverOptions

    sc = cfg["solver"]
    return SolverOptions(h=sc["h"], tol_opt=sc["tol_opt"], max_iterations=sc["max_iterations"],
                         path_segments=sc["path_segments"], polish=sc["polish"], seed=cfg["seed"],
                         cut_cell=sc["cut_cell"], linear_solver=sc["linear_solver"],
                         symmetry=sc["symmetry"])


def _solve(cfg, problem):
    from .solver.variational import mountain_pass_solve, sign_changing_solve

    opts = _options(cfg)
    if cfg["solver"]["mode"] == "sign_changing":
        return sign_changing_solve(problem, opts, axis=cfg["solver"]["axis"])
    return mountain_pass_solve(problem, opts)


def _field_artifacts(report, prefix="solution"):
    arts = {f"{prefix}.json": export.json_bytes(report.to_json()),
            f"{prefix}.csv": export.field_csv(report.field)}
    if report.field.grid.dim in (2, 3):
        arts[f"{prefix}.pgm"] = export.field_pgm(report.field)
    return arts


# -- commands ---------------------------------------------------------------------------


def cmd_verify_algebra(cfg):
    from .algebra import DIMS, NAMES, cd_mul, hopf_map_array, oracle_dilation_constant

    rng = np.random.default_rng(cfg["seed"])
    n = cfg["algebra"]["samples"]
    rows = {}
    for dim in DIMS:
        z = rng.normal(size=(n, 2 * dim))
        sq = np.sum(z * z, axis=1)
        hop = np.linalg.norm(hopf_map_array(z), axis=1)
        a, b = z[:, :dim], z[:, dim:]
        prod = np.linalg.norm(cd_mul(a, b), axis=1)
        ab = np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
        rows[NAMES[dim]] = {"samples": n,
                            "hopf_norm_max_rel_error": float(np.max(np.abs(hop - sq) / sq)),
                            "norm_multiplicativity_max_rel_error": float(np.max(np.abs(prod - ab) / ab))}
    result = {"algebras": rows, "dilation_constant_oracle": oracle_dilation_constant()}
    return {"algebra.json": export.json_bytes(result)}


def cmd_reduce(cfg):
    from .reduction import critical_exponent

    problem = _problem(cfg)
    meta = dict(problem.meta or {})
    info = {"label": problem.label, "dimension": problem.dimension, "p": problem.p, "meta": meta}
    if problem.label == "rotational":
        info["critical_exponent"] = critical_exponent(meta["N"], sum(meta["ks"]))
    elif problem.label == "hopf":
        N = 2 * meta["algebra_dim"]
        info["critical_exponent"] = critical_exponent(N, meta["algebra_dim"] - 1)
    elif problem.dimension >= 3:
        info["critical_exponent"] = critical_exponent(problem.dimension, 0)
    pts = problem.domain.points
    samples = {"points": pts, "a": problem.weight(pts), "Q": problem.coefficient(pts)}
    info["coefficient_ranges"] = {k: [float(np.min(samples[k])), float(np.max(samples[k]))]
                                  for k in ("a", "Q")}
    return {"reduced.json": export.json_bytes(info),
            "profile.json": export.json_bytes(problem.domain.to_json())}


def cmd_solve(cfg):
    problem = _problem(cfg)
    report = _solve(cfg, problem)
    arts = _field_artifacts(report)
    arts["history.csv"] = export.rows_csv(
        ["iteration", "energy", "sobolev_gradient"],
        [(h["iteration"], h["energy"], h["sobolev_gradient"]) for h in report.history])
    if not report.converged:
        raise NotConverged(f"solver did not converge: residual {report.residual_sup:.3e}")
    return arts


def cmd_certify(cfg):
    from .certify import certify_hopf, certify_theorem1, certify_theorem4
    from .reduction import RotationalSpec

    cc, pc = cfg["certify"], cfg["problem"]
    p = float(pc["p"])
    theorem = cc["theorem"]
    if theorem == "1.3":
        for key in ("taus", "epsilon"):
            if key not in cc:
                raise ConfigError(f"certify 1.3 needs '{key}'")
        if "ks" not in pc or "N" not in pc:
            raise ConfigError("certify 1.3 needs problem 'ks' and 'N'")
        cert, prof = certify_theorem4(pc["ks"], cc["taus"], cc["epsilon"], p, pc["N"])
        return {"certificate.json": export.json_bytes(cert.to_json()),
                "profile.json": export.json_bytes(prof.to_json())}
    prof = _profile(cfg)
    if theorem == "1.2":
        if "ks" not in pc or "N" not in pc:
            raise ConfigError("certify 1.2 needs problem 'ks' and 'N'")
        lo, hi = prof.bbox
        K, gradK = _K(pc["K"], prof.dimension)
        spec = RotationalSpec(tuple(pc["ks"]), pc["N"], prof, K, gradK)
        cert = certify_theorem1(spec, p, cc.get("t0", lo[0]), cc.get("t1", hi[0]), seed=cfg["seed"])
    else:
        if "algebra_dim" not in cc or "n" not in cc:
            raise ConfigError("certify 1.6 needs 'algebra_dim' and 'n'")
        cert = certify_hopf(prof, cc["n"], p, cc["algebra_dim"], _model(pc["dilation"]),
                            cc.get("t0"), cc.get("t1"), seed=cfg["seed"])
    return {"certificate.json": export.json_bytes(cert.to_json())}


def cmd_lift(cfg):
    from .reduction import residual_transfer

    if cfg["problem"]["type"] != "hopf":
        raise ConfigError("lift needs a Hopf-reduced problem (problem.type = 'hopf')")
    problem = _problem(cfg)
    report = _solve(cfg, problem)
    arts = _field_artifacts(report, "reduced")
    if not report.converged:
        raise NotConverged("reduced solve did not converge")
    lc = cfg["lift"]
    z = _lift_points(problem.domain, lc["samples"], lc["margin"] * cfg["solver"]["h"], cfg["seed"])
    rt = residual_transfer(report.field, problem, z, h_fd=lc["h_fd"])
    err = rt.relative_error
    result = {"samples": len(z), "h_fd": lc["h_fd"], "max_relative_error": float(err.max()),
              "median_relative_error": float(np.median(err)), "solve": report.to_json()}
    arts["lift.json"] = export.json_bytes(result)
    arts["lift.csv"] = export.rows_csv(
        [f"z{i}" for i in range(z.shape[1])] + ["lifted", "predicted"],
        np.column_stack([z, rt.lifted, rt.predicted]))
    return arts


def _lift_points(prof, count, margin, seed):
    """Random z with pi(z) inside U and farther than ``margin`` from its boundary samples."""
    from .algebra import hopf_map_array

    rng = np.random.default_rng(seed)
    r_max = float(np.max(np.linalg.norm(prof.points, axis=1)))
    zdim = 2 * (prof.dimension - 1)
    found = []
    total = 0
    while total < count:
        u = rng.normal(size=(4 * count, zdim))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        z = u * np.sqrt(rng.uniform(0, r_max, size=(len(u), 1)))
        x = hopf_map_array(z)
        ok = prof.contains(x)
        z, x = z[ok], x[ok]
        dist = np.array([np.min(np.linalg.norm(prof.points - xi, axis=1)) for xi in x])
        z = z[dist > margin]
        found.append(z)
        total += len(z)
    return np.concatenate(found)[:count]


def cmd_oracle(cfg):
    from .algebra import oracle_dilation_constant
    from .solver.radial import shoot_radial

    oc = cfg["oracle"]
    if oc["kind"] == "dilation":
        return {"oracle.json": export.json_bytes({"kind": "dilation",
                                                  "dilation_constant": oracle_dilation_constant()})}
    sol = shoot_radial(oc["d"], float(cfg["problem"]["p"]), tol=oc["tol"], radius=oc["radius"])
    result = {"kind": "radial", "d": sol.d, "p": sol.p, "radius": sol.radius,
              "centerValue": sol.center_value, "boundaryMiss": sol.boundary_miss, "shots": sol.shots}
    return {"oracle.json": export.json_bytes(result),
            "profile.csv": export.rows_csv(["r", "v"], np.column_stack([sol.r, sol.v]))}


HANDLERS = {"verify-algebra": cmd_verify_algebra, "reduce": cmd_reduce, "solve": cmd_solve,
            "certify": cmd_certify, "lift": cmd_lift, "oracle": cmd_oracle}


# -- driver -----------------------------------------------------------------------------


def write_artifacts(out: str, artifacts: dict) -> None:
    d = Path(out)
    try:
        d.mkdir(parents=True, exist_ok=True)
        for name, data in sorted(artifacts.items()):
            (d / name).write_bytes(data)
    except OSError as exc:
        raise ConfigError(f"cannot write artifacts to {out}: {exc.strerror}") from exc


def _limit_threads():
    n = os.environ.get("SUPERCRIT_THREADS")
    if not n:
        return None
    from threadpoolctl import threadpool_limits

    try:
        return threadpool_limits(limits=int(n))
    except ValueError as exc:
        raise ConfigError("SUPERCRIT_THREADS must be a positive integer") from exc


def run(command: str, config_path: str, out=None, seed=None, h=None, p=None) -> int:
    args = argparse.Namespace(command=command, config=config_path, out=out, seed=seed, h=h, p=p)
    return _run(args)


def _run(args) -> int:
    from .certify import HypothesisError
    from .solver.grid import ConfigurationError
    from .solver.radial import NoSolutionError

    try:
        _limit_threads()
        raw = load_config(args.config)
        if raw.get("command") != args.command:
            raise ConfigError(f"{args.config}: config command {raw.get('command')!r} "
                              f"does not match {args.command!r}")
        cfg = resolve(raw, args)
        artifacts = HANDLERS[args.command](cfg)
    except NotConverged as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigError, HypothesisError, ConfigurationError, NoSolutionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    artifacts["config.json"] = export.json_bytes(cfg)
    try:
        write_artifacts(cfg["out"], artifacts)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for name in sorted(artifacts):
        print(os.path.join(cfg["out"], name))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="supercrit", description=__doc__.split("\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", help="output directory (overrides the config)")
    ap.add_argument("--seed", type=int, help="random seed (overrides the config)")
    ap.add_argument("--h", type=float, help="grid spacing (overrides the config)")
    ap.add_argument("--p", type=float, help="exponent (overrides the config)")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    return _run(args)


if __name__ == "__main__":
    sys.exit(main())
