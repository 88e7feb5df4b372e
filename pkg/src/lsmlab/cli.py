"""Command-line entry point: ``lsmlab <subcommand> ...``.

Every subcommand prints one JSON report (or writes it to ``--out``) and exits
0 when the check passes, 1 when it fails and 2 on bad input.
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io
from .convolve import (binomial_weights, convolve_grid, convolve_lattice, counterexample_search,
                       gaussian_kernel_grid, kernel_condition_check, make_product_kernel,
                       preservation_check)
from .lattice import GridFunction, LatticeFunction, restrict_to_lattice
from .lsm import check_lsm
from .models import DensityModel


class UsageError(Exception):
    pass


def _parse_alpha(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return np.inf
    if t in ("-inf", "-infinity"):
        return -np.inf
    return float(t)


def _floats(text: str) -> list:
    return [float(v) for v in text.split(",") if v.strip()]


def _emit(args, check: str, result, passed, params=None, tolerances=None) -> int:
    report = io.envelope(check, result, seed=args.seed, tolerances=tolerances or {"tol": args.tol},
                         params=params, passed=passed)
    text = io.dumps_report(report)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0 if passed else 1


def _tol(args, default: float) -> float:
    return default if args.tol is None else args.tol


# ------------------------------------------------------------------ subcommands


def cmd_check_lsm(args) -> int:
    f = io.load(args.file)
    if isinstance(f, DensityModel):
        raise UsageError("check-lsm needs a grid or lattice file")
    tol = _tol(args, 1e-9)
    rep = check_lsm(f, tol, args.method)
    return _emit(args, "check_lsm", rep, rep.passed, {"file": args.file, "method": args.method}, {"tol": tol})


def cmd_convolve(args) -> int:
    f, g = io.load(args.f), io.load(args.g)
    if isinstance(f, LatticeFunction) and isinstance(g, LatticeFunction):
        h = convolve_lattice(f, g)
    elif isinstance(f, GridFunction) and isinstance(g, GridFunction):
        h = convolve_grid(f, g)
    else:
        raise UsageError("convolve needs two lattice files or two grid files")
    target = args.output or args.out
    if not target:
        raise UsageError("convolve needs -o/--output for the result")
    io.save(h, target)
    args.out = None
    return _emit(args, "convolve", {"passed": True, "output": target, "shape": list(h.shape)}, True,
                 {"f": args.f, "g": args.g})


def cmd_verify_preservation(args) -> int:
    tol = _tol(args, 1e-7)
    f = io.load(args.f)
    separable = None
    params = {"f": args.f, "kernel": args.kernel, "eps": args.eps}
    if isinstance(f, DensityModel):
        lo, hi = args.box
        f = restrict_to_lattice(f, [lo] * f.dim, [hi] * f.dim, args.eps)
        params["box"] = [lo, hi]
    if args.kernel == "gaussian":
        if not isinstance(f, GridFunction):
            raise UsageError("the gaussian kernel needs a grid (or model) input")
        separable, truncated = gaussian_kernel_grid(f.spacing, f.dim)
        params["kernel_truncated_mass"] = truncated
        g = None
    elif args.kernel == "binomial":
        w = binomial_weights(args.binomial_n, 0.5)
        if isinstance(f, LatticeFunction):
            g, _ = make_product_kernel([LatticeFunction.from_values(w)] * f.dim)
        else:
            separable = [GridFunction((0.0,), f.spacing, w / f.spacing)] * f.dim
            g = None
    else:
        if not args.g:
            raise UsageError("--kernel file needs --g <file>")
        g = io.load(args.g)
    rep = preservation_check(f, g, tol=tol, method=args.method, separable=separable)
    return _emit(args, "verify_preservation", rep, rep.passed, params, {"tol": tol})


def cmd_counterexample(args) -> int:
    tol = _tol(args, 1e-12)
    found = counterexample_search(args.seed, args.trials, args.size, args.product_kernel, tol)
    result = {"found": found is not None, "trials": args.trials, "passed": True}
    if found is not None:
        f, g, rep = found
        result.update({"f": f.values, "g": g.values, "report": rep,
                       "kernel_condition": kernel_condition_check(g.values, tol=tol)})
    # finding a witness for general kernels is the expected outcome; with product
    # kernels a witness would contradict preservation
    passed = not (found is not None and args.product_kernel)
    result["passed"] = passed
    return _emit(args, "counterexample_search", result, passed,
                 {"size": args.size, "product_kernel": args.product_kernel}, {"tol": tol})


def _load_functions(spec: dict, base: Path):
    funcs = spec.get("functions")
    if not isinstance(funcs, list) or len(funcs) != 4:
        raise io.SchemaError("functions", "must be a list of four entries")
    out = []
    for k, item in enumerate(funcs):
        if isinstance(item, str):
            out.append(io.load(base / item))
        elif isinstance(item, dict):
            out.append(io.from_dict(item, f"functions[{k}]"))
        else:
            raise io.SchemaError(f"functions[{k}]", "must be a path or an object")
    return out


def cmd_fourfn(args) -> int:
    from . import fourfn

    path = Path(args.spec)
    spec = json.loads(path.read_text())
    fs = _load_functions(spec, path.parent)
    tol = _tol(args, 1e-8)
    samples = args.samples
    lower, upper = spec.get("lower"), spec.get("upper")
    lattice = all(isinstance(f, LatticeFunction) for f in fs)
    if not lattice and (lower is None or upper is None):
        raise io.SchemaError("lower", "models need a box given by 'lower' and 'upper'")
    params = {"variant": args.variant, "spec": str(path), "samples": samples}
    if args.variant == "ad":
        if lattice:
            hyp, concl = fourfn.check_ad_discrete(*fs, tol=tol)
        else:
            eps = float(spec.get("eps", 0.1))
            grids = [restrict_to_lattice(f, lower, upper, eps) for f in fs]
            hyp, concl = fourfn.check_ad_discrete(*(g.values for g in grids), tol=tol,
                                                  max_pairs=spec.get("max_pairs", 2_000_000), seed=args.seed)
            params["eps"] = eps
    elif args.variant == "cem":
        lam = float(spec.get("lambda", 0.5))
        hyp, concl = fourfn.check_cem(*fs, lam=lam, lower=lower, upper=upper, tol=tol,
                                      samples=samples, seed=args.seed)
        params["lambda"] = lam
    elif args.variant == "unified":
        alpha = _parse_alpha(str(spec.get("alpha", 1.0)))
        beta = _parse_alpha(str(spec.get("beta", 1.0)))
        t = float(spec.get("t", 0.5))
        hyp, concl = fourfn.check_unified(*fs, alpha=alpha, beta=beta, t=t, lower=lower, upper=upper,
                                          tol=tol, samples=samples, seed=args.seed)
        params.update({"alpha": str(alpha), "beta": str(beta), "t": t})
    else:
        inst = fourfn.FourFnInstance(*fs, lower=lower, upper=upper, r=float(spec.get("r", 0.5)),
                                     s=float(spec.get("s", 0.5)), t=float(spec.get("t", 0.5)),
                                     alpha=float(spec.get("alpha", 1.0)), beta=float(spec.get("beta", 1.0)),
                                     m=spec.get("m"))
        hyp, concl = fourfn.check_general_pl(inst, tol=tol, samples=samples, seed=args.seed)
        params.update({"r": inst.r, "s": inst.s, "t": inst.t, "m": inst.m,
                       "alpha": inst.alpha, "beta": inst.beta})
    # the conclusion is only asserted when the hypothesis holds
    passed = concl.passed if hyp.passed else False
    result = {"passed": passed, "hypothesis": hyp, "conclusion": concl,
              "conclusion_asserted": hyp.passed}
    return _emit(args, f"fourfn_{args.variant}", result, passed, params, {"tol": tol})


def cmd_transport(args) -> int:
    from . import transport as tr
    from .fourfn import MeanSpec

    nu1 = io.load_density1d(args.nu1)
    nu2 = io.load_density1d(args.nu2)
    params = {"action": args.action, "nu1": args.nu1, "nu2": args.nu2}
    curves = None
    if args.action == "map":
        tol = _tol(args, 1e-4)
        m = tr.monotone_map(nu1, nu2, args.samples)
        gap = m.fd_disagreement
        result = {"passed": gap <= tol, "fd_disagreement": gap,
                  "pushforward_error_second_moment": m.pushforward_error(lambda z: z * z)}
        curves = {"x": m.x, "T": m.T, "dT": m.dT, "dT_fd": m.dT_fd}
        passed = result["passed"]
    elif args.action == "pushforward":
        tol = _tol(args, 1e-6)
        alpha = _parse_alpha(args.alpha)
        if np.isinf(alpha):
            push = tr.minmax_pushforward(nu1, nu2)
            dens = push.lower if alpha < 0 else push.upper
            result = {"mass": dens.raw_mass, "entropy": tr.relative_entropy(dens), "mean": dens.mean()}
        else:
            dens, curve = tr.mean_pushforward(nu1, nu2, MeanSpec(alpha, args.s))
            result = {"mass": curve.raw_mass, "entropy": tr.relative_entropy(dens), "mean": dens.mean()}
            curves = {"x": curve.x, "H": curve.H, "dH": curve.dH, "T": curve.T}
        passed = abs(result["mass"] - 1.0) <= tol
        result["passed"] = passed
        params.update({"alpha": args.alpha, "s": args.s})
        if curves is None:
            curves = {"x": dens.nodes, "density": dens.values}
    elif args.action == "displacement":
        tol = _tol(args, 1e-6)
        rep = tr.displacement_convexity_check(nu1, nu2, tol)
        push = tr.minmax_pushforward(nu1, nu2)
        curves = {"x": push.lower.nodes, "n_minus": push.lower.values, "n_plus": push.upper.values}
        result, passed = rep, rep.passed
    elif args.action == "duality":
        tol = _tol(args, 1e-8)
        logn = lambda z: np.log(np.maximum(nu1(z), 1e-300))
        rep = tr.log_laplace_duality_check(logn, nu1.lower, nu1.upper, [nu2], n=len(nu1.nodes), tol=tol)
        result, passed = rep, rep.passed
    else:
        tol = _tol(args, 1e-8)
        if not (args.nu3 and args.nu4):
            raise UsageError("transport audit needs --nu3 and --nu4")
        fs = [nu1, nu2, io.load_density1d(args.nu3), io.load_density1d(args.nu4)]
        m = args.s * args.r + (1 - args.r) * args.t
        audit = tr.transport_fourfn_audit(*fs, nu1.lower, nu1.upper, mode=args.mode, m=m, r=args.r,
                                          alpha=_parse_alpha(args.alpha), s=args.s,
                                          beta=_parse_alpha(args.beta), t=args.t)
        passed = abs(audit["closure_error"]) <= 1e-6 and audit["total"] >= -tol
        result = {"passed": passed, **audit}
    if args.emit_curves and curves is not None:
        io.write_curves(args.emit_curves, curves)
    return _emit(args, f"transport_{args.action}", result, passed, params, {"tol": tol})


def _lambda_grid(text: str) -> list:
    try:
        lo, hi, n = text.split(":")
        return list(np.linspace(float(lo), float(hi), int(n)))
    except ValueError:
        raise UsageError("--sweep-lambda expects lo:hi:count") from None


def cmd_epi(args) -> int:
    from . import epi
    from .models import Gaussian

    params = {"p": args.p, "lambda": args.lam, "smax": args.smax, "nodes": args.nodes, "eps": args.eps}
    oracle = None
    if args.p.startswith("gaussian:"):
        rho = float(args.p.split(":", 1)[1])
        model = Gaussian.bivariate(rho)
        p = epi.JointDensity2D.from_model(model, eps=args.eps)
        oracle = epi.gaussian_S_oracle(model.cov, args.lam)
    else:
        obj = io.load(args.p)
        if isinstance(obj, GridFunction):
            p = epi.JointDensity2D.from_grid(obj)
        elif isinstance(obj, DensityModel):
            p = epi.JointDensity2D.from_model(obj, eps=args.eps)
        else:
            raise UsageError("epi-experiment needs a 2-D grid or model")
    tol = _tol(args, 1e-6)
    flow = epi.FlowParams(args.lam, args.smax, args.nodes)
    rep = epi.conditional_epi_check(p, flow, tol=tol, mode=args.mode)
    result = rep.to_dict()
    result["S"] = rep.details["S"]
    if oracle is not None:
        result["S_gaussian_oracle"] = oracle
    if args.sweep_lambda:
        lams = _lambda_grid(args.sweep_lambda)
        result["sweep"] = {"lambda": lams, "S": epi.sweep_lambda(p, lams, args.smax, args.nodes)}
    if args.emit_curves:
        sres = rep.data["S"]
        io.write_curves(args.emit_curves, {"s": sres.nodes, "integrand": sres.integrand,
                                           "integrand_route_b": sres.integrand_route_b})
    return _emit(args, "epi_experiment", result, rep.passed, params, {"tol": tol})


def cmd_run_suite(args) -> int:
    from .suites import run_suite

    kw = {}
    if args.instances is not None:
        kw["instances"] = args.instances
    if args.name == "preservation" and args.d is not None:
        kw["d"] = args.d
    if args.name == "epi" and args.gaussian_rhos:
        kw["gaussian_rhos"] = tuple(_floats(args.gaussian_rhos))
    if args.name == "counterexample":
        kw.pop("instances", None)
        if args.trials is not None:
            kw["trials"] = args.trials
    if args.tol is not None:
        kw["tol"] = args.tol
    if args.name == "epi":
        kw.pop("instances", None)
    summary = run_suite(args.name, seed=args.seed, **kw)
    return _emit(args, f"suite_{args.name}", summary, summary["passed"], kw,
                 {"tol": summary["params"].get("tol")})


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    def flags(suppress: bool) -> argparse.ArgumentParser:
        # the copy on each subcommand must not reset values given before it
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        p = argparse.ArgumentParser(add_help=False)
        p.add_argument("--tol", type=float, default=d(None), help="tolerance (default depends on the check)")
        p.add_argument("--seed", type=int, default=d(0))
        p.add_argument("--out", default=d(None), help="write the JSON report here instead of stdout")
        p.add_argument("--emit-curves", default=d(None), metavar="CSV", help="write curve data as CSV")
        return p

    common = flags(suppress=True)
    parser = argparse.ArgumentParser(prog="lsmlab", parents=[flags(suppress=False)],
                                     description="Numerical checks of log-supermodularity and the "
                                                 "inequalities built on it.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-lsm", parents=[common], help="test a grid/lattice file for log-supermodularity")
    p.add_argument("file")
    p.add_argument("--method", choices=["brute", "topkis", "both"], default="brute")
    p.set_defaults(func=cmd_check_lsm)

    p = sub.add_parser("convolve", parents=[common], help="convolve two grid or lattice files")
    p.add_argument("f")
    p.add_argument("g")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_convolve)

    p = sub.add_parser("verify-preservation", parents=[common],
                       help="check that convolving an LSM function with a kernel stays LSM")
    p.add_argument("--f", required=True)
    p.add_argument("--kernel", choices=["gaussian", "binomial", "file"], default="gaussian")
    p.add_argument("--g", default=None, help="kernel file for --kernel file")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--box", type=float, nargs=2, default=(-3.0, 3.0), metavar=("LO", "HI"))
    p.add_argument("--binomial-n", type=int, default=4)
    p.add_argument("--method", choices=["auto", "brute", "topkis"], default="auto")
    p.set_defaults(func=cmd_verify_preservation)

    p = sub.add_parser("counterexample-search", parents=[common],
                       help="search random LSM pairs for a non-LSM convolution")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--size", type=int, default=3)
    p.add_argument("--product-kernel", action="store_true")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("fourfn", parents=[common], help="four-function inequalities")
    p.add_argument("variant", choices=["ad", "cem", "unified", "general"])
    p.add_argument("--spec", required=True, help="instance JSON")
    p.add_argument("--samples", type=int, default=100_000)
    p.set_defaults(func=cmd_fourfn)

    p = sub.add_parser("transport", parents=[common], help="one-dimensional transport checks")
    p.add_argument("action", choices=["map", "pushforward", "displacement", "duality", "audit"])
    p.add_argument("--nu1", required=True)
    p.add_argument("--nu2", required=True)
    p.add_argument("--nu3", default=None)
    p.add_argument("--nu4", default=None)
    p.add_argument("--mode", choices=["ad", "general"], default="ad")
    p.add_argument("--alpha", default="1")
    p.add_argument("--beta", default="1")
    p.add_argument("--s", type=float, default=0.5)
    p.add_argument("--t", type=float, default=0.5)
    p.add_argument("--r", type=float, default=0.5)
    p.add_argument("--samples", type=int, default=2001)
    p.set_defaults(func=cmd_transport)

    p = sub.add_parser("epi-experiment", parents=[common], help="conditional entropy power experiment")
    p.add_argument("--p", required=True, help="grid/model file or gaussian:RHO")
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--smax", type=float, default=8.0)
    p.add_argument("--nodes", type=int, default=64)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--mode", choices=["corollary", "theorem"], default="corollary")
    p.add_argument("--sweep-lambda", default=None, metavar="LO:HI:N")
    p.set_defaults(func=cmd_epi)

    p = sub.add_parser("run-suite", parents=[common], help="seeded randomized property suites")
    p.add_argument("name", choices=["preservation", "fourfn-ad", "fourfn-general", "transport",
                                    "epi", "counterexample"])
    p.add_argument("--instances", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--gaussian-rhos", default=None)
    p.add_argument("--trials", type=int, default=None)
    p.set_defaults(func=cmd_run_suite)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return args.func(args)
    except (UsageError, io.SchemaError, ValueError, FileNotFoundError) as e:
        print(f"lsmlab {args.command}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
