"""Command-line front end.

Every command writes its outputs plus ``<stem>.manifest.json`` into the
output directory.  ``replay`` re-runs a manifest into another directory.

Exit codes: 0 success, 1 usage error, 2 model or domain error, 3 numerical
failure.  Errors are reported as one JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import experiments as ex
from .asymptotics import build_series
from .errors import ModelError, NumericalError
from .integrate import IntegratorConfig
from .lyapunov import FrozenDomain, LyapunovDomain, check_bounds, find_fixture, load_fixtures, save_fixtures, search_domain
from .model import OscillatorParams, ReducedParams, reduce_params
from .stability import classify, oscillator_regime

OUT_DIR_ENV = "AUTORESONANCE_OUT_DIR"
EXIT_OK, EXIT_USAGE, EXIT_MODEL, EXIT_NUMERIC = 0, 1, 2, 3

# execution-only knobs: they never change the numbers written
_NOT_RECORDED = {"out_dir", "config", "workers", "func", "command"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- helpers -----------------------------------------------------------------------

def _out_dir(args) -> Path:
    path = Path(args.out_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _config(args, **overrides) -> IntegratorConfig:
    cfg = IntegratorConfig(**overrides)
    return cfg.with_tol(args.tol) if args.tol is not None else cfg


def _reduced(args) -> ReducedParams:
    return ReducedParams(lam=args.lam, f=args.f, m=args.m)


def _oscillator(args) -> OscillatorParams:
    return OscillatorParams(eps=args.eps, alpha=args.alpha, gamma=args.gamma, f0=args.f0, h0=args.h0)


def _invocation(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_RECORDED}


def _finish(args, stem: str, params: dict, outputs: list[Path]) -> ex.RunManifest:
    manifest = ex.RunManifest(
        command=args.command,
        params=params,
        seed=args.seed,
        tool_version=ex.tool_version(),
        outputs=[p.name for p in outputs],
        invocation=_invocation(args),
    )
    manifest.write(_out_dir(args), stem)
    return manifest


# -- commands ----------------------------------------------------------------------

def cmd_simulate(args) -> int:
    out = _out_dir(args)
    span = tuple(args.span)
    if args.system == "oscillator":
        params = _oscillator(args)
        cfg = _config(args, sample_interval=args.sample)
        res = ex.simulate_oscillator(params, args.y0, span, cfg)
        pdict = params.as_dict()
    else:
        params = _reduced(args)
        cfg = _config(args, sample_interval=args.sample)
        res = ex.simulate_reduced(params, args.y0, span, cfg, parametric=args.system == "reduced")
        pdict = params.as_dict()
    stem = args.stem or f"simulate_{args.system}"
    csv = ex.write_csv(out / f"{stem}.csv", res.columns, res.table)
    _finish(args, stem, {**pdict, "system": args.system, "config": cfg.as_dict()}, [csv])
    print(f"{csv}: {len(res.table)} samples, terminated by {res.trajectory.meta.terminated_by.value}")
    return EXIT_OK


def cmd_preset(args) -> int:
    if args.name not in ex.PRESETS:
        raise UsageError(f"unknown preset {args.name!r}; choose from {', '.join(ex.PRESETS)}")
    preset = ex.PRESETS[args.name]
    out = _out_dir(args)
    sample = args.sample if args.sample is not None else (0.05 if preset.system == "reduced" else 0.1)
    cfg = _config(args, sample_interval=sample)
    res = ex.run_preset(preset, cfg, eps=args.test_eps)
    stem = args.name if args.test_eps is None else f"{args.name}_eps{args.test_eps:g}"
    csv = ex.write_csv(out / f"{stem}.csv", res.columns, res.table)
    params = dict(preset.params)
    if args.test_eps is not None:
        params = ex.rescale_eps(OscillatorParams(**params), args.test_eps).as_dict()
    _finish(args, stem, {**params, "system": preset.system, "y0": list(preset.y0), "span": list(preset.span),
                         "config": cfg.as_dict()}, [csv])
    print(f"{csv}: {preset.note}; {len(res.table)} samples")
    return EXIT_OK


def cmd_asymptotics(args) -> int:
    out = _out_dir(args)
    params = _reduced(args)
    sol = build_series(params, args.branch, args.K)
    stem = args.stem or f"asymptotics_b{args.branch}_K{args.K}"
    coeffs = ex.write_json(out / f"{stem}.json", sol.to_dict())
    grid = np.logspace(math.log10(args.tau_range[0]), math.log10(args.tau_range[1]), args.points)
    csv = ex.write_csv(out / f"{stem}_residual.csv", ex.RESIDUAL_COLUMNS, ex.residual_table(sol, grid))
    _finish(args, stem, params.as_dict(), [coeffs, csv])
    print(f"branch {sol.branch}: psi0={sol.psi0:.12g}")
    for k, c in enumerate(sol.rho_coeffs):
        print(f"  rho_{k} = {c:.12g}")
    for k, c in enumerate(sol.psi_coeffs, start=1):
        print(f"  psi_{k} = {c:.12g}")
    return EXIT_OK


def cmd_classify(args) -> int:
    out = _out_dir(args)
    result: dict = {}
    if args.eps is not None:
        osc = _oscillator(args)
        params = reduce_params(osc)
        result["oscillator"] = osc.as_dict()
        result["regime"] = oscillator_regime(osc).as_dict()
    else:
        params = _reduced(args)
    verdicts = classify(params)
    result["params"] = params.as_dict()
    result["verdicts"] = [v.as_dict() for v in verdicts]
    stem = args.stem or "classify"
    path = ex.write_json(out / f"{stem}.json", result)
    _finish(args, stem, result["params"], [path])
    print(f"m/m_* = {params.m / params.m_star:.6g}")
    print(f"{'branch':>6}  {'regime':<10}  {'D0':>12}  justification")
    for v in verdicts:
        d = "-" if math.isnan(v.d0) else f"{v.d0:.6g}"
        print(f"{v.branch:>6}  {v.regime.value:<10}  {d:>12}  {v.justification.value}")
    if "regime" in result:
        print(f"oscillator regime: {result['regime']['kind']}")
    return EXIT_OK


def cmd_lyapunov(args) -> int:
    out = _out_dir(args)
    params = _reduced(args)
    sol = build_series(params, args.branch, args.K)
    fixtures = Path(args.fixtures) if args.fixtures else None
    if args.search:
        domain = search_domain(sol, args.eps1, args.eps2, args.n, args.seed)
        if domain is None:
            raise NumericalError("no passing domain on the search grid")
        target = fixtures or out / "lyapunov_domains.json"
        entries = [e for e in load_fixtures(target) if not e.matches(params, args.branch)]
        entries.append(FrozenDomain(args.branch, params.as_dict(), args.K, domain.d_star, domain.eta_star,
                                    domain.eps1, domain.eps2, args.seed))
        save_fixtures(entries, target)
        print(f"froze domain d_star={domain.d_star}, eta_star={domain.eta_star} in {target}")
    elif args.d_star is not None and args.eta_star is not None:
        domain = LyapunovDomain(args.d_star, args.eta_star, args.eps1, args.eps2)
    else:
        entry = find_fixture(params, args.branch, fixtures)
        if entry is None:
            raise UsageError("no frozen domain for these parameters; pass --d-star/--eta-star or --search")
        domain = entry.domain
    report = check_bounds(sol, domain, args.n, args.seed, workers=args.workers)
    stem = args.stem or f"lyapunov_b{args.branch}"
    path = ex.write_json(out / f"{stem}.json", report.as_dict())
    _finish(args, stem, params.as_dict(), [path])
    flag = "" if report.applicable else " (parameter condition fails: not applicable)"
    print(f"branch {report.branch}: {report.bound_violations} bound and {report.derivative_violations} "
          f"decay violations in {report.samples} samples, min_margin={report.min_margin:.3e}{flag}")
    return EXIT_OK


def cmd_basin(args) -> int:
    out = _out_dir(args)
    params = _reduced(args)
    rho = np.linspace(*args.rho_range[:2], int(args.rho_range[2]))
    psi = np.linspace(*args.psi_range[:2], int(args.psi_range[2]))
    crit = ex.CaptureCriterion(args.horizon, args.threshold)
    cfg = _config(args, sample_interval=min(1.0, args.horizon))
    rows = ex.basin(params, rho, psi, crit, cfg, workers=args.workers)
    stem = args.stem or "basin"
    csv = ex.write_csv(out / f"{stem}.csv", ex.BASIN_COLUMNS, rows)
    _finish(args, stem, {**params.as_dict(), "horizon_tau": crit.horizon_tau,
                         "ratio_threshold": crit.ratio_threshold}, [csv])
    counts = {s: sum(r[3] == s for r in rows) for s in ("captured", "not_captured", "failed")}
    print(f"{csv}: " + ", ".join(f"{k}={v}" for k, v in counts.items()))
    return EXIT_OK


def cmd_crosscheck(args) -> int:
    out = _out_dir(args)
    params = _oscillator(args)
    reduced = reduce_params(params)
    rho0 = args.rho0 if args.rho0 is not None else math.sqrt(reduced.lam * args.tau_span[0])
    cfg = _config(args, rel_tol=1e-9, abs_tol=1e-11, sample_interval=0.05)
    cc = ex.crosscheck(params, rho0, args.psi0, tuple(args.tau_span), cfg)
    stem = args.stem or "crosscheck"
    csv = ex.write_csv(out / f"{stem}.csv", ex.CROSSCHECK_COLUMNS, cc.rows)
    _finish(args, stem, params.as_dict(), [csv])
    print(f"{csv}: max envelope error {cc.max_rel_error:.3%}, max |Delta - psi| {cc.max_phase_error:.3f} rad")
    return EXIT_OK


def cmd_replay(args) -> int:
    manifest = ex.RunManifest.read(args.manifest)
    ns = argparse.Namespace(**manifest.invocation)
    ns.command = manifest.command
    ns.out_dir = args.out_dir
    ns.workers = args.workers
    ns.config = None
    return COMMANDS[manifest.command](ns)


COMMANDS = {
    "simulate": cmd_simulate,
    "preset": cmd_preset,
    "asymptotics": cmd_asymptotics,
    "classify": cmd_classify,
    "lyapunov": cmd_lyapunov,
    "basin": cmd_basin,
    "crosscheck": cmd_crosscheck,
}


# -- parser ------------------------------------------------------------------------

GLOBAL_DEFAULTS = {"out_dir": None, "seed": 0, "workers": 1, "tol": None, "config": None, "stem": None}


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    """Flags accepted both before and after the subcommand.

    The copy attached to subcommands suppresses its defaults so that a flag
    given before the subcommand is not overwritten.
    """
    g = argparse.ArgumentParser(add_help=False)

    def default(name):
        return argparse.SUPPRESS if suppress else GLOBAL_DEFAULTS[name]

    g.add_argument("--out-dir", default=default("out_dir"),
                   help=f"output directory (default: ${OUT_DIR_ENV} or the current directory)")
    g.add_argument("--seed", type=int, default=default("seed"))
    g.add_argument("--workers", type=int, default=default("workers"))
    g.add_argument("--tol", type=float, default=default("tol"), help="relative tolerance; absolute is tol/100")
    g.add_argument("--config", default=default("config"), help="JSON file whose keys supply defaults for any flag")
    g.add_argument("--stem", default=default("stem"), help="base name of the output files")
    return g


def _reduced_flags(p, m_default=0.0):
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--f", type=float, default=1.0)
    p.add_argument("--m", type=float, default=m_default)


def _oscillator_flags(p, required=True):
    p.add_argument("--eps", type=float, required=required, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--gamma", type=float, default=1 / 6)
    p.add_argument("--f0", type=float, default=1.0)
    p.add_argument("--h0", type=float, default=0.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="autoresonance", description=__doc__.splitlines()[0], parents=[_global_flags(False)])
    g = _global_flags(True)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("simulate", parents=[g], help="integrate one trajectory")
    p.add_argument("--system", choices=("reduced0", "reduced", "oscillator"), default="reduced")
    _reduced_flags(p)
    _oscillator_flags(p, required=False)
    p.add_argument("--y0", type=float, nargs=2, required=True, metavar=("Y1", "Y2"),
                   help="(rho, psi) for the reduced systems, (u, v) for the oscillator")
    p.add_argument("--span", type=float, nargs=2, required=True, metavar=("T0", "T1"))
    p.add_argument("--sample", type=float, default=0.05, help="output sample spacing")

    p = sub.add_parser("preset", parents=[g], help="run a named preset")
    p.add_argument("name", help=", ".join(ex.PRESETS))
    p.add_argument("--sample", type=float, default=None)
    p.add_argument("--test-eps", type=float, default=None,
                   help="rescale an oscillator preset to this eps with the reduced parameters kept")

    p = sub.add_parser("asymptotics", parents=[g], help="series coefficients and residuals")
    _reduced_flags(p, 4.0)
    p.add_argument("--branch", type=int, default=1, choices=(1, 2, 3, 4))
    p.add_argument("--K", type=int, default=4)
    p.add_argument("--tau-range", type=float, nargs=2, default=(1e2, 1e4))
    p.add_argument("--points", type=int, default=41)

    p = sub.add_parser("classify", parents=[g], help="stability verdict per branch")
    _reduced_flags(p)
    _oscillator_flags(p, required=False)

    p = sub.add_parser("lyapunov", parents=[g], help="sampled check of the Lyapunov inequalities")
    _reduced_flags(p, 4.0)
    p.add_argument("--branch", type=int, default=1, choices=(1, 2, 3, 4))
    p.add_argument("--K", type=int, default=4)
    p.add_argument("--d-star", type=float, default=None)
    p.add_argument("--eta-star", type=float, default=None)
    p.add_argument("--eps1", type=float, default=0.5)
    p.add_argument("--eps2", type=float, default=0.5)
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--search", action="store_true", help="search and freeze a passing domain")
    p.add_argument("--fixtures", default=None, help="fixtures file (default: the packaged one)")

    p = sub.add_parser("basin", parents=[g], help="capture map over initial conditions")
    _reduced_flags(p, 4.0)
    p.add_argument("--rho-range", type=float, nargs=3, default=(0.1, 3.0, 11), metavar=("LO", "HI", "N"))
    p.add_argument("--psi-range", type=float, nargs=3, default=(-math.pi, math.pi, 11), metavar=("LO", "HI", "N"))
    p.add_argument("--horizon", type=float, default=50.0)
    p.add_argument("--threshold", type=float, default=0.8)

    p = sub.add_parser("crosscheck", parents=[g], help="oscillator envelope versus the reduced model")
    _oscillator_flags(p)
    p.add_argument("--psi0", type=float, default=math.pi)
    p.add_argument("--rho0", type=float, default=None)
    p.add_argument("--tau-span", type=float, nargs=2, default=(1.0, 4.0))

    p = sub.add_parser("replay", parents=[g], help="re-run a manifest")
    p.add_argument("manifest")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        values = json.loads(Path(known.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {known.config!r}: {exc}") from exc
    values = {k.replace("-", "_"): v for k, v in values.items()}
    parser.set_defaults(**{k: v for k, v in values.items() if k in GLOBAL_DEFAULTS})
    local = {k: v for k, v in values.items() if k not in GLOBAL_DEFAULTS}
    for action in parser._subparsers._group_actions:
        for sp in action.choices.values():
            sp.set_defaults(**local)


def _alpha_default(args) -> None:
    # an omitted chirp rate defaults to lam = 1 for the given eps
    if getattr(args, "eps", None) is not None and getattr(args, "alpha", None) is None:
        args.alpha = 0.5 * args.eps ** (4.0 / 3.0)


def _report(exc: BaseException, code: int) -> int:
    payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(payload), file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        if args.out_dir is None:
            args.out_dir = os.environ.get(OUT_DIR_ENV, ".")
        _alpha_default(args)
        if args.command == "replay":
            return cmd_replay(args)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        return _report(exc, EXIT_USAGE)
    except ModelError as exc:
        return _report(exc, EXIT_MODEL)
    except NumericalError as exc:
        return _report(exc, EXIT_NUMERIC)
    except ValueError as exc:
        return _report(exc, EXIT_MODEL)


if __name__ == "__main__":
    sys.exit(main())
