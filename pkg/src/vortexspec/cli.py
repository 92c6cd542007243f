"""Command-line front end.

Exit codes: 0 on success, 1 on invalid input, 2 on a numerical failure.
Diagnostics go to standard error; results go to ``--out`` or standard output.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as vio
from .numerics.ode import IntegrationError
from .profiles import (BUILTIN_KINDS, VortexProfile, check_assumptions, make_builtin,
                       profile_from_spec, richardson_profile)

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 1, 2


class InputError(ValueError):
    """Invalid command-line input."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


@dataclass
class RunConfig:
    """Validated command-line request."""

    command: str
    action: str | None = None
    profile: str | None = None
    m: int | None = None
    k: float | None = None
    rect: str = "auto"
    tol: float = 1e-10
    out: str | None = None
    fmt: str = "csv"
    options: dict = field(default_factory=dict)


def threads() -> int:
    """Worker cap from VORTEXSPEC_THREADS (default 1)."""
    raw = os.environ.get("VORTEXSPEC_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise InputError(f"VORTEXSPEC_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise InputError("VORTEXSPEC_THREADS must be at least 1")
    return n


# --- loading inputs ----------------------------------------------------------------

def _read_json_arg(text: str, what: str) -> dict:
    path = Path(text)
    try:
        raw = path.read_text() if path.exists() else text
        data = json.loads(raw)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {what} {text!r}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError(f"{what} must be a JSON object")
    return data


def load_vortex_profile(text: str) -> VortexProfile:
    """A built-in name, a JSON file path or an inline JSON object."""
    if text in BUILTIN_KINDS:
        return make_builtin(text)
    try:
        return profile_from_spec(_read_json_arg(text, "profile"))
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc)) from exc


def load_shear_profile(text: str):
    from .shear import shear_profile_from_spec
    try:
        return shear_profile_from_spec(_read_json_arg(text, "shear profile"))
    except (ValueError, TypeError) as exc:
        raise InputError(str(exc)) from exc


def _mode(m, k):
    from .vortex.modes import FourierMode
    try:
        return FourierMode(m, k)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _parse_rect(text: str):
    if text == "auto":
        return "auto"
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise InputError(f"--rect must be 'auto' or a0,a1,b0,b1, got {text!r}") from exc
    if len(vals) != 4 or not (vals[0] < vals[1] and vals[2] < vals[3]):
        raise InputError("--rect needs a0 < a1 and b0 < b1")
    return [tuple(vals)]


def _parse_modes(text: str):
    """'1:0.5,2:1' -> [(1, 0.5), (2, 1.0)]; empty string -> []."""
    modes = []
    for item in filter(None, (t.strip() for t in text.split(","))):
        try:
            m, k = item.split(":")
            modes.append((int(m), float(k)))
        except ValueError as exc:
            raise InputError(f"mode {item!r} is not of the form m:k") from exc
    return modes


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


# --- subcommands -------------------------------------------------------------------

def cmd_profiles(cfg: RunConfig) -> int:
    profile = load_vortex_profile(cfg.profile)
    r = np.geomspace(1e-3, 50.0, cfg.options["n"])
    om, w = profile.omega(r), profile.vorticity(r)
    table = vio.csv_text(["r", "omega", "w", "phi", "j"],
                         zip(r, om, w, profile.phi(r), richardson_profile(profile, r)))
    if cfg.options["report"]:
        sys.stdout.write(vio.dumps(check_assumptions(profile).to_dict()))
        if cfg.out:
            Path(cfg.out).write_text(table)
    else:
        _emit(cfg, table)
    return EXIT_OK


def cmd_shear(cfg: RunConfig) -> int:
    from . import shear
    if cfg.action == "squire":
        o = cfg.options
        try:
            sigma = complex(o["sigma"].replace("i", "j"))
        except ValueError as exc:
            raise InputError(f"--sigma must be a complex number, got {o['sigma']!r}") from exc
        try:
            mode = shear.squire_transform(o["k1"], o["k2"], sigma, o["g"])
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        _emit(cfg, vio.dumps(mode.to_dict()))
        return EXIT_OK
    profile = load_shear_profile(cfg.profile)
    k = cfg.k
    if k == 0:
        raise InputError("channel eigensolvers need k != 0")
    if cfg.action == "rt":
        solver = shear.rt_eigs_boussinesq if cfg.options["boussinesq"] else shear.rt_eigs_full
        res = solver(profile, k, n_max=cfg.options["nmax"])
    elif cfg.action == "rayleigh":
        res = shear.rayleigh_eigensolve(profile, k, tol=cfg.tol)
    else:
        res = shear.taylor_goldstein_eigensolve(profile, k, tol=cfg.tol)
    if res.message:
        print(res.message, file=sys.stderr)
    if getattr(res, "inconclusive", None):
        print(f"{len(res.inconclusive)} cell(s) could not be certified by winding count",
              file=sys.stderr)
    rows = [(e.k, e.s.real, e.s.imag, e.residual, e.equation_tag) for e in res]
    if cfg.fmt == "json":
        _emit(cfg, vio.dumps({"eigenvalues": [dict(zip(["k", "s_re", "s_im", "residual", "equation_tag"], r))
                                              for r in rows],
                              "n_inconclusive": len(res.inconclusive)}))
    else:
        _emit(cfg, vio.csv_text(["k", "re_s", "im_s", "residual", "equation_tag"], rows))
    return EXIT_OK


def _kelvin_rows(profile, mode, count, tol, solutions_dir=None):
    from .vortex import howard_identity_residuals, kelvin_modes_smooth
    res = kelvin_modes_smooth(profile, mode, count=count, tol=tol)
    rows = []
    for n, sol in enumerate(res.upper, start=1):
        hg = howard_identity_residuals(sol, profile)
        rows.append(("upper", n, sol.b, sol.diagnostics.get("nodes", -1), hg["hg0"]))
        if solutions_dir is not None:
            vio.write_json(Path(solutions_dir) / f"kelvin_m{mode.m}_k{mode.k:g}_n{n}.json",
                           vio.solution_to_dict(sol, profile))
    for n, sol in enumerate(res.negative, start=1):
        rows.append(("negative", n, sol.b, sol.diagnostics.get("nodes", -1),
                     howard_identity_residuals(sol, profile)["hg0"]))
    return rows, res.message


def cmd_vortex(cfg: RunConfig) -> int:
    from .vortex import howard_identity_residuals, richardson_min, spectrum_scan
    if cfg.action == "identities":
        try:
            sol, profile = vio.load_solution(cfg.options["solution"])
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read solution: {exc}") from exc
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        _emit(cfg, vio.dumps(howard_identity_residuals(sol, profile)))
        return EXIT_OK
    profile = load_vortex_profile(cfg.profile)
    mode = _mode(cfg.m, cfg.k)
    if cfg.action == "ri":
        if mode.m == 0:
            raise InputError("the Richardson number needs m != 0")
        ri = richardson_min(profile, mode)
        _emit(cfg, vio.dumps({"m": mode.m, "k": mode.k, "ri_min": ri, "at_least_quarter": ri >= 0.25}))
        return EXIT_OK
    if cfg.action == "kelvin":
        if mode.m == 0 or mode.k == 0:
            raise InputError("Kelvin modes need m != 0 and k != 0")
        rows, message = _kelvin_rows(profile, mode, cfg.options["count"], cfg.tol,
                                     cfg.options.get("solutions"))
        if message:
            print(message, file=sys.stderr)
        _emit(cfg, vio.csv_text(["branch", "n", "b", "nodes", "hg0_residual"], rows))
        return EXIT_OK
    # scan
    if mode.m == 0:
        raise InputError("spectrum scans need m != 0")
    rep = spectrum_scan(profile, mode, rectangle=_parse_rect(cfg.rect),
                        resolution=tuple(cfg.options["resolution"]), tol=cfg.tol)
    data = rep.to_dict()
    data["zero_count"] = rep.total_count
    if rep.inconclusive:
        print(f"{len(rep.inconclusive)} cell(s) inconclusive", file=sys.stderr)
    _emit(cfg, vio.dumps(data))
    return EXIT_OK


def cmd_rankine(cfg: RunConfig) -> int:
    from .rankine import kelvin_modes_rankine
    if cfg.m == 0 or cfg.k == 0:
        raise InputError("Kelvin modes need m != 0 and k != 0")
    res = kelvin_modes_rankine(cfg.m, cfg.k, cfg.options["count"])
    if res["message"]:
        print(res["message"], file=sys.stderr)
    rows = [(d.branch, d.n, d.b, d.beta_squared, d.residual) for d in res["upper"] + res["lower"]]
    _emit(cfg, vio.csv_text(["branch", "n", "b", "beta2", "residual"], rows))
    return EXIT_OK


# --- report bundle -----------------------------------------------------------------

def _mode_entry(profile: VortexProfile, m: int, k: float, out: Path, kelvin_count: int,
                scan: bool, tol: float) -> dict:
    from .vortex import exclusion_bound_M, richardson_min, spectrum_scan
    from .vortex.modes import FourierMode
    tag = f"m{m}_k{k:g}"
    entry = {"m": m, "k": k, "errors": []}
    try:
        mode = FourierMode(m, k)
    except ValueError as exc:
        entry["errors"].append(str(exc))
        return entry
    steps = [("ri_min", lambda: richardson_min(profile, mode))]
    steps.append(("exclusion_M", lambda: exclusion_bound_M(profile, mode).M))

    def kelvin():
        if profile.kind == "rankine":
            from .rankine import kelvin_modes_rankine
            res = kelvin_modes_rankine(m, k, kelvin_count)
            rows = [(d.branch, d.n, d.b, d.beta_squared, d.residual) for d in res["upper"] + res["lower"]]
            vio.write_csv(out / f"kelvin_{tag}.csv", ["branch", "n", "b", "beta2", "residual"], rows)
        else:
            rows, _ = _kelvin_rows(profile, mode, kelvin_count, tol)
            vio.write_csv(out / f"kelvin_{tag}.csv", ["branch", "n", "b", "nodes", "hg0_residual"], rows)
        return f"kelvin_{tag}.csv"
    steps.append(("kelvin_table", kelvin))

    def scan_summary():
        rep = spectrum_scan(profile, mode, tol=tol)
        data = rep.to_dict()
        data["zero_count"] = rep.total_count
        vio.write_json(out / f"scan_{tag}.json", data)
        return {"file": f"scan_{tag}.json", "zero_count": rep.total_count,
                "n_inconclusive": len(rep.inconclusive)}
    if scan:
        steps.append(("scan", scan_summary))
    for name, fn in steps:
        try:
            entry[name] = fn()
        except (ValueError, RuntimeError, FloatingPointError, ArithmeticError) as exc:
            entry[name] = None
            entry["errors"].append(f"{name}: {exc}")
    return entry


def report_bundle(profile: VortexProfile, modes, out_dir, kelvin_count: int = 3,
                  scan: bool = True, tol: float = 1e-10, workers: int | None = None) -> dict:
    """Per-mode Richardson minima, exclusion bounds, Kelvin tables and scan
    summaries in ``out_dir``, with an ``index.json`` linking them.

    Failures are recorded per mode; the bundle is always written.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = check_assumptions(profile)
    warnings = []
    if not report.h1_holds:
        warnings.append("H1 fails: vorticity is not monotone and smooth")
    if not report.h2_holds:
        warnings.append("H2 fails: the Richardson function is not monotone")
    workers = workers or threads()
    jobs = [(int(m), float(k)) for m, k in modes]
    if workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            entries = list(pool.map(lambda mk: _mode_entry(profile, mk[0], mk[1], out, kelvin_count,
                                                           scan, tol), jobs))
    else:
        entries = [_mode_entry(profile, m, k, out, kelvin_count, scan, tol) for m, k in jobs]
    index = {"profile": profile.to_spec(), "criteria": report.to_dict(), "warnings": warnings,
             "modes": entries}
    vio.write_json(out / "index.json", index)
    return index


def cmd_report(cfg: RunConfig) -> int:
    profile = load_vortex_profile(cfg.profile)
    if not cfg.out:
        raise InputError("report needs --out DIR")
    index = report_bundle(profile, _parse_modes(cfg.options["modes"]), cfg.out,
                          kelvin_count=cfg.options["count"], scan=not cfg.options["no_scan"],
                          tol=cfg.tol)
    failed = sum(1 for e in index["modes"] if e["errors"])
    if failed:
        print(f"{failed} mode(s) had failures; see index.json", file=sys.stderr)
    return EXIT_OK


# --- argument parsing --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="vortexspec", description="Spectral stability of vortices and shear flows.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pp = sub.add_parser("profiles", help="profile table and H1/H2 report")
    pp.add_argument("--kind", "--profile", dest="profile", default="lamb_oseen",
                    help="built-in name or profile JSON (default: lamb_oseen)")
    pp.add_argument("--report", action="store_true", help="print the assumption report as JSON")
    pp.add_argument("--n", type=int, default=200, help="table rows on a log grid in [1e-3, 50]")
    pp.add_argument("--out", help="CSV table path (default: standard output)")

    sp = sub.add_parser("shear", help="channel problems")
    ssub = sp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("rt", "rayleigh", "tg"):
        q = ssub.add_parser(name)
        q.add_argument("--profile", required=True, help="shear profile JSON file or inline JSON")
        q.add_argument("--k", type=float, required=True)
        q.add_argument("--nmax", type=int, default=5, help="modes per family (rt)")
        q.add_argument("--boussinesq", action="store_true", help="Boussinesq form (rt)")
        q.add_argument("--tol", type=float, default=1e-10)
        q.add_argument("--format", dest="fmt", choices=["csv", "json"], default="csv")
        q.add_argument("--out")
    q = ssub.add_parser("squire")
    q.add_argument("--k1", type=float, required=True)
    q.add_argument("--k2", type=float, required=True)
    q.add_argument("--sigma", required=True, help="complex growth rate, e.g. 1+1i")
    q.add_argument("--g", type=float, default=0.0)
    q.add_argument("--out")

    vp = sub.add_parser("vortex", help="columnar vortex problems")
    vsub = vp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("scan", "kelvin", "ri"):
        q = vsub.add_parser(name)
        q.add_argument("--profile", default="lamb_oseen")
        q.add_argument("--m", type=int, required=True)
        q.add_argument("--k", type=float, required=True)
        q.add_argument("--tol", type=float, default=1e-10)
        q.add_argument("--out")
        if name == "scan":
            q.add_argument("--rect", default="auto", help="'auto' or a0,a1,b0,b1")
            q.add_argument("--resolution", type=int, nargs=2, default=[2, 4], metavar=("NA", "NB"))
        if name == "kelvin":
            q.add_argument("--count", type=int, default=5)
            q.add_argument("--solutions", help="directory for eigenfunction JSON files")
    q = vsub.add_parser("identities")
    q.add_argument("--solution", required=True)
    q.add_argument("--out")

    rp = sub.add_parser("rankine", help="Rankine vortex dispersion relation")
    rsub = rp.add_subparsers(dest="action", required=True, parser_class=_Parser)
    q = rsub.add_parser("kelvin")
    q.add_argument("--m", type=int, required=True)
    q.add_argument("--k", type=float, required=True)
    q.add_argument("--count", type=int, default=5)
    q.add_argument("--out")

    bp = sub.add_parser("report", help="bundle of per-mode results")
    bp.add_argument("--profile", default="lamb_oseen")
    bp.add_argument("--modes", default="", help="comma-separated m:k pairs, e.g. 1:0.5,2:1")
    bp.add_argument("--count", type=int, default=3, help="Kelvin modes per table")
    bp.add_argument("--no-scan", action="store_true", help="skip the spectrum scans")
    bp.add_argument("--tol", type=float, default=1e-10)
    bp.add_argument("--out", help="output directory")
    return p


def parse_config(argv) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    base = {key: ns.pop(key) for key in ("command", "action", "profile", "m", "k", "out")
            if key in ns}
    cfg = RunConfig(command=base["command"], action=base.get("action"), profile=base.get("profile"),
                    m=base.get("m"), k=base.get("k"), out=base.get("out"),
                    rect=ns.pop("rect", "auto"), tol=ns.pop("tol", 1e-10), fmt=ns.pop("fmt", "csv"),
                    options=ns)
    if cfg.tol <= 0:
        raise InputError("--tol must be positive")
    for key in ("count", "nmax", "n"):
        if key in cfg.options and cfg.options[key] < 1:
            raise InputError(f"--{key} must be at least 1")
    if cfg.command in ("vortex", "rankine") and cfg.m is not None and cfg.k is not None:
        _mode(cfg.m, cfg.k)
    return cfg


COMMANDS = {"profiles": cmd_profiles, "shear": cmd_shear, "vortex": cmd_vortex,
            "rankine": cmd_rankine, "report": cmd_report}


def run(argv=None) -> int:
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
        return COMMANDS[cfg.command](cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (IntegrationError, FloatingPointError, ArithmeticError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())
