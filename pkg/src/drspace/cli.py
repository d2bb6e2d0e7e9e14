"""Command-line interface.

Each subcommand reads an optional JSON config (``--config``) whose keys
mirror the flags; flags given on the command line win. Exit status is 0 on
success (and when every requested check passes), 1 when a check fails and
2 on invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, fields

import numpy as np

from ._io import atomic_write
from .errors import DomainError, DrspaceError
from .geometry import SpaceParams
from .ineqlab import (
    CATALOG,
    FamilySpec,
    GridSpec,
    make_family,
    report_rows_csv,
    report_summary_json,
    run_check,
    write_reports,
)
from .meanop import decay_profile, modulus_table, spherical_means, write_table_csv
from .norms import WeightedGrid, conjugate_exponent, lp_norm
from .quadrature import gl_panels
from .specfun import JacobiParams, c_function, phi_dr
from .transforms import (
    RadialProfile,
    calibrate_inversion,
    dr_density,
    inverse_transform,
    spherical_transform,
    write_spectral_csv,
)

CONFIG_SCHEMA = 1

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Validated inputs of one CLI invocation."""

    command: str
    space: SpaceParams
    params: dict = field(default_factory=dict)
    grid: GridSpec = field(default_factory=GridSpec)
    seed: int = 0
    output: str | None = None


def parse_complex(text) -> complex:
    """Parse '1.5+0.2i', '2', '-0.3i' or a JSON number into a complex."""
    if isinstance(text, (int, float, complex)):
        return complex(text)
    s = str(text).strip().replace(" ", "").replace("i", "j")
    try:
        return complex(s)
    except ValueError:
        raise ConfigError(f"cannot parse complex number {text!r}") from None


def _floats(text) -> list:
    if text is None:
        return None
    if isinstance(text, (list, tuple)):
        return [float(x) for x in text]
    if isinstance(text, (int, float)):
        return [float(text)]
    out = []
    for part in str(text).split(","):
        part = part.strip()
        out.append(np.inf if part in ("inf", "infinity") else float(part))
    return out


def _fmt_complex(z: complex) -> str:
    return f"{z.real:.16g}{z.imag:+.16g}j"


# ---------------------------------------------------------------------------
# Argument parsing

_GRID_KEYS = tuple(f.name for f in fields(GridSpec))


def _add_common(sp: argparse.ArgumentParser):
    sp.add_argument("--config", help="JSON config; flags override its keys")
    sp.add_argument("--m", type=int)
    sp.add_argument("--k", type=int)
    sp.add_argument("--out", dest="output", help="output path (CSV) or prefix")
    sp.add_argument("--seed", type=int)


def _add_family(sp):
    sp.add_argument("--family", choices=("gauss", "bump", "powertail"))
    sp.add_argument("--a", type=float, help="gauss rate or bump radius")
    sp.add_argument("--b", type=float, help="powertail exponent")
    sp.add_argument("--count", type=int)
    sp.add_argument("--p-class", dest="p_class", type=float, help="L^p class of powertail")
    sp.add_argument("--member", type=int, help="family member index")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="drspace",
                                 description="Spherical analysis on Damek-Ricci spaces.")
    sub = ap.add_subparsers(dest="command")

    p = sub.add_parser("phi", help="spherical function phi_lambda(t)")
    _add_common(p)
    p.add_argument("--lambda", dest="lam")
    p.add_argument("--t", help="radius or comma-separated radii")

    p = sub.add_parser("cfun", help="c-function c(lambda)")
    _add_common(p)
    p.add_argument("--lambda", dest="lam")

    p = sub.add_parser("density", help="Plancherel density |c(lambda)|^-2 on a grid")
    _add_common(p)
    p.add_argument("--xi", help="comma-separated spectral points")
    p.add_argument("--xi-max", dest="xi_max", type=float)
    p.add_argument("--n", type=int)

    p = sub.add_parser("transform", help="spherical transform of a profile")
    _add_common(p)
    _add_family(p)
    p.add_argument("--profile", help="profile CSV (with JSON side-car)")
    p.add_argument("--eta", type=float)

    p = sub.add_parser("invert", help="inverse spherical transform of a spectral CSV")
    _add_common(p)
    p.add_argument("--input", help="spectral CSV with columns xi,eta,re,im,density")
    p.add_argument("--r-max", dest="r_max", type=float)
    p.add_argument("--panel", type=float)

    p = sub.add_parser("mean", help="spherical mean M_t f of a family member")
    _add_common(p)
    _add_family(p)
    p.add_argument("--t", type=float)

    p = sub.add_parser("modulus", help="modulus of continuity Omega_{p,q}[f](r)")
    _add_common(p)
    _add_family(p)
    p.add_argument("--p", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--r", type=float)

    p = sub.add_parser("decay", help="operator bound of M_t against measured ratios")
    _add_common(p)
    _add_family(p)
    p.add_argument("--p", type=float)
    p.add_argument("--t-max", dest="t_max", type=float)
    p.add_argument("--n", type=int)

    for name in ("verify", "sweep"):
        p = sub.add_parser(name, help="run inequality checks" if name == "verify"
                           else "run checks over several spaces and families")
        if name == "verify":
            p.add_argument("check", help="check id or 'all'")
        _add_common(p)
        _add_family(p)
        p.add_argument("--p", help="comma-separated exponents")
        p.add_argument("--q", help="comma-separated exponents")
        p.add_argument("--r", help="comma-separated radii r >= 1")
        p.add_argument("--jobs", type=int)
        p.add_argument("--no-refine", dest="no_refine", action="store_true", default=None)
    return ap


def _load_config(path):
    if not path:
        return {}
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    if cfg.get("schema") != CONFIG_SCHEMA:
        raise ConfigError(f"config schema must be {CONFIG_SCHEMA}, got {cfg.get('schema')!r}")
    return cfg


def resolve(args: argparse.Namespace) -> RunConfig:
    """Merge config file and flags into a validated RunConfig."""
    cfg = _load_config(getattr(args, "config", None))
    if cfg.get("command") not in (None, args.command):
        raise ConfigError(f"config is for {cfg['command']!r}, not {args.command!r}")
    params = dict(cfg.get("params", {}))
    for k, v in vars(args).items():
        if k in ("config", "command", "m", "k", "seed", "output") or v is None:
            continue
        params[k] = v
    space_cfg = cfg.get("space", {})
    m = args.m if args.m is not None else space_cfg.get("m", 2)
    k = args.k if args.k is not None else space_cfg.get("k", 1)
    space = SpaceParams(int(m), int(k))
    grid_cfg = dict(cfg.get("grid", {}))
    unknown = set(grid_cfg) - set(_GRID_KEYS)
    if unknown:
        raise ConfigError(f"unknown grid keys: {sorted(unknown)}")
    grid = GridSpec(**grid_cfg)
    seed = args.seed if args.seed is not None else int(cfg.get("seed", 0))
    output = args.output if args.output is not None else cfg.get("output")
    return RunConfig(args.command, space, params, grid, seed, output)


def _family(params) -> FamilySpec:
    kw = {}
    if params.get("family") is not None:
        kw["name"] = params["family"]
    for key in ("a", "b", "p_class"):
        if params.get(key) is not None:
            kw[key] = float(params[key])
    if params.get("count") is not None:
        kw["count"] = int(params["count"])
    return FamilySpec(**kw)


def _member(cfg: RunConfig):
    fam = _family(cfg.params)
    members = make_family(fam, cfg.space, cfg.grid.radial_panel, cfg.grid.radial_nodes)
    i = int(cfg.params.get("member") or 0)
    if not 0 <= i < len(members):
        raise ConfigError(f"member index {i} out of range 0..{len(members) - 1}")
    return members[i]


def _need(params, key):
    v = params.get(key)
    if v is None:
        raise ConfigError(f"missing required parameter --{key.replace('_', '-')}")
    return v


def _write_text(path, text):
    atomic_write(path, text)


# ---------------------------------------------------------------------------
# Commands


def cmd_phi(cfg: RunConfig) -> int:
    lam = parse_complex(_need(cfg.params, "lam"))
    ts = _floats(_need(cfg.params, "t"))
    if any(t < 0 for t in ts):
        raise ConfigError("radii must be nonnegative")
    vals = [phi_dr(cfg.space, lam, t) for t in ts]
    if cfg.output:
        lines = ["t,re,im"] + [f"{t:.17g},{v.real:.17g},{v.imag:.17g}" for t, v in zip(ts, vals)]
        _write_text(cfg.output, "\n".join(lines) + "\n")
    for v in vals:
        print(_fmt_complex(v))
    return EXIT_OK


def cmd_cfun(cfg: RunConfig) -> int:
    lam = parse_complex(_need(cfg.params, "lam"))
    c = c_function(JacobiParams(cfg.space.alpha, cfg.space.beta), 2 * lam)
    print(_fmt_complex(complex(c)))
    return EXIT_OK


def cmd_density(cfg: RunConfig) -> int:
    xi = _floats(cfg.params.get("xi"))
    if xi is None:
        n = int(cfg.params.get("n") or 121)
        xi = list(np.linspace(0.0, float(cfg.params.get("xi_max") or 60.0), n))
    dens = dr_density(cfg.space, np.asarray(xi))
    lines = ["xi,density"] + [f"{x:.17g},{d:.17g}" for x, d in zip(xi, dens)]
    text = "\n".join(lines) + "\n"
    if cfg.output:
        _write_text(cfg.output, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_transform(cfg: RunConfig) -> int:
    if cfg.params.get("profile"):
        f = RadialProfile.from_csv(cfg.params["profile"])
        if (f.m, f.k) != (cfg.space.m, cfg.space.k):
            raise ConfigError("profile belongs to a different space")
    else:
        f = _member(cfg)
    eta = float(cfg.params.get("eta") or 0.0)
    grid = cfg.grid.spectral(cfg.space)
    F = spherical_transform(cfg.space, f, grid.xi + 1j * eta)
    out = cfg.output or "transform.csv"
    write_spectral_csv(out, grid.xi, eta, F, grid.density)
    print(out)
    return EXIT_OK


def cmd_invert(cfg: RunConfig) -> int:
    path = _need(cfg.params, "input")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    grid = cfg.grid.spectral(cfg.space)
    if data.shape[0] != grid.xi.size or np.max(np.abs(data[:, 0] - grid.xi)) > 1e-9:
        raise ConfigError("spectral CSV is not on the configured spectral grid")
    if np.any(data[:, 1] != 0):
        raise ConfigError("inversion needs samples on the real line (eta = 0)")
    calibrate_inversion(cfg.space, grid)
    r_max = float(cfg.params.get("r_max") or 8.0)
    panel = float(cfg.params.get("panel") or cfg.grid.radial_panel)
    r, _ = gl_panels(0.0, r_max, panel, cfg.grid.radial_nodes)
    vals = inverse_transform(cfg.space, data[:, 2] + 1j * data[:, 3], grid, r)
    lines = ["r,re,im"] + [f"{x:.17g},{v.real:.17g},{v.imag:.17g}" for x, v in zip(r, vals)]
    out = cfg.output or "profile.csv"
    _write_text(out, "\n".join(lines) + "\n")
    print(out)
    return EXIT_OK


def cmd_mean(cfg: RunConfig) -> int:
    t = float(_need(cfg.params, "t"))
    f = _member(cfg)
    grid = cfg.grid.spectral(cfg.space)
    calibrate_inversion(cfg.space, grid)
    base, vals = spherical_means(cfg.space, f, [t], grid)
    g = base.with_values(vals[0])
    out = cfg.output or "mean.csv"
    g.to_csv(out)
    print(out)
    return EXIT_OK


def cmd_modulus(cfg: RunConfig) -> int:
    p = float(_need(cfg.params, "p"))
    q = float(cfg.params.get("q") or p)
    r = float(_need(cfg.params, "r"))
    f = _member(cfg)
    grid = cfg.grid.spectral(cfg.space)
    calibrate_inversion(cfg.space, grid)
    ts, norms = modulus_table(cfg.space, f, p, q, r, grid=grid)
    lines = ["t,norm"] + [f"{t:.17g},{v:.17g}" for t, v in zip(ts, norms)]
    if cfg.output:
        _write_text(cfg.output, "\n".join(lines) + "\n")
    print(f"{float(np.max(norms)):.16g}")
    return EXIT_OK


def cmd_decay(cfg: RunConfig) -> int:
    p = float(_need(cfg.params, "p"))
    if not 1 <= p <= 2:
        raise DomainError("decay needs p in [1, 2]")
    t_max = float(cfg.params.get("t_max") or 10.0)
    n = int(cfg.params.get("n") or 41)
    ts = np.linspace(t_max / (n - 1), t_max, n - 1)
    table = decay_profile(cfg.space, p, ts)
    f = _member(cfg)
    grid = cfg.grid.spectral(cfg.space)
    calibrate_inversion(cfg.space, grid)
    base, vals = spherical_means(cfg.space, f, ts, grid)
    W = WeightedGrid(base.grid, base.weights)
    norm = np.array([lp_norm(v, W, p) for v in vals]) / f.lp_norm(p)
    out = cfg.output or "decay.csv"
    write_table_csv(out, ts, table.bound, norm, norm / table.bound)
    print(json.dumps({"rate": table.rate, "spread": table.spread,
                      "p_conj": conjugate_exponent(p)}, sort_keys=True))
    return EXIT_OK


def _check_params(params) -> dict:
    out = {}
    for key in ("p", "q", "r"):
        if params.get(key) is not None:
            out[key] = _floats(params[key])
    return out


def _emit_reports(cfg: RunConfig, reports) -> int:
    if cfg.output:
        write_reports(reports, cfg.output + ".csv", cfg.output + ".json")
    sys.stdout.write(report_summary_json(reports))
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_verify(cfg: RunConfig) -> int:
    which = cfg.params.get("check")
    ids = list(CATALOG) if which == "all" else [which]
    if which != "all" and which not in CATALOG:
        raise ConfigError(f"unknown check {which!r}; known: all, {', '.join(CATALOG)}")
    fam = _family(cfg.params)
    cparams = _check_params(cfg.params)
    refine = not cfg.params.get("no_refine")
    jobs = int(cfg.params.get("jobs") or 1)
    calibrate_inversion(cfg.space)

    def job(cid):
        return run_check(cid, cfg.space, fam, cfg.grid, cfg.seed, cparams, refine=refine)

    if jobs > 1 and len(ids) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            reports = list(ex.map(job, ids))
    else:
        reports = [job(c) for c in ids]
    return _emit_reports(cfg, reports)


def cmd_sweep(cfg: RunConfig) -> int:
    spaces = cfg.params.get("spaces") or [[cfg.space.m, cfg.space.k]]
    fams = cfg.params.get("families") or [{}]
    ids = cfg.params.get("checks") or list(CATALOG)
    unknown = [c for c in ids if c not in CATALOG]
    if unknown:
        raise ConfigError(f"unknown checks: {unknown}")
    cparams = _check_params(cfg.params)
    refine = not cfg.params.get("no_refine")
    reports = []
    for m, k in spaces:
        space = SpaceParams(int(m), int(k))
        calibrate_inversion(space)
        for fdict in fams:
            fam = _family({**cfg.params, **{("family" if kk == "name" else kk): vv
                                             for kk, vv in fdict.items()}})
            for cid in ids:
                reports.append(run_check(cid, space, fam, cfg.grid, cfg.seed, cparams,
                                         refine=refine))
    if cfg.output:
        _write_text(cfg.output + ".csv", report_rows_csv(reports))
        summary = {f"{r.check_id}|{r.space}|{r.family}": r.summary() for r in reports}
        _write_text(cfg.output + ".json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    for r in reports:
        print(f"{r.check_id}\t{r.space}\t{r.family}\t{'pass' if r.passed else 'FAIL'}"
              f"\tratio={r.ratio:.6g}\tC={r.constant_estimate:.6g}")
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


_DISPATCH = {
    "phi": cmd_phi, "cfun": cmd_cfun, "density": cmd_density, "transform": cmd_transform,
    "invert": cmd_invert, "mean": cmd_mean, "modulus": cmd_modulus, "decay": cmd_decay,
    "verify": cmd_verify, "sweep": cmd_sweep,
}


def dispatch(cfg: RunConfig) -> int:
    """Run exactly one command."""
    if cfg.command not in _DISPATCH:
        raise ConfigError(f"unknown command {cfg.command!r}")
    return _DISPATCH[cfg.command](cfg)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    if not args.command:
        parser.print_usage(sys.stderr)
        return EXIT_INVALID
    try:
        cfg = resolve(args)
        return dispatch(cfg)
    except (ValueError, DrspaceError) as exc:
        # ConfigError, DomainError and UnsupportedSpaceError are ValueErrors
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
