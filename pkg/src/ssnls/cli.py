"""Subcommand front end: reproducible experiment runs with manifests.

Every invocation writes its artifacts plus a manifest.json capturing the
merged configuration, library versions, and sha256 of each output — no
timestamps anywhere, so identical invocations produce identical trees.
Configuration comes from an INI file (--config) overridden by flags;
SSNLS_OUTDIR sets the default output root.

Exit codes: 0 success, 1 argument/validation error, 2 numerical failure
(non-convergence, blowup, residual above tolerance).
"""

from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import os
import sys

import numpy as np
import scipy

from . import __version__, flow, linop, plotting
from .grids import Field, Grid1D, RadialGrid
from .params import derive_params
from .profile import find_profile, load_profile, profile_residual, save_profile
from .propagator import (PropagatorPlan, admissible, dispersive_norm_L1_Linf,
                         strichartz_sample)
from .resolvent import inversion_residual, resolvent_identity_residual
from .spectral import HomSobolev, norm


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags; the contract here is usage text + 1
    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


class NumericalFailure(RuntimeError):
    """Raised by handlers when a pipeline ran but missed its tolerance."""


def _build_parser() -> _Parser:
    top = _Parser(prog="ssnls", description=__doc__.splitlines()[0])
    top.add_argument("--config", default=None, help="INI file; flags win")
    top.add_argument("--outdir", default=None,
                     help="output directory (default $SSNLS_OUTDIR or .)")
    top.add_argument("--seed", type=int, default=0)
    sub = top.add_subparsers(dest="subcommand", required=True)

    def add(name, **kw):
        p = sub.add_parser(name, **kw)
        p.add_argument("--d", type=int, default=1)
        p.add_argument("--p", type=float, default=7.0)
        p.add_argument("--b", type=float, default=0.7)
        p.add_argument("--sigma", type=float, default=0.25)
        return p

    pr = add("propagate", help="apply the deformed group to data on a box")
    pr.add_argument("--t", type=float, required=True)
    pr.add_argument("--n", type=int, default=1024)
    pr.add_argument("--boxl", type=float, default=24.0)
    pr.add_argument("--infile", default=None,
                    help="two/three-column field file; default a unit gaussian")

    db = add("dispersive-bench", help="kernel-bound decay over a time grid")
    db.add_argument("--tmax", type=float, default=10.0)
    db.add_argument("--nt", type=int, default=120)

    sm = add("strichartz-map", help="admissible-region panels and a sample integral")
    sm.add_argument("--q", type=float, default=6.0)
    sm.add_argument("--lp", type=float, default=6.0)
    sm.add_argument("--horizon", type=float, default=40.0)

    rc = add("resolvent-check", help="resolvent inversion and identity residuals")
    rc.add_argument("--z", type=complex, default=1.0 + 1.0j)
    rc.add_argument("--w", type=complex, default=2.0 - 0.5j)
    rc.add_argument("--n", type=int, default=2048)
    rc.add_argument("--boxl", type=float, default=48.0)
    rc.add_argument("--tol", type=float, default=1e-6)

    pf = add("profile", help="shoot for the self-similar profile")
    pf.add_argument("--bracket", type=float, nargs=4, metavar=("Q0_LO", "Q0_HI", "B_LO", "B_HI"),
                    default=(0.84, 1.00, 0.60, 0.80))
    pf.add_argument("--rout", type=float, default=200.0)

    sp = add("spectrum", help="discrete spectrum of the linearization")
    sp.add_argument("--profile-file", required=True)
    sp.add_argument("--nr", type=int, default=1024)
    sp.add_argument("--rmax", type=float, default=32.0)
    sp.add_argument("--window", type=float, nargs=4, metavar=("RE_LO", "IM_LO", "RE_HI", "IM_HI"),
                    default=(-3.0, -3.0, 3.0, 3.0))

    ev = add("evolve", help="fixed-point drift run with the stabilizer")
    ev.add_argument("--profile-file", required=True)
    ev.add_argument("--n", type=int, default=8192)
    ev.add_argument("--boxl", type=float, default=48.0)
    ev.add_argument("--dtau", type=float, default=1e-3)
    ev.add_argument("--tau-end", type=float, default=2.0)
    ev.add_argument("--stabilize-every", type=int, default=25)

    pb = add("perturb", help="paired-run decay of a trapped-ray perturbation")
    pb.add_argument("--profile-file", required=True)
    pb.add_argument("--n", type=int, default=8192)
    pb.add_argument("--boxl", type=float, default=48.0)
    pb.add_argument("--dtau", type=float, default=2e-3)
    pb.add_argument("--tau-end", type=float, default=4.0)
    pb.add_argument("--center", type=float, default=29.0)
    pb.add_argument("--width", type=float, default=6.0)
    pb.add_argument("--amplitude", type=float, default=5e-4,
                    help="relative to the profile in Hdot^sigma")
    pb.add_argument("--stabilize-every", type=int, default=25)

    cn = add("critnorm", help="critical-norm growth along an opening window")
    cn.add_argument("--profile-file", required=True)
    cn.add_argument("--n", type=int, default=8192)
    cn.add_argument("--boxl", type=float, default=48.0)
    cn.add_argument("--dtau", type=float, default=1e-3)
    cn.add_argument("--tau-end", type=float, default=4.0)
    cn.add_argument("--window-r0", type=float, default=2.0)
    cn.add_argument("--stabilize-every", type=int, default=25)
    return top


def _merge_config(args: argparse.Namespace, argv: list[str]) -> argparse.Namespace:
    """INI values fill in anything the command line left at its default.

    Sections: [run] for globals, [<subcommand>] for the rest.  Flags win:
    a flag explicitly present in argv always keeps its parsed value.
    """
    if not args.config:
        return args
    ini = configparser.ConfigParser()
    with open(args.config) as fh:
        ini.read_file(fh)
    given = {a.split("=")[0].lstrip("-").replace("-", "_")
             for a in argv if a.startswith("--")}
    for section in ("run", args.subcommand):
        if not ini.has_section(section):
            continue
        for key, raw in ini.items(section):
            attr = key.replace("-", "_")
            if attr in given or not hasattr(args, attr):
                continue
            cur = getattr(args, attr)
            if isinstance(cur, bool):
                setattr(args, attr, ini.getboolean(section, key))
            elif isinstance(cur, int):
                setattr(args, attr, ini.getint(section, key))
            elif isinstance(cur, float):
                setattr(args, attr, ini.getfloat(section, key))
            elif isinstance(cur, complex):
                setattr(args, attr, complex(raw))
            elif isinstance(cur, (tuple, list)) and cur and isinstance(cur[0], float):
                setattr(args, attr, tuple(float(v) for v in raw.split()))
            else:
                setattr(args, attr, raw)
    return args


def _outdir(args) -> str:
    root = args.outdir or os.environ.get("SSNLS_OUTDIR") or "."
    os.makedirs(root, exist_ok=True)
    return root


def _write(path: str, text: str) -> str:
    with open(path, "w") as fh:
        fh.write(text)
    return path


def _save_json(path: str, obj: dict) -> str:
    return _write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _manifest(outdir: str, args, outputs: list[str]) -> None:
    cfg = {k: (repr(v) if isinstance(v, complex) else
               list(v) if isinstance(v, tuple) else v)
           for k, v in sorted(vars(args).items())}
    digests = {}
    for path in sorted(outputs):
        with open(path, "rb") as fh:
            digests[os.path.basename(path)] = hashlib.sha256(fh.read()).hexdigest()
    _save_json(os.path.join(outdir, "manifest.json"), {
        "config": cfg,
        "versions": {"ssnls": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__,
                     "python": ".".join(map(str, sys.version_info[:3]))},
        "outputs": digests,
        "seed": args.seed,
    })


def _field_to_text(f: Field) -> str:
    rows = ["# x re im"]
    for x, v in zip(f.grid.x, f.values):
        rows.append("%.17e %.17e %.17e" % (x, v.real, v.imag))
    return "\n".join(rows) + "\n"


def _field_from_text(path: str, grid: Grid1D) -> Field:
    data = np.loadtxt(path)
    if data.shape != (grid.N, 3):
        raise ValueError(f"field file does not match the {grid.N}-point box")
    return Field(data[:, 1] + 1j * data[:, 2], grid, "physical")


# ---------------------------------------------------------------------------
# handlers: each returns the list of files written (manifest added on top)


def _run_propagate(args, outdir):
    derive_params(args.d, args.p, max(args.b, 1e-3), args.sigma)
    if args.d != 1:
        raise ValueError("the box propagator is one-dimensional")
    grid = Grid1D(args.n, args.boxl)
    if args.infile:
        v = _field_from_text(args.infile, grid)
    else:
        v = Field(np.exp(-0.5 * grid.x ** 2).astype(complex), grid, "physical")
    if args.t == 0.0:
        w = v                                  # the group at t = 0 is the identity
    else:
        w = PropagatorPlan(grid, args.b).apply(v, args.t)
    return [_write(os.path.join(outdir, "propagated.txt"), _field_to_text(w))]


def _run_dispersive_bench(args, outdir):
    derive_params(args.d, args.p, args.b, args.sigma)
    times = np.geomspace(args.tmax * 1e-3, args.tmax, args.nt)
    K = np.array([dispersive_norm_L1_Linf(t, args.b, args.d) for t in times])
    rows = ["t,K"] + ["%.12e,%.12e" % (t, k) for t, k in zip(times, K)]
    csv = _write(os.path.join(outdir, "kernel_decay.csv"), "\n".join(rows) + "\n")
    svg = _write(os.path.join(outdir, "kernel_decay.svg"),
                 plotting.line_plot(np.log10(times), [K], labels=("K(t)",),
                                    logy=True, title="kernel bound decay",
                                    xlabel="log10 t", ylabel="K"))
    # embedded check: on the early-time shoulder the bound falls like t^{-d/2}
    early = times <= 0.1 / max(args.b, 0.1)
    if early.sum() < 8:
        early = np.arange(len(times)) < 8
    fit = flow.fit_affine(np.log(times[early]), np.log(K[early]))
    ok = abs(fit.slope + 0.5 * args.d) < 0.1 * 0.5 * args.d
    meta = _save_json(os.path.join(outdir, "kernel_decay_fit.json"),
                      {"slope": fit.slope, "expected": -0.5 * args.d,
                       "r_squared": fit.r_squared, "ok": bool(ok)})
    if not ok:
        raise NumericalFailure(f"kernel decay slope {fit.slope:.3f} is far "
                               f"from {-0.5 * args.d}")
    return [csv, svg, meta]


def _run_strichartz_map(args, outdir):
    derive_params(args.d, args.p, args.b, args.sigma)
    svg = _write(os.path.join(outdir, "admissible_region.svg"),
                 plotting.admissible_region_map())
    grid = Grid1D(2048, 48.0)
    u0 = Field(np.exp(-0.5 * grid.x ** 2).astype(complex), grid, "physical")
    res = strichartz_sample(u0, args.q, args.lp, args.b, args.horizon)
    meta = _save_json(os.path.join(outdir, "strichartz_sample.json"), {
        "q": args.q, "p": args.lp, "b": args.b,
        "admissible": bool(admissible(args.q, args.lp, 1)),
        "value": res.value, "saturated": bool(res.saturated),
    })
    if not res.saturated:
        raise NumericalFailure("Strichartz integral did not saturate; "
                               "raise --horizon")
    return [svg, meta]


def _run_resolvent_check(args, outdir):
    derive_params(args.d, args.p, args.b, args.sigma)
    grid = Grid1D(args.n, args.boxl)
    f = Field(np.exp(-0.5 * grid.x ** 2).astype(complex), grid, "physical")
    inv = inversion_residual(f, args.z, args.b)
    ident = resolvent_identity_residual(f, args.z, args.w, args.b)
    meta = _save_json(os.path.join(outdir, "resolvent_check.json"), {
        "z": repr(args.z), "w": repr(args.w), "b": args.b,
        "inversion_residual": inv, "identity_residual": ident,
        "tol": args.tol, "ok": bool(inv < args.tol and ident < args.tol),
    })
    if not (inv < args.tol and ident < args.tol):
        raise NumericalFailure(f"resolvent residuals {inv:.2e}/{ident:.2e} "
                               f"exceed {args.tol:.1e}")
    return [meta]


def _run_profile(args, outdir):
    params = derive_params(args.d, args.p, args.b, args.sigma)
    q_lo, q_hi, b_lo, b_hi = args.bracket
    prof = find_profile(params, ((q_lo, q_hi), (b_lo, b_hi)), r_out=args.rout)
    path = os.path.join(outdir, "profile.txt")
    save_profile(prof, path)
    meta = _save_json(os.path.join(outdir, "profile_summary.json"), {
        "Q0": prof.Q0, "b_star": prof.b_star, "r_out": args.rout,
        "residual": profile_residual(prof),
    })
    return [path, meta]


def _run_spectrum(args, outdir):
    derive_params(args.d, args.p, args.b, args.sigma)
    prof = load_profile(args.profile_file)
    H = linop.assemble_H(prof, grid=RadialGrid(args.nr, args.rmax))
    re_lo, im_lo, re_hi, im_hi = args.window
    eigs = linop.discrete_spectrum(H, (complex(re_lo, im_lo), complex(re_hi, im_hi)))
    table = _write(os.path.join(outdir, "spectrum.txt"),
                   linop.eigenset_to_text(eigs))
    idx = eigs.tagged()
    meta = _save_json(os.path.join(outdir, "spectrum_summary.json"), {
        "tagged": [repr(complex(z)) for z in eigs.eigenvalues[idx]],
        "ess_line_im": H.ess_line_im,
        "biorth_residual": eigs.biorth_residual,
    })
    return [table, meta]


def _flow_setup(args, need_taper: bool):
    prof = load_profile(args.profile_file)
    params = derive_params(args.d, args.p, prof.b_star, args.sigma)
    grid = Grid1D(args.n, args.boxl)
    method = "ode" if args.boxl > 190.0 else "interp"
    q = flow.profile_on_grid(prof, grid, method=method)
    vals = q.values * flow.edge_taper(grid) if need_taper else q.values
    rg = RadialGrid(1024, min(32.0, 0.6 * args.boxl))
    H = linop.assemble_H(prof, grid=rg)
    eigs = linop.discrete_spectrum(H, (-3 - 3j, 3 + 3j))
    _, P_ess = linop.riesz_projections(eigs)
    stab = flow.compose_projectors(
        flow.make_parity_projector(grid),
        flow.make_pair_projector(P_ess, rg, grid),
        flow.make_gauge_projector([1j * vals], grid, window=0.6 * grid.L))
    return prof, params, grid, Field(vals, grid, "physical"), stab


def _run_evolve(args, outdir):
    prof, params, grid, v0, stab = _flow_setup(args, need_taper=True)
    cfg = flow.FlowConfig(dtau=args.dtau, tau_end=args.tau_end,
                          sponge=(0.85, 150.0), cadence=25,
                          stabilize_every=args.stabilize_every)
    series = flow.evolve(v0, cfg, params, reference=v0, stabilizer=stab)
    csvp = os.path.join(outdir, "evolve.csv")
    flow.save_series(series, csvp, extra={"drift_rel": float(
        np.max(series.hsigma_eps) / norm(v0, HomSobolev(params.sigma)))})
    svg = _write(os.path.join(outdir, "evolve.svg"),
                 plotting.line_plot(series.taus, [series.hsigma_eps],
                                    labels=("drift",), logy=True,
                                    xlabel="tau", ylabel="drift"))
    if series.aborted:
        raise NumericalFailure("fixed-point run aborted: " + ",".join(series.flags))
    return [csvp, csvp + ".json", svg]


def _run_perturb(args, outdir):
    prof, params, grid, v0, stab = _flow_setup(args, need_taper=False)
    eps0 = stab(flow.incoming_chirp(grid, params.b, args.center, args.width))
    k = HomSobolev(params.sigma)
    eps0 = Field(eps0.values * (args.amplitude * norm(Field(v0.values, grid,
                 "physical"), k) / norm(eps0, k)), grid, "physical")
    cfg = flow.FlowConfig(dtau=args.dtau, tau_end=args.tau_end,
                          sponge=(0.85, 150.0), cadence=25,
                          stabilize_every=args.stabilize_every)
    series, fit = flow.perturbation_experiment(prof, eps0, cfg, params,
                                               stabilizer=stab,
                                               resample="ode" if args.boxl > 190.0 else "interp",
                                               skip_frac=0.01)
    csvp = os.path.join(outdir, "perturb.csv")
    law = -params.b * (params.sigma - params.s_c)
    flow.save_series(series, csvp, extra={"expected_rate": law})
    svg = _write(os.path.join(outdir, "perturb.svg"),
                 plotting.line_plot(series.taus, [series.hsigma_eps],
                                    labels=("|diff|",), logy=True,
                                    xlabel="tau", ylabel="difference"))
    if series.aborted:
        raise NumericalFailure("perturbation run aborted: " + ",".join(series.flags))
    return [csvp, csvp + ".json", svg]


def _run_critnorm(args, outdir):
    prof, params, grid, v0, stab = _flow_setup(args, need_taper=True)
    cfg = flow.FlowConfig(dtau=args.dtau, tau_end=args.tau_end,
                          sponge=(0.85, 150.0), cadence=25,
                          window_r0=args.window_r0,
                          stabilize_every=args.stabilize_every)
    series = flow.evolve(v0, cfg, params, reference=v0, stabilizer=stab)
    fits = flow.critical_norm_track(series, params)
    csvp = os.path.join(outdir, "critnorm.csv")
    flow.save_series(series, csvp)
    svg = _write(os.path.join(outdir, "critnorm.svg"),
                 plotting.line_plot(series.taus,
                                    [series.hsc_v ** 2,
                                     series.lpc_v ** params.p_c],
                                    labels=("crit^2", "Lpc^pc"),
                                    xlabel="tau", ylabel="norm"))
    if series.aborted:
        raise NumericalFailure("critical-norm run aborted: " + ",".join(series.flags))
    if fits["hsc_sq"].r_squared < 0.9 and "sub-doubling-growth" not in fits["hsc_sq"].flags:
        raise NumericalFailure("critical-norm track is not affine")
    return [csvp, csvp + ".json", svg]


_HANDLERS = {
    "propagate": _run_propagate,
    "dispersive-bench": _run_dispersive_bench,
    "strichartz-map": _run_strichartz_map,
    "resolvent-check": _run_resolvent_check,
    "profile": _run_profile,
    "spectrum": _run_spectrum,
    "evolve": _run_evolve,
    "perturb": _run_perturb,
    "critnorm": _run_critnorm,
}


def run(argv: list[str]) -> int:
    try:
        args = _build_parser().parse_args(argv)
        args = _merge_config(args, argv)
        np.random.seed(args.seed % 2 ** 32)   # legacy consumers; library code
        outdir = _outdir(args)                 # uses default_rng(seed) locally
        outputs = _HANDLERS[args.subcommand](args, outdir)
    except _UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except (ValueError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericalFailure, FloatingPointError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    _manifest(outdir, args, outputs)
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))
