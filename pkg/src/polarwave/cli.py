"""Command-line entry point.

Subcommands expose every part of the library: closed-form profiles and
transformations, physicality validation, particle and continuum
simulation, the threshold-polarity experiment, spectra, the Evans
function, and batch `reproduce` recipes that write the plot-ready data
(and rendered PNG figures) behind the headline results.

Every run writes a JSON manifest next to its outputs recording the
command, parameters and produced files.  Exit codes: 0 success, 1 for
domain or physicality errors, 2 for numerical failures, 64 for usage
errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .evans import (Contour, ContourThroughZero, EvansConfig, ShootingError,
                    WindingResolutionError, evans_scan, winding_number)
from .model import (DomainError, ModelParams, NonMonotoneMapError,
                    PhysicalityError, WaveFamily, apply_T1, apply_T2_tilde,
                    make_wave, validate_physical, velocity_profile)
from .particles import (measure_front_speed, polarised_tail_chain,
                        resting_chain, simulate_particles)
from .pde import (ClassificationError, Grid, SimConfig, UnstableStepError,
                  classify_outcome, exact_wave_ic, find_threshold_alpha,
                  measure_wave_speed, simulate, step_ic)
from .spectra import (absolute_spectrum_closed, absolute_spectrum_numeric,
                      fredholm_borders, ideal_weights)
from . import report

USAGE_EXIT = 64
DOMAIN_ERRORS = (DomainError, PhysicalityError, NonMonotoneMapError,
                 ClassificationError)
NUMERIC_ERRORS = (UnstableStepError, ShootingError, ContourThroughZero,
                  WindingResolutionError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _family(text: str) -> WaveFamily:
    try:
        return WaveFamily[text.upper()]
    except KeyError:
        raise argparse.ArgumentTypeError(f"unknown wave family {text!r}")


def _zrange(text: str) -> np.ndarray:
    try:
        start, stop, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected start:stop:step, got {text!r}")
    if step <= 0 or stop <= start:
        raise argparse.ArgumentTypeError("need stop > start and step > 0")
    return np.arange(start, stop + step / 2, step)


def _grid_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated integers, got {text!r}")


def write_csv(path, header, rows) -> str:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return str(path)


def write_json(path, payload) -> str:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return str(path)


def write_manifest(argv, args, outputs, anchor) -> str:
    """Record the run next to its first output (or the given anchor)."""
    params = {k: repr(v) if not isinstance(v, (str, int, float, bool, type(None)))
              else v for k, v in vars(args).items() if k != "func"}
    payload = {
        "command": "polarwave " + " ".join(argv),
        "params": params,
        "outputs": [str(o) for o in outputs],
        "version": __version__,
    }
    anchor = Path(anchor)
    path = anchor.with_suffix(anchor.suffix + ".manifest.json") \
        if anchor.suffix != "" else anchor / "manifest.json"
    return write_json(path, payload)


def _params(args) -> ModelParams:
    return ModelParams(kappa=args.kappa, alpha=args.alpha,
                       m_eps=getattr(args, "m_eps", 0.0))


# ---------------------------------------------------------------- profile

def cmd_profile(args, argv):
    wave = make_wave(args.family, _params(args))
    z = args.z
    r, a = wave.r_at(z), wave.a_at(z)
    v = velocity_profile(wave, z)
    out = write_csv(args.out, ["z", "R", "A", "V"], zip(z, r, a, v))
    write_manifest(argv, args, [out], out)
    print(f"family={wave.family.name} speed={wave.speed:.12g} -> {out}")
    return 0


def cmd_transform(args, argv):
    wave = make_wave(args.family, _params(args))
    new = apply_T1(wave) if args.op == "t1" else apply_T2_tilde(wave)
    z = args.z
    out = write_csv(args.out, ["z", "R", "A", "V"],
                    zip(z, new.r_at(z), new.a_at(z), velocity_profile(new, z)))
    write_manifest(argv, args, [out], out)
    print(f"{args.op}: {wave.family.name} -> {new.family.name} "
          f"speed={new.speed:.12g} alpha={new.params.alpha:.12g} -> {out}")
    return 0


def cmd_validate(args, argv):
    v = validate_physical(args.family, ModelParams(kappa=args.kappa,
                                                   alpha=args.alpha))
    if not v.physical:
        print(v.reason, file=sys.stderr)
        return 1
    s = make_wave(args.family, ModelParams(kappa=args.kappa,
                                           alpha=args.alpha)).speed
    print(f"{args.family.name} is physical: speed={s:.12g}")
    return 0


# ------------------------------------------------------------- simulation

def cmd_simulate_particles(args, argv):
    params = _params(args)
    if args.ic == "resting":
        initial = resting_chain(args.n)
    else:
        initial = polarised_tail_chain(args.n, args.n_polarised)
    snaps, violations = simulate_particles(
        initial, params, t_end=args.t_end, dt=args.dt, bc=args.bc,
        snapshot_every=args.snapshot_every)
    rows = [(s.t, j, s.x[j], s.a[j])
            for s in snaps for j in range(len(s.x))]
    out = write_csv(args.out, ["t", "cell", "x", "a"], rows)
    summary = {"snapshots": len(snaps),
               "ordering_violations": violations}
    try:
        summary["front_speed"] = measure_front_speed(snaps, params.alpha)
    except DOMAIN_ERRORS:
        summary["front_speed"] = None
    sout = write_json(Path(args.out).with_suffix(".summary.json"), summary)
    write_manifest(argv, args, [out, sout], out)
    print(f"front_speed={summary['front_speed']} -> {out}")
    return 0


def cmd_simulate_pde(args, argv):
    params = _params(args)
    grid = Grid(args.x_min, args.x_max, args.n)
    if args.ic == "exact":
        initial = exact_wave_ic(args.family, params, grid)
    else:
        initial = step_ic(params, grid)
    cfg = SimConfig(params=params, grid=grid, cfl=args.cfl, t_end=args.t_end,
                    snapshot_every=args.snapshot_every)
    snaps = simulate(cfg, initial)
    rows = [(s.t, x, r, a)
            for s in snaps for x, r, a in zip(s.grid.x, s.rho, s.a)]
    out = write_csv(args.out, ["t", "x", "rho", "a"], rows)
    summary = {"outcome": classify_outcome(snaps, params).value}
    try:
        summary["measured_speed"] = measure_wave_speed(snaps, params.alpha)
    except DOMAIN_ERRORS:
        summary["measured_speed"] = None
    if args.ic == "exact":
        summary["closed_form_speed"] = make_wave(args.family, params).speed
    sout = write_json(Path(args.out).with_suffix(".summary.json"), summary)
    write_manifest(argv, args, [out, sout], out)
    print(f"outcome={summary['outcome']} speed={summary['measured_speed']} "
          f"-> {out}")
    return 0


def cmd_threshold_alpha(args, argv):
    table = find_threshold_alpha(args.kappa, args.grids, tol=args.tol,
                                 t_end=args.t_end)
    out = write_csv(args.out, ["n", "alpha_threshold"], table)
    write_manifest(argv, args, [out], out)
    for n, a in table:
        print(f"n={n} alpha_threshold={a:.4f}")
    return 0


# ---------------------------------------------------------------- spectra

def cmd_spectrum(args, argv):
    outputs = []
    if args.what == "essential":
        line, parab = fredholm_borders(args.s, args.kappa)
        rows = [(c.label, p.real, p.imag) for c in (line, parab)
                for p in c.points]
        outputs.append(write_csv(args.out, ["label", "re", "im"], rows))
    elif args.what == "absolute":
        closed = absolute_spectrum_closed(args.s, args.kappa)
        cloud = absolute_spectrum_numeric(args.s, args.kappa)
        rows = [(c.label, p.real, p.imag)
                for c in (closed.segment, closed.branch_plus,
                          closed.branch_minus)
                for p in c.points]
        rows += [("abs-numeric", p.real, p.imag) for p in cloud]
        outputs.append(write_csv(args.out, ["label", "re", "im"], rows))
    else:
        w = ideal_weights(args.s, args.kappa)
        outputs.append(write_csv(args.out, ["eta_minus", "eta_plus"],
                                 [(w.eta_minus, w.eta_plus)]))
        print(f"eta_minus={w.eta_minus:.12g} eta_plus={w.eta_plus:.12g}")
    write_manifest(argv, args, outputs, outputs[0])
    return 0


# ------------------------------------------------------------------ evans

def _contour_from_args(args) -> Contour:
    if args.contour == "c1":
        return Contour.c1(d_l=args.dl, r=args.r)
    return Contour.c2(r_i=args.ri, r_o=args.ro)


def cmd_evans(args, argv):
    params = ModelParams(kappa=args.kappa, alpha=args.alpha)
    v = validate_physical(args.family, params)
    if not v.physical:
        print(v.reason, file=sys.stderr)
        return 1
    contour = _contour_from_args(args)
    config = EvansConfig()
    if args.mode == "winding":
        w = winding_number(contour, args.family, params, config)
        print(w)
        if args.out:
            out = write_json(args.out, {"winding": w})
            write_manifest(argv, args, [out], out)
        return 0
    rows = evans_scan(contour, args.family, params, config,
                      samples=args.samples)
    out = write_csv(args.out or "d_of_lambda.csv",
                    ["re_lambda", "im_lambda", "re_D", "im_D", "logscale_D"],
                    [(lam.real, lam.imag, m.real, m.imag, ls)
                     for lam, m, ls in rows])
    write_manifest(argv, args, [out], out)
    print(f"-> {out}")
    return 0


# -------------------------------------------------------------- reproduce

def _fig_pde_runs(out_dir, combos, ic, n, t_end, figname):
    outputs = []
    summary = {}
    for kappa, alpha in combos:
        params = ModelParams(kappa=kappa, alpha=alpha)
        grid = Grid(-40.0, 40.0, n)
        if ic == "exact":
            initial = exact_wave_ic(WaveFamily.S1, params, grid)
        else:
            initial = step_ic(params, grid)
        cfg = SimConfig(params=params, grid=grid, t_end=t_end,
                        snapshot_every=t_end / 8.0)
        snaps = simulate(cfg, initial)
        tag = f"kappa{kappa:g}_alpha{alpha:g}"
        rows = [(s.t, x, r, a) for s in snaps
                for x, r, a in zip(s.grid.x, s.rho, s.a)]
        outputs.append(write_csv(out_dir / f"{figname}_{tag}.csv",
                                 ["t", "x", "rho", "a"], rows))
        outputs.append(report.plot_field_snapshots(
            snaps, str(out_dir / f"{figname}_{tag}.png"),
            title=f"kappa={kappa:g}, alpha={alpha:g}"))
        entry = {"outcome": classify_outcome(snaps, params).value}
        try:
            entry["measured_speed"] = measure_wave_speed(snaps, alpha)
        except DOMAIN_ERRORS:
            entry["measured_speed"] = None
        if ic == "exact":
            entry["closed_form_speed"] = make_wave(WaveFamily.S1,
                                                   params).speed
        summary[tag] = entry
    return outputs, summary


def _fig_windings(out_dir, family, kappa, alphas, contour, label, figname):
    outputs = []
    summary = {}
    scans = {}
    for alpha in alphas:
        params = ModelParams(kappa=kappa, alpha=alpha)
        tag = f"alpha{alpha:g}"
        v = validate_physical(family, params)
        if not v.physical:
            summary[tag] = {"skipped": v.reason}
            continue
        rows = evans_scan(contour, family, params)
        outputs.append(write_csv(
            out_dir / f"{figname}_{tag}.csv",
            ["re_lambda", "im_lambda", "re_D", "im_D", "logscale_D"],
            [(lam.real, lam.imag, m.real, m.imag, ls)
             for lam, m, ls in rows]))
        w = winding_number(contour, family, params)
        scans[f"alpha={alpha:g}"] = rows
        summary[tag] = {"winding": w}
    outputs.append(report.plot_evans_image(
        scans, str(out_dir / f"{figname}.png"),
        title=f"{family.name} on {label}, kappa={kappa:g}"))
    return outputs, summary


def cmd_reproduce(args, argv):
    fig = args.figure
    out_dir = Path(args.out_dir if args.out_dir else f"reproduce_{fig}")
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs: list[str] = []
    summary: dict = {}

    if fig == "fig4":
        outputs, summary = _fig_pde_runs(
            out_dir, [(1.0, 0.2), (1.0, 0.5), (5.0, 0.2), (5.0, 0.5)],
            "exact", n=2000, t_end=10.0, figname=fig)
    elif fig == "fig5":
        outputs, summary = _fig_pde_runs(
            out_dir, [(1.0, 0.2), (1.0, 0.85)],
            "step", n=1000, t_end=12.0, figname=fig)
    elif fig == "fig6":
        table = find_threshold_alpha(1.0, (500, 1000, 2000))
        outputs.append(write_csv(out_dir / "fig6_threshold.csv",
                                 ["n", "alpha_threshold"], table))
        outputs.append(report.plot_threshold(
            table, str(out_dir / "fig6_threshold.png"),
            title="threshold polarity vs resolution"))
        summary["threshold"] = {str(n): a for n, a in table}
    elif fig == "fig7":
        line, parab = fredholm_borders(-2.0, 1.0)
        rows = [(c.label, p.real, p.imag) for c in (line, parab)
                for p in c.points]
        outputs.append(write_csv(out_dir / "fig7_essential.csv",
                                 ["label", "re", "im"], rows))
        outputs.append(report.plot_spectrum(
            (line, parab), str(out_dir / "fig7_essential.png"),
            title="essential spectrum, s=-2, kappa=1"))
    elif fig == "fig8":
        closed = absolute_spectrum_closed(-2.0, 1.0)
        cloud = absolute_spectrum_numeric(-2.0, 1.0)
        curves = (closed.segment, closed.branch_plus, closed.branch_minus)
        rows = [(c.label, p.real, p.imag) for c in curves for p in c.points]
        rows += [("abs-numeric", p.real, p.imag) for p in cloud]
        outputs.append(write_csv(out_dir / "fig8_absolute.csv",
                                 ["label", "re", "im"], rows))
        outputs.append(report.plot_spectrum(
            curves, str(out_dir / "fig8_absolute.png"), points=cloud,
            title="absolute spectrum, s=-2, kappa=1"))
        summary["rightmost_numeric"] = float(cloud.real.max())
    elif fig in ("fig10", "fig11", "fig12", "fig13"):
        kappa = 1.0 if fig in ("fig10", "fig11") else 5.0
        contour = Contour.c1() if fig in ("fig10", "fig12") else Contour.c2()
        label = "C1" if fig in ("fig10", "fig12") else "C2"
        outputs, summary = _fig_windings(
            out_dir, WaveFamily.S1, kappa, (0.2, 0.4, 0.5, 0.7),
            contour, label, fig)
    elif fig in ("figB1", "figB2"):
        contour = Contour.c1() if fig == "figB1" else Contour.c2()
        label = "C1" if fig == "figB1" else "C2"
        outputs, summary = _fig_windings(
            out_dir, WaveFamily.S2, 1.0, (0.2, 0.4, 0.5, 0.6),
            contour, label, fig)

    if summary:
        outputs.append(write_json(out_dir / "summary.json", summary))
    write_manifest(argv, args, outputs, out_dir)
    print(f"-> {out_dir} ({len(outputs)} files)")
    return 0


# ------------------------------------------------------------------ main

def build_parser() -> _Parser:
    parser = _Parser(prog="polarwave", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True,
                                parser_class=_Parser)

    def add_phys(p, alpha_required=True):
        p.add_argument("--kappa", type=float, required=True)
        p.add_argument("--alpha", type=float, required=alpha_required)
        p.add_argument("--config", help="key=value file with defaults")

    p = sub.add_parser("profile", help="closed-form wave profile")
    add_phys(p)
    p.add_argument("--family", type=_family, required=True)
    p.add_argument("--m-eps", type=float, default=0.0)
    p.add_argument("--z", type=_zrange, default=_zrange("-20:20:0.01"))
    p.add_argument("--out", default="profile.csv")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("transform", help="map a wave to its partner family")
    add_phys(p)
    p.add_argument("--family", type=_family, required=True)
    p.add_argument("--op", choices=("t1", "t2"), required=True)
    p.add_argument("--z", type=_zrange, default=_zrange("-20:20:0.01"))
    p.add_argument("--out", default="transform.csv")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("validate", help="physicality of a wave family")
    add_phys(p)
    p.add_argument("--family", type=_family, required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("simulate-particles", help="spring-chain simulation")
    add_phys(p)
    p.add_argument("--m-eps", type=float, default=0.0)
    p.add_argument("--n", type=int, default=200)
    p.add_argument("--ic", choices=("resting", "polarised-tail"),
                   default="polarised-tail")
    p.add_argument("--n-polarised", type=int, default=20)
    p.add_argument("--t-end", type=float, default=20.0)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--bc", choices=("free", "clamped"), default="free")
    p.add_argument("--snapshot-every", type=float, default=0.5)
    p.add_argument("--out", default="particles.csv")
    p.set_defaults(func=cmd_simulate_particles)

    p = sub.add_parser("simulate-pde", help="continuum simulation")
    add_phys(p)
    p.add_argument("--m-eps", type=float, default=0.0)
    p.add_argument("--family", type=_family, default=WaveFamily.S1)
    p.add_argument("--ic", choices=("exact", "step"), default="exact")
    p.add_argument("--n", type=int, default=2000)
    p.add_argument("--x-min", type=float, default=-40.0)
    p.add_argument("--x-max", type=float, default=40.0)
    p.add_argument("--t-end", type=float, default=10.0)
    p.add_argument("--cfl", type=float, default=0.9)
    p.add_argument("--snapshot-every", type=float, default=0.5)
    p.add_argument("--out", default="pde.csv")
    p.set_defaults(func=cmd_simulate_pde)

    p = sub.add_parser("threshold-alpha", help="polarity threshold ladder")
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--config", help="key=value file with defaults")
    p.add_argument("--grids", type=_grid_list, default=(500, 1000, 2000))
    p.add_argument("--tol", type=float, default=0.005)
    p.add_argument("--t-end", type=float, default=20.0)
    p.add_argument("--out", default="threshold.csv")
    p.set_defaults(func=cmd_threshold_alpha)

    p = sub.add_parser("spectrum", help="essential/absolute spectra, weights")
    p.add_argument("what", choices=("essential", "absolute", "weights"))
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--config", help="key=value file with defaults")
    p.add_argument("--out", default="curves.csv")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("evans", help="Evans function windings and scans")
    p.add_argument("mode", choices=("winding", "scan"))
    add_phys(p)
    p.add_argument("--family", type=_family, required=True)
    p.add_argument("--contour", choices=("c1", "c2"), default="c1")
    p.add_argument("--dl", type=float, default=-0.05)
    p.add_argument("--r", type=float, default=0.1)
    p.add_argument("--ri", type=float, default=0.1)
    p.add_argument("--ro", type=float, default=5.0)
    p.add_argument("--samples", type=int, default=256)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evans)

    p = sub.add_parser("reproduce", help="batch figure-data recipes")
    p.add_argument("figure", choices=("fig4", "fig5", "fig6", "fig7", "fig8",
                                      "fig10", "fig11", "fig12", "fig13",
                                      "figB1", "figB2"))
    p.add_argument("--config", help="key=value file with defaults")
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_reproduce)
    return parser


def _apply_config(argv: list[str]) -> list[str]:
    """Insert key=value pairs from a --config file as flags right after
    the subcommand, so explicit command-line flags still win."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        return argv
    path = argv[idx + 1]
    tokens: list[str] = []
    for raw in Path(path).read_text().splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        tokens += [f"--{key.strip().replace('_', '-')}", value.strip()]
    # insert after the subcommand (first non-flag token)
    for i, tok in enumerate(argv):
        if not tok.startswith("-"):
            sub_end = i + 1
            # spectrum/evans/reproduce carry one positional mode argument
            if tok in ("spectrum", "evans", "reproduce") \
                    and sub_end < len(argv) and not argv[sub_end].startswith("-"):
                sub_end += 1
            return argv[:sub_end] + tokens + argv[sub_end:]
    return argv


def dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(_apply_config(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, argv)
    except DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NUMERIC_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
