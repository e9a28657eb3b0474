"""Command-line entry point: ``lndimer <command> [options]``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .constants import UnknownSpeciesError, data_path, load_constants, normalize_species
from .lines import LineListError, bundled_linelist, parse_linelist

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC = 0, 2, 3


class InputError(Exception):
    pass


# --- helpers --------------------------------------------------------------------


def _range_arg(text: str, kind=float, parts=(2, 3)) -> tuple:
    try:
        vals = tuple(kind(x) for x in text.split(":"))
    except ValueError:
        raise InputError(f"cannot parse range {text!r}") from None
    if len(vals) not in parts:
        raise InputError(f"range {text!r} needs {' or '.join(map(str, parts))} colon-separated fields")
    return vals


def _grid_points(text: str) -> np.ndarray:
    a, b, step = _range_arg(text, float, (3,))
    if step <= 0 or b < a:
        raise InputError(f"bad grid {text!r}: need start <= stop and step > 0")
    n = int(math.floor((b - a) / step + 1e-9)) + 1
    return np.round(a + step * np.arange(n), 12)


def _species(text: str) -> str:
    try:
        return normalize_species(text)
    except UnknownSpeciesError as exc:
        raise InputError(str(exc)) from None


def manifest(command: str, config: dict) -> dict:
    canon = json.dumps(config, sort_keys=True, default=str)
    return {
        "program": "lndimer",
        "version": __version__,
        "command": command,
        "config": config,
        "config_sha256": hashlib.sha256(canon.encode()).hexdigest(),
        "constants": load_constants().as_dict(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "scipy": scipy.__version__,
    }


def _emit_text(text: str, out: str | None):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _emit_csv(rows, header, out, man: dict, manifest_path: str | None):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    _emit_text(buf.getvalue(), out)
    if manifest_path is None and out not in (None, "-"):
        manifest_path = str(out) + ".manifest.json"
    if manifest_path:
        Path(manifest_path).write_text(json.dumps(man, indent=2) + "\n", encoding="utf-8")


def _num(x) -> str:
    return repr(float(x))


# --- commands -------------------------------------------------------------------


def _line_file(text: str) -> Path:
    """A line-list path; ``data/<name>`` falls back to the bundled copy when absent locally."""
    path = Path(text)
    if not path.exists() and path.parent.name == "data" and data_path(path.name).is_file():
        return data_path(path.name)
    return path


def cmd_dispersion(args) -> int:
    from .dispersion import (OPERATORS, gaussian_uncertainties, long_range_extras,
                             monte_carlo_uncertainties, vdw_coefficients)

    species = _species(args.species)
    if args.lines:
        lines = parse_linelist(_line_file(args.lines[0]), species)
        for extra in args.lines[1:]:
            lines = lines.merged(parse_linelist(_line_file(extra), species))
    else:
        lines = bundled_linelist(species)
    if len(lines) == 0:
        raise InputError("line list is empty")
    disp = vdw_coefficients(lines)
    out = disp.to_json()
    out["c_ss"] = disp.c_ss
    out["u_c_ss"] = disp.u_c_ss
    extras = long_range_extras(species)
    out["d2_2"] = extras["d2_2"]
    out["q4_1"] = extras["q4_1"]
    out["units"] = {"C": "E_h a0^6", "D": "E_h a0^3", "Q": "E_h a0^5"}
    if args.montecarlo:
        if args.montecarlo < 2:
            raise InputError("--montecarlo needs at least 2 samples")
        u_mc, corr_mc = monte_carlo_uncertainties(lines, samples=args.montecarlo, seed=args.seed)
        u_g, _, _ = gaussian_uncertainties(lines)
        out["montecarlo"] = {
            "samples": args.montecarlo,
            "seed": args.seed,
            "u": [{"k": k, "i": i, "u": u_mc[(k, i)]} for (k, i) in OPERATORS],
            "u_second_order": [{"k": k, "i": i, "u": u_g[(k, i)]} for (k, i) in OPERATORS],
            "correlations": np.asarray(corr_mc).tolist(),
        }
    config = {"species": species, "lines": args.lines, "montecarlo": args.montecarlo, "seed": args.seed}
    out["manifest"] = manifest("dispersion", config)
    _emit_text(json.dumps(out, indent=2) + "\n", args.out)
    return EXIT_OK


CURVE_NAMES = ("ss", "v0", "v2", "v0_2", "v2_2", "v0_3", "v2_3", "v4_1")


def _curve_objects(species: str) -> dict:
    from .curves import assemble_spin_stretched, assemble_v2, strength_v0, weak_strength

    ss = assemble_spin_stretched(species)
    v2 = assemble_v2(species)
    out = {"ss": ss, "v2": v2, "v0": strength_v0(species, ss, v2)}
    for name in CURVE_NAMES[3:]:
        k, i = int(name[1]), int(name[3])
        out[name] = weak_strength(k, i, species)
    return out


def cmd_curves(args) -> int:
    from .curves import VALID_RANGE

    species = _species(args.species)
    r = _grid_points(args.grid)
    if r[0] < VALID_RANGE[0] or r[-1] > VALID_RANGE[1]:
        raise InputError(f"grid {args.grid} leaves the validity range {VALID_RANGE} a0")
    which = list(CURVE_NAMES) if args.which == "all" else [w.strip() for w in args.which.split(",")]
    bad = [w for w in which if w not in CURVE_NAMES]
    if bad:
        raise InputError(f"unknown curve(s) {bad}; choose from {CURVE_NAMES} or 'all'")
    objs = _curve_objects(species)
    cols = [np.asarray(objs[w](r)) for w in which]
    rows = [[_num(x)] + [_num(c[n]) for c in cols] for n, x in enumerate(r)]
    header = ["r_bohr"] + [f"{w}_cm" for w in which]
    config = {"species": species, "grid": args.grid, "which": which}
    _emit_csv(rows, header, args.out, manifest("curves", config), args.manifest)
    return EXIT_OK


def cmd_adiabats(args) -> int:
    from .curves import strength_set
    from .spintensor import ADIABAT_HEADER, adiabats, build_basis

    species = _species(args.species)
    if args.R:
        try:
            r = np.array([float(x) for x in args.R.split(",")])
        except ValueError:
            raise InputError(f"cannot parse --R {args.R!r}") from None
    else:
        r = _grid_points(args.grid)
    st = strength_set(species, args.model)
    ad = adiabats(st, r, build_basis(species))
    rows = []
    for ir, rv in enumerate(ad.r):
        order = np.argsort(ad.energies[ir], kind="stable")
        for s in order:
            lab = ad.labels[s]
            rows.append([_num(rv), lab.n, lab.omega, lab.sigma, lab.reflection or "", _num(ad.energies[ir, s])])
    config = {"species": species, "model": args.model, "R": r.tolist()}
    _emit_csv(rows, list(ADIABAT_HEADER), args.out, manifest("adiabats", config), args.manifest)
    return EXIT_OK


def cmd_strengths_fit(args) -> int:
    from .spintensor import OPERATOR_KEYS, fit_strengths, read_adiabat_csv, relativistic_potentials

    species = _species(args.species)
    path = Path(args.input)
    if not path.is_file():
        raise InputError(f"adiabat file not found: {path}")
    data = read_adiabat_csv(path)
    if args.anchor_ss:
        from .curves import assemble_spin_stretched
        data = relativistic_potentials(data, assemble_spin_stretched(species), species)
    if args.active == "all":
        active = list(OPERATOR_KEYS)
    else:
        try:
            active = [tuple(int(x) for x in item.split("_")) for item in args.active.split(",")]
        except ValueError:
            raise InputError(f"cannot parse --active {args.active!r}") from None
    fit = fit_strengths(data, species, active=active, constraint=not args.no_constraint, u=args.u)
    keys = [k for k in OPERATOR_KEYS if k in fit.values]
    header = ["r_bohr"]
    for k, i in keys:
        header += [f"V_{k}_{i}", f"u_V_{k}_{i}"]
    header += ["chi2_nu", "dropped"]
    rows = []
    for n, rv in enumerate(fit.r):
        row = [_num(rv)]
        for key in keys:
            row += [_num(fit.values[key][n]), _num(fit.u[key][n])]
        row += [_num(fit.chi2_nu[n]), ";".join(f"{k}_{i}" for k, i in fit.dropped[n])]
        rows.append(row)
    config = {"species": species, "input": str(path), "active": [list(k) for k in active],
              "constraint": not args.no_constraint, "u": args.u, "anchor_ss": args.anchor_ss}
    _emit_csv(rows, header, args.out, manifest("strengths-fit", config), args.manifest)
    return EXIT_OK


def cmd_levels(args) -> int:
    from .rovib import DvrGrid, allowed_blocks, bound_levels, convergence_report

    species = _species(args.species)
    j_range = _range_arg(args.J, int, (1, 2))
    j_lo, j_hi = j_range[0], j_range[-1]
    if j_lo < 0 or j_hi < j_lo:
        raise InputError(f"bad J range {args.J!r}")
    if args.grid:
        r_min, r_max, n = _range_arg(args.grid, float, (3,))
        grid = DvrGrid.for_species(species, r_min, r_max, int(n))
    else:
        grid = DvrGrid.for_species(species)
    blocks = allowed_blocks(species)
    if args.blocks:
        want = [tuple(b.split("/")) for b in args.blocks.split(",")]
        bad = [b for b in want if b not in blocks]
        if bad:
            raise InputError(f"blocks {bad} not available for {species}; choose from {blocks}")
        blocks = want
    levels = bound_levels(range(j_lo, j_hi + 1), blocks, args.model, species, grid,
                          e_max=args.emax, solver=args.solver, n_radial=args.n_radial)
    rows = []
    counter: dict = {}
    for lv in sorted(levels, key=lambda b: (b.J, b.block, b.energy)):
        key = (lv.J, lv.block)
        counter[key] = counter.get(key, 0) + 1
        top = ";".join(f"{j}_{l}:{w:.3f}" for (j, l), w in lv.top_channels(3))
        rows.append([lv.J, lv.block, counter[key], _num(lv.energy), lv.v, lv.omega_label,
                     f"{lv.omega1_abs:.6f}", top])
    config = {"species": species, "J": [j_lo, j_hi], "model": args.model, "blocks": [list(b) for b in blocks],
              "grid": [grid.r_min, grid.r_max, grid.n], "emax": args.emax, "solver": args.solver,
              "n_radial": args.n_radial}
    man = manifest("levels", config)
    if args.convergence:
        rep = convergence_report(species, args.model, j_lo, blocks[0], grid,
                                 solver=args.solver, n_radial=args.n_radial)
        man["convergence"] = [rep]
        print(f"convergence J={rep['J']} {'/'.join(rep['block'])}: max |dE| = {rep['max_abs_delta_cm']:.3e} cm^-1 "
              f"over {rep['n_levels']} levels, grid {rep['grid']} -> {rep['refined_grid']}", file=sys.stderr)
    header = ["J", "block", "index", "energy_cm", "v", "omega_label", "omega1_abs", "top3_channels"]
    _emit_csv(rows, header, args.out, man, args.manifest)
    return EXIT_OK


def cmd_constants(args) -> int:
    _emit_text(json.dumps(load_constants(args.file).as_dict(), indent=2) + "\n", args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lndimer", description="Interaction strengths and bound levels of Er2 and Tm2")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, manifest_flag=True):
        sp.add_argument("--out", "-o", default=None, help="output file (default stdout)")
        if manifest_flag:
            sp.add_argument("--manifest", default=None, help="manifest path (default <out>.manifest.json)")

    d = sub.add_parser("dispersion", help="van der Waals coefficients from a line list")
    d.add_argument("--species", required=True)
    d.add_argument("--lines", action="append", help="line-list CSV; repeat to merge files")
    d.add_argument("--montecarlo", type=int, default=0, metavar="N", help="also propagate with N samples")
    d.add_argument("--seed", type=int, default=0)
    common(d, manifest_flag=False)
    d.set_defaults(func=cmd_dispersion)

    c = sub.add_parser("curves", help="sample the assembled strength functions")
    c.add_argument("--species", required=True)
    c.add_argument("--grid", default="6:30:0.1", help="start:stop:step in a0")
    c.add_argument("--which", default="all", help=f"comma list from {','.join(CURVE_NAMES)} or 'all'")
    common(c)
    c.set_defaults(func=cmd_curves)

    a = sub.add_parser("adiabats", help="labelled adiabatic potentials")
    a.add_argument("--species", required=True)
    a.add_argument("--R", default=None, help="comma-separated separations in a0")
    a.add_argument("--grid", default="7:12:0.5")
    a.add_argument("--model", choices=("two_tensor", "full"), default="full")
    common(a)
    a.set_defaults(func=cmd_adiabats)

    f = sub.add_parser("strengths-fit", help="fit spin-tensor strengths to adiabat CSV data")
    f.add_argument("--species", required=True)
    f.add_argument("--input", required=True, help="CSV with r_bohr,n,omega,sigma,reflection,energy_cm")
    f.add_argument("--active", default="0_1,2_1", help="comma list like 0_1,2_1 or 'all'")
    f.add_argument("--no-constraint", action="store_true", help="fit V_0^(1) freely")
    f.add_argument("--u", type=float, default=10.0, help="uncertainty of each splitting, cm^-1")
    f.add_argument("--anchor-ss", action="store_true",
                   help="input energies are raw; shift them so the stretched state follows V_ss")
    common(f)
    f.set_defaults(func=cmd_strengths_fit)

    lv = sub.add_parser("levels", help="coupled-channel bound levels")
    lv.add_argument("--species", required=True)
    lv.add_argument("--J", default="0:0", help="J or Jmin:Jmax")
    lv.add_argument("--model", choices=("two_tensor", "full"), default="full")
    lv.add_argument("--blocks", default=None, help="comma list like g/even,u/odd")
    lv.add_argument("--grid", default=None, help="rmin:rmax:N")
    lv.add_argument("--emax", type=float, default=0.0, help="report levels below this energy, cm^-1")
    lv.add_argument("--solver", choices=("auto", "dense", "contracted"), default="auto")
    lv.add_argument("--n-radial", type=int, default=80)
    lv.add_argument("--convergence", action="store_true", help="add a grid-convergence check to the manifest")
    common(lv)
    lv.set_defaults(func=cmd_levels)

    k = sub.add_parser("constants", help="print the constants in use")
    k.add_argument("--file", default=None, help="constants JSON (default bundled or $LNDIMER_CONSTANTS)")
    common(k, manifest_flag=False)
    k.set_defaults(func=cmd_constants)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, FileNotFoundError, LineListError, UnknownSpeciesError, KeyError, ValueError) as exc:
        print(f"lndimer {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (np.linalg.LinAlgError, ArithmeticError, RuntimeError) as exc:
        print(f"lndimer {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
