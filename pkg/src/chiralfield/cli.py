"""Command-line front end.

Subcommands: gen (field CSV export), verify (invariant and convergence
checks), conserve (hierarchy report), reduce (scalar-representation
report), heatmap (PGM raster of one component).

Every output file is written atomically (temp + rename) and accompanied
by a JSON run manifest; re-running `chiralfield --manifest <file>`
reproduces the outputs byte for byte.

Exit codes: 0 pass, 1 verification failure, 2 config error,
3 degenerate field, 4 singular reduction window.
"""

import argparse
import io
import json
import os
import sys
import tempfile

import numpy as np

from . import __version__
from .background import by_name
from .conservation import barred_map, compute_ab, integrals, p_series, q_series
from .errors import (
    ChiralFieldError,
    ConfigError,
    DegenerateField,
    SingularLambda,
    SingularMatrix,
    UnknownComponent,
)
from .fields import FieldGrid, Grid, hyperboloid_constraint, pde_residual
from .numerics import fit_order, trimmed_max
from .reduction import (
    DELTA_LAMBDA,
    alt_equations_residual,
    decompose_field,
    scalar_residual,
    unit_constraint_residual,
)
from .solitons import SolitonConfig, soliton_field

CSV_FMT = "%.17g"

TOLERANCES = {
    "det_closed": 1e-12,
    "det_determinant": 1e-9,
    "hyperboloid": 1e-12,
    "oracle_relative": 1e-9,
    "pde_order_target": 2.0,
    "pde_order_tol": 0.2,
    "hierarchy_order_target": 2.0,
    "hierarchy_order_tol": 0.3,
    "reduction_order_target": 2.0,
    "reduction_order_tol": 0.3,
}


# ---------------------------------------------------------------- file io


def _atomic_write_bytes(path, data):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_write_text(path, text):
    _atomic_write_bytes(path, text.encode("utf-8"))


def _write_manifest(out_path, command, config):
    manifest = {
        "version": __version__,
        "command": command,
        "config": config,
        "tolerances": TOLERANCES,
    }
    path = out_path + ".manifest.json"
    _atomic_write_text(path, json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    return path


# ---------------------------------------------------------------- parsing


def _parse_axis(spec, key):
    parts = spec.split(":")
    if len(parts) != 3:
        raise ConfigError(f"axis {key!r} must look like min:max:count, got {spec!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"axis {key!r}: {exc}") from None
    if count < 3 or count % 2 == 0:
        raise ConfigError(
            f"axis {key!r}: count must be odd and >= 3 (single Simpson "
            f"quadrature path), got {count}"
        )
    if not hi > lo:
        raise ConfigError(f"axis {key!r}: max must exceed min")
    return lo, hi, count


def parse_grid(spec, dtype=np.float64):
    """Grid from 't=-5:5:513,z=-5:5:513' or 'zeta=..:..:..,eta=..:..:..'."""
    axes = {}
    for item in spec.split(","):
        if "=" not in item:
            raise ConfigError(f"grid item {item!r} lacks '='")
        key, _, value = item.partition("=")
        key = key.strip()
        if key in axes:
            raise ConfigError(f"axis {key!r} given twice")
        axes[key] = _parse_axis(value.strip(), key)
    if set(axes) == {"t", "z"}:
        return Grid.lab(*axes["t"][:2], axes["t"][2], *axes["z"][:2], axes["z"][2],
                        dtype=dtype)
    if set(axes) == {"zeta", "eta"}:
        return Grid.lightcone(*axes["zeta"][:2], axes["zeta"][2],
                              *axes["eta"][:2], axes["eta"][2], dtype=dtype)
    raise ConfigError(
        f"grid must specify exactly t,z or zeta,eta axes; got {sorted(axes)}"
    )


def _build_field(args_config, dtype=np.float64):
    cfg = SolitonConfig.parse(args_config["solitons"])
    bg = by_name(args_config["background"])
    grid = parse_grid(args_config["grid"], dtype=dtype)
    field = soliton_field(cfg, bg, grid, method=args_config.get("method", "auto"))
    return cfg, bg, field


# ------------------------------------------------------------- csv format


def _field_to_csv(field, with_reduction):
    grid = field.grid
    header = "t,z,g11,g12,g22"
    cols = [
        np.asarray(grid.t, dtype=float).ravel(),
        np.asarray(grid.z, dtype=float).ravel(),
        np.asarray(field.g11, dtype=float).ravel(),
        np.asarray(field.g12, dtype=float).ravel(),
        np.asarray(field.g22, dtype=float).ravel(),
    ]
    if with_reduction:
        lam, phi = decompose_field(field)
        header += ",lambda,phi"
        cols.append(np.asarray(lam, dtype=float).ravel())
        cols.append(np.asarray(phi, dtype=float).ravel())
    buf = io.StringIO()
    buf.write(header + "\n")
    np.savetxt(buf, np.column_stack(cols), fmt=CSV_FMT, delimiter=",", newline="\n")
    return buf.getvalue()


def load_field_csv(path):
    """Rebuild a FieldGrid (lab mode) from a gen CSV file."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    required = ["t", "z", "g11", "g12", "g22"]
    if header[: len(required)] != required:
        raise ConfigError(f"unexpected CSV header {header!r}")
    t_vals, z_vals = data[:, 0], data[:, 1]
    n_z = np.argmax(t_vals != t_vals[0]) or t_vals.size
    if t_vals.size % n_z:
        raise ConfigError("CSV rows do not form a rectangular grid")
    n_t = t_vals.size // n_z
    grid = Grid(t_vals.reshape(n_t, n_z)[:, 0], z_vals[:n_z], "lab")
    if not (
        np.allclose(grid.t.ravel(), t_vals) and np.allclose(grid.z.ravel(), z_vals)
    ):
        raise ConfigError("CSV rows are not i_t-major over a uniform grid")
    field = FieldGrid(
        grid,
        g11=data[:, 2].reshape(n_t, n_z),
        g12=data[:, 3].reshape(n_t, n_z),
        g22=data[:, 4].reshape(n_t, n_z),
    )
    extras = {
        name: data[:, i].reshape(n_t, n_z)
        for i, name in enumerate(header)
        if i >= 5
    }
    return field, extras


# ------------------------------------------------------------------ pgm


def write_heatmap(path, values, component):
    """16-bit PGM, rows follow axis 0 top to bottom; scale in a sidecar."""
    vals = np.asarray(values, dtype=float)
    lo, hi = float(np.nanmin(vals)), float(np.nanmax(vals))
    if hi > lo:
        scaled = np.rint((vals - lo) / (hi - lo) * 65535.0)
    else:
        scaled = np.zeros_like(vals)
    scaled = np.nan_to_num(scaled, nan=0.0)
    pixels = np.clip(scaled, 0, 65535).astype(">u2")
    n0, n1 = pixels.shape
    _atomic_write_bytes(
        path, f"P5\n{n1} {n0}\n65535\n".encode("ascii") + pixels.tobytes()
    )
    sidecar = {
        "component": component,
        "min": lo,
        "max": hi,
        "constant": not hi > lo,
        "rows": n0,
        "cols": n1,
    }
    _atomic_write_text(
        path + ".json", json.dumps(sidecar, sort_keys=True, indent=2) + "\n"
    )


# ------------------------------------------------------------- commands


def cmd_gen(config):
    _, _, field = _build_field(config)
    text = _field_to_csv(field, with_reduction=config["columns"] == "full")
    _atomic_write_text(config["out"], text)
    _write_manifest(config["out"], "gen", config)
    det_dev = float(np.max(np.abs(field.det() - 1)))
    print(f"wrote {config['out']} ({field.grid.shape[0]}x{field.grid.shape[1]}), "
          f"max |det g - 1| = {det_dev:.3e}")
    return 0


def _verify_config_mode(config, report):
    cfg = SolitonConfig.parse(config["solitons"])
    bg = by_name(config["background"])

    levels = [int(n) for n in config["levels"].split(",")]
    t_lo, t_hi, _ = _parse_axis(config["grid"].split(",")[0].partition("=")[2], "t")
    spec_tail = config["grid"].split(",")[1].partition("=")[2]
    z_lo, z_hi, _ = _parse_axis(spec_tail, "z")

    norms, hs = [], []
    failures = []
    for n in levels:
        grid = Grid.lab(t_lo, t_hi, n, z_lo, z_hi, n)
        field = soliton_field(cfg, bg, grid, method=config["method"])
        res = pde_residual(field)
        norms.append(trimmed_max(res))
        hs.append(float(grid.d0))
        det_dev = float(np.nanmax(np.abs(field.det() - 1)))
        hyp_dev = float(np.nanmax(np.abs(hyperboloid_constraint(field))))
        det_tol = (
            TOLERANCES["det_closed"]
            if cfg.n <= 2 and cfg.is_real and all(c.real > 0 for c in cfg.constants)
            and config["method"] != "determinant"
            else TOLERANCES["det_determinant"]
        )
        if det_dev > det_tol:
            failures.append(f"det deviation {det_dev:.3e} > {det_tol:g} at n={n}")
        if hyp_dev > TOLERANCES["hyperboloid"]:
            failures.append(f"hyperboloid deviation {hyp_dev:.3e} at n={n}")
        report["levels"].append(
            {"n": n, "h": hs[-1], "pde_residual": norms[-1],
             "det_dev": det_dev, "hyperboloid_dev": hyp_dev}
        )
    order = fit_order(hs, norms, TOLERANCES["pde_order_target"],
                      TOLERANCES["pde_order_tol"])
    report["pde_order"] = order.fitted_order
    print(f"pde residual convergence: {order}")
    if not order.passed:
        failures.append(f"pde residual order {order.fitted_order:.2f} off target")

    if 1 <= cfg.n <= 2 and cfg.is_real and all(c.real > 0 for c in cfg.constants):
        rng = np.random.default_rng(0)
        zeta = rng.uniform(t_lo, t_hi, 1000)
        eta = rng.uniform(z_lo, z_hi, 1000)
        from .solitons import n_soliton, one_soliton, two_soliton

        closed = (one_soliton if cfg.n == 1 else two_soliton)(cfg, bg, zeta, eta)
        det_path = n_soliton(cfg, bg, zeta, eta)
        rel = max(
            float(np.max(np.abs(c - d) / np.maximum(np.abs(c), 1e-30)))
            for c, d in zip(closed, det_path)
        )
        report["oracle_relative_error"] = rel
        print(f"determinant vs closed form: max relative error {rel:.3e}")
        if rel > TOLERANCES["oracle_relative"]:
            failures.append(f"oracle equivalence {rel:.3e} > 1e-9")
    return failures


def _verify_file_mode(config, report):
    field, _ = load_field_csv(config["field"])
    failures = []
    det_dev = np.abs(field.det() - 1)
    worst = np.unravel_index(int(np.argmax(det_dev)), det_dev.shape)
    report["det_dev_max"] = float(det_dev[worst])
    report["det_dev_argmax"] = {
        "i_t": int(worst[0]),
        "i_z": int(worst[1]),
        "t": float(field.grid.t[worst]),
        "z": float(field.grid.z[worst]),
    }
    print(
        f"max |det g - 1| = {det_dev[worst]:.3e} at "
        f"(t, z) = ({field.grid.t[worst]:.6g}, {field.grid.z[worst]:.6g})"
    )
    if det_dev[worst] > TOLERANCES["det_determinant"]:
        failures.append(
            f"det deviation {det_dev[worst]:.3e} at row "
            f"i_t={worst[0]}, i_z={worst[1]}"
        )
    hyp = np.abs(hyperboloid_constraint(field))
    report["hyperboloid_dev_max"] = float(np.nanmax(hyp))
    if report["hyperboloid_dev_max"] > TOLERANCES["hyperboloid"]:
        failures.append(f"hyperboloid deviation {report['hyperboloid_dev_max']:.3e}")
    try:
        res = pde_residual(field)
        report["pde_residual"] = trimmed_max(res)
        print(f"pde residual (single grid): {report['pde_residual']:.3e}")
    except SingularMatrix as exc:
        failures.append(f"pde residual not evaluable: {exc}")
    return failures


def cmd_verify(config):
    report = {"levels": []}
    if config.get("field"):
        failures = _verify_file_mode(config, report)
    else:
        failures = _verify_config_mode(config, report)
    report["failures"] = failures
    report["passed"] = not failures
    _atomic_write_text(
        config["out"], json.dumps(report, sort_keys=True, indent=2) + "\n"
    )
    _write_manifest(config["out"], "verify", config)
    for f in failures:
        print(f"FAIL: {f}")
    print("PASS" if not failures else f"{len(failures)} check(s) failed")
    return 0 if not failures else 1


def cmd_conserve(config):
    cfg = SolitonConfig.parse(config["solitons"])
    bg = by_name(config["background"])
    grid = parse_grid(config["window"], dtype=np.longdouble)
    if grid.mode != "lightcone":
        raise ConfigError("conserve takes a lightcone window (zeta=..,eta=..)")
    field = soliton_field(cfg, bg, grid, method=config["method"])
    bmap = barred_map(field)
    hier = q_series(field, bmap, p_series(field, bmap, config["orders"]))
    rep = integrals(field, bmap, hier)

    report = {
        "det_res_a": bmap.det_res_a,
        "det_res_b": bmap.det_res_b,
        "cross_dev_zeta": bmap.cross_dev_zeta,
        "cross_dev_eta": bmap.cross_dev_eta,
        "orders": {},
        "zeta_window": rep.zeta_window,
    }
    print(f"det(A_bar)+1: {bmap.det_res_a:.3e}   det(B_bar)+1: {bmap.det_res_b:.3e}")
    for n in range(config["orders"] + 1):
        res = trimmed_max(hier.conservation_residual(bmap, n))
        flux = float(np.nanmax(rep.flux_residual[n]))
        entry = {"conservation_residual": res, "flux_residual": flux}
        if n in rep.explicit_dev:
            entry["explicit_vs_recursion"] = rep.explicit_dev[n]
        report["orders"][n] = entry
        extra = (
            f"   explicit-vs-recursion {rep.explicit_dev[n]:.3e}"
            if n in rep.explicit_dev
            else ""
        )
        print(f"n={n}: residual {res:.3e}   flux balance {flux:.3e}{extra}")
    _atomic_write_text(
        config["out"], json.dumps(report, sort_keys=True, indent=2) + "\n"
    )
    _write_manifest(config["out"], "conserve", config)
    return 0


def cmd_reduce(config):
    cfg = SolitonConfig.parse(config["solitons"])
    bg = by_name(config["background"])
    grid = parse_grid(config["window"])
    if grid.mode != "lightcone":
        raise ConfigError("reduce takes a lightcone window (zeta=..,eta=..)")
    field = soliton_field(cfg, bg, grid, method=config["method"])
    lam, phi = decompose_field(field)

    report = {}
    res1, res2 = alt_equations_residual(grid, lam, phi)
    report["alt_eq_1"] = trimmed_max(res1)
    report["alt_eq_2"] = trimmed_max(res2)
    print(f"equivalent equations: {report['alt_eq_1']:.3e}, {report['alt_eq_2']:.3e}")

    if float(np.max(np.abs(phi))) < 1e-12:
        if float(np.max(lam)) <= DELTA_LAMBDA:
            raise SingularLambda(
                "identity field: L = 0 everywhere, the representation is "
                "singular; pick a window containing nontrivial field values"
            )
        print("diagonal field (phi = 0): scalar path skipped, wave case is linear")
        report["scalar"] = None
    else:
        bmap = barred_map(field)
        uc_z, uc_e = unit_constraint_residual(bmap, lam, phi)
        report["unit_constraint_zeta"] = trimmed_max(uc_z)
        report["unit_constraint_eta"] = trimmed_max(uc_e)
        print(
            f"unit constraints: {report['unit_constraint_zeta']:.3e}, "
            f"{report['unit_constraint_eta']:.3e}"
        )
        scal = scalar_residual(bmap, lam)
        report["scalar"] = {
            "winner_sign": scal.winner,
            "residual": trimmed_max(scal.residual),
            "conservation_residual": trimmed_max(scal.conservation_residual),
            "I0_flux_residual": float(np.nanmax(scal.flux_residual)),
        }
        print(
            f"scalar equation: winning sign {scal.winner:+d}, residual "
            f"{report['scalar']['residual']:.3e}, conservation form "
            f"{report['scalar']['conservation_residual']:.3e}, I0 flux "
            f"{report['scalar']['I0_flux_residual']:.3e}"
        )
    _atomic_write_text(
        config["out"], json.dumps(report, sort_keys=True, indent=2) + "\n"
    )
    _write_manifest(config["out"], "reduce", config)
    return 0


def cmd_heatmap(config):
    field, extras = load_field_csv(config["field"])
    component = config["component"]
    if component in ("g11", "g12", "g22"):
        values = getattr(field, component)
    elif component in ("lambda", "phi"):
        if component in extras:
            values = extras[component]
        else:
            lam, phi = decompose_field(field)
            values = lam if component == "lambda" else phi
    else:
        raise UnknownComponent(
            f"component {component!r} not one of g11, g12, g22, lambda, phi"
        )
    write_heatmap(config["out"], values, component)
    _write_manifest(config["out"], "heatmap", config)
    print(f"wrote {config['out']} (+ scale sidecar)")
    return 0


COMMANDS = {
    "gen": cmd_gen,
    "verify": cmd_verify,
    "conserve": cmd_conserve,
    "reduce": cmd_reduce,
    "heatmap": cmd_heatmap,
}


# ------------------------------------------------------------------ main


def build_parser():
    parser = argparse.ArgumentParser(
        prog="chiralfield",
        description="Exact multi-soliton fields of the symmetric matrix "
        "wave equation: generation, verification, conservation hierarchy, "
        "scalar reduction, rasters.",
        epilog="Environment: CHIRAL_THREADS caps worker threads; "
        "CHIRAL_KERNEL=fallback|native selects the point kernel.",
    )
    parser.add_argument("--manifest", help="re-run a saved manifest JSON")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--solitons",
        default="",
        help="pole list 'mu=<float>,C=<float>[;...]'; complex mu as a+bi "
        "with the conjugate partner listed explicitly; empty for the "
        "pure background",
    )
    common.add_argument(
        "--background", default="timelike", help="timelike | spacelike"
    )
    common.add_argument(
        "--method",
        default="auto",
        choices=["auto", "closed", "determinant"],
        help="evaluation path (default: closed forms when applicable)",
    )

    p = sub.add_parser("gen", parents=[common], help="write a field CSV")
    p.add_argument("--grid", required=True, help="'t=min:max:count,z=min:max:count'")
    p.add_argument("--columns", default="field", choices=["field", "full"],
                   help="'full' appends lambda,phi columns")
    p.add_argument("--out", default="field.csv")

    p = sub.add_parser("verify", parents=[common],
                       help="invariant checks and convergence orders")
    p.add_argument("--grid", default="t=-5:5:129,z=-5:5:129",
                   help="domain for the convergence study (counts per level "
                   "come from --levels)")
    p.add_argument("--levels", default="129,257,513",
                   help="comma-separated grid sizes for the order fit")
    p.add_argument("--field", default=None,
                   help="verify an existing CSV instead of a config")
    p.add_argument("--out", default="verify.json")

    p = sub.add_parser("conserve", parents=[common],
                       help="conserved-density hierarchy report")
    p.add_argument("--window", default="zeta=0.4:1.4:129,eta=-1:1:129",
                   help="'zeta=min:max:count,eta=min:max:count'")
    p.add_argument("--orders", type=int, default=3, help="deepest order n_max")
    p.add_argument("--out", default="conserve.json")

    p = sub.add_parser("reduce", parents=[common],
                       help="scalar-representation report")
    p.add_argument("--window", default="zeta=3.3:4.3:129,eta=-0.5:0.5:129",
                   help="'zeta=min:max:count,eta=min:max:count'")
    p.add_argument("--out", default="reduce.json")

    p = sub.add_parser("heatmap", help="render one component to 16-bit PGM")
    p.add_argument("--field", required=True, help="CSV produced by gen")
    p.add_argument("--component", required=True,
                   help="g11 | g12 | g22 | lambda | phi")
    p.add_argument("--out", default="heatmap.pgm")

    return parser


def _config_from_args(args):
    skip = {"command", "manifest"}
    return {k: v for k, v in vars(args).items() if k not in skip}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.manifest:
        try:
            with open(args.manifest, "r", encoding="utf-8") as fh:
                manifest = json.load(fh)
            command = manifest["command"]
            config = manifest["config"]
            if command not in COMMANDS:
                raise ConfigError(f"manifest names unknown command {command!r}")
        except (OSError, KeyError, json.JSONDecodeError, ConfigError) as exc:
            print(f"error: cannot replay manifest: {exc}", file=sys.stderr)
            return 2
    elif args.command:
        command = args.command
        config = _config_from_args(args)
    else:
        parser.print_help()
        return 2

    try:
        return COMMANDS[command](config)
    except DegenerateField as exc:
        print(f"error: degenerate field: {exc}", file=sys.stderr)
        return 3
    except SingularLambda as exc:
        print(f"error: singular reduction window: {exc}", file=sys.stderr)
        return 4
    except (ChiralFieldError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
