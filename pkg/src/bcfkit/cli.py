"""Command-line front end: ``bcfkit {fit,decompose,spectrum,coth}``.

Every run writes ``manifest.json`` into its output directory and every other
output file points back to it (CSV files through a leading ``# manifest=``
comment line, JSON files through a ``manifest`` field). Outputs depend only
on the inputs and options, never on wall-clock time, so identical runs give
byte-identical data files.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 I/O error.
"""

import argparse
import csv
import hashlib
import json
import math
import sys
import warnings
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np
from referencing import Registry, Resource

from . import __version__
from .bcf import decompose, exact_bcf
from .cothexp import Scheme, expansion, expansion_error, matsubara
from .errors import NumericalError, ValidationError
from .fitting import FitConfig, fit_sd, sample_target
from .lineshape import g_from_exponential, g_from_sd_quadrature
from .spectra import absorption, compare_spectra, default_time_grid, default_time_step
from .specdens import EVEN_N_MESSAGE, FitSDModel, reference_from_dict
from .units import time_to_fs

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
MANIFEST = "manifest.json"


class InputError(Exception):
    """Unreadable input file (exit code 4)."""


# ---------------------------------------------------------------- schemas

def _schema_registry():
    pkg = resources.files("bcfkit") / "schemas"
    schemas = {}
    registry = Registry()
    for entry in pkg.iterdir():
        if entry.name.endswith(".schema.json"):
            doc = json.loads(entry.read_text())
            schemas[entry.name] = doc
            registry = registry.with_resource(entry.name, Resource.from_contents(doc))
            registry = registry.with_resource(doc["$id"], Resource.from_contents(doc))
    return schemas, registry


def _read_bytes(path):
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from exc


def load_json(path, schema_name):
    """Parse ``path`` and validate it against a packaged schema.

    Returns ``(data, raw_bytes)``. Where a model is expected, the output of
    ``bcfkit fit`` is accepted as well and its model extracted. Syntax errors are reported with line and
    column, schema violations with the offending field path.
    """
    raw = _read_bytes(path)
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    except UnicodeDecodeError as exc:
        raise ValidationError(f"{path}: not UTF-8 text") from exc
    if schema_name == "model.schema.json" and isinstance(data, dict) and "n" not in data \
            and isinstance(data.get("model"), dict):
        # a fit_result.json from ``bcfkit fit`` carries the model under "model"
        data = data["model"]
    if isinstance(data, dict) and isinstance(data.get("n"), int) and data["n"] % 2 == 0:
        raise ValidationError(f"{path}: field 'n': " + EVEN_N_MESSAGE.format(n=data["n"]))
    schemas, registry = _schema_registry()
    validator = jsonschema.Draft202012Validator(schemas[schema_name], registry=registry)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        field = "/" + "/".join(str(p) for p in err.absolute_path)
        raise ValidationError(f"{path}: field '{field}': {err.message}")
    return data, raw


# ---------------------------------------------------------------- manifest

def _canonical(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


class Run:
    """Collects inputs of one invocation and writes the manifest."""

    def __init__(self, command, out_dir, options, seed=None):
        self.command = command
        self.out = Path(out_dir)
        self.options = options
        self.seed = seed
        self.inputs = []
        self.started = datetime.now(timezone.utc).isoformat()
        try:
            self.out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise InputError(f"cannot create {out_dir}: {exc.strerror or exc}") from exc

    def add_input(self, path, raw):
        self.inputs.append({"path": str(path), "sha256": hashlib.sha256(raw).hexdigest()})

    @property
    def config_hash(self):
        payload = {
            "command": self.command,
            "options": self.options,
            "inputs": [i["sha256"] for i in self.inputs],
            "seed": self.seed,
            "version": __version__,
        }
        return hashlib.sha256(_canonical(payload).encode()).hexdigest()

    @property
    def ref(self):
        return {"file": MANIFEST, "config_hash": self.config_hash}

    def _write(self, name, text):
        try:
            (self.out / name).write_text(text)
        except OSError as exc:
            raise InputError(f"cannot write {self.out / name}: {exc.strerror or exc}") from exc

    def write_json(self, name, obj):
        obj = dict(obj)
        obj["manifest"] = self.ref
        self._write(name, json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")

    def write_csv(self, name, header, columns):
        lines = [f"# manifest={MANIFEST} config_hash={self.config_hash}\n"]
        buf = _CSVBuffer()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in zip(*columns):
            writer.writerow([_fmt(v) for v in row])
        self._write(name, "".join(lines) + buf.text())

    def finish(self):
        manifest = {
            "command": self.command,
            "options": self.options,
            "inputs": self.inputs,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "version": __version__,
            "started": self.started,
            "finished": datetime.now(timezone.utc).isoformat(),
        }
        self._write(MANIFEST, json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n")


class _CSVBuffer:
    def __init__(self):
        self.parts = []

    def write(self, s):
        self.parts.append(s)

    def text(self):
        return "".join(self.parts)


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


# ---------------------------------------------------------------- commands

def _load_sd(path, run):
    data, raw = load_json(path, "reference.schema.json" if "kind" in _peek(path) else "model.schema.json")
    run.add_input(path, raw)
    if "kind" in data:
        return reference_from_dict(data)
    return FitSDModel.from_dict(data)


def _peek(path):
    raw = _read_bytes(path)
    try:
        data = json.loads(raw)
    except (json.JSONDecodeError, UnicodeDecodeError):
        return {}
    return data if isinstance(data, dict) else {}


def cmd_fit(args):
    run = Run("fit", args.out, {"target": Path(args.target).name, "config": Path(args.config).name})
    target_data, raw_t = load_json(args.target, "target.schema.json")
    cfg_data, raw_c = load_json(args.config, "fit_config.schema.json")
    run.add_input(args.target, raw_t)
    run.add_input(args.config, raw_c)
    cfg = FitConfig.from_dict(cfg_data)
    run.seed = cfg.seed
    if "kind" in target_data:
        target = reference_from_dict(target_data)
    else:
        target = (np.array(target_data["omega"]), np.array(target_data["J"]))
        if np.any(np.diff(target[0]) <= 0):
            raise ValidationError(f"{args.target}: field '/omega': must be strictly increasing")
    result = fit_sd(target, cfg)
    if not result.converged:
        print("warning: fit did not converge; writing the best model found", file=sys.stderr)
    w, J_t = sample_target(target, cfg)
    J_f = result.model(w)
    run.write_json("fit_result.json", result.to_dict())
    run.write_csv("fit_overlay.csv", ["omega_invcm", "target", "fit", "diff"], [w, J_t, J_f, J_f - J_t])
    run.finish()
    return EXIT_OK


def _expansion_from_args(args):
    scheme = Scheme(args.scheme)
    if scheme is Scheme.ZERO:
        return expansion(scheme)
    if args.L is None:
        raise ValidationError(f"--L is required for the {scheme.value} scheme")
    return expansion(scheme, args.L)


def cmd_decompose(args):
    opts = {"model": Path(args.model).name, "temp_kelvin": args.temp_kelvin, "scheme": args.scheme,
            "L": args.L, "t_max": args.t_max, "t_count": args.t_count, "oracle": args.oracle}
    run = Run("decompose", args.out, opts)
    data, raw = load_json(args.model, "model.schema.json")
    run.add_input(args.model, raw)
    model = FitSDModel.from_dict(data)
    bcf = decompose(model, _expansion_from_args(args), args.temp_kelvin)
    t = np.linspace(0.0, args.t_max, args.t_count)
    alpha = bcf(t)
    header = ["t_invcm", "t_fs", "re_alpha", "im_alpha"]
    cols = [t, time_to_fs(t), alpha.real, alpha.imag]
    if args.oracle:
        exact = exact_bcf(model, args.temp_kelvin, t)
        header += ["re_exact", "im_exact", "abs_err"]
        cols += [exact.real, exact.imag, np.abs(alpha - exact)]
    g = g_from_exponential(bcf, t)
    run.write_json("bcf.json", bcf.to_dict())
    run.write_csv("bcf.csv", header, cols)
    run.write_csv("lineshape.csv", ["t_invcm", "re_g", "im_g"], [t, g.g.real, g.g.imag])
    run.finish()
    return EXIT_OK


def _spectrum_of(sd, args, t, exact):
    if isinstance(sd, FitSDModel) and not exact:
        # at zero temperature only the coth ~ 1 expansion applies
        scheme = "zero" if args.temp_kelvin == 0 else args.scheme
        ns = argparse.Namespace(scheme=scheme, L=args.L)
        bcf = decompose(sd, _expansion_from_args(ns), args.temp_kelvin)
        g = g_from_exponential(bcf, t)
    else:
        g = g_from_sd_quadrature(sd, args.temp_kelvin, t)
    return absorption(g, n_points=args.n_points, gamma_add=args.gamma_add,
                      window=args.window, separate_zpl=args.separate_zpl)


def _emit_spectrum(run, stem, sp, lo, hi):
    keep = (sp.omega >= lo) & (sp.omega <= hi)
    run.write_csv(f"{stem}.csv", ["omega_invcm", "A"], [sp.omega[keep], sp.values[keep]])
    info = sp.info()
    run.write_json(f"{stem}.json", {
        "dt": info["dt"], "n_points": info["n_points"], "gamma_add": info["gamma_add"],
        "window": info["window"], "area": info["area"], "delta_weight": info["delta_weight"],
        "negative_excursions": sp.has_negative_excursions,
    })


def cmd_spectrum(args):
    opts = {k: v for k, v in vars(args).items() if k not in ("func", "out")}
    opts["source"] = Path(args.source).name
    if args.exact:
        opts["exact"] = Path(args.exact).name
    run = Run("spectrum", args.out, opts)
    sd = _load_sd(args.source, run)
    ref = _load_sd(args.exact, run) if args.exact else None
    if ref is not None and isinstance(ref, FitSDModel):
        raise ValidationError(f"{args.exact}: --exact needs a reference spectral density")
    dt = args.dt
    if dt is None:
        dt = min(default_time_step(s) for s in (sd, ref) if s is not None)
    n_fft = args.n_points
    t = default_time_grid(sd, n_points=n_fft, padding=args.padding, dt=dt)
    lo, hi = args.omega_range
    sp = _spectrum_of(sd, args, t, exact=False)
    _emit_spectrum(run, "spectrum", sp, lo, hi)
    if ref is not None:
        sp_x = _spectrum_of(ref, args, t, exact=True)
        _emit_spectrum(run, "spectrum_exact", sp_x, lo, hi)
        run.write_json("compare.json", compare_spectra(sp_x, sp))
    run.finish()
    return EXIT_OK


def cmd_coth(args):
    opts = {"scheme": args.scheme, "L": args.L, "range": list(args.range), "num": args.num}
    run = Run("coth", args.out, opts)
    c = _expansion_from_args(args)
    a, b = args.range
    if not 0 < a < b:
        raise ValidationError("--range needs 0 < a < b")
    ell = np.arange(1, c.L + 1)
    run.write_csv("coth_terms.csv", ["ell", "im_xi", "eta"], [ell, c.xi.imag, c.eta])
    x = np.geomspace(a, b, args.num)
    exact = 1.0 / np.tanh(x)
    approx = c(x)
    run.write_csv("coth_error.csv", ["x", "exact", "approx", "rel_err"],
                  [x, exact, approx, np.abs(approx - exact) / exact])
    summary = {"scheme": c.scheme.value, "L": c.L,
               "max_rel_err": expansion_error(c, a, b, args.num)}
    if c.L:
        summary["matsubara_max_rel_err"] = expansion_error(matsubara(c.L), a, b, args.num)
    run.write_json("coth_summary.json", summary)
    run.finish()
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser():
    parser = argparse.ArgumentParser(
        prog="bcfkit",
        description="Fit spectral densities, build exponential bath correlation "
                    "functions and compute absorption spectra.",
    )
    parser.add_argument("--version", action="version", version=f"bcfkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit the pole-product family to a target")
    p.add_argument("target", help="reference SD JSON or tabulated {omega, J}")
    p.add_argument("config", help="fit configuration JSON")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_fit)

    schemes = [s.value for s in Scheme if s is not Scheme.CROY_SAALMANN]

    p = sub.add_parser("decompose", help="exponential decomposition of a fitted model")
    p.add_argument("model", help="model JSON")
    p.add_argument("--temp-kelvin", type=float, required=True)
    p.add_argument("--scheme", choices=schemes, default="pade")
    p.add_argument("--L", type=int, help="number of coth expansion terms")
    p.add_argument("--t-max", type=float, default=0.2, help="last time (conjugate to cm^-1)")
    p.add_argument("--t-count", type=int, default=201)
    p.add_argument("--oracle", action="store_true", help="add quadrature reference columns")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("spectrum", help="absorption spectrum of a model or reference SD")
    p.add_argument("source", help="model JSON (exponential route) or reference SD JSON")
    p.add_argument("--temp-kelvin", type=float, required=True)
    p.add_argument("--scheme", choices=schemes, default="pade")
    p.add_argument("--L", type=int)
    p.add_argument("--exact", help="reference SD JSON for a quadrature spectrum and comparison")
    p.add_argument("--gamma-add", type=float, help="artificial Lorentzian HWHM in cm^-1")
    p.add_argument("--n-points", type=int, default=1 << 20, help="FFT length")
    p.add_argument("--padding", type=int, default=4, help="zero-padding factor")
    p.add_argument("--dt", type=float, help="time step (conjugate to cm^-1)")
    p.add_argument("--window", choices=["hann", "gaussian"])
    p.add_argument("--separate-zpl", action="store_true",
                   help="report the undamped zero-phonon line as a delta weight")
    p.add_argument("--omega-range", type=float, nargs=2, default=(-1000.0, 4000.0),
                   metavar=("LO", "HI"), help="frequency window written to the CSV")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("coth", help="inspect a coth pole expansion")
    p.add_argument("--scheme", choices=schemes, default="pade")
    p.add_argument("--L", type=int)
    p.add_argument("--range", type=float, nargs=2, default=(0.1, 10.0), metavar=("A", "B"))
    p.add_argument("--num", type=int, default=10_000)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_coth)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = _show_warning
            return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericalError, ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, NotImplementedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
