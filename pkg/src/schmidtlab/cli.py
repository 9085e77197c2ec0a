"""``schmidtlab`` command line.

Subcommands
-----------
table      K(eta) from the exact, asymptotic and fitted formulas over a sweep,
           optionally with the numerical SVD and purity routes.
decompose  Schmidt spectrum, entropies and leading modes at one eta.
verify     Cross-check every route to K against the exact formula.

Exit status: 0 success, 1 numerical failure (or a failed verify), 2 usage
error. Settings come from flags, then ``--config FILE`` (``key = value``
lines, keys named like the long flags), then built-in defaults.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import io
import json
import logging
import math
import os
import sys
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .analysis import (
    NumericalSettings,
    SweepConfig,
    atom_side_schmidt_number,
    field_side_schmidt_number,
    model_grids,
    model_kernel,
    purity_route,
    run_sweep,
)
from .model import ScatteringModel
from .quadrature import ExtentPolicy, Rule
from .schmidt import NumericalError, entropy_report, modes, spectrum

log = logging.getLogger("schmidtlab")

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_USAGE = 2

THREADS_ENV = "SCHMIDTLAB_THREADS"
CSV_DIGITS = 15

DEFAULTS = {
    "eta": None,
    "eta_min": 0.1,
    "eta_max": 50.0,
    "steps": 100,
    "scale": "linear",
    "grid_n": 512,
    "rule": "gauss_legendre",
    "k_extent_factor": 16.0,
    "k_extent_offset": 64.0,
    "q_extent_factor": 8.0,
    "q_extent_offset": 8.0,
    "numerical": False,
    "modes": 4,
    "orders": "1.5,2,3",
    "output": None,  # per-command default
    "out": None,
    "tol": None,  # per-command default
}
COMMAND_DEFAULTS = {
    "table": {"output": "csv", "tol": 1e-6},
    "decompose": {"output": "json", "tol": 1e-6, "eta": "10"},
    "verify": {"output": "csv", "tol": 1e-3, "eta": "1,5,10"},
}
_FLOAT_KEYS = {"eta_min", "eta_max", "k_extent_factor", "k_extent_offset",
               "q_extent_factor", "q_extent_offset", "tol"}
_INT_KEYS = {"steps", "grid_n", "modes"}


class UsageError(Exception):
    pass


def fmt(x: Optional[float]) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    return f"{float(x):#.{CSV_DIGITS}g}"


def parse_float_list(text: str, name: str) -> list[float]:
    items = [t.strip() for t in str(text).split(",") if t.strip()]
    try:
        values = [float(t) for t in items]
    except ValueError as exc:
        raise UsageError(f"{name}: {exc}") from None
    if not values:
        raise UsageError(f"{name}: empty list")
    return values


def read_config(path: str) -> dict:
    cfg = {}
    try:
        lines = open(path, encoding="utf-8").read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in DEFAULTS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        cfg[key] = value
    return cfg


def _coerce(key, value):
    if value is None:
        return None
    try:
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _INT_KEYS:
            return int(value)
    except ValueError:
        raise UsageError(f"{key}: invalid value {value!r}") from None
    if key == "numerical" and isinstance(value, str):
        low = value.lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise UsageError(f"numerical: invalid boolean {value!r}")
        return low in ("true", "1", "yes")
    return value


def resolve_settings(args: argparse.Namespace) -> dict:
    """Merge flags > config file > command defaults > global defaults."""
    merged = dict(DEFAULTS)
    merged.update(COMMAND_DEFAULTS[args.command])
    if args.config:
        merged.update(read_config(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None and value is not False:
            merged[key] = value
    return {k: _coerce(k, v) for k, v in merged.items()}


def numerical_settings(s: dict) -> NumericalSettings:
    try:
        policy = ExtentPolicy(
            k_slope=s["k_extent_factor"],
            k_offset=s["k_extent_offset"],
            q_slope=s["q_extent_factor"],
            q_offset=s["q_extent_offset"],
        )
        if s["grid_n"] < 16:
            raise ValueError("grid-n must be at least 16")
        if not s["tol"] > 0:
            raise ValueError("tol must be positive")
        return NumericalSettings(grid_n=s["grid_n"], rule=Rule(s["rule"]), extents=policy, tol=s["tol"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def thread_limit() -> int:
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 0:
        raise UsageError(f"{THREADS_ENV} must be >= 0")
    return n


@contextlib.contextmanager
def limited_threads(n: int):
    if n <= 0:
        yield
        return
    from threadpoolctl import threadpool_limits

    with threadpool_limits(limits=n):
        yield


def _check_etas(values: Sequence[float]) -> list[float]:
    for v in values:
        if not (math.isfinite(v) and v > 0):
            raise UsageError(f"eta must be positive and finite, got {v!r}")
    return list(values)


# -- subcommands ---------------------------------------------------------------

def cmd_table(s: dict, threads: int) -> tuple[str, int]:
    try:
        cfg = SweepConfig(
            eta_min=s["eta_min"],
            eta_max=s["eta_max"],
            steps=s["steps"],
            scale=s["scale"],
            grid_n=s["grid_n"],
            include_numerical=bool(s["numerical"]),
            output_format=s["output"],
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    settings = numerical_settings(s)
    rows = run_sweep(cfg, settings, workers=max(threads, 1))
    columns = ["eta", "k_exact", "k_asymptotic", "k_fit"]
    if cfg.include_numerical:
        columns += ["k_numerical", "purity_numerical", "converged"]
        bad = [r.eta for r in rows if not r.converged]
        if bad:
            log.warning("%d of %d rows did not converge to tol=%g (first at eta=%s)",
                        len(bad), len(rows), settings.tol, fmt(bad[0]))
    if cfg.output_format == "json":
        doc = {"columns": columns, "rows": [{c: getattr(r, c) for c in columns} for r in rows]}
        return dump_json(doc), EXIT_OK
    return write_csv(columns, [[fmt(getattr(r, c)) for c in columns] for r in rows]), EXIT_OK


def decompose_document(eta: float, settings: NumericalSettings, mode_count: int,
                       orders: Sequence[float]) -> dict:
    model = ScatteringModel(eta)
    kern = model_kernel(model, settings=settings)
    kern.check_normalized()
    spec = spectrum(kern)
    ent = entropy_report(spec, orders)
    doc = {
        "eta": eta,
        "grid": {
            "n": settings.grid_n,
            "rule": settings.rule.value,
            "k_extent": kern.k_grid.extent,
            "q_extent": kern.q_grid.extent,
        },
        "schmidt_number": spec.schmidt_number,
        "schmidt_number_exact": model.schmidt_number_exact(),
        "raw_trace": spec.trace,
        "n_significant": spec.n_significant,
        "eigenvalues": spec.significant.tolist(),
        "entropies": {
            "orders": list(ent.orders),
            "trace_powers": list(ent.trace_powers),
            "tsallis": list(ent.tsallis),
            "renyi": list(ent.renyi),
            "linear": ent.linear,
            "von_neumann": ent.von_neumann,
        },
        "modes": None,
    }
    if mode_count > 0:
        md = modes(kern, mode_count)
        if md.truncated:
            log.warning("only %d modes above numerical rank; %d requested", md.count, mode_count)
        doc["modes"] = {
            "count": md.count,
            "singular_values": md.singular_values.tolist(),
            "k_nodes": md.k_nodes.tolist(),
            "q_nodes": md.q_nodes.tolist(),
            "field": [{"re": m.real.tolist(), "im": m.imag.tolist()} for m in md.field_modes],
            "atom": [{"re": m.real.tolist(), "im": m.imag.tolist()} for m in md.atom_modes],
        }
    return doc


def cmd_decompose(s: dict, threads: int) -> tuple[str, int]:
    etas = _check_etas(parse_float_list(s["eta"], "--eta"))
    if len(etas) != 1:
        raise UsageError("decompose takes a single --eta")
    if s["modes"] < 0:
        raise UsageError("--modes must be >= 0")
    if s["modes"] > s["grid_n"]:
        raise UsageError("--modes cannot exceed --grid-n")
    orders = parse_float_list(s["orders"], "--orders")
    if any(not p > 1 for p in orders):
        raise UsageError("--orders must all be > 1")
    if s["output"] not in ("csv", "json"):
        raise UsageError("--output must be csv or json")
    settings = numerical_settings(s)
    doc = decompose_document(etas[0], settings, s["modes"], orders)
    if s["output"] == "json":
        return dump_json(doc), EXIT_OK
    return decompose_csv(doc), EXIT_OK


def decompose_csv(doc: dict) -> str:
    """Long format: ``quantity,index,x,re,im``."""
    rows = [["schmidt_number", "", "", fmt(doc["schmidt_number"]), ""],
            ["raw_trace", "", "", fmt(doc["raw_trace"]), ""]]
    rows += [["eigenvalue", str(i), "", fmt(v), ""] for i, v in enumerate(doc["eigenvalues"])]
    ent = doc["entropies"]
    for name in ("tsallis", "renyi"):
        rows += [[name, "", fmt(p), fmt(v), ""] for p, v in zip(ent["orders"], ent[name])]
    rows += [["linear", "", "", fmt(ent["linear"]), ""],
             ["von_neumann", "", "", fmt(ent["von_neumann"]), ""]]
    md = doc["modes"]
    if md:
        for side, nodes in (("field", md["k_nodes"]), ("atom", md["q_nodes"])):
            for i, m in enumerate(md[side]):
                rows += [[f"{side}_mode", str(i), fmt(x), fmt(re), fmt(im)]
                         for x, re, im in zip(nodes, m["re"], m["im"])]
    return write_csv(["quantity", "index", "x", "re", "im"], rows)


def verify_rows(etas: Sequence[float], settings: NumericalSettings, tol: float) -> list[dict]:
    rows = []
    for eta in etas:
        model = ScatteringModel(eta)
        exact = model.schmidt_number_exact()
        kern = model_kernel(model, settings=settings)
        k_svd = spectrum(kern).schmidt_number
        k_purity = 1.0 / purity_route(model, settings).fine_value
        k_field = field_side_schmidt_number(kern)
        _, qg = model_grids(eta, settings.grid_n, settings)
        k_atom = atom_side_schmidt_number(model, qg)
        res = {
            "svd_vs_exact": abs(k_svd / exact - 1.0),
            "purity_vs_exact": abs(k_purity / exact - 1.0),
            "field_vs_atom": abs(k_field / k_atom - 1.0),
        }
        rows.append({
            "eta": eta,
            "k_exact": exact,
            "k_svd": k_svd,
            "k_purity": k_purity,
            "k_field": k_field,
            "k_atom": k_atom,
            **res,
            "passed": all(v <= tol for v in res.values()),
        })
    return rows


def cmd_verify(s: dict, threads: int) -> tuple[str, int]:
    etas = _check_etas(parse_float_list(s["eta"], "--eta"))
    settings = numerical_settings(s)
    rows = verify_rows(sorted(etas), settings, s["tol"])
    passed = all(r["passed"] for r in rows)
    for r in rows:
        if not r["passed"]:
            log.warning("eta=%s failed tol=%g: svd %.3e, purity %.3e, field/atom %.3e",
                        fmt(r["eta"]), s["tol"], r["svd_vs_exact"], r["purity_vs_exact"], r["field_vs_atom"])
    status = EXIT_OK if passed else EXIT_NUMERICAL
    if s["output"] == "json":
        return dump_json({"tol": s["tol"], "passed": passed, "rows": rows}), status
    columns = list(rows[0])
    return write_csv(columns, [[fmt(r[c]) for c in columns] for r in rows]), status


# -- output ----------------------------------------------------------------------

def write_csv(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def dump_json(doc) -> str:
    return json.dumps(doc, indent=1, allow_nan=False) + "\n"


def emit(text: str, path: Optional[str]) -> None:
    if path and path != "-":
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- argument parsing ------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("numerics")
    g.add_argument("--grid-n", type=int, help="quadrature points per axis (default 512)")
    g.add_argument("--rule", choices=[r.value for r in Rule], help="quadrature rule")
    g.add_argument("--k-extent-factor", type=float, help="k box half-width per unit eta (default 16)")
    g.add_argument("--q-extent-factor", type=float, help="q box half-width per unit eta (default 8)")
    g.add_argument("--tol", type=float, help="relative tolerance")
    g.add_argument("--output", choices=["csv", "json"])
    g.add_argument("--out", help="output file (default: stdout)")
    g.add_argument("--config", help="key = value settings file")
    g.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="schmidtlab", description="Schmidt number of the atom-photon scattering state.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("table", parents=[common], help="K(eta) sweep")
    t.add_argument("--eta-min", type=float)
    t.add_argument("--eta-max", type=float)
    t.add_argument("--steps", type=int)
    t.add_argument("--scale", choices=["linear", "log"])
    t.add_argument("--numerical", action="store_true", help="add SVD and purity columns")

    d = sub.add_parser("decompose", parents=[common], help="spectrum and modes at one eta")
    d.add_argument("--eta", help="control parameter (default 10)")
    d.add_argument("--modes", type=int, help="number of mode pairs to emit (default 4)")
    d.add_argument("--orders", help="entropy orders, comma separated (default 1.5,2,3)")

    v = sub.add_parser("verify", parents=[common], help="cross-check all routes to K")
    v.add_argument("--eta", help="comma separated eta values (default 1,5,10)")
    return p


def configure_logging(verbose: bool) -> None:
    for h in list(log.handlers):
        if getattr(h, "_schmidtlab", False):
            log.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
    handler._schmidtlab = True
    log.addHandler(handler)
    log.setLevel(logging.DEBUG if verbose else logging.WARNING)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)
    commands = {"table": cmd_table, "decompose": cmd_decompose, "verify": cmd_verify}
    try:
        settings = resolve_settings(args)
        threads = thread_limit()
        with limited_threads(threads):
            text, status = commands[args.command](settings, threads)
        emit(text, settings["out"])
    except UsageError as exc:
        print(f"schmidtlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"schmidtlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return status


if __name__ == "__main__":
    sys.exit(main())
