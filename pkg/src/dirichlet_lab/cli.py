"""Batch front end: JSON configs in, CSV and JSON tables out.

Every output file starts with ``#`` header lines echoing the effective
config, its sha256 and the package versions; bodies are deterministic at
a fixed seed.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
import warnings
from pathlib import Path

from . import __version__

EXIT_OK, EXIT_CONFIG, EXIT_EVAL = 0, 2, 3


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config schemas: key -> (accepted types, default); a default of ... marks a required key

_NUM = (int, float)
_K = (str, dict, list)
_SYM = (dict,)

SCHEMAS = {
    "capacity": {
        "K": (_K, ...),
        "panel_count": ((int,), 256),
        "eps": ((list,), None),
        "log_eps": ((bool,), False),
    },
    "equilibrium": {
        "K": (_K, ...),
        "panel_count": ((int,), 256),
        "grid_size": ((int,), 10_000),
    },
    "peaking": {
        "K": (_K, ...),
        "J": ((int,), 2),
        "log_eps_range": ((list,), [-6000.0, math.log(0.5)]),
        "panel_count": ((int,), 64),
        "certificate": ((bool,), False),
        "levels": ((list,), [12, 16, 20]),
        "series_order": ((int,), 128),
        "scan": ((int,), 2000),
    },
    "symbol": {
        "symbol": (_SYM, ...),
        "grid": ((int,), 10_000),
        "scan": ((int,), 4096),
        "K": (_K, None),
        "collar": (_NUM, 0.05),
    },
    "matrix": {
        "symbol": (_SYM, ...),
        "N": ((int,), 64),
        "alpha": (_NUM, 0.0),
        "rho": (_NUM, None),
    },
    "schatten": {
        "symbol": (_SYM, ...),
        "alpha": (_NUM, 0.0),
        "p": ((list, int, float), [2.0]),
        "n_max": ((int,), 12),
        "samples": ((int,), 20_000),
        "backend": ((str,), None),
    },
    "windows": {
        "symbol": (_SYM, ...),
        "xi": (_NUM + (list,), 0.0),
        "h": ((list,), None),
        "n_range": ((list,), [2, 12]),
        "x_floor": (_NUM, 1e-12),
    },
    "report": {
        "n_max": ((int,), 20),
        "N": ((int,), 256),
    },
}


def validate(command: str, raw: dict) -> dict:
    if command not in SCHEMAS:
        raise ConfigError(f"unknown command {command!r}")
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    schema = SCHEMAS[command]
    extra = sorted(set(raw) - set(schema) - {"seed"})
    if extra:
        raise ConfigError(f"unknown config key {extra[0]!r} for {command}")
    out = {}
    for key, (types, default) in schema.items():
        if key in raw:
            v = raw[key]
            if isinstance(v, bool) and bool not in types:
                raise ConfigError(f"config key {key!r} has the wrong type")
            if v is not None and not isinstance(v, types):
                raise ConfigError(f"config key {key!r} has the wrong type")
            out[key] = v
        elif default is ...:
            raise ConfigError(f"missing config key {key!r}")
        else:
            out[key] = default
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed must be a nonnegative integer")
    out["seed"] = seed
    return out


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


# ---------------------------------------------------------------------------
# output


class Writer:
    """Writes files under ``out`` with a common header."""

    def __init__(self, out: Path, command: str, cfg: dict, threads: int | None):
        import numpy
        import scipy

        self.out = out
        self.command = command
        self.cfg = cfg
        self.flags: list[str] = []
        self.header = [
            f"dirlab {__version__} command={command}",
            f"config_sha256={config_hash(cfg)}",
            "config=" + json.dumps(cfg, sort_keys=True, separators=(",", ":")),
            f"numpy={numpy.__version__} scipy={scipy.__version__}",
        ]
        if threads is not None:
            self.header.append(f"threads={threads}")
        self.files: list[Path] = []

    def _head(self) -> str:
        lines = self.header + [f"warning={w}" for w in self.flags]
        return "".join(f"# {line}\n" for line in lines)

    def csv(self, name: str, columns: list[str], rows: list[list]) -> Path:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(x) for x in r])
        return self._write(name, self._head() + buf.getvalue())

    def json(self, name: str, obj) -> Path:
        doc = {"header": self.header + [f"warning={w}" for w in self.flags], "data": obj}
        return self._write(name, json.dumps(doc, indent=1, sort_keys=True, default=_json_default) + "\n")

    def _write(self, name: str, text: str) -> Path:
        path = self.out / name
        path.write_text(text)
        self.files.append(path)
        return path


def _cell(x):
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return f"{x:.17g}"
    if hasattr(x, "dtype") and x.dtype.kind == "f":
        return f"{float(x):.17g}"
    return x


def _json_default(o):
    if hasattr(o, "tolist"):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(type(o).__name__)


# ---------------------------------------------------------------------------
# descriptors


def parse_K(desc):
    from . import capacity as cap

    if desc == "circle":
        return cap.ArcSet.circle()
    if isinstance(desc, list):
        return cap.ArcSet.points([float(t) for t in desc])
    if isinstance(desc, dict):
        if "arcs" in desc:
            return cap.ArcSet.from_dict(desc)
        if "points" in desc:
            return cap.ArcSet.points([float(t) for t in desc["points"]])
        if "cantor" in desc:
            return cap.CantorSpec.from_dict(desc["cantor"]).arcset()
        if "ratios" in desc:
            return cap.CantorSpec.from_dict(desc).arcset()
    raise ConfigError("invalid K descriptor")


def parse_symbol(desc):
    from .symbols import symbol_from_descriptor

    try:
        return symbol_from_descriptor(desc)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"invalid symbol descriptor: {exc}") from exc
    except ValueError as exc:
        if "unknown" in str(exc) or "invalid" in str(exc):
            raise ConfigError(str(exc)) from exc
        raise


# ---------------------------------------------------------------------------
# commands


def cmd_capacity(cfg, w: Writer):
    from . import capacity as cap

    K = parse_K(cfg["K"])
    if cfg["eps"]:
        rows = cap.capacity_ladder(K, cfg["eps"], cfg["panel_count"], log_eps=cfg["log_eps"])
        key = "log_eps" if cfg["log_eps"] else "eps"
        w.csv("capacity.csv", [key, "energy", "capacity", "arcs"], [[r[key], r["energy"], r["capacity"], r["arcs"]] for r in rows])
    else:
        res = cap.equilibrium(K, cfg["panel_count"], check=False)
        e_fourier, _ = cap.energy_fourier(res.measure)
        w.csv("capacity.csv", ["energy", "energy_fourier", "capacity", "arcs"], [[res.energy, e_fourier, res.capacity, len(K)]])


def cmd_equilibrium(cfg, w: Writer):
    from . import capacity as cap

    K = parse_K(cfg["K"])
    res = cap.equilibrium(K, cfg["panel_count"], cfg["grid_size"])
    if not res.certified:
        w.flags.append("certificate failed")
    w.csv(
        "frostman.csv",
        ["energy", "capacity", "frostman_sup", "frostman_dev", "certified"],
        [[res.energy, res.capacity, res.frostman_sup, res.frostman_dev, res.certified]],
    )
    w.json("equilibrium.json", res.to_dict())


def cmd_peaking(cfg, w: Writer):
    import numpy as np

    from . import peaking as pk
    from .symbols import compose, cusp_map

    K = parse_K(cfg["K"])
    plan = pk.plan_peaking(K, cfg["J"], tuple(cfg["log_eps_range"]), cfg["panel_count"])
    fn = pk.PeakingFunction(plan)
    rows = []
    for t in plan.terms:
        rows.append([t.j, t.log_eps, t.energy, t.log_delta, pk.lower_bound_near_K(fn, t.j, np.exp(1j * float(K.centers[0])))])
    w.csv("plan.csv", ["j", "log_eps", "I", "log_delta", "collar_bound"], rows)
    w.json("plan.json", plan.to_dict())
    q = pk.build_q(fn)
    order = cfg["series_order"]
    w.json("f_series.json", pk.as_series(fn, 0.99, order).to_dict())
    w.json("q_series.json", pk.as_series(q, 0.99, order).to_dict())
    scan = pk.contact_scan(compose(cusp_map(), q), K, cfg["scan"])
    out = {"verify": plan.verify(), "contact_scan": scan, "ceiling": fn.ceiling()}
    if cfg["certificate"]:
        cert = pk.hs_certificate(q, fn, cfg["levels"])
        if not cert["stable"]:
            w.flags.append("certificate inconclusive")
        out["hs_certificate"] = cert
    w.json("peaking.json", out)


def cmd_symbol(cfg, w: Writer):
    import numpy as np

    from .symbols import check_self_map, polar_grid

    phi = parse_symbol(cfg["symbol"])
    if not phi.evaluable:
        raise ValueError("symbol not evaluable")
    summary = check_self_map(phi, polar_grid(cfg["grid"]))
    n = cfg["scan"]
    th = 2 * math.pi * (np.arange(n) + 0.5) / n - math.pi
    vals = np.abs(phi(np.exp(1j * th)))
    w.csv("scan.csv", ["theta", "modulus"], [[float(a), float(b)] for a, b in zip(th, vals)])
    if cfg["K"] is not None:
        from .peaking import contact_scan

        summary["contact_scan"] = contact_scan(phi, parse_K(cfg["K"]), n, cfg["collar"])
    w.json("symbol.json", summary)


def cmd_matrix(cfg, w: Writer):
    from . import operators as op

    phi = parse_symbol(cfg["symbol"])
    M = op.build_matrix(phi, cfg["N"], cfg["alpha"], cfg["rho"])
    spec = op.singular_values(M)
    w.csv("spectrum.csv", ["k", "sigma", "N"], [[k, float(s), spec.order] for k, s in enumerate(spec.values, 1)])
    info = {"rho": M.rho, "samples": M.samples, "max_tail": float(M.tails.max()), "schatten2": spec.schatten(2)}
    if cfg["N"] >= 100 and spec.values[99] > 0:
        info["sqrt_fit"] = op.fit_sqrt_decay(spec.values)
    w.json("matrix.json", info)


def cmd_schatten(cfg, w: Writer):
    from . import operators as op

    phi = parse_symbol(cfg["symbol"])
    p = cfg["p"]
    rep = op.schatten_sum(phi, cfg["alpha"], p, cfg["n_max"], cfg["samples"], cfg["seed"], cfg["backend"])
    w.csv(
        "windows.csv",
        ["alpha", "n", "j", "mass", "stderr", "backend"],
        [[float(rep.alpha), n, j, m, e, b] for (n, j), (m, e, b) in sorted(rep.masses.items())],
    )
    rows = []
    for q in sorted(rep.verdicts):
        d = rep.diagnostics[q]
        rows.append([q, rep.partial_sums[q], rep.verdicts[q], d["ratio"], d["exponent"]])
    w.csv("verdicts.csv", ["p", "partial_sum", "verdict", "ratio", "exponent"], rows)
    gen = [[q, n, t] for q in sorted(rep.generation_totals) for n, t in sorted(rep.generation_totals[q].items())]
    w.csv("generations.csv", ["p", "n", "total"], gen)


def cmd_windows(cfg, w: Writer):
    import numpy as np

    from . import operators as op

    phi = parse_symbol(cfg["symbol"])
    xi = cfg["xi"]
    xi = complex(*xi) if isinstance(xi, list) else complex(math.cos(xi), math.sin(xi))
    hs = cfg["h"] or [2.0**-n for n in range(cfg["n_range"][0], cfg["n_range"][1] + 1)]
    rows = []
    for h in hs:
        avg = op.zorboska_average(phi, xi, float(h), cfg["x_floor"])
        rows.append([float(h), avg, avg * math.log(1 / (1 - h))])
    w.csv("zorboska.csv", ["h", "average", "average_times_log"], rows)
    _ = np


def cmd_report(cfg, w: Writer):
    import numpy as np

    from . import capacity as cap
    from . import operators as op
    from . import symbols as sy

    circle = cap.equilibrium(cap.ArcSet.circle(), 64, check=False)
    w.csv("capacity_circle.csv", ["energy", "capacity"], [[circle.energy, circle.capacity]])
    ladder = cap.capacity_ladder(cap.ArcSet.points([0.0]), [2.0**-k for k in range(3, 13)], 64)
    w.csv("ladder.csv", ["eps", "energy", "energy_minus_log"], [[r["eps"], r["energy"], r["energy"] - math.log(1 / r["eps"])] for r in ladder])
    rows = []
    for kind, p1, ps in (("inverse_power", 2.0, [1.6, 2.0, 2.4]), ("inverse_log", None, [0.5, 1.0, 2.0, 4.0])):
        phi = sy.separation_symbol(sy.separation_profile(kind, p1) if p1 else sy.separation_profile(kind))
        rep = op.schatten_sum(phi, 0, ps, cfg["n_max"])
        for q in ps:
            rows.append([kind, q, rep.verdicts[q], rep.diagnostics[q]["ratio"], rep.diagnostics[q]["exponent"]])
    w.csv("separation_verdicts.csv", ["profile", "p", "verdict", "ratio", "exponent"], rows)
    cusp = sy.cusp_map()
    masses = op.window_masses(cusp, 0, 12)
    rep = op.WindowReport(0.0, masses)
    w.csv("cusp_generations.csv", ["n", "windows", "mass"], [[n, len(op.windows_meeting(cusp.image_region, n)), rep.generation_mass(n)] for n in range(13)])
    spec = op.singular_values(op.build_matrix(cusp, cfg["N"]))
    fit = op.fit_sqrt_decay(spec.values)
    w.csv("cusp_spectrum.csv", ["k", "sigma", "N"], [[k, float(s), spec.order] for k, s in enumerate(spec.values, 1)])
    comb = sy.comb_symbol()
    z = [[n, op.zorboska_average(comb, 1.0, 2.0**-n)] for n in range(2, 13)]
    w.csv("zorboska_comb.csv", ["n", "average"], z)
    w.json("report.json", {"sqrt_fit": fit, "cusp_sigma_1": float(spec.values[0]), "rows": int(np.size(spec.values))})


COMMANDS = {
    "capacity": cmd_capacity,
    "equilibrium": cmd_equilibrium,
    "peaking": cmd_peaking,
    "symbol": cmd_symbol,
    "matrix": cmd_matrix,
    "schatten": cmd_schatten,
    "windows": cmd_windows,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dirlab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"dirlab {__version__}")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", type=Path, help="JSON config file (defaults apply when omitted)")
    ap.add_argument("--out", type=Path, default=Path("."), help="output directory")
    ap.add_argument("--seed", type=int, help="override the config seed")
    ap.add_argument("--threads", type=int, help="BLAS thread count")
    return ap


def run(command: str, raw: dict, out: Path, seed: int | None = None, threads: int | None = None) -> list[Path]:
    if seed is not None:
        raw = dict(raw, seed=seed)
    cfg = validate(command, raw)
    out.mkdir(parents=True, exist_ok=True)
    w = Writer(out, command, cfg, threads)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        COMMANDS[command](cfg, w)
    for c in caught:
        w.flags.append(str(c.message).splitlines()[0])
    return w.files


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            print("dirlab: --threads must be positive", file=sys.stderr)
            return EXIT_CONFIG
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    if args.seed is not None and args.seed < 0:
        print("dirlab: --seed must be nonnegative", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.ERROR)
    try:
        raw = json.loads(args.config.read_text()) if args.config else {}
    except (OSError, json.JSONDecodeError) as exc:
        print(f"dirlab: cannot read config: {exc}".splitlines()[0], file=sys.stderr)
        return EXIT_CONFIG
    try:
        files = run(args.command, raw, args.out, args.seed, args.threads)
    except ConfigError as exc:
        print(f"dirlab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, FloatingPointError, ArithmeticError, AssertionError, RuntimeError) as exc:
        print(f"dirlab: evaluation failed: {exc}".splitlines()[0], file=sys.stderr)
        return EXIT_EVAL
    for f in files:
        print(f)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
