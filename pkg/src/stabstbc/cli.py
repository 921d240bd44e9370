"""Command-line interface: ``stabstbc sweep | inspect | selftest``.

Exit codes: 0 success, 1 runtime failure, 2 usage or lookup error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import asdict, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import __version__, baselines, checks, constellation, montecarlo, stabilizer
from .pauli import signature

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

DEFAULTS = {
    "schemes": ["stabilizer-gr4"],
    "snr_db": [0.0, 5.0, 10.0, 15.0, 20.0],
    "min_trials": 10_000,
    "max_trials": 1_000_000,
    "target_bit_errors": 200,
    "seed": 0,
    "workers": 1,
    "block_size": 10_000,
    "out": "results",
}
_TYPES = {
    "schemes": list,
    "snr_db": list,
    "min_trials": int,
    "max_trials": int,
    "target_bit_errors": int,
    "seed": int,
    "workers": int,
    "block_size": int,
    "out": str,
}


class UsageError(Exception):
    pass


def parse_snr_range(text: str) -> list[float]:
    """``"a:b:step"`` -> ``[a, a+step, ..., b]`` (inclusive); a bare number is one point."""
    parts = text.split(":")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"bad --snr value {text!r}; expected a:b:step") from None
    if len(vals) == 1:
        return vals
    if len(vals) != 3 or vals[2] <= 0 or vals[1] < vals[0]:
        raise UsageError(f"bad --snr value {text!r}; expected a:b:step with step > 0 and b >= a")
    a, b, step = vals
    n = int(math.floor((b - a) / step + 1e-9)) + 1
    return [round(a + k * step, 10) for k in range(n)]


def _line_of(text: str, key: str) -> int | None:
    for i, ln in enumerate(text.splitlines(), start=1):
        if ln.strip().startswith(key):
            return i
    return None


def load_config(path) -> dict:
    """Read a flat TOML config; unknown keys and wrong types raise UsageError."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"{path}: {exc}") from None
    for key, val in data.items():
        where = f"{path}:{_line_of(text, key)}"
        if key not in _TYPES:
            raise UsageError(f"{where}: unknown field {key!r}")
        want = _TYPES[key]
        if key == "snr_db" and isinstance(val, str):
            data[key] = val = parse_snr_range(val)
        if want is int and (isinstance(val, bool) or not isinstance(val, int)):
            raise UsageError(f"{where}: field {key!r} must be an integer")
        if want is list and not isinstance(val, list):
            raise UsageError(f"{where}: field {key!r} must be a list")
        if want is str and not isinstance(val, str):
            raise UsageError(f"{where}: field {key!r} must be a string")
        if key == "snr_db" and not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in val):
            raise UsageError(f"{where}: field 'snr_db' must hold numbers")
        if key == "schemes":
            for s in val:
                if s not in montecarlo.SCHEME_IDS:
                    raise UsageError(f"{where}: unknown scheme {s!r}")
    return data


def resolve_config(file_values: dict, overrides: dict) -> tuple[dict, dict]:
    """Merge defaults < config file < CLI overrides; also return each field's source."""
    cfg, source = {}, {}
    for key, default in DEFAULTS.items():
        if overrides.get(key) is not None:
            cfg[key], source[key] = overrides[key], "cli"
        elif key in file_values:
            cfg[key], source[key] = file_values[key], "config"
        else:
            cfg[key], source[key] = default, "default"
    cfg["snr_db"] = [float(v) for v in cfg["snr_db"]]
    if source["max_trials"] == "cli" and source["min_trials"] != "cli":
        cfg["min_trials"] = min(cfg["min_trials"], cfg["max_trials"])
    return cfg, source


# Recorded in manifest.json but left out of the hash: none of these change results.
RUN_FIELDS = ("config_sources", "workers", "timestamp", "manifest_sha256")


def build_manifest(cfg: dict) -> dict:
    """Reproduction recipe; its hash is stamped into every output file."""
    schemes = {}
    for name in cfg["schemes"]:
        meta = montecarlo.get_scheme(name).metadata()
        scheme = montecarlo.get_scheme(name)
        if hasattr(scheme, "codebook"):
            meta["codebook_sha256"] = _fingerprint(scheme.codebook)
        if hasattr(scheme, "points"):
            meta["constellation_sha256"] = _fingerprint(scheme.points)
        schemes[name] = meta
    return {
        "artifact": "stabstbc",
        "version": __version__,
        "config": {k: cfg[k] for k in DEFAULTS if k not in ("out", "workers")},
        "snr_definition": montecarlo.SNR_DEFINITION,
        "schemes": schemes,
    }


def _fingerprint(arr) -> str:
    return hashlib.sha256(np.ascontiguousarray(np.round(np.asarray(arr, dtype=np.complex128), 12)).tobytes()).hexdigest()[:16]


def manifest_hash(manifest: dict) -> str:
    canon = json.dumps(manifest, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canon.encode()).hexdigest()


def cmd_sweep(args) -> int:
    file_values = load_config(args.config) if args.config else {}
    overrides = {
        "schemes": args.scheme,
        "snr_db": parse_snr_range(args.snr) if args.snr else None,
        "max_trials": args.trials,
        "seed": args.seed,
        "workers": args.workers,
        "out": args.out,
    }
    cfg, source = resolve_config(file_values, overrides)
    try:
        configs = [
            montecarlo.SimConfig(
                scheme=s,
                snr_db_grid=tuple(cfg["snr_db"]),
                min_trials=cfg["min_trials"],
                max_trials=cfg["max_trials"],
                target_bit_errors=cfg["target_bit_errors"],
                seed=cfg["seed"],
                workers=cfg["workers"],
                block_size=cfg["block_size"],
            )
            for s in cfg["schemes"]
        ]
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    manifest = build_manifest(cfg)
    digest = manifest_hash(manifest)
    results = [montecarlo.run_sweep(c, verbose=args.verbose) for c in configs]

    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(montecarlo.results_csv(results, f"manifest_sha256={digest}"))
    (out / "results.json").write_text(montecarlo.results_json(results, digest) + "\n")
    full = dict(
        manifest,
        config_sources=source,
        workers=cfg["workers"],
        timestamp=datetime.now(timezone.utc).isoformat(),
        manifest_sha256=digest,
    )
    (out / "manifest.json").write_text(json.dumps(full, indent=2, sort_keys=True, default=str) + "\n")
    if args.verbose:
        print(f"wrote {out / 'results.csv'}", file=sys.stderr)
    return EXIT_OK


def _commutation_table(code) -> str:
    lines = ["commutation with generators (C = commute, A = anticommute)"]
    lines.append("      " + "  ".join(f"S{i}={g}" for i, g in enumerate(code.generators)))
    for k, e in enumerate(code.errors):
        sig = signature(e, code.generators)
        lines.append(f"E{k}={e}  " + "      ".join("A" if b else "C" for b in sig))
    return "\n".join(lines)


def _fmt_c(z: complex) -> str:
    return f"{z.real:+.6f}{z.imag:+.6f}j"


def _constellation_report(c: constellation.Constellation) -> str:
    lines = [f"constellation {c.name}: N={len(c)} d={c.dim} bits/symbol={c.label_bits}"]
    for i, p in enumerate(c.points):
        lines.append(f"  {i:2d} [{''.join(map(str, c.symbol_to_bits(i)))}]  " + "  ".join(_fmt_c(z) for z in p))
    lines.append(f"coherence   = {c.coherence:.6f}")
    lines.append(f"welch bound = {constellation.welch_bound(len(c), c.dim):.6f}")
    lines.append(f"min pairing margin 4(1-coherence^2) = {constellation.pairing_criterion_closed_form(c):.6f}")
    return "\n".join(lines)


def inspect_report(name: str) -> str:
    if name in constellation.EMBEDDED_NAMES:
        return _constellation_report(constellation.embedded(name))
    if name == "stabilizer":
        code = stabilizer.build_code()
        rows = ["stabilizer code: 3 qubits, generators " + ", ".join(map(str, code.generators))]
        rows.append(_commutation_table(code))
        rows.append("code space basis C (columns v0, v1):")
        for r in code.basis:
            rows.append("  " + "  ".join(f"{z.real:+.0f}" for z in r))
        return "\n".join(rows)
    if name in montecarlo.SCHEME_IDS:
        scheme = montecarlo.get_scheme(name)
        rows = [f"scheme {name}"] + [f"  {k}: {v}" for k, v in scheme.metadata().items()]
        if isinstance(scheme, montecarlo.StabilizerScheme):
            rows += [_commutation_table(scheme.code), _constellation_report(scheme.constellation)]
        elif isinstance(scheme, baselines.DifferentialScheme):
            for i, U in enumerate(scheme.codebook):
                rows.append(f"  V{i:02d} = [[{_fmt_c(U[0, 0])}, {_fmt_c(U[0, 1])}], [{_fmt_c(U[1, 0])}, {_fmt_c(U[1, 1])}]]")
        return "\n".join(rows)
    path = Path(name)
    if path.is_file():
        return _constellation_report(constellation.load_constellation(path))
    names = ", ".join(("stabilizer",) + constellation.EMBEDDED_NAMES + montecarlo.SCHEMES)
    raise KeyError(f"unknown name {name!r}; known: {names}")


def cmd_inspect(args) -> int:
    try:
        print(inspect_report(args.name))
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def cmd_selftest(args) -> int:
    failures = []
    for group, ok, msg, secs in checks.run_all(args.packing, seed=args.seed or 0):
        print(f"{'PASS' if ok else 'FAIL'} {group:<11} ({secs:.2f}s){'  ' + msg if msg else ''}")
        if not ok:
            failures.append(group)
    if failures:
        print("failed groups: " + ", ".join(failures), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stabstbc", description="Stabilizer space-time code link simulator")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="run a BER-vs-SNR sweep")
    sw.add_argument("--config", help="flat TOML config file")
    sw.add_argument("--seed", type=int)
    sw.add_argument("--workers", type=int)
    sw.add_argument("--out", help="output directory")
    sw.add_argument("--scheme", action="append", choices=montecarlo.SCHEMES, help="repeatable")
    sw.add_argument("--snr", help='SNR grid in dB, "a:b:step"')
    sw.add_argument("--trials", type=int, help="maximum trials per point")
    sw.add_argument("--verbose", action="store_true")
    sw.set_defaults(func=cmd_sweep)

    ins = sub.add_parser("inspect", help="describe a scheme, constellation or the stabilizer code")
    ins.add_argument("name")
    ins.set_defaults(func=cmd_inspect)

    st = sub.add_parser("selftest", help="run the algebraic invariant suite")
    st.add_argument("--packing", action="append", default=[], help="extra constellation file to validate")
    st.add_argument("--seed", type=int)
    st.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
