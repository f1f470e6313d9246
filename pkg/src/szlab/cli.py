"""Command-line front end: ``szlab <experiment> [--key value]... --out DIR``.

``szlab list`` prints the machine-readable experiment catalog.  Experiment
parameters come from flags and/or a TOML config (flags win); unknown keys
are rejected.  Exit codes: 0 success, 1 configuration error, 2 assertion
failure, 3 numerical divergence report.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

from .errors import ConfigError, DivergenceError
from .experiments import REGISTRY, catalog, run_experiment

try:
    import tomllib as _toml
except ImportError:  # Python < 3.11: bundled strict subset parser
    _toml = None


def _parse_toml_subset(text: str) -> dict:
    """Strict parser for the flat TOML subset the configs use.

    Supports comments, one level of ``[section]`` tables, and values that
    are strings, booleans, integers, floats, or flat arrays thereof.
    """
    root: dict = {}
    current = root
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if not name or "." in name:
                raise ConfigError(f"line {ln}: unsupported table {line!r}")
            current = root.setdefault(name, {})
            continue
        if "=" not in line:
            raise ConfigError(f"line {ln}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().strip('"')
        current[key] = _parse_toml_value(value.strip(), ln)
    return root


def _parse_toml_value(token: str, ln: int):
    if token.startswith("[") and token.endswith("]"):
        inner = token[1:-1].strip()
        if not inner:
            return []
        return [_parse_toml_value(part.strip(), ln)
                for part in inner.split(",") if part.strip()]
    if token.startswith('"') and token.endswith('"') and len(token) >= 2:
        return token[1:-1]
    if token == "true":
        return True
    if token == "false":
        return False
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        raise ConfigError(f"line {ln}: cannot parse value {token!r}") from None


def load_config(path: Path) -> dict:
    text = Path(path).read_text()
    if _toml is not None:
        try:
            data = _toml.loads(text)
        except Exception as exc:
            raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    else:
        data = _parse_toml_subset(text)
    params = dict(data.pop("params", {}))
    allowed = {"experiment", "out", "seed"}
    for key in list(data):
        if key == "seed":
            params.setdefault("seed", data.pop(key))
        elif key not in allowed:
            raise ConfigError(f"unknown config key {key!r}", field=key)
    return {"experiment": data.get("experiment"), "out": data.get("out"),
            "params": params}


def _default_outdir(name: str) -> Path:
    stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S%f")
    return Path("szlab-out") / f"{name}-{stamp}"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="szlab",
        description="trace-ratio limit experiments: Toeplitz means, group "
                    "Fourier checks, phase-space volumes, Tauberian transfer, "
                    "and finite spectral models",
    )
    sub = parser.add_subparsers(dest="command")
    sub.add_parser("list", help="print the experiment catalog as JSON")
    for exp in REGISTRY.values():
        p = sub.add_parser(exp.name, help=exp.summary)
        for key, spec in exp.params.items():
            p.add_argument(f"--{key}", dest=key, default=None, metavar=spec.kind,
                           help=spec.help + ("" if spec.required
                                             else f" (default {spec.default})"))
        p.add_argument("--config", default=None, help="TOML config file")
        p.add_argument("--out", default=None, help="output directory")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 1
    if args.command == "list":
        print(json.dumps(catalog(), indent=2, sort_keys=True))
        return 0
    exp = REGISTRY[args.command]
    try:
        overrides: dict = {}
        out_path = None
        if args.config:
            loaded = load_config(Path(args.config))
            if loaded["experiment"] not in (None, exp.name):
                raise ConfigError(
                    f"config is for {loaded['experiment']!r}, not {exp.name!r}",
                    field="experiment")
            for key, value in loaded["params"].items():
                if key not in exp.params:
                    raise ConfigError(f"unknown parameter {key!r} for {exp.name}",
                                      field=key)
                overrides[key] = value
            out_path = loaded["out"]
        for key in exp.params:
            value = getattr(args, key, None)
            if value is not None:
                overrides[key] = value
        outdir = Path(args.out) if args.out else (
            Path(out_path) if out_path else _default_outdir(exp.name))
        outcome = run_experiment(exp.name, overrides, outdir)
    except ConfigError as exc:
        field = f" (field: {exc.field})" if getattr(exc, "field", None) else ""
        print(f"CONFIG ERROR: {exc}{field}", file=sys.stderr)
        return 1
    except DivergenceError as exc:
        print(f"DIVERGENCE: {exc}", file=sys.stderr)
        return 3
    for level, criterion, text in outcome.lines:
        print(f"{level} [criterion {criterion}] {text}")
    print(f"wrote {len(outcome.files)} file(s) under {outdir}")
    return 2 if outcome.any_failed else 0


if __name__ == "__main__":
    sys.exit(main())
