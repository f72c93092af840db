"""Command-line entry point: ``pcnls run <config>``.

Exit codes: 0 all checks passed, 3 a check failed, 2 invalid configuration,
1 unexpected error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import math
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, ExperimentConfig, load_config, render_config
from .norms import canonical_pairs
from .presets import COLUMNS_VERSION, PRESETS, Preset, PresetResult, thread_count
from .snapshot import write_snapshot

log = logging.getLogger("pcnls")

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_CHECK = 0, 1, 2, 3


def source_hash() -> str:
    """SHA-256 over the package sources, in sorted path order."""
    h = hashlib.sha256()
    root = Path(__file__).parent
    for path in sorted(root.glob("*.py")):
        h.update(path.name.encode())
        h.update(path.read_bytes())
    return h.hexdigest()


def _cell(value) -> str:
    if hasattr(value, "item"):
        value = value.item()
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, columns, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            missing = set(columns) ^ set(row)
            if missing:
                raise RuntimeError(f"row keys do not match the declared columns: {sorted(missing)}")
            w.writerow([_cell(row[c]) for c in columns])


def _json_default(x):
    if hasattr(x, "item"):
        return x.item()
    if isinstance(x, tuple):
        return list(x)
    raise TypeError(f"not serializable: {type(x).__name__}")


def _sanitize(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(v) for v in obj]
    if hasattr(obj, "item"):
        return _sanitize(obj.item())
    return obj


def build_manifest(cfg: ExperimentConfig, preset: Preset, result: PresetResult) -> dict:
    return _sanitize(
        {
            "version": __version__,
            "source_sha256": source_hash(),
            "preset": preset.name,
            "criteria": list(preset.criteria),
            "columns": list(preset.columns),
            "columns_version": COLUMNS_VERSION,
            "config": cfg.as_dict(),
            "rho": cfg.rho,
            "dealias": cfg.dealias,
            "strichartz_pairs": [p.label() for p in canonical_pairs(cfg.dim)],
            "tolerances": dict(cfg.tolerances),
            "checks": [c.as_dict() for c in result.checks],
            "passed": all(c.passed for c in result.checks),
            "info": result.info,
        }
    )


def run_experiment(cfg: ExperimentConfig, out_dir: Path) -> tuple[PresetResult, dict]:
    preset = PRESETS[cfg.preset]
    log.info("running %s with %d thread(s)", preset.name, thread_count())
    result = preset.runner(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_csv(out_dir / "results.csv", preset.columns, result.rows)
    manifest = build_manifest(cfg, preset, result)
    with open(out_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    if cfg.snapshots:
        for name, f in sorted(result.fields.items()):
            write_snapshot(f, out_dir / f"{name}.pcnls")
    return result, manifest


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    out_dir = Path(args.out if args.out else cfg.output_dir)
    if not out_dir.is_absolute() and not args.out:
        out_dir = Path(args.config).resolve().parent / out_dir
    result, _ = run_experiment(cfg, out_dir)
    for c in result.checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"{status} {c.name}: {c.value:.6g} {c.relation} {c.threshold}")
    failed = [c.name for c in result.checks if not c.passed]
    print(f"wrote {out_dir / 'results.csv'} and {out_dir / 'manifest.json'}")
    if failed:
        print(f"{len(failed)} check(s) failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def _cmd_list(args) -> int:
    width = max(len(n) for n in PRESETS)
    for name in sorted(PRESETS):
        print(f"{name:<{width}}  {PRESETS[name].summary}")
    return EXIT_OK


def _cmd_describe(args) -> int:
    if args.preset not in PRESETS:
        raise ConfigError(f"unknown preset {args.preset!r}; see 'pcnls list-presets'")
    if args.config:
        sys.stdout.write(render_config(args.preset))
        return EXIT_OK
    p = PRESETS[args.preset]
    print(f"{p.name}: {p.summary}")
    print(f"columns: {', '.join(p.columns)}")
    print()
    sys.stdout.write(render_config(p.name))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pcnls", description="Pseudoconformal NLS experiments")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run the experiment described by a config file")
    run.add_argument("config", help="INI config file")
    run.add_argument("--out", help="output directory (overrides [output] directory)")
    run.set_defaults(func=_cmd_run)
    ls = sub.add_parser("list-presets", help="list available presets")
    ls.set_defaults(func=_cmd_list)
    desc = sub.add_parser("describe", help="show a preset's columns and default config")
    desc.add_argument("preset")
    desc.add_argument("--config", action="store_true", help="print only the default config file")
    desc.set_defaults(func=_cmd_describe)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        log.debug("unexpected failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
