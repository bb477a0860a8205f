"""Command-line front end.

    sgplate solve|convergence|carleman-sweep|uc-lab|verify [--config PATH] [--out DIR]
                                                           [--threads N] [--seed N]

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import experiments
from .config import ExperimentConfig, config_hash, load_config, parse_config
from .errors import ConfigError, ExperimentError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float) or hasattr(v, "dtype"):
        v = float(v)
        return repr(v) if not math.isfinite(v) else f"{v:.17g}"
    return str(v)


def write_csv(path: Path, columns, rows, digest: str) -> None:
    lines = [f"# config_sha256={digest}", ",".join(columns)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "dtype"):
        return _jsonable(obj.tolist())
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def write_json(path: Path, summary: dict, digest: str) -> None:
    payload = {"config_sha256": digest, **_jsonable(summary)}
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _verify(cfg: ExperimentConfig):
    from .verify import run_verify

    results = run_verify(cfg.seed)
    rows = [(r.module, r.prop, r.value, r.tolerance, "PASS" if r.passed else "FAIL") for r in results]
    summary = {"experiment": "verify", "seed": cfg.seed, "checks": len(results),
               "failed": [f"{r.module}: {r.prop}" for r in results if not r.passed]}
    return {"verify.csv": (("module", "property", "value", "tolerance", "status"), rows)}, summary, results


def run(cfg: ExperimentConfig, out: Path, threads: int = 1) -> int:
    out.mkdir(parents=True, exist_ok=True)
    digest = cfg.sha256
    results = None
    kind = cfg.experiment
    if kind == "solve":
        tables, summary = experiments.run_solve(cfg, out, threads)
    elif kind == "convergence":
        tables, summary = experiments.run_convergence(cfg, threads)
    elif kind == "carleman-sweep":
        tables, summary = experiments.run_carleman(cfg)
    elif kind == "uc-lab":
        tables, summary = experiments.run_uc_lab(cfg, threads)
    else:
        tables, summary, results = _verify(cfg)
    for name, (cols, rows) in tables.items():
        write_csv(out / name, cols, rows, digest)
    name = "diagnostics.json" if kind == "solve" else f"{kind.replace('-', '_')}_summary.json"
    write_json(out / name, summary, digest)
    if results is not None:
        for r in results:
            print(r.line())
        bad = [r for r in results if not r.passed]
        print(f"{len(results) - len(bad)}/{len(results)} invariants hold")
        return EXIT_NUMERIC if bad else EXIT_OK
    print(f"{kind}: wrote {', '.join(sorted(tables))} and {name} to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sgplate", description="Strain-gradient plate solver and unique-continuation lab")
    ap.add_argument("command", choices=["solve", "convergence", "carleman-sweep", "uc-lab", "verify"])
    ap.add_argument("--config", type=Path, help="YAML experiment file (optional for verify)")
    ap.add_argument("--out", type=Path, default=Path("out"), help="output directory (default ./out)")
    ap.add_argument("--threads", type=int, default=1, help="cap on assembly worker threads")
    ap.add_argument("--seed", type=int, default=None, help="override the config seed")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        if args.config is None:
            if args.command != "verify":
                raise ConfigError(f"'{args.command}' needs --config PATH")
            cfg = parse_config({"experiment": "verify"}, args.seed)
        else:
            cfg = load_config(args.config, args.seed)
            if cfg.experiment != args.command:
                raise ConfigError(f"config declares experiment '{cfg.experiment}' but command is '{args.command}'")
        return run(cfg, args.out, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ExperimentError, ValueError, ArithmeticError, KeyError) as exc:
        # ValueError from expression parsing is a config problem only before the run starts;
        # everything reaching here afterwards is reported as a numerical failure
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
