"""Command-line front end: experiment configs, validation, dispatch, and reports.

A run is described by a JSON config file; a handful of flags can override the
config.  Every report embeds the fully resolved config and the library
version, and identical (config, seed) pairs produce byte-identical reports.

Exit codes: 0 success, 1 malformed config, 2 hypothesis not covered,
3 search exhausted, 4 numerical instability.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .algebra import (
    BlockStructure,
    EmbeddedAlgebra,
    enumerate_subalgebra_classes,
)
from .dimensions import audit_density_hypotheses, dim_report
from .errors import ConfigError, NumericalInstabilityError, SearchExhaustedError
from .freeprod import (
    RepPair,
    dpi_probe,
    rcp_balance,
    rcp_check,
    staged_build,
)
from .numeric import density_experiment
from .serialize import (
    canonical_json,
    load_probe_file,
    matrix_from_json,
    stats_csv,
)

COMMANDS = (
    "enumerate",
    "dims",
    "thm41-check",
    "density",
    "rcp-balance",
    "dpi",
    "build-primitive",
)

_NEEDS_AMBIENT = {"enumerate", "dims", "thm41-check", "density"}
_NEEDS_SAMPLES = {"density", "dpi"}
_TWO_ALGEBRAS = {"dims", "thm41-check", "density", "rcp-balance", "dpi", "build-primitive"}


@dataclass
class ExperimentConfig:
    command: str
    algebras: list[dict]
    ambient: int | None = None
    samples: int | None = None
    seed: int | None = None
    epsilon: float | None = None
    radius: float | None = None
    center: dict | None = None
    u: dict | None = None
    probe: str | None = None
    stages: list | None = None
    max_tries: int = 128
    tolerance: float | None = None
    out: str | None = None
    format: str = "json"
    diagnostics: list = field(default_factory=list)

    def resolved_dict(self) -> dict:
        return {
            "command": self.command,
            "algebras": self.algebras,
            "ambient": self.ambient,
            "samples": self.samples,
            "seed": self.seed,
            "epsilon": self.epsilon,
            "radius": self.radius,
            "center": self.center,
            "u": self.u,
            "probe": self.probe,
            "stages": self.stages,
            "max_tries": self.max_tries,
            "tolerance": self.tolerance,
            "out": self.out,
            "format": self.format,
        }


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def validate(config: ExperimentConfig) -> list[tuple[str, str]]:
    """Every invariant violation as a (json-pointer, message) diagnostic."""
    diags: list[tuple[str, str]] = list(config.diagnostics)
    cmd = config.command
    if cmd not in COMMANDS:
        diags.append(("/command", f"unknown command {cmd!r}"))
        return diags

    if config.seed is None:
        diags.append(("/seed", "seed is required; wall-clock seeding is not supported"))
    elif not _is_int(config.seed) or config.seed < 0:
        diags.append(("/seed", "seed must be a nonnegative integer"))

    want = 2 if cmd in _TWO_ALGEBRAS else 1
    if len(config.algebras) < want:
        diags.append(("/algebras", f"command {cmd!r} needs {want} algebra spec(s)"))

    needs_mult = cmd != "build-primitive"
    for i, spec in enumerate(config.algebras):
        if not isinstance(spec, dict):
            diags.append((f"/algebras/{i}", "algebra spec must be an object"))
            continue
        blocks = spec.get("blocks")
        if not isinstance(blocks, list) or not blocks or any(
            not _is_int(b) or b < 1 for b in blocks
        ):
            diags.append((f"/algebras/{i}/blocks", "blocks must be a list of positive integers"))
            continue
        mult = spec.get("mult")
        if mult is None:
            if needs_mult:
                diags.append((f"/algebras/{i}/mult", "multiplicity row is required"))
            continue
        if not isinstance(mult, list) or len(mult) != len(blocks) or any(
            not _is_int(m) for m in mult
        ):
            diags.append(
                (f"/algebras/{i}/mult", "mult must be an integer list matching blocks")
            )
            continue
        if cmd in _NEEDS_AMBIENT:
            if any(m < 1 for m in mult):
                diags.append((f"/algebras/{i}/mult", "ambient multiplicities must be >= 1"))
            elif _is_int(config.ambient) and config.ambient is not None:
                total = sum(m * n for m, n in zip(mult, blocks))
                if total != config.ambient:
                    diags.append(
                        (
                            f"/algebras/{i}/mult",
                            f"multiplicities fill dimension {total}, not ambient {config.ambient}",
                        )
                    )
        elif any(m < 0 for m in mult):
            diags.append((f"/algebras/{i}/mult", "multiplicities must be nonnegative"))

    if cmd in _NEEDS_AMBIENT:
        if not _is_int(config.ambient) or config.ambient is None or config.ambient < 1:
            diags.append(("/ambient", "ambient dimension must be a positive integer"))

    if cmd in ("rcp-balance", "dpi") and len(config.algebras) >= 2 and not diags:
        dims = [
            sum(m * n for m, n in zip(spec["mult"], spec["blocks"]))
            for spec in config.algebras[:2]
        ]
        if dims[0] != dims[1]:
            diags.append(
                ("/algebras/1/mult", f"factor dimensions differ: {dims[0]} vs {dims[1]}")
            )

    if cmd in _NEEDS_SAMPLES:
        if not _is_int(config.samples) or config.samples is None or config.samples < 1:
            diags.append(("/samples", "samples must be an integer >= 1"))

    if config.radius is not None and not (
        isinstance(config.radius, (int, float)) and config.radius > 0
    ):
        diags.append(("/radius", "radius must be positive"))

    if cmd == "build-primitive":
        if config.epsilon is None or not (
            isinstance(config.epsilon, (int, float)) and config.epsilon > 0
        ):
            diags.append(("/epsilon", "epsilon must be positive"))
        if not isinstance(config.stages, list) or not config.stages:
            diags.append(("/stages", "stages must be a nonempty list of multiplicity-row pairs"))
        else:
            for j, stage in enumerate(config.stages):
                if (
                    not isinstance(stage, list)
                    or len(stage) != 2
                    or any(not isinstance(row, list) for row in stage)
                ):
                    diags.append((f"/stages/{j}", "each stage is a pair of multiplicity rows"))
        if not _is_int(config.max_tries) or config.max_tries < 1:
            diags.append(("/max_tries", "max_tries must be a positive integer"))

    if config.format not in ("json", "csv"):
        diags.append(("/format", "format must be 'json' or 'csv'"))
    elif config.format == "csv" and cmd not in _NEEDS_SAMPLES:
        diags.append(("/format", f"command {cmd!r} has no per-sample CSV output"))

    if config.tolerance is not None and not (
        isinstance(config.tolerance, (int, float)) and config.tolerance > 0
    ):
        diags.append(("/tolerance", "tolerance must be positive"))

    return diags


def load_config(path: str, command: str, overrides: dict) -> ExperimentConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"{path}: no such config file")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}")
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}:1:1: config root must be a JSON object")

    diagnostics = []
    declared = raw.get("command")
    if declared is not None and declared != command:
        diagnostics.append(
            ("/command", f"config declares {declared!r} but {command!r} was invoked")
        )

    config = ExperimentConfig(
        command=command,
        algebras=list(raw.get("algebras", [])),
        ambient=raw.get("ambient"),
        samples=raw.get("samples"),
        seed=raw.get("seed"),
        epsilon=raw.get("epsilon"),
        radius=raw.get("radius"),
        center=raw.get("center"),
        u=raw.get("u"),
        probe=raw.get("probe"),
        stages=raw.get("stages"),
        max_tries=raw.get("max_tries", 128),
        tolerance=raw.get("tolerance"),
        out=raw.get("out"),
        format=raw.get("format", "json"),
        diagnostics=diagnostics,
    )
    for key, value in overrides.items():
        if value is not None:
            setattr(config, key, value)
    return config


def _embedded(config: ExperimentConfig, index: int) -> EmbeddedAlgebra:
    spec = config.algebras[index]
    return EmbeddedAlgebra(
        config.ambient, BlockStructure(tuple(spec["blocks"])), tuple(spec["mult"])
    )


def _class_json(cls) -> dict:
    return {
        "structure": list(cls.structure.blocks),
        "embedding": {
            "shape": list(cls.embedding.shape),
            "entries": [e for row in cls.embedding.entries for e in row],
        },
    }


def run(config: ExperimentConfig) -> tuple[int, dict, str | None]:
    """Execute a validated config; returns (exit code, report dict, optional CSV text)."""
    cmd = config.command
    status = "ok"
    exit_code = 0
    csv_text = None

    if cmd == "enumerate":
        b1 = _embedded(config, 0)
        classes = enumerate_subalgebra_classes(b1)
        result = {"count": len(classes), "classes": [_class_json(c) for c in classes]}

    elif cmd == "dims":
        b1, b2 = _embedded(config, 0), _embedded(config, 1)
        rows = []
        for cls in enumerate_subalgebra_classes(b1):
            rep = dim_report(b1, cls, b2)
            rows.append({**_class_json(cls), **rep.to_json_dict()})
        result = {"classes": rows}

    elif cmd == "thm41-check":
        b1, b2 = _embedded(config, 0), _embedded(config, 1)
        audit = audit_density_hypotheses(b1, b2)
        result = audit.to_json_dict()
        if not audit.covered:
            status = "not-covered"
            exit_code = 2

    elif cmd == "density":
        b1, b2 = _embedded(config, 0), _embedded(config, 1)
        local = None
        if config.radius is not None:
            center = (
                matrix_from_json(config.center, "/center")
                if config.center is not None
                else None
            )
            local = (center, float(config.radius))
        stats = density_experiment(
            b1, b2, config.samples, config.seed, local=local, tol=config.tolerance
        )
        result = stats.to_json_dict()
        if config.format == "csv":
            csv_text = stats_csv(stats.csv_rows())

    elif cmd == "rcp-balance":
        a1, a2 = config.algebras[0], config.algebras[1]
        alg1, alg2 = BlockStructure(tuple(a1["blocks"])), BlockStructure(tuple(a2["blocks"]))
        balance = rcp_balance(alg1, a1["mult"], alg2, a2["mult"])
        result = {
            "balance": balance.to_json_dict(),
            "before": [
                rcp_check(alg1, a1["mult"]).to_json_dict(),
                rcp_check(alg2, a2["mult"]).to_json_dict(),
            ],
            "after": [
                rcp_check(alg1, balance.final_mult1).to_json_dict(),
                rcp_check(alg2, balance.final_mult2).to_json_dict(),
            ],
        }

    elif cmd == "dpi":
        a1, a2 = config.algebras[0], config.algebras[1]
        alg1, alg2 = BlockStructure(tuple(a1["blocks"])), BlockStructure(tuple(a2["blocks"]))
        dim = sum(m * n for m, n in zip(a1["mult"], alg1.blocks))
        u = (
            matrix_from_json(config.u, "/u")
            if config.u is not None
            else np.eye(dim, dtype=complex)
        )
        rep = RepPair(alg1, tuple(a1["mult"]), alg2, tuple(a2["mult"]), u)
        stats = dpi_probe(
            rep, config.samples, config.seed, local_radius=config.radius, tol=config.tolerance
        )
        result = stats.to_json_dict()
        if config.format == "csv":
            csv_text = stats_csv(stats.csv_rows())

    elif cmd == "build-primitive":
        a1, a2 = config.algebras[0], config.algebras[1]
        alg1, alg2 = BlockStructure(tuple(a1["blocks"])), BlockStructure(tuple(a2["blocks"]))
        stages = [(tuple(s[0]), tuple(s[1])) for s in config.stages]
        probe = load_probe_file(config.probe) if config.probe else []
        try:
            build = staged_build(
                alg1,
                alg2,
                stages,
                float(config.epsilon),
                probe,
                config.seed,
                max_tries=config.max_tries,
                tol=config.tolerance,
            )
            result = build.to_json_dict()
        except SearchExhaustedError as exc:
            status = "search-exhausted"
            exit_code = 3
            result = {
                "stage": exc.stage,
                "dim": exc.dim,
                "best_dim": exc.best_dim,
                "tries": exc.tries,
            }

    else:  # pragma: no cover - guarded by validation
        raise ConfigError(f"unknown command {cmd!r}")

    report = {
        "version": __version__,
        "command": cmd,
        "status": status,
        "config": config.resolved_dict(),
        "result": result,
    }
    return exit_code, report, csv_text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="subalg",
        description="Subalgebra dimension counting and perturbation experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="path to a JSON experiment config")
        p.add_argument("--seed", type=int, default=None, help="master RNG seed (u64)")
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--out", default=None, help="report output path (default: stdout)")
        p.add_argument("--tolerance", type=float, default=None, help="rank tolerance override")
        p.add_argument("--format", choices=("json", "csv"), default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {
        "seed": args.seed,
        "samples": args.samples,
        "out": args.out,
        "tolerance": args.tolerance,
        "format": args.format,
    }
    try:
        config = load_config(args.config, args.command, overrides)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 1

    diags = validate(config)
    if diags:
        for pointer, message in diags:
            print(f"{pointer}: {message}", file=sys.stderr)
        return 1

    try:
        exit_code, report, csv_text = run(config)
    except NumericalInstabilityError as exc:
        print(f"numerical instability: {exc}", file=sys.stderr)
        return 4
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        for pointer, message in exc.diagnostics:
            print(f"{pointer}: {message}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(str(exc), file=sys.stderr)
        return 1

    text = canonical_json(report)
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(text)
        if csv_text is not None:
            with open(config.out + ".csv", "w") as fh:
                fh.write(csv_text)
    else:
        sys.stdout.write(text)
        if csv_text is not None:
            sys.stdout.write(csv_text)
    return exit_code


if __name__ == "__main__":
    raise SystemExit(main())
