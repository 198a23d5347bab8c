"""Command-line front end: verify | simulate | ablate | ccp.

Configuration comes from an optional JSON file (--config, or the
ACAP_GEMM_CONFIG environment variable) overridden by flags. Reports go
to stdout or --out as CSV (with '#'-prefixed provenance header lines) or
JSON; both embed the effective cost model and memory spec so a report is
reproducible from its own header.

Exit codes: 0 success, 2 verification mismatch, 3 capacity error,
4 configuration error.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from .blocking import BlockingParams, gemm_blocked, paper_ccp, select_ccp
from .errors import CapacityError, ConfigError
from .matrix import checksum, fill_random, new_matrix, reference_gemm
from .memory import MemorySpec, validate_footprints
from .simulator import CostModel, microkernel_cycles, perf_per_tile, simulate_run

ENV_CONFIG = "ACAP_GEMM_CONFIG"

EXIT_OK = 0
EXIT_MISMATCH = 2
EXIT_CAPACITY = 3
EXIT_CONFIG = 4

ORACLE_MAC_LIMIT = 1 << 31

_CONFIG_KEYS = {
    "dims", "profile", "params", "tiles", "seed", "cost_model", "memory",
    "br_mode", "local_reserve_bytes", "workers", "format", "out", "corrupt",
}


@dataclass
class RunConfig:
    dims: tuple = (256, 256, 2048)
    profile: str = "paper"
    params: dict | None = None
    tiles: list = field(default_factory=lambda: [1, 2, 4, 8, 16, 32])
    seed: int = 1
    cost_model: dict = field(default_factory=dict)
    memory: dict = field(default_factory=dict)
    br_mode: str = "stream"
    local_reserve_bytes: int = 2560
    workers: int = 1
    format: str = "csv"
    out: str | None = None
    corrupt: bool = False  # fault-injection hook for the verify comparator


def _parse_dims(text: str) -> tuple:
    try:
        m, n, k = (int(p) for p in text.lower().split("x"))
    except ValueError:
        raise ConfigError(f"bad dims {text!r}; expected MxNxK")
    if min(m, n, k) < 1:
        raise ConfigError("dims must be >= 1")
    return (m, n, k)


def _parse_tiles(value) -> list:
    if isinstance(value, str):
        parts = [p for p in value.split(",") if p]
    else:
        parts = list(value)
    try:
        tiles = [int(p) for p in parts]
    except (TypeError, ValueError):
        raise ConfigError(f"bad tiles list {value!r}")
    if not tiles or min(tiles) < 1:
        raise ConfigError("tiles entries must be >= 1")
    return tiles


def load_config(path: str | None) -> RunConfig:
    cfg = RunConfig()
    if path is None:
        path = os.environ.get(ENV_CONFIG)
    if path is None:
        return cfg
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "dims" in raw:
        d = raw.pop("dims")
        cfg.dims = _parse_dims(d) if isinstance(d, str) else tuple(int(x) for x in d)
    if "tiles" in raw:
        cfg.tiles = _parse_tiles(raw.pop("tiles"))
    for key, value in raw.items():
        setattr(cfg, key, value)
    return cfg


def apply_flags(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    if args.dims is not None:
        cfg.dims = _parse_dims(args.dims)
    if args.tiles is not None:
        cfg.tiles = _parse_tiles(args.tiles)
    if args.profile is not None:
        cfg.profile = args.profile
    if args.seed is not None:
        cfg.seed = args.seed
    if args.format is not None:
        cfg.format = args.format
    if args.out is not None:
        cfg.out = args.out
    if getattr(args, "corrupt", False):
        cfg.corrupt = True
    if cfg.profile not in ("paper", "derived", "explicit"):
        raise ConfigError(f"unknown profile {cfg.profile!r}")
    if cfg.format not in ("csv", "json"):
        raise ConfigError(f"unknown format {cfg.format!r}")
    return cfg


def effective_memory(cfg: RunConfig) -> MemorySpec:
    try:
        return replace(MemorySpec(), **cfg.memory)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad memory spec: {exc}")


def effective_cost_model(cfg: RunConfig) -> CostModel:
    overrides = dict(cfg.cost_model)
    if "cr_copy_table" in overrides:
        overrides["cr_copy_table"] = {
            int(k): v for k, v in overrides["cr_copy_table"].items()
        }
    try:
        return replace(CostModel(), **overrides)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad cost model: {exc}")


def resolve_params(cfg: RunConfig, mem: MemorySpec, for_ccp: bool = False) -> BlockingParams:
    """Blocking parameters for this run.

    Explicit params always win. Otherwise the "paper" profile means the
    published CCP limits for the ccp command, and the fixed-size
    experiment setup (block strides equal to the problem dims) for the
    run commands; "derived" computes the strides from capacities.
    """
    if cfg.params is not None:
        try:
            return BlockingParams(**cfg.params)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad params: {exc}")
    if cfg.profile == "explicit":
        raise ConfigError("profile 'explicit' requires a params config entry")
    if cfg.profile == "derived":
        return select_ccp(mem, local_reserve_bytes=cfg.local_reserve_bytes)
    if for_ccp:
        return paper_ccp()
    m, n, k = cfg.dims
    return BlockingParams(mc=-(-m // 8) * 8, nc=-(-n // 8) * 8, kc=k)


# ---------------------------------------------------------------------------
# Report writing


def _provenance(cfg: RunConfig, cm: CostModel | None, mem: MemorySpec,
                extra: dict | None = None) -> dict:
    prov = {
        "dims": "x".join(str(d) for d in cfg.dims),
        "profile": cfg.profile,
        "tiles": ",".join(str(t) for t in cfg.tiles),
        "seed": cfg.seed,
        "memory": mem.as_dict(),
    }
    if cm is not None:
        prov["cost_model"] = cm.as_dict()
    if extra:
        prov.update(extra)
    return prov


def render_report(prov: dict, columns: list, rows: list, fmt: str) -> bytes:
    if fmt == "json":
        doc = {"provenance": prov, "rows": rows}
        return (json.dumps(doc, sort_keys=True, indent=2) + "\n").encode("utf-8")
    buf = io.StringIO()
    for key in sorted(prov):
        value = prov[key]
        if isinstance(value, dict):
            value = json.dumps(value, sort_keys=True, separators=(",", ":"))
        buf.write(f"# {key}={value}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(str(row[c]) for c in columns) + "\n")
    return buf.getvalue().encode("utf-8")


def emit(payload: bytes, out: str | None):
    if out is None:
        sys.stdout.buffer.write(payload)
        sys.stdout.buffer.flush()
    else:
        with open(out, "wb") as fh:
            fh.write(payload)


# ---------------------------------------------------------------------------
# Subcommands


def cmd_verify(cfg: RunConfig) -> int:
    mem = effective_memory(cfg)
    params = resolve_params(cfg, mem)
    m, n, k = cfg.dims
    if m * n * k > ORACLE_MAC_LIMIT:
        raise ConfigError(
            f"problem of {m * n * k} MACs exceeds the {ORACLE_MAC_LIMIT} oracle guard")

    A = fill_random(new_matrix(m, k, "u8"), cfg.seed)
    B = fill_random(new_matrix(k, n, "u8"), cfg.seed + 1)
    ref = reference_gemm(new_matrix(m, n, "i32"), A, B)

    columns = ["tiles", "m", "n", "k", "mc", "nc", "kc", "status",
               "first_diff", "checksum"]
    rows = []
    status = EXIT_OK
    for tiles in cfg.tiles:
        C, _ = gemm_blocked(new_matrix(m, n, "i32"), A, B, params,
                            tiles=tiles, workers=cfg.workers)
        if cfg.corrupt:
            C.data[0, 0] ^= 1
        diff = np.argwhere(C.data != ref.data)
        first = "" if diff.size == 0 else f"({diff[0][0]};{diff[0][1]})"
        ok = diff.size == 0
        if not ok:
            status = EXIT_MISMATCH
            print(f"verify: mismatch at {first} for tiles={tiles}", file=sys.stderr)
        rows.append({
            "tiles": tiles, "m": m, "n": n, "k": k,
            "mc": params.mc, "nc": params.nc, "kc": params.kc,
            "status": "PASS" if ok else "FAIL",
            "first_diff": first,
            "checksum": f"{checksum(C):08x}",
        })
    prov = _provenance(cfg, None, mem, {"command": "verify"})
    emit(render_report(prov, columns, rows, cfg.format), cfg.out)
    return status


def cmd_simulate(cfg: RunConfig) -> int:
    mem = effective_memory(cfg)
    cm = effective_cost_model(cfg)
    params = resolve_params(cfg, mem)
    columns = ["tiles", "copy_cr", "arithmetic", "total", "macs_per_cycle_per_tile"]
    arith = microkernel_cycles(params.kc, "baseline", cm).calibrated
    rows = []
    for tiles in cfg.tiles:
        report = simulate_run(cfg.dims, params, tiles, cm)
        rows.append({
            "tiles": tiles,
            "copy_cr": int(round(cm.cr_copy_cycles(tiles))),
            "arithmetic": arith,
            "total": report.total_cycles,
            "macs_per_cycle_per_tile":
                f"{perf_per_tile(params.kc, tiles, cm, params.mr, params.nr):.1f}",
        })
    prov = _provenance(cfg, cm, mem, {
        "command": "simulate",
        "params": f"mc={params.mc},nc={params.nc},kc={params.kc},"
                  f"mr={params.mr},nr={params.nr}",
    })
    emit(render_report(prov, columns, rows, cfg.format), cfg.out)
    return EXIT_OK


def cmd_ablate(cfg: RunConfig) -> int:
    mem = effective_memory(cfg)
    cm = effective_cost_model(cfg)
    params = resolve_params(cfg, mem)
    kc = params.kc
    if kc % 16:
        print(f"ablate: kc={kc} not a multiple of 16; padding the tail iteration",
              file=sys.stderr)
    columns = ["experiment", "measured", "theoretical"]
    rows = []
    for mode in ("read_ar_only", "mac_only", "baseline"):
        bd = microkernel_cycles(kc, mode, cm)
        rows.append({"experiment": mode, "measured": bd.calibrated,
                     "theoretical": bd.theoretical})
    prov = _provenance(cfg, cm, mem, {"command": "ablate", "kc": kc})
    emit(render_report(prov, columns, rows, cfg.format), cfg.out)
    return EXIT_OK


def cmd_ccp(cfg: RunConfig) -> int:
    mem = effective_memory(cfg)
    params = resolve_params(cfg, mem, for_ccp=True)
    status = EXIT_OK
    try:
        report = validate_footprints(params, mem, br_mode=cfg.br_mode,
                                     local_reserve_bytes=cfg.local_reserve_bytes)
    except CapacityError as exc:
        report = exc.report
        status = EXIT_CAPACITY
        print(f"ccp: {exc}", file=sys.stderr)
    columns = ["level", "capacity_bytes", "used_bytes", "ok"]
    rows = [{
        "level": level,
        "capacity_bytes": report.capacity[level],
        "used_bytes": report.usage[level],
        "ok": "yes" if level not in report.over else "no",
    } for level in report.usage]
    prov = _provenance(cfg, None, mem, {
        "command": "ccp",
        "br_mode": cfg.br_mode,
        "local_reserve_bytes": cfg.local_reserve_bytes,
        "params": f"mc={params.mc},nc={params.nc},kc={params.kc},"
                  f"mr={params.mr},nr={params.nr}",
    })
    emit(render_report(prov, columns, rows, cfg.format), cfg.out)
    return status


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help=f"JSON config file (fallback: ${ENV_CONFIG})")
    common.add_argument("--dims", metavar="MxNxK")
    common.add_argument("--tiles", metavar="LIST", help="comma-separated tile counts")
    common.add_argument("--profile", choices=["paper", "derived", "explicit"])
    common.add_argument("--seed", type=int, metavar="N")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--out", metavar="PATH")

    parser = argparse.ArgumentParser(
        prog="acap-gemm",
        description="Blocked UINT8 GEMM emulation and cycle model for a "
                    "multi-tile vector accelerator.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("verify", parents=[common],
                       help="run the blocked GEMM against the exact oracle")
    p.add_argument("--corrupt", action="store_true", help=argparse.SUPPRESS)
    sub.add_parser("simulate", parents=[common],
                   help="strong-scaling cycle table across tile counts")
    sub.add_parser("ablate", parents=[common],
                   help="micro-kernel ablation: theoretical vs calibrated cycles")
    sub.add_parser("ccp", parents=[common],
                   help="blocking parameters and per-level footprints")
    return parser


_COMMANDS = {
    "verify": cmd_verify,
    "simulate": cmd_simulate,
    "ablate": cmd_ablate,
    "ccp": cmd_ccp,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = apply_flags(load_config(args.config), args)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


if __name__ == "__main__":
    sys.exit(main())
