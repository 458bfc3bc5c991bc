"""
Command-line front end.

    ngma region --bc --snr1-db 10 --snr2-db 0 --power 1 --out bc.csv
    ngma rate-dl --scenario dl.json --out rates.csv
    ngma rate-ul --scenario ul.json --detector mmse
    ngma search-dl --scenario dl.json --objective min --out best.json
    ngma search-ul --scenario ul.json --grid 4
    ngma compare --scenario dl.json --out table.csv

The scenario file is the JSON scenario schema (``channels`` as ``[re, im]``
pairs) extended with per-command keys; see the README. Flags override file
values. Exit status: 0 ok, 2 configuration error, 3 infeasible or search
space too large.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import downlink, regions, search, uplink
from .core import ChannelSpec, Scenario, decode_vector, generate_scenario
from .errors import Infeasible, InvalidSpec, NGMAError, SearchTooLarge

COMMANDS = ("region", "rate-dl", "rate-ul", "search-dl", "search-ul", "compare")
EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 2, 3
COMPARE_SCHEMES = (("SDMA", "sdma"), ("BB-NOMA", "bb_noma"),
                   ("CB-NOMA", "cb_noma"), ("NGMA", "ngma"))


class ConfigError(InvalidSpec):
    pass


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def format_number(x) -> str:
    """At least 9 significant digits, more when needed to round-trip."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    text = f"{x:.9g}"
    return text if float(text) == x else repr(x)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(v if isinstance(v, str) else format_number(v) for v in row) + "\n")
    return buf.getvalue()


def write_atomic(path: Optional[str], text: str):
    """Write ``text`` to ``path`` via temp file + rename; ``None`` means stdout."""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".ngma-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass
class ExperimentConfig:
    command: str
    data: dict = field(default_factory=dict)
    out: Optional[str] = None
    seed: Optional[int] = None
    grid: Optional[int] = None
    snr1_db: Optional[float] = None
    snr2_db: Optional[float] = None
    power: Optional[float] = None
    objective: Optional[str] = None
    detector: Optional[str] = None
    sic_mode: Optional[str] = None
    cap: Optional[int] = None
    bc: bool = False
    mac: bool = False
    fixed_power_oma: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        for name in ("snr1_db", "snr2_db", "power"):
            val = getattr(self, name)
            if val is not None and not math.isfinite(val):
                raise ConfigError(f"--{name.replace('_', '-')} must be finite")


def _complex(value) -> complex:
    if isinstance(value, (list, tuple)):
        return complex(float(value[0]), float(value[1]))
    return complex(float(value))


def load_scenario(cfg: ExperimentConfig) -> Scenario:
    data = cfg.data
    if "channels" in data:
        scen = Scenario.from_dict(data)
        return Scenario(scen.channels, scen.noise_powers,
                        cfg.power if cfg.power is not None else scen.power_budget)
    spec_data = data.get("channel_spec")
    if spec_data is None:
        raise ConfigError("scenario needs 'channels' or 'channel_spec'")
    try:
        consts = spec_data.get("correlation_constants")
        spec = ChannelSpec(
            kind=spec_data.get("kind", "iid_complex_gaussian"),
            correlation_constants=None if consts is None else [_complex(c) for c in consts],
            explicit_values=spec_data.get("explicit_values"),
            seed=int(cfg.seed if cfg.seed is not None else spec_data.get("seed", 0)),
            user_gains=spec_data.get("user_gains"),
        )
        n_users = int(data["n_users"])
        return generate_scenario(spec, int(data["n_antennas"]), n_users,
                                 data.get("noise_powers", [1.0] * n_users),
                                 cfg.power if cfg.power is not None
                                 else float(data.get("power_budget", 1.0)))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, NGMAError):
            raise
        raise ConfigError(f"malformed channel_spec: {exc}") from exc


def _objective(cfg: ExperimentConfig, section: dict) -> str:
    if cfg.objective is not None:
        return {"sum": "sum_rate", "min": "min_rate"}[cfg.objective]
    return section.get("objective", "sum_rate")


def _sic_mode(cfg: ExperimentConfig, section: dict) -> str:
    return cfg.sic_mode or section.get("sic_mode", "strict")


def _run_region(cfg: ExperimentConfig) -> str:
    sec = cfg.data.get("region", {})
    snr1_db = cfg.snr1_db if cfg.snr1_db is not None else float(sec.get("snr1_db", 10.0))
    snr2_db = cfg.snr2_db if cfg.snr2_db is not None else float(sec.get("snr2_db", 0.0))
    power = cfg.power if cfg.power is not None else float(sec.get("power", 1.0))
    grid = cfg.grid if cfg.grid is not None else int(sec.get("grid_points", 1001))
    if not (math.isfinite(snr1_db) and math.isfinite(snr2_db)):
        raise ConfigError("SNR values must be finite")
    spec = regions.RegionSpec(db_to_linear(snr1_db), db_to_linear(snr2_db), power, grid)
    realloc = not (cfg.fixed_power_oma or sec.get("fixed_power_oma", False))
    kind = "mac" if cfg.mac else "bc" if cfg.bc else sec.get("kind", "bc")
    if kind == "bc":
        curves = [regions.bc_noma_boundary(spec), regions.bc_oma_boundary(spec, realloc)]
    elif kind == "mac":
        curves = [regions.mac_noma_boundary(spec), regions.mac_oma_boundary(spec, realloc)]
    else:
        raise ConfigError(f"unknown region kind {kind!r}")
    rows = [(c.scheme, r1, r2) for c in curves for r1, r2 in c.points]
    return csv_text(("scheme", "R1", "R2"), rows)


def _grouping(data: dict, n_users: int) -> downlink.Grouping:
    return downlink.Grouping(data.get("grouping", [[k] for k in range(n_users)]))


def _beamformers(s: Scenario, g: downlink.Grouping, data: dict) -> downlink.BeamformerSet:
    bf = data.get("beamformers", {})
    powers = bf.get("powers", data.get("powers"))
    if powers is None:
        powers = [s.power_budget / s.n_users] * s.n_users
    if "directions" in bf:
        dirs = np.array([decode_vector(d) for d in bf["directions"]])
        return downlink.BeamformerSet.from_vectors(dirs, powers)
    family = bf.get("family", "mrc_like")
    dirs = search.dl_family_directions(s, g, family)
    if dirs is None:
        raise ConfigError(f"direction family {family!r} is not realisable for this scenario")
    return downlink.BeamformerSet(dirs, powers)


def _run_rate_dl(cfg: ExperimentConfig) -> str:
    s = load_scenario(cfg)
    g = _grouping(cfg.data, s.n_users)
    order = cfg.data.get("order")
    o = downlink.IntraClusterOrder(order) if order is not None \
        else downlink.IntraClusterOrder.from_grouping(g)
    b = _beamformers(s, g, cfg.data)
    report = downlink.dl_sic_check(s, g, o, b, _sic_mode(cfg, cfg.data))
    return csv_text(("user", "cluster", "rate", "feasible"), report.csv_rows())


def _detectors(s: Scenario, lp: uplink.LayerPartition, cfg: ExperimentConfig, powers):
    if "detectors" in cfg.data and cfg.detector is None:
        vecs = np.array([decode_vector(v) for v in cfg.data["detectors"]])
        return vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
    family = cfg.detector or cfg.data.get("detector", "mrc")
    if family == "mrc":
        return uplink.mrc_detectors(s)
    if family == "zf":
        return uplink.zf_detectors(s)
    if family == "mmse":
        return uplink.mmse_detectors(s, lp, powers)
    raise ConfigError(f"unknown detector {family!r}")


def _run_rate_ul(cfg: ExperimentConfig) -> str:
    s = load_scenario(cfg)
    lp = uplink.LayerPartition(cfg.data.get("layers", [list(range(s.n_users))]))
    powers = cfg.data.get("powers", [s.power_budget] * s.n_users)
    d = uplink.DetectorSet(_detectors(s, lp, cfg, powers), powers)
    rates = [uplink.ul_ngma_rate(s, lp, d, k) for k in range(s.n_users)]
    return csv_text(("user", "layer", "rate"), uplink.csv_rows(lp, rates))


def _space(cfg: ExperimentConfig, uplink_mode: bool, **overrides) -> search.SearchSpace:
    sec = dict(cfg.data.get("search", {}))
    kw = {
        "grouping_mode": sec.get("grouping_mode", "all_partitions"),
        "order_mode": sec.get("order_mode", "all_permutations"),
        "power_grid": cfg.grid if cfg.grid is not None else int(sec.get("power_grid", 4)),
        "objective": _objective(cfg, sec),
        "scheme": sec.get("scheme", "ngma"),
        "sic_mode": _sic_mode(cfg, sec),
        "cap": cfg.cap if cfg.cap is not None else int(sec.get("cap", search.DEFAULT_CAP)),
    }
    if uplink_mode:
        fam = cfg.detector or sec.get("direction_family", "mmse")
        if "grouping" in sec:
            kw["grouping"] = uplink.LayerPartition(sec["grouping"])
    else:
        fam = sec.get("direction_family", ["mrc_like", "matched_to_channels"])
        if "grouping" in sec:
            kw["grouping"] = downlink.Grouping(sec["grouping"])
        if "order" in sec:
            kw["order"] = downlink.IntraClusterOrder(sec["order"])
    kw["direction_family"] = fam if isinstance(fam, str) else tuple(fam)
    kw.update(overrides)
    return search.SearchSpace(**kw)


def _run_search(cfg: ExperimentConfig) -> str:
    s = load_scenario(cfg)
    if cfg.command == "search-dl":
        result = search.dl_exhaustive_search(s, _space(cfg, False))
    else:
        result = search.ul_exhaustive_search(s, _space(cfg, True))
    return json.dumps(result.to_dict(), indent=2) + "\n"


def _run_compare(cfg: ExperimentConfig) -> str:
    s = load_scenario(cfg)
    rows = []
    for label, scheme in COMPARE_SCHEMES:
        space = _space(cfg, False, scheme=scheme, grouping_mode="all_partitions")
        try:
            res = search.dl_exhaustive_search(s, space)
            rows.append((label, space.objective, res.best_value, res.feasible,
                         res.evaluations, res.best_config.grouping.n_clusters))
        except Infeasible as exc:
            if exc.result is None:
                rows.append((label, space.objective, float("nan"), False, 0, 0))
            else:
                r = exc.result
                rows.append((label, space.objective, r.best_value, False,
                             r.evaluations, r.best_config.grouping.n_clusters))
    return csv_text(("scheme", "objective", "value", "feasible", "evaluations",
                     "clusters"), rows)


RUNNERS = {
    "region": _run_region,
    "rate-dl": _run_rate_dl,
    "rate-ul": _run_rate_ul,
    "search-dl": _run_search,
    "search-ul": _run_search,
    "compare": _run_compare,
}


def _first_line(exc) -> str:
    lines = str(exc).splitlines()
    return lines[0] if lines else type(exc).__name__


def run(cfg: ExperimentConfig) -> int:
    """Execute ``cfg``; returns the process exit status."""
    try:
        text = RUNNERS[cfg.command](cfg)
    except (Infeasible, SearchTooLarge) as exc:
        print(f"ngma: {_first_line(exc)}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (NGMAError, KeyError, TypeError, ValueError) as exc:
        print(f"ngma: invalid configuration: {_first_line(exc)}", file=sys.stderr)
        return EXIT_CONFIG
    write_atomic(cfg.out, text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ngma", description=__doc__.split("\n\n")[0].strip())
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--scenario", metavar="PATH", help="JSON scenario/config file")
    p.add_argument("--seed", type=int, help="seed for generated channels (u64)")
    p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
    p.add_argument("--grid", type=int, help="region grid points or search power steps")
    p.add_argument("--snr1-db", type=float)
    p.add_argument("--snr2-db", type=float)
    p.add_argument("--power", type=float, help="power budget in Watts")
    p.add_argument("--objective", choices=("sum", "min"))
    p.add_argument("--detector", choices=("mrc", "mmse", "zf"))
    p.add_argument("--sic-mode", choices=downlink.SIC_MODES)
    p.add_argument("--cap", type=int, help="maximum number of search configurations")
    kind = p.add_mutually_exclusive_group()
    kind.add_argument("--bc", action="store_true", help="broadcast-channel region")
    kind.add_argument("--mac", action="store_true", help="multiple-access region")
    p.add_argument("--fixed-power-oma", action="store_true",
                   help="OMA without power reallocation")
    return p


def parse_config(argv=None) -> ExperimentConfig:
    args = build_parser().parse_args(argv)
    data = {}
    if args.scenario is not None:
        try:
            with open(args.scenario) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {args.scenario}: {exc.strerror}") from exc
        if not text.strip():
            raise ConfigError(f"{args.scenario} is empty")
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.scenario} is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{args.scenario} must hold a JSON object")
    elif args.command != "region":
        raise ConfigError(f"{args.command} needs --scenario")
    if args.seed is not None and not 0 <= args.seed < 2**64:
        raise ConfigError("--seed must be an unsigned 64-bit integer")
    if args.cap is not None and args.cap < 1:
        raise ConfigError("--cap must be positive")
    return ExperimentConfig(
        command=args.command, data=data, out=args.out, seed=args.seed,
        grid=args.grid, snr1_db=args.snr1_db, snr2_db=args.snr2_db,
        power=args.power, objective=args.objective, detector=args.detector,
        sic_mode=args.sic_mode, cap=args.cap, bc=args.bc, mac=args.mac,
        fixed_power_oma=args.fixed_power_oma)


def main(argv=None) -> int:
    try:
        cfg = parse_config(argv)
    except NGMAError as exc:
        print(f"ngma: {_first_line(exc)}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
