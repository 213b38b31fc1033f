"""Command-line front end.

Every subcommand expands a parameter grid, evaluates each point with a
seed derived from the master seed and the point index, and writes one
CSV or JSON table whose header records the tool version, the resolved
configuration, the seed and a SHA-256 hash of the data rows.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import itertools
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

SUBCOMMANDS = ("exact", "vmps", "locent", "disentangle", "scan")


class ConfigError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


_DEFAULTS: dict[str, dict] = {
    "exact": {"n_sites": [200], "j": "0:0.95:0.05", "b_x": [0.0], "b_z": [0.0], "verify": False},
    "vmps": {
        "n_sites": [200],
        "j": [0.5],
        "b_x": "0:2:0.2",
        "b_z": [0.0],
        "bond_dim": [8],
        "sweeps": 6,
        "restarts": 40,
    },
    "locent": {
        "n_sites": [60],
        "j": "0:0.8:0.2",
        "b_x": [0.0],
        "b_z": [0.0],
        "bond_dim": [8],
        "sweeps": 6,
        "restarts": 4,
        "samples": 2000,
        "n_z": 2,
        "separation": None,
        "threshold": 0.99,
        "exhaustive": False,
        "records": False,
    },
    "disentangle": {"j": "0:2:0.1", "c": 0.8, "verify": False, "adaptive": False},
    "scan": {"n_sites": [100], "j": "0:2:0.1", "b_x": "0:2:0.1", "b_z": [0.0]},
}

_GRID_KEYS = ("n_sites", "j", "b_x", "b_z", "bond_dim")


@dataclass
class RunConfig:
    subcommand: str
    params: dict
    seed: int = 0
    out: str | None = None
    format: str = "csv"
    threads: int = 1
    deterministic: bool = False
    grids: dict = field(default_factory=dict)

    def echo(self) -> dict:
        """Everything that determines the output (not the path or thread count)."""
        return {"subcommand": self.subcommand, "seed": self.seed, "params": {**self.params, **self.grids}}


def parse_grid(spec, integer: bool = False) -> list:
    """``[..]``, a scalar, ``"a,b,c"`` or ``"start:stop:step"`` (stop inclusive)."""
    conv = int if integer else float
    if isinstance(spec, dict):
        spec = f"{spec['start']}:{spec['stop']}:{spec['step']}"
    if isinstance(spec, (list, tuple)):
        vals = [conv(v) for v in spec]
    elif isinstance(spec, (int, float)):
        vals = [conv(spec)]
    elif isinstance(spec, str):
        s = spec.strip()
        if ":" in s:
            try:
                start, stop, step = (float(x) for x in s.split(":"))
            except ValueError as exc:
                raise ConfigError(f"bad range {spec!r}") from exc
            if step <= 0 or stop < start:
                raise ConfigError(f"bad range {spec!r}")
            count = int(round((stop - start) / step)) + 1
            vals = [conv(round(start + k * step, 12)) for k in range(count)]
        else:
            try:
                vals = [conv(x) for x in s.split(",") if x.strip()]
            except ValueError as exc:
                raise ConfigError(f"bad list {spec!r}") from exc
    else:
        raise ConfigError(f"cannot read grid {spec!r}")
    if not vals:
        raise ConfigError("empty parameter grid")
    return vals


def load_config_file(path: str) -> dict:
    p = Path(path)
    try:
        text = p.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if p.suffix.lower() == ".json":
            return json.loads(text)
        import tomli

        return tomli.loads(text.decode())
    except (ValueError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc


def resolve_config(args: argparse.Namespace) -> RunConfig:
    sub = args.subcommand
    params = dict(_DEFAULTS[sub])
    file_cfg: dict = {}
    if args.config:
        file_cfg = load_config_file(args.config)
        section = file_cfg.get(sub, {})
        top = {k: v for k, v in file_cfg.items() if k not in SUBCOMMANDS}
        for src in (top, section):
            for k, v in src.items():
                if k in ("seed", "out", "format", "threads", "deterministic"):
                    continue
                if k not in params:
                    raise ConfigError(f"unknown key {k!r} for {sub}")
                params[k] = v
    for k in params:
        v = getattr(args, k, None)
        if v is not None:
            params[k] = v

    def pick(name, default):
        v = getattr(args, name, None)
        if v is not None and v is not False:
            return v
        section = file_cfg.get(sub, {})
        return section.get(name, file_cfg.get(name, default))

    seed = pick("seed", 0)
    fmt = pick("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown format {fmt!r}")
    threads = int(pick("threads", 1))
    if threads < 1:
        raise ConfigError("threads must be at least 1")
    try:
        seed = int(seed)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"seed must be an integer, got {seed!r}") from exc
    if seed < 0:
        raise ConfigError("seed must be non-negative")
    cfg = RunConfig(sub, params, seed, pick("out", None), fmt, threads, bool(pick("deterministic", False)))
    cfg.grids = {k: parse_grid(params[k], integer=k in ("n_sites", "bond_dim")) for k in _GRID_KEYS if k in params}
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    g, p = cfg.grids, cfg.params
    if any(n < 3 for n in g.get("n_sites", [3])):
        raise ConfigError("n_sites must be at least 3")
    if any(j < 0 for j in g.get("j", [])):
        raise ConfigError("J must be non-negative")
    if cfg.subcommand in ("exact", "scan") and any(b != 0 for b in g["b_z"]):
        raise ConfigError(f"{cfg.subcommand} needs B_z = 0 (free-fermion solver)")
    if any(d < 2 for d in g.get("bond_dim", [2])):
        raise ConfigError("bond_dim must be at least 2")
    for key in ("sweeps", "restarts", "samples", "n_z"):
        if key in p and (not isinstance(p[key], int) or p[key] < 1):
            raise ConfigError(f"{key} must be a positive integer")
    if cfg.subcommand == "locent":
        if p["exhaustive"] and any(n > 12 for n in g["n_sites"]):
            raise ConfigError("exhaustive mode is limited to 12 sites")
        if any(n % 2 for n in g["n_sites"]) and not p["exhaustive"]:
            raise ConfigError("locent needs even n_sites for the two-site unit cell")
    if cfg.subcommand == "vmps" and any(n % 2 for n in g["n_sites"]):
        raise ConfigError("vmps needs even n_sites for the two-site unit cell")
    if cfg.subcommand == "disentangle" and not 0 < float(p["c"]) <= 1:
        raise ConfigError("c must lie in (0, 1]")


def point_seed(master: int, index: int) -> int:
    import numpy as np

    return int(np.random.SeedSequence(master, spawn_key=(index,)).generate_state(1, dtype=np.uint64)[0])


# ---------------------------------------------------------------------------
# subcommands: each returns column names and evaluates one grid point
# ---------------------------------------------------------------------------


def _grid_points(cfg: RunConfig, keys: tuple[str, ...]) -> list[dict]:
    return [dict(zip(keys, vals)) for vals in itertools.product(*(cfg.grids[k] for k in keys))]


EXACT_COLUMNS = [
    "n_sites", "j", "b_x", "phase", "sector", "energy", "gap", "x", "s1", "s2", "zx", "xz", "yy",
    "oracle_energy", "oracle_max_dev",
]


def _exact_point(cfg: RunConfig, pt: dict, seed: int) -> list[dict]:
    from . import ff_exact as ff
    from .params import ChainParams, phase_label

    p = ChainParams(pt["n_sites"], pt["j"], pt["b_x"])
    g = ff.ground_state(p)
    n = p.n_sites
    row = {
        "n_sites": n,
        "j": pt["j"],
        "b_x": pt["b_x"],
        "phase": phase_label(pt["j"], pt["b_x"]),
        "sector": g.sector.value,
        "energy": g.energy,
        "gap": ff.excitation_gap(p),
        "x": ff.local_x_expectation(g, 0),
        "s1": ff.block_entropy(g, 0, 0),
        "s2": ff.block_entropy(g, 0, 1),
    }
    strings = {k: ff.string_correlator(g, ff.StringSpec.full_chain(k, n)) for k in ("zx", "xz", "yy")}
    row.update(strings)
    row["oracle_energy"] = ""
    row["oracle_max_dev"] = ""
    if cfg.params["verify"]:
        if n > 12:
            raise ConfigError("verify mode needs n_sites <= 12")
        from . import oracle

        st = oracle.ground_state_dense(p)
        psi = st.amplitudes
        dev = [abs(st.energy - g.energy), abs(oracle.expectation_dense(psi, {0: "X"}) - row["x"])]
        dev.append(abs(oracle.entropy_dense(psi, [0, 1]) - row["s2"]))
        for k, v in strings.items():
            dev.append(abs(oracle.expectation_dense(psi, ff.StringSpec.full_chain(k, n).operators(n)) - v))
        row["oracle_energy"] = st.energy
        row["oracle_max_dev"] = max(dev)
    return [row]


SCAN_COLUMNS = ["n_sites", "j", "b_x", "phase", "energy", "gap", "s2", "yy", "zx"]


def _scan_point(cfg: RunConfig, pt: dict, seed: int) -> list[dict]:
    from . import ff_exact as ff
    from .params import ChainParams, phase_label

    p = ChainParams(pt["n_sites"], pt["j"], pt["b_x"])
    g = ff.ground_state(p)
    n = p.n_sites
    return [
        {
            "n_sites": n,
            "j": pt["j"],
            "b_x": pt["b_x"],
            "phase": phase_label(pt["j"], pt["b_x"]),
            "energy": g.energy,
            "gap": ff.excitation_gap(p),
            "s2": ff.block_entropy(g, 0, 1),
            "yy": ff.string_correlator(g, ff.StringSpec.full_chain("yy", n)),
            "zx": ff.string_correlator(g, ff.StringSpec.full_chain("zx", n)),
        }
    ]


VMPS_COLUMNS = [
    "n_sites", "j", "b_x", "b_z", "bond_dim", "restart", "energy", "open_energy", "s2", "exact_s2",
    "exact_energy", "converged", "regularized", "selected",
]


def _vmps_point(cfg: RunConfig, pt: dict, seed: int) -> list[dict]:
    from . import ff_exact as ff
    from . import vmps
    from .params import ChainParams

    p = ChainParams(pt["n_sites"], pt["j"], pt["b_x"], pt["b_z"])
    vc = vmps.VmpsConfig(
        bond_dim=pt["bond_dim"], n_sweeps=cfg.params["sweeps"], n_restarts=cfg.params["restarts"], rng_seed=seed
    )
    results = vmps.all_restarts(p, vc)
    best = vmps.select_best(results)
    exact_s2 = exact_e = ""
    if pt["b_z"] == 0:
        g = ff.ground_state(p)
        exact_s2, exact_e = ff.block_entropy(g, 0, 1), g.energy
    rows = []
    for r in results:
        rows.append(
            {
                "n_sites": p.n_sites,
                "j": pt["j"],
                "b_x": pt["b_x"],
                "b_z": pt["b_z"],
                "bond_dim": pt["bond_dim"],
                "restart": r.restart_index,
                "energy": r.energy,
                "open_energy": r.open_energy,
                "s2": r.s2,
                "exact_s2": exact_s2,
                "exact_energy": exact_e,
                "converged": int(r.converged),
                "regularized": int(r.regularized),
                "selected": int(r.restart_index == best.restart_index),
                "_diag": r.to_json_line(),
            }
        )
    return rows


LOCENT_COLUMNS = [
    "n_sites", "j", "b_x", "b_z", "bond_dim", "separation", "n_z", "el", "el_err", "n_samples", "s2",
    "p_yy", "amplitude", "phase_xi", "n_near_maximal", "n_excluded", "mode",
]


def _locent_point(cfg: RunConfig, pt: dict, seed: int) -> list[dict]:
    import numpy as np

    from . import locent, mps, vmps
    from .params import ChainParams

    prm = cfg.params
    n = pt["n_sites"]
    p = ChainParams(n, pt["j"], pt["b_x"], pt["b_z"])
    sep = prm["separation"]
    proto = locent.ProtocolSpec(n, 0, None if sep is None else 0 + int(sep), prm["n_z"])
    s2 = ""
    if prm["exhaustive"]:
        from . import oracle

        state = mps.from_dense(oracle.ground_state_dense(p).amplitudes)
        est = locent.exhaustive_localizable_entanglement(state, proto)
        weights = est.probabilities
        mode = "exhaustive"
    else:
        vc = vmps.VmpsConfig(
            bond_dim=pt["bond_dim"], n_sweeps=prm["sweeps"], n_restarts=prm["restarts"], rng_seed=seed
        )
        best = vmps.best_of_restarts(p, vc)
        s2 = best.s2
        sample_seed = np.random.SeedSequence(seed, spawn_key=(1,))
        est = locent.estimate_localizable_entanglement(best.state, proto, prm["samples"], sample_seed)
        weights = None
        mode = "sampled"
    ch = locent.characterize_phi(est.corrected, weights, threshold=float(prm["threshold"]))
    row = {
        "n_sites": n,
        "j": pt["j"],
        "b_x": pt["b_x"],
        "b_z": pt["b_z"],
        "bond_dim": "" if prm["exhaustive"] else pt["bond_dim"],
        "separation": proto.separation,
        "n_z": proto.n_z,
        "el": est.mean,
        "el_err": est.std_err,
        "n_samples": est.n_samples,
        "s2": s2,
        "p_yy": ch.p_yy,
        "amplitude": ch.amplitude,
        "phase_xi": ch.phase,
        "n_near_maximal": ch.n_near_maximal,
        "n_excluded": ch.n_excluded,
        "mode": mode,
    }
    if prm["records"]:
        phis = locent.phi_angle(est.corrected)
        row["_records"] = [
            {
                "j": pt["j"],
                "outcomes": "".join(str(int(x)) for x in o),
                "probability": float(pr),
                "concurrence": float(c),
                "phi": float(ph),
            }
            for o, pr, c, ph in zip(est.outcomes, est.probabilities, est.concurrences, phis)
        ]
    return [row]


DISENTANGLE_COLUMNS = [
    "j", "theta_p1", "theta_0", "theta_m1", "p_p1", "p_0", "p_m1", "p_sum", "residual_max",
    "weighted_p1", "weighted_0", "weighted_m1", "fixed_weighted_total", "c", "c_max", "p_fail",
    "grid_max_dev", "projective_possible", "adaptive_possible",
]


def _disentangle_point(cfg: RunConfig, pt: dict, seed: int) -> list[dict]:
    import numpy as np

    from . import disentangle as dis

    prm = cfg.params
    j = pt["j"]
    res, povm = dis.povm_for(j, float(prm["c"]))
    fixed = dis.weighted_residual(j, 0.0)
    row = {
        "j": j,
        "theta_p1": res.angles[1],
        "theta_0": res.angles[0],
        "theta_m1": res.angles[-1],
        "p_p1": res.probabilities[1],
        "p_0": res.probabilities[0],
        "p_m1": res.probabilities[-1],
        "p_sum": res.probability_sum,
        "residual_max": res.max_residual,
        "weighted_p1": res.weighted_residuals[1],
        "weighted_0": res.weighted_residuals[0],
        "weighted_m1": res.weighted_residuals[-1],
        "fixed_weighted_total": sum(fixed.values()),
        "c": povm.c,
        "c_max": povm.c_max,
        "p_fail": povm.failure_probability,
        "grid_max_dev": "",
        "projective_possible": "",
        "adaptive_possible": "",
    }
    if res.flagged:
        raise NumericalFailure(f"disentangling optimization failed at J={j}: {'; '.join(res.notes)}")
    if prm["verify"]:
        psi = dis.ground_state(j)
        grid = np.arange(-np.pi / 2, np.pi / 2, 1e-4)
        dev = 0.0
        for s in dis.OUTCOME_CLASSES:
            s1, s2 = dis._BRANCHES[s][0]
            ent = np.array([dis.pair_entropy(dis.end_matrix(psi, x, s1, x, s2)) for x in grid])
            # distance from the optimized angle to the nearest grid minimum
            loc = [k for k in range(1, len(grid) - 1) if ent[k] <= ent[k - 1] and ent[k] <= ent[k + 1] and ent[k] < 1e-3]
            if not loc:
                raise NumericalFailure(f"grid search found no disentangling angle for s={s} at J={j}")
            dev = max(dev, min(abs(grid[k] - res.angles[s]) for k in loc))
        row["grid_max_dev"] = dev
    if prm["adaptive"] and j > 0:
        rep = dis.adaptive_scan(j)
        row["projective_possible"] = int(rep.projective_possible)
        row["adaptive_possible"] = int(rep.adaptive_possible)
    return [row]


_COMMANDS = {
    "exact": (("n_sites", "j", "b_x"), EXACT_COLUMNS, _exact_point),
    "scan": (("n_sites", "j", "b_x"), SCAN_COLUMNS, _scan_point),
    "vmps": (("n_sites", "j", "b_x", "b_z", "bond_dim"), VMPS_COLUMNS, _vmps_point),
    "locent": (("n_sites", "j", "b_x", "b_z", "bond_dim"), LOCENT_COLUMNS, _locent_point),
    "disentangle": (("j",), DISENTANGLE_COLUMNS, _disentangle_point),
}


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------


def _config_hash(cfg: RunConfig) -> str:
    return hashlib.sha256(json.dumps(cfg.echo(), sort_keys=True).encode()).hexdigest()


def _evaluate(args: tuple) -> list[dict]:
    cfg, pt, seed = args
    return _COMMANDS[cfg.subcommand][2](cfg, pt, seed)


def run(cfg: RunConfig) -> Path | str:
    """Evaluate every grid point and write the table; returns the path or text."""
    keys, columns, _ = _COMMANDS[cfg.subcommand]
    points = _grid_points(cfg, keys)
    seeds = [point_seed(cfg.seed, i) for i in range(len(points))]
    out = Path(cfg.out) if cfg.out else None
    partial = out.with_name(out.name + ".partial.jsonl") if out else None
    chash = _config_hash(cfg)
    done: dict[int, list[dict]] = {}
    if partial and partial.exists():
        for line in partial.read_text().splitlines():
            rec = json.loads(line)
            if rec.get("config") == chash:
                done[rec["index"]] = rec["rows"]
    todo = [i for i in range(len(points)) if i not in done]
    jobs = [(cfg, points[i], seeds[i]) for i in todo]
    if cfg.threads > 1 and not cfg.deterministic and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            for i, rows in zip(todo, pool.map(_evaluate, jobs)):
                done[i] = rows
                _checkpoint(partial, chash, i, rows)
    else:
        for i, job in zip(todo, jobs):
            done[i] = _evaluate(job)
            _checkpoint(partial, chash, i, done[i])
    rows = [r for i in range(len(points)) for r in done[i]]
    text = render(cfg, columns, rows)
    extras = _extras(cfg, rows)
    if out is None:
        return text
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    for suffix, body in extras.items():
        out.with_name(out.name + suffix).write_text(body)
    if partial and partial.exists():
        partial.unlink()
    return out


def _checkpoint(partial: Path | None, chash: str, index: int, rows: list[dict]) -> None:
    if partial is None:
        return
    partial.parent.mkdir(parents=True, exist_ok=True)
    with partial.open("a") as fh:
        fh.write(json.dumps({"config": chash, "index": index, "rows": rows}) + "\n")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _clean(v):
    if hasattr(v, "item"):
        return v.item()
    return v


def render(cfg: RunConfig, columns: list[str], rows: list[dict]) -> str:
    body_rows = [[_clean(r.get(c, "")) for c in columns] for r in rows]
    meta = {"tool": "clusterchain", "version": __version__, "config": cfg.echo(), "seed": cfg.seed, "columns": columns}
    if cfg.format == "json":
        payload = json.dumps(body_rows, sort_keys=True)
        meta["content_sha256"] = hashlib.sha256(payload.encode()).hexdigest()
        return json.dumps({"metadata": meta, "rows": [dict(zip(columns, r)) for r in body_rows]}, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in body_rows:
        w.writerow([_fmt(v) for v in r])
    body = buf.getvalue()
    digest = hashlib.sha256(body.encode()).hexdigest()
    head = [
        f"# clusterchain {__version__}",
        f"# config: {json.dumps(cfg.echo(), sort_keys=True)}",
        f"# seed: {cfg.seed}",
        f"# content-sha256: {digest}",
    ]
    return "\n".join(head) + "\n" + body


def _extras(cfg: RunConfig, rows: list[dict]) -> dict[str, str]:
    extras = {}
    diag = [r["_diag"] for r in rows if "_diag" in r]
    if diag:
        extras[".diagnostics.jsonl"] = "\n".join(diag) + "\n"
    recs = [x for r in rows for x in r.get("_records", [])]
    if recs:
        buf = io.StringIO()
        cols = ["j", "outcomes", "probability", "concurrence", "phi"]
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for x in recs:
            w.writerow([_fmt(x[c]) for c in cols])
        extras[".records.csv"] = buf.getvalue()
    return extras


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clusterchain", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"clusterchain {__version__}")
    subs = parser.add_subparsers(dest="subcommand", required=True)
    helps = {
        "exact": "free-fermion ground-state observables at B_z = 0",
        "vmps": "variational MPS restarts with two-site entropy",
        "locent": "localizable entanglement and corrected-pair statistics",
        "disentangle": "four-qubit disentangling angles and POVM",
        "scan": "phase-diagram scan over (J, B_x)",
    }
    for name in SUBCOMMANDS:
        sp = subs.add_parser(name, help=helps[name])
        sp.add_argument("--config", help="TOML or JSON file")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output file (stdout if omitted)")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--threads", type=int)
        sp.add_argument("--deterministic", action="store_true", default=None)
        keys = _DEFAULTS[name]
        if "n_sites" in keys:
            sp.add_argument("--n-sites", dest="n_sites", help="chain lengths, e.g. 100,200")
        sp.add_argument("--j", help="J grid: value, list a,b or range start:stop:step")
        if "b_x" in keys:
            sp.add_argument("--b-x", dest="b_x", help="B_x grid")
        if "b_z" in keys:
            sp.add_argument("--b-z", dest="b_z", help="B_z grid")
        if "bond_dim" in keys:
            sp.add_argument("--bond-dim", dest="bond_dim", help="bond dimensions")
        for key in ("sweeps", "restarts", "samples", "n_z", "separation"):
            if key in keys:
                sp.add_argument(f"--{key.replace('_', '-')}", dest=key, type=int)
        if "threshold" in keys:
            sp.add_argument("--threshold", type=float)
        if "c" in keys:
            sp.add_argument("--c", type=float)
        for flag in ("verify", "exhaustive", "records", "adaptive"):
            if flag in keys:
                sp.add_argument(f"--{flag}", action="store_true", default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.deterministic:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, "1")
    try:
        cfg = resolve_config(args)
        result = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # numerical failures from any solver
        from numpy.linalg import LinAlgError

        from .mps import ImpossibleOutcome

        if isinstance(exc, (NumericalFailure, ImpossibleOutcome, LinAlgError, FloatingPointError, ArithmeticError)):
            print(f"numerical failure: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        if isinstance(exc, ValueError):
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        raise
    if isinstance(result, str):
        sys.stdout.write(result)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
