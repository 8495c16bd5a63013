"""Batch front-end.

A run is described by an INI-style config file. The ``[experiment]`` section
holds the mode and the shared inputs; a section named after the mode holds
the mode-specific keys::

    [experiment]
    mode = convergence            # w1 | solve | convergence | perturbation
    payoff = clamp
    payoff_params = a=1; b=0; lo=-1; hi=1
    center = 0.5 0.5; 0.5 -0.7    # "w x1 .. xd" rows, or random:<n>, or a file via center_file

    [convergence]
    box = [[-2, 2]]
    theta = 0.3
    levels = 2..8
    reference_level = 11

Exit status: 0 success, 2 configuration/input error, 3 numerical failure,
4 I/O error.
"""
from __future__ import annotations

import argparse
import configparser
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .convergence import domain_perturbation_scan, rows_to_csv, run_convergence_study
from .dro import RobustInstance, solve_primal, with_center_atoms
from .errors import ConfigParseError, InfeasibleInstance, InputError, NumericalFailure
from .filtration import Box, DyadicFiltration
from .measures import DiscreteMeasure, as_points, load_measure, make_measure
from .payoffs import make_payoff, parse_params
from .transport import w1_distance

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

MODES = ("w1", "solve", "convergence", "perturbation")


@dataclass
class ExperimentConfig:
    mode: str
    seed: int = 0
    payoff: str | None = None
    payoff_params: dict = field(default_factory=dict)
    center: DiscreteMeasure | None = None
    target: DiscreteMeasure | None = None
    box: Box | None = None
    theta: float | None = None
    thetas: list[float] = field(default_factory=list)
    levels: list[int] = field(default_factory=list)
    reference_level: int | None = None
    level: int | None = None
    support: np.ndarray | None = None


def _fmt(x) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

class _Section:
    """Key lookup over the mode section with fallback to [experiment]."""

    def __init__(self, parser, mode, base_dir):
        self.parser = parser
        self.mode = mode
        self.base_dir = base_dir

    def get(self, key, required=False):
        for sec in (self.mode, "experiment"):
            if self.parser.has_section(sec) and self.parser.has_option(sec, key):
                return self.parser.get(sec, key).strip()
        if required:
            raise ConfigParseError(f"missing required key for mode '{self.mode}'", field=key)
        return None

    def number(self, key, kind=float, required=False):
        raw = self.get(key, required=required)
        if raw is None:
            return None
        try:
            return kind(raw)
        except ValueError:
            raise ConfigParseError(f"cannot parse {raw!r} as {kind.__name__}", field=key) from None

    def path(self, raw):
        p = Path(raw)
        return p if p.is_absolute() else self.base_dir / p


def _parse_rows(text, key):
    try:
        return [[float(t) for t in row.replace(",", " ").split()] for row in text.split(";") if row.strip()]
    except ValueError:
        raise ConfigParseError(f"non-numeric entry in {text!r}", field=key) from None


def _parse_measure(sec, key, box, rng):
    raw = sec.get(key)
    file_raw = sec.get(f"{key}_file")
    if file_raw is not None:
        return load_measure(sec.path(file_raw))
    if raw is None:
        raise ConfigParseError("missing measure", field=key)
    if raw.startswith("random:"):
        if box is None:
            raise ConfigParseError("random measures need a box", field="box")
        try:
            n = int(raw.split(":", 1)[1])
        except ValueError:
            raise ConfigParseError(f"bad random spec {raw!r}", field=key) from None
        atoms = box.lower + rng.random((n, box.dim)) * box.sides
        return make_measure(atoms, rng.dirichlet(np.ones(n)))
    rows = _parse_rows(raw, key)
    if not rows or len({len(r) for r in rows}) != 1 or len(rows[0]) < 2:
        raise ConfigParseError("measure rows must all be 'w x1 .. xd'", field=key)
    data = np.array(rows)
    return make_measure(data[:, 1:], data[:, 0])


def _parse_levels(raw):
    try:
        if ".." in raw:
            a, b = raw.split("..")
            return list(range(int(a), int(b) + 1))
        return [int(t) for t in raw.replace(",", " ").split()]
    except ValueError:
        raise ConfigParseError(f"bad level list {raw!r}", field="levels") from None


def load_config(path, seed=None) -> ExperimentConfig:
    """Parse and validate a config file. Raises ConfigParseError."""
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigParseError(str(exc).splitlines()[0], line=line) from None
    except configparser.Error as exc:
        raise ConfigParseError(str(exc), line=getattr(exc, "lineno", None)) from None
    if not parser.has_section("experiment"):
        raise ConfigParseError("missing [experiment] section", field="experiment")
    mode = parser.get("experiment", "mode", fallback="").strip()
    if mode not in MODES:
        raise ConfigParseError(f"mode must be one of {', '.join(MODES)}, got {mode!r}", field="mode")
    sec = _Section(parser, mode, path.parent)

    cfg = ExperimentConfig(mode=mode)
    cfg.seed = seed if seed is not None else (sec.number("seed", int) or 0)
    rng = np.random.default_rng(cfg.seed)
    try:
        box_raw = sec.get("box")
        if box_raw is not None:
            try:
                cfg.box = Box.from_intervals(json.loads(box_raw))
            except (json.JSONDecodeError, ValueError, InputError) as exc:
                raise ConfigParseError(f"bad box {box_raw!r}: {exc}", field="box") from None

        if mode == "w1":
            cfg.center = _parse_measure(sec, "source", cfg.box, rng)
            cfg.target = _parse_measure(sec, "target", cfg.box, rng)
            return cfg

        cfg.payoff = sec.get("payoff", required=True)
        cfg.payoff_params = parse_params(sec.get("payoff_params") or "")
        cfg.center = _parse_measure(sec, "center", cfg.box, rng)

        if mode == "convergence":
            if cfg.box is None:
                raise ConfigParseError("missing required key for mode 'convergence'", field="box")
            cfg.theta = sec.number("theta", required=True)
            cfg.levels = _parse_levels(sec.get("levels", required=True))
            cfg.reference_level = sec.number("reference_level", int, required=True)
        else:
            if mode == "solve":
                cfg.theta = sec.number("theta", required=True)
            else:
                raw = sec.get("thetas", required=True)
                cfg.thetas = [v for row in _parse_rows(raw, "thetas") for v in row]
            cfg.support = _parse_support(sec, cfg)
    except InputError as exc:
        raise ConfigParseError(str(exc)) from None
    return cfg


def _parse_support(sec, cfg):
    raw = sec.get("support")
    file_raw = sec.get("support_file")
    level = sec.number("level", int)
    if file_raw is not None:
        pts = np.loadtxt(sec.path(file_raw), ndmin=2)
    elif raw is not None:
        pts = np.array(_parse_rows(raw, "support"))
    elif cfg.box is not None and level is not None:
        cfg.level = level
        pts = DyadicFiltration(cfg.box, level).centers()
    else:
        raise ConfigParseError("give support, support_file, or box + level", field="support")
    return with_center_atoms(as_points(pts, dim=cfg.center.dim), cfg.center)


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

def _write(out: Path, name: str, text: str):
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)


def _payoff(cfg):
    return make_payoff(cfg.payoff, dim=cfg.center.dim, **cfg.payoff_params)


def run(cfg: ExperimentConfig, out: Path, threads: int = 1, dump_coupling: bool = False, stdout=None) -> int:
    stdout = stdout or sys.stdout
    out = Path(out)

    if cfg.mode == "w1":
        value, plan = w1_distance(cfg.center, cfg.target)
        print(_fmt(value), file=stdout)
        _write(out, "w1.txt", _fmt(value) + "\n")
        if dump_coupling:
            _write(out, "coupling.csv", plan.to_csv())
        return EXIT_OK

    V = _payoff(cfg)
    if cfg.mode == "solve":
        inst = RobustInstance(V, cfg.center, cfg.theta, cfg.support)
        sol = solve_primal(inst)
        print(f"value={_fmt(sol.value)}", file=stdout)
        _write(out, "solution.txt", sol.to_record())
        w_nu = sol.coupling.flow.sum(axis=0)
        w_mu = _center_on_support(inst)
        vals = V(inst.support)
        header = ",".join([f"x{k + 1}" for k in range(inst.dim)] + ["payoff", "center_weight", "minimizer_weight"])
        lines = [header] + [
            ",".join([_fmt(c) for c in x] + [_fmt(v), _fmt(a), _fmt(b)])
            for x, v, a, b in zip(inst.support, vals, w_mu, w_nu)
        ]
        _write(out, "plotdata.csv", "\n".join(lines) + "\n")
        if dump_coupling:
            _write(out, "coupling.csv", sol.coupling.to_csv())
        return EXIT_OK

    if cfg.mode == "convergence":
        study = run_convergence_study(V, cfg.center, cfg.box, cfg.theta, cfg.levels, cfg.reference_level, threads)
        csv = rows_to_csv(study.rows)
        stdout.write(csv)
        _write(out, "convergence.csv", csv)
        K = V.lipschitz_K
        lines = ["level,mesh,value,gap_to_reference,error_budget"] + [
            f"{r.level},{_fmt(r.mesh)},{_fmt(r.value)},{_fmt(r.gap_to_reference)},{_fmt(r.error_budget(K))}"
            for r in study.rows
        ]
        _write(out, "plotdata.csv", "\n".join(lines) + "\n")
        envelope = {
            "version": __version__,
            "mode": cfg.mode,
            "seed": cfg.seed,
            "config": study.config,
            "reference_value": study.reference_value,
            "monotone_decreasing": study.monotone_decreasing,
        }
        _write(out, "study.json", json.dumps(envelope, indent=2, sort_keys=True) + "\n")
        return EXIT_OK

    rows = domain_perturbation_scan(V, cfg.center, cfg.support, cfg.thetas, threads)
    csv = rows_to_csv(rows)
    stdout.write(csv)
    _write(out, "perturbation.csv", csv)
    F = float(cfg.center.weights @ V(cfg.center.atoms))
    lines = ["theta,value,lipschitz_lower,upper"] + [
        f"{_fmt(r.theta)},{_fmt(r.value)},{_fmt(F - V.lipschitz_K * r.theta)},{_fmt(F)}" for r in rows
    ]
    _write(out, "plotdata.csv", "\n".join(lines) + "\n")
    return EXIT_OK


def _center_on_support(inst) -> np.ndarray:
    from scipy.spatial import cKDTree

    _, idx = cKDTree(inst.support).query(inst.center.atoms, p=np.inf)
    w = np.zeros(len(inst.support))
    np.add.at(w, idx, inst.center.weights)
    return w


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wdro", description="Wasserstein-ball robust minimisation on dyadic filtrations.")
    p.add_argument("--config", required=True, help="experiment config file")
    p.add_argument("--out", default=".", help="output directory (default: current directory)")
    p.add_argument("--seed", type=int, default=None, help="seed for generated instances (overrides config)")
    p.add_argument("--threads", type=int, default=1, help="parallel solves within a study")
    p.add_argument("--dump-coupling", action="store_true", help="write coupling.csv (i,j,flow,cost)")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, seed=args.seed)
        return run(cfg, Path(args.out), threads=args.threads, dump_coupling=args.dump_coupling)
    except ConfigParseError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, InfeasibleInstance) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
