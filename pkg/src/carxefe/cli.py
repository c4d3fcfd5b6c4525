"""Command-line front end.

    carxefe run      one trial, coupled by default
    carxefe compare  coupled and uncoupled trials on the same seed
    carxefe mc       Monte Carlo comparison over consecutive seeds

Configuration precedence: flags, then the ``--config`` file, then defaults.
The config file is INI-style with ``[plant]``, ``[agent]`` and
``[experiment]`` sections whose keys are the flag names.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import _backend
from .errors import TrialError
from .experiment import (
    ExperimentConfig,
    TrialLog,
    aggregate,
    compare,
    run_monte_carlo,
    run_trial,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BAD_VALUE = 3
EXIT_MISSING_FILE = 4
EXIT_IO = 5
EXIT_TRIAL_FAILED = 6

OUT_ENV = "CARXEFE_OUT"
STEP_COLUMNS = ("step", "agent", "control", "observation", "pred_mean", "pred_std", "surprise", "goal_alignment")
SEED_COLUMNS = ("mode", "seed", "agent", "cum_surprise", "cum_goal_alignment")

log = logging.getLogger("carxefe")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        code = EXIT_BAD_VALUE if "invalid" in message else EXIT_USAGE
        raise CliError(code, f"{self.prog}: {message}")


@dataclass(frozen=True)
class CliInvocation:
    command: str
    config: ExperimentConfig
    out_dir: Path
    fmt: str
    seeds: int
    jobs: int


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_DEFAULTS = ExperimentConfig()


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid list of numbers: {text!r}") from None


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"invalid boolean: {text!r}")


def _converter(name: str):
    default = getattr(_DEFAULTS, name)
    if isinstance(default, bool):
        return _bool
    if isinstance(default, tuple):
        return _float_list
    return type(default)


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"invalid count {text!r}: must be at least 1")
    return v


def _add_config_flags(p: argparse.ArgumentParser):
    groups = {s: p.add_argument_group(f"{s} settings") for s in ("plant", "agent", "experiment")}
    for name, f in _FIELDS.items():
        default = getattr(_DEFAULTS, name)
        shown = ",".join(repr(v) for v in default) if isinstance(default, tuple) else repr(default)
        g = groups[f.metadata["section"]]
        if name == "coupled":
            mode = g.add_mutually_exclusive_group()
            mode.add_argument("--coupled", dest="coupled", action="store_const", const=True,
                              default=argparse.SUPPRESS, help=f"{f.metadata['help']} (default: {shown})")
            mode.add_argument("--uncoupled", dest="coupled", action="store_const", const=False,
                              default=argparse.SUPPRESS, help="agents read only their own buffers")
            continue
        g.add_argument(_flag(name), dest=name, type=_converter(name), default=argparse.SUPPRESS,
                       metavar=name.upper(), help=f"{f.metadata['help']} (default: {shown})")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="carxefe", description="Coupled ARX active inference agents on a double mass-spring-damper.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    helps = {
        "run": "run one trial and write its step log",
        "compare": "run coupled and uncoupled trials on one seed",
        "mc": "Monte Carlo comparison of coupled and uncoupled agents",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("--config", type=Path, help="INI file with [plant], [agent], [experiment] sections")
        p.add_argument("--out", type=Path, default=None,
                       help=f"output directory (default: ${OUT_ENV} or ./results)")
        p.add_argument("--format", dest="fmt", choices=("csv", "json", "both"), default="both")
        if name == "mc":
            p.add_argument("--seeds", type=_positive_int, default=20, help="number of seeds (default: 20)")
            p.add_argument("--jobs", type=_positive_int, default=1, help="worker processes (default: 1)")
        _add_config_flags(p)
    return parser


def read_config_file(path: Path) -> dict:
    if not path.is_file():
        raise CliError(EXIT_MISSING_FILE, f"config file not found: {path}")
    cp = configparser.ConfigParser()
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise CliError(EXIT_BAD_VALUE, f"{path}: {exc}") from exc
    values = {}
    for section in cp.sections():
        for key, raw in cp.items(section):
            name = key.replace("-", "_")
            f = _FIELDS.get(name)
            if f is None:
                raise CliError(EXIT_USAGE, f"{path}: unknown key {key!r} in [{section}]")
            if f.metadata["section"] != section:
                raise CliError(EXIT_USAGE, f"{path}: key {key!r} belongs in [{f.metadata['section']}], not [{section}]")
            try:
                values[name] = _converter(name)(raw)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise CliError(EXIT_BAD_VALUE, f"{path}: bad value for {key!r}: {raw!r} ({exc})") from exc
    return values


def _glue_negative_values(argv):
    # argparse mistakes "-1e-3" for an option; "--flag=-1e-3" parses fine
    out = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and tok.startswith("-"):
            try:
                float(tok.split(",")[0])
            except ValueError:
                pass
            else:
                out[-1] = f"{out[-1]}={tok}"
                continue
        out.append(tok)
    return out


def parse_args(argv=None) -> CliInvocation:
    argv = sys.argv[1:] if argv is None else list(argv)
    ns = build_parser().parse_args(_glue_negative_values(argv))
    values = {}
    if ns.config is not None:
        values.update(read_config_file(ns.config))
    values.update({name: getattr(ns, name) for name in _FIELDS if hasattr(ns, name)})
    try:
        config = ExperimentConfig(**values)
    except (ValueError, TypeError) as exc:
        raise CliError(EXIT_BAD_VALUE, f"invalid configuration: {exc}") from exc
    out = ns.out if ns.out is not None else Path(os.environ.get(OUT_ENV) or "results")
    return CliInvocation(
        command=ns.command,
        config=config,
        out_dir=out,
        fmt=ns.fmt,
        seeds=getattr(ns, "seeds", 1),
        jobs=getattr(ns, "jobs", 1),
    )


def _num(v) -> str:
    # shortest repr that round-trips a double
    return repr(float(v))


def write_steps_csv(trial: TrialLog, path: Path) -> None:
    """One row per (step, agent); agents are numbered from 1."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STEP_COLUMNS)
        for r in trial.records:
            for i in range(len(r.controls)):
                w.writerow([r.step, i + 1, *(_num(v[i]) for v in (
                    r.controls, r.observations, r.pred_means, r.pred_stds, r.surprises, r.goal_alignments))])


def read_steps_csv(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return [
            {k: (int(v) if k in ("step", "agent") else float(v)) for k, v in row.items()}
            for row in csv.DictReader(fh)
        ]


def write_json(obj, path: Path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _trial_json(trial: TrialLog) -> dict:
    return {"config": trial.config.to_dict(), **trial.summary()}


def emit(inv: CliInvocation, payload: dict, trials: dict[str, TrialLog], seed_rows: list | None = None) -> list[Path]:
    """Write ``summary.json`` and step/seed CSVs according to ``inv.fmt``.

    ``trials`` maps a subdirectory name ("" for the output root) to a trial log.
    """
    written = []
    try:
        inv.out_dir.mkdir(parents=True, exist_ok=True)
        if inv.fmt in ("csv", "both"):
            for sub, trial in trials.items():
                d = inv.out_dir / sub if sub else inv.out_dir
                d.mkdir(parents=True, exist_ok=True)
                write_steps_csv(trial, d / "steps.csv")
                written.append(d / "steps.csv")
            if seed_rows is not None:
                path = inv.out_dir / "seeds.csv"
                with open(path, "w", newline="") as fh:
                    w = csv.writer(fh, lineterminator="\n")
                    w.writerow(SEED_COLUMNS)
                    w.writerows(seed_rows)
                written.append(path)
        if inv.fmt in ("json", "both"):
            write_json(payload, inv.out_dir / "summary.json")
            written.append(inv.out_dir / "summary.json")
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write output: {exc.filename or inv.out_dir}: {exc.strerror}") from exc
    return written


def _seed_rows(mode: str, result) -> list:
    return [
        [mode, t["seed"], i + 1, _num(t["cum_surprise"][i]), _num(t["cum_goal_alignment"][i])]
        for t in result.trials
        for i in range(len(t["cum_surprise"]))
    ]


def execute(inv: CliInvocation) -> list[Path]:
    cfg = inv.config
    if inv.command == "run":
        trial = run_trial(cfg)
        payload = {"command": "run", **_trial_json(trial)}
        return emit(inv, payload, {"": trial})

    coupled_cfg = cfg.replace(coupled=True)
    uncoupled_cfg = cfg.replace(coupled=False)
    if inv.command == "compare":
        trials = {"coupled": run_trial(coupled_cfg), "uncoupled": run_trial(uncoupled_cfg)}
        agg = {k: aggregate(t.config, [t.config.seed], [t.summary()]) for k, t in trials.items()}
        report = compare(agg["coupled"], agg["uncoupled"])
        payload = {
            "command": "compare",
            "coupled": _trial_json(trials["coupled"]),
            "uncoupled": _trial_json(trials["uncoupled"]),
            "comparison": report.to_dict(),
        }
        return emit(inv, payload, trials)

    coupled = run_monte_carlo(coupled_cfg, inv.seeds, inv.jobs)
    uncoupled = run_monte_carlo(uncoupled_cfg, inv.seeds, inv.jobs)
    report = compare(coupled, uncoupled)
    payload = {
        "command": "mc",
        "n_seeds": inv.seeds,
        "coupled": coupled.to_dict(),
        "uncoupled": uncoupled.to_dict(),
        "comparison": report.to_dict(),
    }
    rows = _seed_rows("coupled", coupled) + _seed_rows("uncoupled", uncoupled)
    written = emit(inv, payload, {}, rows)
    if coupled.failures or uncoupled.failures:
        n = len(coupled.failures) + len(uncoupled.failures)
        log.warning("%d trial(s) failed and were excluded; see summary.json", n)
    return written


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    try:
        inv = parse_args(argv)
        log.info("backend=%s command=%s out=%s", _backend.BACKEND, inv.command, inv.out_dir)
        for path in execute(inv):
            log.info("wrote %s", path)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except TrialError as exc:
        print(f"carxefe: {exc}", file=sys.stderr)
        return EXIT_TRIAL_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
