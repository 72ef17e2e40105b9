"""Command-line driver for refinement studies and table reproductions.

A config file is a flat list of ``key = value`` lines.  Keys before the first
``study = NAME`` line are defaults shared by every study; each ``study`` line
starts a new study that may override them.  Recognised keys::

    problem    catalog id, e.g. test1-1d
    family     uniform | cell-centered | third-point | custom | uniform-2d |
               cell-centered-2d | cell-centered-by-uniform
    sizes      comma or space separated cell counts (mesh files for custom)
    level      correction level (0 = basic)
    norms      h1, l2 and/or l2mod
    ratio      anchored | dyadic
    q          exponent of the error/h^q column
    estimator  taylor | direct | aux
"""
from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

from .analysis import ConvergenceReport, StudyError, run_study, side_by_side
from .linalg import LinalgError
from .mesh import MeshError
from .model import ProblemError

__all__ = ["StudyConfig", "parse_config", "TABLES", "run_table", "main"]

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class StudyConfig:
    name: str = "study"
    problem: str = ""
    family: str = ""
    sizes: tuple = ()
    level: int = 0
    norms: tuple = ("h1",)
    ratio: str = "anchored"
    q: int = 2
    estimator: str = "taylor"

    def validate(self) -> "StudyConfig":
        if not self.problem:
            raise ConfigError(f"study {self.name!r}: missing 'problem'")
        if not self.family:
            raise ConfigError(f"study {self.name!r}: missing 'family'")
        if len(self.sizes) < 2:
            raise ConfigError(f"study {self.name!r}: need ≥ 2 refinements")
        if self.level < 0:
            raise ConfigError(f"study {self.name!r}: level must be >= 0")
        if self.ratio not in ("anchored", "dyadic"):
            raise ConfigError(f"study {self.name!r}: ratio must be anchored or dyadic")
        return self

    def run(self, jobs: int = 1) -> ConvergenceReport:
        return run_study(self.problem, self.family, list(self.sizes), self.level,
                         self.norms, self.ratio, self.q, self.estimator, jobs)


def _split(value: str) -> list[str]:
    return [tok for tok in value.replace(",", " ").split() if tok]


def _set(cfg: dict, key: str, value: str, where: str) -> None:
    try:
        if key == "sizes":
            toks = _split(value)
            cfg[key] = tuple(toks) if cfg.get("family") == "custom" else tuple(int(t) for t in toks)
        elif key in ("level", "q"):
            cfg[key] = int(value)
        elif key == "norms":
            cfg[key] = tuple(_split(value))
        elif key in ("problem", "family", "ratio", "estimator"):
            cfg[key] = value
        else:
            raise ConfigError(f"{where}: unknown key {key!r}")
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: bad value for {key!r}: {value!r}") from None


def parse_config(text: str, source: str = "<config>") -> list[StudyConfig]:
    """Parse the flat key=value format into study configurations."""
    defaults: dict = {}
    studies: list[dict] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{source}:{lineno}: expected key = value")
        key, value = key.strip().lower(), value.strip()
        where = f"{source}:{lineno}"
        if key == "study":
            studies.append({"name": value})
            continue
        # values are parsed after the family is known (custom sizes are paths)
        target = studies[-1] if studies else defaults
        target.setdefault("_raw", []).append((key, value, where))
    out = []
    blocks = studies or [{"name": "study"}]
    for block in blocks:
        cfg: dict = {"name": block["name"]}
        raw = defaults.get("_raw", []) + block.get("_raw", [])
        for key, value, where in raw:
            if key == "family":
                cfg["family"] = value
        for key, value, where in raw:
            _set(cfg, key, value, where)
        out.append(StudyConfig(**cfg).validate())
    return out


@dataclass(frozen=True)
class TableRecipe:
    title: str
    norm: str
    columns: tuple  # (label, StudyConfig)
    q: int = 2


def _recipe(title, problem, family, sizes, norm, columns, ratio="anchored", q=2):
    base = StudyConfig(problem=problem, family=family, sizes=tuple(sizes), norms=(norm,),
                       ratio=ratio, q=q)
    cols = tuple((label, replace(base, name=label, **over)) for label, over in columns)
    return TableRecipe(title, norm, cols, q)


_CORR_BASIC = (("correction", {"level": 1}), ("basic", {"level": 0}))
_UNIFORM_CORR = (("correction", {"level": 2, "estimator": "direct"}), ("basic", {"level": 0}))
_CC_1D = (25, 100, 500, 2500)

TABLES = {
    1: _recipe("test1-1d, uniform mesh, L2", "test1-1d", "uniform", (32, 64, 128, 256), "l2",
               _UNIFORM_CORR, q=4),
    2: _recipe("test1-1d, uniform mesh, H1_0", "test1-1d", "uniform", (32, 64, 128, 256), "h1",
               _UNIFORM_CORR, q=4),
    3: _recipe("test1-1d, cell-centered mesh, L2", "test1-1d", "cell-centered", _CC_1D, "l2",
               _CORR_BASIC),
    4: _recipe("test1-1d, cell-centered mesh, H1_0", "test1-1d", "cell-centered", _CC_1D, "h1",
               _CORR_BASIC),
    5: None,  # two norms, built below
    6: _recipe("test2-1d-mesh, third-point mesh, L2", "test2-1d-mesh", "third-point",
               [2**k for k in range(8, 14)], "l2", _CORR_BASIC, ratio="dyadic"),
    7: _recipe("test2-1d-mesh, third-point mesh, H1_0", "test2-1d-mesh", "third-point",
               [2**k for k in range(8, 14)], "h1", _CORR_BASIC, ratio="dyadic"),
    8: _recipe("test3-1d, cell-centered mesh, L2", "test3-1d", "cell-centered", _CC_1D, "l2",
               _CORR_BASIC),
    9: _recipe("test3-1d, cell-centered mesh, H1_0", "test3-1d", "cell-centered", _CC_1D, "h1",
               _CORR_BASIC),
    10: _recipe("test1-2d, alternating x cells, uniform y cells, H1_0", "test1-2d",
                "cell-centered-by-uniform", (40, 60, 80, 100, 200, 300), "h1", _CORR_BASIC),
    11: _recipe("test1-2d, alternating x cells, uniform y cells, L2", "test1-2d",
                "cell-centered-by-uniform", (40, 60, 80, 100, 200, 300), "l2", _CORR_BASIC),
    12: _recipe("test2-2d, alternating cells in both directions, H1_0", "test2-2d",
                "cell-centered-2d", (20, 40, 80, 160), "h1", _CORR_BASIC),
    13: _recipe("test2-2d, alternating cells in both directions, L2", "test2-2d",
                "cell-centered-2d", (20, 40, 80, 160), "l2", _CORR_BASIC),
}
_VARIANTS = (("first variant", {"level": 1}), ("second variant", {"level": 1, "estimator": "aux"}))
TABLES[5] = (
    _recipe("test1-1d, cell-centered mesh, u'' from the equation vs auxiliary solve, L2",
            "test1-1d", "cell-centered", _CC_1D, "l2", _VARIANTS, q=0),
    _recipe("test1-1d, cell-centered mesh, u'' from the equation vs auxiliary solve, H1_0",
            "test1-1d", "cell-centered", _CC_1D, "h1", _VARIANTS, q=0),
)


def _slug(label: str) -> str:
    return label.replace(" ", "-")


def run_table(number: int, outdir: Path, jobs: int = 1, ratio: Optional[str] = None) -> str:
    """Run a table preset, write its CSV/text files and return the text table."""
    if number not in TABLES:
        raise ConfigError(f"no preset for table {number} (choose 1-{max(TABLES)})")
    recipes = TABLES[number]
    recipes = recipes if isinstance(recipes, tuple) else (recipes,)
    texts = []
    for part, recipe in enumerate(recipes):
        reports, labels = [], []
        for label, cfg in recipe.columns:
            if ratio is not None:
                cfg = replace(cfg, ratio=ratio)
            rep = cfg.run(jobs)
            suffix = f"-{recipe.norm}" if len(recipes) > 1 else ""
            rep.write(outdir, f"table{number:02d}{suffix}-{_slug(label)}")
            reports.append(rep)
            labels.append(label)
        texts.append(side_by_side(reports, labels, recipe.norm,
                                  title=f"Table {number}: {recipe.title}"))
    text = "\n\n".join(texts)
    (Path(outdir) / f"table{number:02d}.txt").write_text(text + "\n")
    return text


def _run_studies(studies: Sequence[StudyConfig], outdir: Path, jobs: int) -> list[str]:
    def one(cfg: StudyConfig) -> str:
        rep = cfg.run(1)
        rep.write(outdir, _slug(cfg.name))
        return rep.to_text()

    if jobs > 1 and len(studies) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(one, studies))
    if len(studies) == 1:
        rep = studies[0].run(jobs)
        rep.write(outdir, _slug(studies[0].name))
        return [rep.to_text()]
    return [one(cfg) for cfg in studies]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fvcorrect",
        description="Refinement studies for finite volume schemes with defect corrections.",
    )
    src = parser.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", type=Path, help="study configuration file (key = value)")
    src.add_argument("--table", type=int, help="run a table preset (1-13)")
    parser.add_argument("--out", type=Path, default=None,
                        help="output directory (default: $FVCORRECT_OUT or ./fvcorrect-out)")
    parser.add_argument("--jobs", type=int, default=1, help="parallel workers")
    parser.add_argument("--ratio", choices=("anchored", "dyadic"), default=None,
                        help="override the order formula")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    outdir = args.out or Path(os.environ.get("FVCORRECT_OUT") or "fvcorrect-out")
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        if args.table is not None:
            print(run_table(args.table, outdir, args.jobs, args.ratio))
        else:
            try:
                text = args.config.read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from None
            studies = parse_config(text, str(args.config))
            if args.ratio is not None:
                studies = [replace(s, ratio=args.ratio) for s in studies]
            outdir.mkdir(parents=True, exist_ok=True)
            print("\n\n".join(_run_studies(studies, outdir, args.jobs)))
    except (ConfigError, StudyError, ProblemError, MeshError) as exc:
        print(f"fvcorrect: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except LinalgError as exc:
        print(f"fvcorrect: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
