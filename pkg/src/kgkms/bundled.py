"""The example graphs shipped with the package, with their default dynamics."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path as FsPath
from typing import Optional, Tuple

from .graphio import load_graph
from .kgraph import KGraph


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    rates: Optional[Tuple[str, ...]]  # default dynamics in rate syntax; None when there are none
    valid: bool
    note: str


CORPUS = (
    CorpusEntry("one-vertex-2-3", ("1", "ln3"), True, "one vertex, 2 blue and 3 red loops"),
    CorpusEntry("two-vertex", ("1", "ln3"), True, "two vertices, rho = (2, 3)"),
    CorpusEntry("three-vertex", ("1", "ln(2.324717957244746)"), True,
                "three vertices, irrational spectral radii"),
    CorpusEntry("cube-2-2-3", ("1", "ln2", "ln3"), True, "rank 3 single-vertex product"),
    CorpusEntry("periodic-rank3", ("1", "ln2", "ln2"), True, "rank 3, periodic in colors 2 and 3"),
    CorpusEntry("red-single-loop", ("ln2", "1"), True, "one vertex, 2 blue loops and 1 red loop"),
    CorpusEntry("product-of-cycles-3", None, True, "every color is the same 3-cycle; rho = (1, 1)"),
    CorpusEntry("twisted-cube", None, False, "fails cube consistency"),
    CorpusEntry("bad-missing-square", None, False, "one square removed"),
)


def corpus_dir() -> FsPath:
    return FsPath(str(resources.files("kgkms") / "corpus"))


def corpus_path(name: str) -> FsPath:
    return corpus_dir() / f"{name}.kg"


def entry(name: str) -> CorpusEntry:
    for e in CORPUS:
        if e.name == name:
            return e
    raise KeyError(name)


def corpus_graph(name: str, degree_cap=None) -> KGraph:
    return load_graph(corpus_path(name), degree_cap)


def valid_entries():
    return tuple(e for e in CORPUS if e.valid)


def with_dynamics():
    return tuple(e for e in CORPUS if e.valid and e.rates is not None)
