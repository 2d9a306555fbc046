"""Evaluation protocols: k-fold path statistics and call-coverage.

The k-fold protocol rotates each fold as the test set, builds the path
database on the remaining folds, and measures how many of the test programs'
label paths the database knows, how many of the known ones have successors,
and how many distinct successors a known path offers on average.

Coverage compares syntax against analysis: the fraction of call expressions
in a file's tree that have a graph call node at the same start position.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from statistics import fmean, pstdev

from .frontend import SyntaxTree
from .graphmodel import ProgramGraph
from .suggest import build_pathdb, enumerate_label_paths


class TooFewGraphs(Exception):
    """k-fold evaluation needs at least k graphs."""


@dataclass(frozen=True)
class FoldStats:
    path_length: int
    found_fraction: float
    with_successors_fraction: float
    avg_successors: float


@dataclass
class FoldReport:
    """Aggregate statistics for one path length: the mean over per-fold rows.

    found_fraction is over all distinct test paths of this length;
    with_successors_fraction is over found paths; avg_successors is over
    found paths that have successors (distinct successor labels).
    """

    path_length: int
    found_fraction: float
    with_successors_fraction: float
    avg_successors: float
    per_fold: list[FoldStats] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "pathLength": self.path_length,
            "foundFraction": self.found_fraction,
            "withSuccessorsFraction": self.with_successors_fraction,
            "avgSuccessors": self.avg_successors,
            "perFold": [
                {
                    "foundFraction": f.found_fraction,
                    "withSuccessorsFraction": f.with_successors_fraction,
                    "avgSuccessors": f.avg_successors,
                }
                for f in self.per_fold
            ],
        }


def fold_assignments(n: int, k: int, seed: int) -> list[list[int]]:
    """Seeded Fisher-Yates shuffle, then contiguous folds differing by <= 1."""
    order = list(range(n))
    random.Random(seed).shuffle(order)
    folds: list[list[int]] = []
    base, extra = divmod(n, k)
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        folds.append(order[start : start + size])
        start += size
    return folds


def _ratio(num: int, den: int) -> float:
    return num / den if den else 0.0


def kfold_eval(
    graphs: list[ProgramGraph],
    k: int = 10,
    max_len: int = 3,
    seed: int = 0,
) -> list[FoldReport]:
    """Rotate each fold as the test set; report per path length 1..max_len."""
    if len(graphs) < k:
        raise TooFewGraphs(f"need at least {k} graphs, got {len(graphs)}")
    folds = fold_assignments(len(graphs), k, seed)
    per_length: dict[int, list[FoldStats]] = {length: [] for length in range(1, max_len + 1)}

    for fold in folds:
        test_set = set(fold)
        train = [g for i, g in enumerate(graphs) if i not in test_set]
        db = build_pathdb(train, max_len=max_len)
        test_paths: set[tuple[str, ...]] = set()
        for i in fold:
            test_paths |= enumerate_label_paths(graphs[i], max_len)
        for length in range(1, max_len + 1):
            paths = [p for p in test_paths if len(p) == length]
            found = [p for p in paths if p in db.paths]
            with_succ = [p for p in found if db.paths[p]]
            avg = fmean(len(db.paths[p]) for p in with_succ) if with_succ else 0.0
            per_length[length].append(
                FoldStats(
                    path_length=length,
                    found_fraction=_ratio(len(found), len(paths)),
                    with_successors_fraction=_ratio(len(with_succ), len(found)),
                    avg_successors=avg,
                )
            )

    reports = []
    for length in range(1, max_len + 1):
        rows = per_length[length]
        reports.append(
            FoldReport(
                path_length=length,
                found_fraction=fmean(r.found_fraction for r in rows),
                with_successors_fraction=fmean(r.with_successors_fraction for r in rows),
                avg_successors=fmean(r.avg_successors for r in rows),
                per_fold=rows,
            )
        )
    return reports


# ---------------------------------------------------------------------------
# Coverage


@dataclass(frozen=True)
class FileCoverage:
    file: str
    ast_call_count: int
    covered_call_count: int
    fraction: float


@dataclass
class CoverageReport:
    per_file: list[FileCoverage]
    mean: float
    stddev: float

    def as_dict(self) -> dict:
        return {
            "mean": self.mean,
            "stddev": self.stddev,
            "perFile": [
                {
                    "file": f.file,
                    "astCallCount": f.ast_call_count,
                    "coveredCallCount": f.covered_call_count,
                    "fraction": f.fraction,
                }
                for f in self.per_file
            ],
        }


def coverage_check(tree: SyntaxTree, graph: ProgramGraph) -> tuple[int, int]:
    """(call expressions in the tree, those with a call node at the same start).

    Matching uses start line/column only; end positions differ between
    parser conventions.
    """
    starts = {
        (n.location.start_line, n.location.start_col)
        for n in graph.nodes.values()
        if n.kind == "call" and n.location is not None
    }
    call_locs = tree.call_locations()
    covered = sum(1 for loc in call_locs if (loc.start_line, loc.start_col) in starts)
    return len(call_locs), covered


def corpus_coverage(pairs: list[tuple[SyntaxTree, ProgramGraph]]) -> CoverageReport:
    """Mean and population standard deviation of per-file coverage fractions."""
    per_file = []
    for tree, graph in pairs:
        total, covered = coverage_check(tree, graph)
        fraction = covered / total if total else 1.0
        per_file.append(FileCoverage(tree.file, total, covered, fraction))
    fractions = [f.fraction for f in per_file]
    mean = fmean(fractions) if fractions else 0.0
    stddev = pstdev(fractions) if fractions else 0.0
    return CoverageReport(per_file=per_file, mean=mean, stddev=stddev)
