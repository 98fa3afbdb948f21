"""Model formulas and dense design matrix construction."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..sampling import SampleTable

GROUP_COLUMNS = ("conv_id", "speaker_id")


@dataclass(frozen=True)
class RandomTerm:
    """One random-effects term: a grouping path with intercept and/or slopes.

    ``group`` is a ``/``-joined path over id columns, e.g. ``conv_id`` or
    ``conv_id/speaker_id`` for the speaker-within-conversation factor. All
    scalar effects expanded from a term are mutually uncorrelated.
    """

    group: str
    intercept: bool = True
    slopes: tuple[str, ...] = ()

    def __post_init__(self):
        parts = self.group.split("/")
        for part in parts:
            if part not in GROUP_COLUMNS:
                raise ValueError(f"unknown grouping column {part!r} in {self.group!r}")
        if not self.intercept and not self.slopes:
            raise ValueError(f"random term {self.group!r} declares no effects")


@dataclass(frozen=True)
class ModelFormula:
    """Response, fixed effects (mains + ``a:b`` interactions), random terms."""

    response: str = "prime"
    fixed: tuple[str, ...] = ()
    random: tuple[RandomTerm, ...] = ()

    def __post_init__(self):
        mains = set(self.mains())
        for term in self.interactions():
            parents = term.split(":")
            if len(parents) != 2:
                raise ValueError(f"only pairwise interactions supported: {term!r}")
            for parent in parents:
                if parent not in mains:
                    raise ValueError(
                        f"interaction {term!r} references undeclared main {parent!r}"
                    )
        for rt in self.random:
            for slope in rt.slopes:
                if slope not in mains:
                    raise ValueError(
                        f"random slope {slope!r} is not a declared main effect"
                    )

    def mains(self) -> tuple[str, ...]:
        return tuple(t for t in self.fixed if ":" not in t)

    def interactions(self) -> tuple[str, ...]:
        return tuple(t for t in self.fixed if ":" in t)

    def drop_term(self, term: str) -> "ModelFormula":
        if term not in self.fixed or ":" not in term:
            raise ValueError(f"can only drop an interaction present in the formula: {term!r}")
        return ModelFormula(
            response=self.response,
            fixed=tuple(t for t in self.fixed if t != term),
            random=self.random,
        )


def default_formula() -> ModelFormula:
    """Full model: three mains, all pairwise interactions, nested random
    intercepts (conversation, speaker-within-conversation) and a random
    ln_freq slope at the conversation level."""
    return ModelFormula(
        response="prime",
        fixed=(
            "ln_freq", "same_conv", "ln_size",
            "ln_freq:same_conv", "ln_freq:ln_size", "same_conv:ln_size",
        ),
        random=(
            RandomTerm(group="conv_id", intercept=True, slopes=("ln_freq",)),
            RandomTerm(group="conv_id/speaker_id", intercept=True),
        ),
    )


@dataclass
class DesignMatrix:
    """Dense fixed-effects design plus the grouping id columns."""

    X: np.ndarray
    y: np.ndarray
    names: list[str]
    conv_id: list[str]
    speaker_id: list[str]
    table: SampleTable = field(repr=False)


def build_design(table: SampleTable, formula: ModelFormula) -> DesignMatrix:
    """Intercept column first, mains in formula order, then interactions.

    Interaction columns are elementwise products of their (already centered)
    parent columns.
    """
    n = len(table)
    if n == 0:
        raise ValueError("sample table has no rows")
    names = ["Intercept"]
    columns = [np.ones(n)]
    for main in formula.mains():
        columns.append(np.asarray(table.column(main), dtype=np.float64))
        names.append(main)
    for term in formula.interactions():
        a, b = term.split(":")
        columns.append(columns[names.index(a)] * columns[names.index(b)])
        names.append(term)
    X = np.column_stack(columns)
    y = np.asarray(table.column(formula.response), dtype=np.float64)
    bad = ~np.isfinite(X).all(axis=1) | ~np.isfinite(y)
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise ValueError(f"non-finite value in design row {row}")
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValueError(f"response {formula.response!r} is not binary")
    return DesignMatrix(X=X, y=y, names=names,
                        conv_id=table.conv_id, speaker_id=table.speaker_id,
                        table=table)
