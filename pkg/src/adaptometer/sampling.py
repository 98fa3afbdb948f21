"""Regression dataset construction: the two-rows-per-unit prime sampling scheme.

A sampling unit is one eligible rule type occurring in one speaker's TARGET
section of one conversation. Each unit contributes two rows:

- ``same_conv=1``: was the rule used by the *partner* in this conversation's
  PRIME section? (cross-speaker repetition within the conversation)
- ``same_conv=0``: was the rule used in the PRIME section of one uniformly
  drawn (conversation, speaker) from a different conversation?

ln_freq is the log corpus-wide token count of the rule; ln_size is the log
distinct-rule count of whichever PRIME set was checked. Both get centered
before model fitting.

Randomness is reproducible: every unit draws its foreign PRIME set from its
own substream, derived by hashing (conversation id, speaker, rule) together
with the root seed, so draws never depend on iteration order.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

import numpy as np

from .corpus import Conversation, SplitSections

SAMPLE_CSV_HEADER = ["prime", "same_conv", "ln_freq_c", "ln_size_c",
                     "conv_id", "speaker_id", "rule"]


class SamplingError(ValueError):
    pass


@dataclass
class RuleFrequencyTable:
    """Corpus-wide token count per rule type."""

    counts: dict[str, int]
    total: int

    def __post_init__(self):
        if self.total != sum(self.counts.values()):
            raise ValueError("total does not match counts")


@dataclass
class SamplingConfig:
    seed: int = 0
    exclude_hapax: bool = True
    high_freq_exclusion_fraction: float = 0.003
    high_freq_threshold: float | None = None  # relative-frequency alternative
    exclude_same_persona_pairs: bool = True

    def __post_init__(self):
        if not (0.0 <= self.high_freq_exclusion_fraction < 1.0):
            raise ValueError("high_freq_exclusion_fraction must be in [0, 1)")


class PrimeSample(NamedTuple):
    prime: int
    same_conv: int
    ln_freq: float
    ln_size: float
    conv_id: str
    speaker_id: str
    rule: str


class SampleTable:
    """Column-oriented sample storage; rows() yields PrimeSample tuples."""

    def __init__(self, prime, same_conv, ln_freq, ln_size, conv_id, speaker_id, rule,
                 centered: bool = False):
        self.prime = np.asarray(prime, dtype=np.int8)
        self.same_conv = np.asarray(same_conv, dtype=np.int8)
        self.ln_freq = np.asarray(ln_freq, dtype=np.float64)
        self.ln_size = np.asarray(ln_size, dtype=np.float64)
        self.conv_id = list(conv_id)
        self.speaker_id = list(speaker_id)
        self.rule = list(rule)
        self.centered = centered
        n = len(self.prime)
        for name in ("same_conv", "ln_freq", "ln_size"):
            if len(getattr(self, name)) != n:
                raise ValueError("column length mismatch")
        if not (len(self.conv_id) == len(self.speaker_id) == len(self.rule) == n):
            raise ValueError("column length mismatch")
        if not (np.isfinite(self.ln_freq).all() and np.isfinite(self.ln_size).all()):
            raise ValueError("non-finite ln_freq/ln_size")

    def __len__(self) -> int:
        return len(self.prime)

    def rows(self) -> Iterator[PrimeSample]:
        for i in range(len(self)):
            yield PrimeSample(
                int(self.prime[i]), int(self.same_conv[i]),
                float(self.ln_freq[i]), float(self.ln_size[i]),
                self.conv_id[i], self.speaker_id[i], self.rule[i],
            )

    @classmethod
    def from_rows(cls, rows: list[PrimeSample], centered: bool = False) -> "SampleTable":
        cols = list(zip(*rows)) if rows else [[] for _ in range(7)]
        return cls(*cols, centered=centered)

    def column(self, name: str) -> np.ndarray:
        if name in ("prime", "same_conv", "ln_freq", "ln_size"):
            return getattr(self, name)
        raise KeyError(name)

    def to_csv(self, path, provenance: str | None = None):
        from .output import write_csv

        write_csv(path, SAMPLE_CSV_HEADER, self.rows(), provenance=provenance)

    @classmethod
    def from_csv(cls, path) -> "SampleTable":
        rows = []
        with open(path, encoding="utf-8") as fh:
            header = None
            for line in fh:
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                if header is None:
                    header = line.split(",")
                    if header != SAMPLE_CSV_HEADER:
                        raise SamplingError(f"unexpected sample CSV header: {header}")
                    continue
                p, sc, lf, ls, cid, spk, rule = line.split(",", 6)
                rows.append(PrimeSample(int(p), int(sc), float(lf), float(ls),
                                        cid, spk, rule))
        return cls.from_rows(rows, centered=True)


def build_frequency_table(conversations: list[Conversation]) -> RuleFrequencyTable:
    """Token counts over every utterance of every conversation."""
    counts: dict[str, int] = {}
    for conv in conversations:
        for utt in conv.utterances:
            for rule in utt.rules or ():
                counts[rule] = counts.get(rule, 0) + 1
    return RuleFrequencyTable(counts=counts, total=sum(counts.values()))


def filter_rules(table: RuleFrequencyTable, cfg: SamplingConfig) -> set[str]:
    """Eligible rule types after hapax and high-frequency exclusion.

    Hapax rules go first; then the ceil(fraction * remaining-types) most
    frequent types are removed, ties broken lexicographically so the outcome
    never depends on dict order. The relative-frequency threshold mode
    replaces the ranked removal when configured.
    """
    if not table.counts:
        raise SamplingError("empty frequency table")
    kept = {
        rule: count for rule, count in table.counts.items()
        if not (cfg.exclude_hapax and count == 1)
    }
    if not kept:
        raise SamplingError("all rules filtered out (every rule is a hapax)")
    if cfg.high_freq_threshold is not None:
        eligible = {r for r, c in kept.items() if c / table.total <= cfg.high_freq_threshold}
    else:
        n_top = math.ceil(cfg.high_freq_exclusion_fraction * len(kept))
        ranked = sorted(kept.items(), key=lambda kv: (-kv[1], kv[0]))
        eligible = {rule for rule, _ in ranked[n_top:]}
    if not eligible:
        raise SamplingError("all rules filtered out by the high-frequency exclusion")
    return eligible


@dataclass
class SampleReport:
    n_units: int = 0
    n_rows: int = 0
    skipped_empty_prime: list[tuple[str, str]] = field(default_factory=list)


def _unit_rng(seed: int, conv_id: str, speaker: str, rule: str) -> np.random.Generator:
    digest = hashlib.blake2b(
        f"{conv_id}\x1f{speaker}\x1f{rule}".encode("utf-8"), digest_size=16
    ).digest()
    words = [int.from_bytes(digest[i:i + 4], "little") for i in range(0, 16, 4)]
    return np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFF, *words]))


def build_samples(
    sections: dict[str, SplitSections],
    conversations: list[Conversation],
    freq: RuleFrequencyTable,
    eligible: set[str],
    cfg: SamplingConfig,
) -> tuple[SampleTable, SampleReport]:
    """Construct the uncentered sample table.

    Foreign PRIME sets are drawn uniformly over (conversation, speaker) pairs
    from other conversations with a nonempty PRIME set; conversations sharing
    a persona with the current one are excluded when configured.
    """
    if not eligible:
        raise SamplingError("eligible rule set is empty")
    conv_by_id = {c.id: c for c in conversations}

    prime_sets: dict[tuple[str, str], frozenset] = {}
    for conv_id in sorted(sections):
        sec = sections[conv_id]
        for speaker in sorted(sec.prime_rules):
            rules = frozenset(sec.prime_rules[speaker])
            if rules:
                prime_sets[(conv_id, speaker)] = rules
    candidates = sorted(prime_sets)

    report = SampleReport()
    rows: list[PrimeSample] = []
    for conv_id in sorted(sections):
        sec = sections[conv_id]
        conv = conv_by_id[conv_id]
        personas = {p for p in conv.personas if p is not None}
        foreign = [
            key for key in candidates
            if key[0] != conv_id and not (
                cfg.exclude_same_persona_pairs and personas
                and personas & {p for p in conv_by_id[key[0]].personas if p is not None}
            )
        ]
        for speaker in sorted(sec.target_rules):
            target_rules = sorted(r for r in sec.target_rules[speaker] if r in eligible)
            if not target_rules:
                continue
            partner = conv.partner_of(speaker)
            partner_prime = prime_sets.get((conv_id, partner))
            if partner_prime is None:
                report.skipped_empty_prime.append((conv_id, speaker))
                continue
            if not foreign:
                raise SamplingError(
                    f"conversation {conv_id!r}: no foreign conversation available "
                    f"for the same_conv=0 draw"
                )
            ln_size_same = math.log(len(partner_prime))
            for rule in target_rules:
                ln_freq = math.log(freq.counts[rule])
                rng = _unit_rng(cfg.seed, conv_id, speaker, rule)
                pick = foreign[int(rng.integers(len(foreign)))]
                foreign_prime = prime_sets[pick]
                rows.append(PrimeSample(
                    prime=int(rule in partner_prime), same_conv=1,
                    ln_freq=ln_freq, ln_size=ln_size_same,
                    conv_id=conv_id, speaker_id=speaker, rule=rule,
                ))
                rows.append(PrimeSample(
                    prime=int(rule in foreign_prime), same_conv=0,
                    ln_freq=ln_freq, ln_size=math.log(len(foreign_prime)),
                    conv_id=conv_id, speaker_id=speaker, rule=rule,
                ))
                report.n_units += 1
    report.n_rows = len(rows)
    if not rows:
        raise SamplingError("no sampling units (no eligible rules in any TARGET)")
    return SampleTable.from_rows(rows), report


@dataclass
class CenteringReport:
    mean_ln_freq: float
    mean_ln_size: float


def center(table: SampleTable) -> tuple[SampleTable, CenteringReport]:
    """Mean-center ln_freq and ln_size over all rows; same_conv stays binary."""
    if len(table) == 0:
        raise SamplingError("cannot center an empty sample table")
    mean_freq = float(np.mean(table.ln_freq))
    mean_size = float(np.mean(table.ln_size))
    centered = SampleTable(
        prime=table.prime.copy(),
        same_conv=table.same_conv.copy(),
        ln_freq=table.ln_freq - mean_freq,
        ln_size=table.ln_size - mean_size,
        conv_id=table.conv_id,
        speaker_id=table.speaker_id,
        rule=table.rule,
        centered=True,
    )
    return centered, CenteringReport(mean_ln_freq=mean_freq, mean_ln_size=mean_size)
