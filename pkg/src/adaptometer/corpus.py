"""Two-speaker conversation corpora: ingestion, prime/target splitting, stats.

Three JSONL line formats are supported:

- ``transcript-jsonl``: {"conv_id", "turn", "speaker", "persona"?, "text"}
- ``parsed-jsonl``: transcript fields plus "trees": [bracketed string, ...]
- ``rules-jsonl``: transcript fields minus "text", plus
  "rules": ["LHS→RHS1 RHS2", ...] and "word_count": int

A conversation is split into a PRIME section (first ``prime_frac`` of its
words), a discarded middle gap, and a TARGET section (last ``prime_frac``),
with membership decided per utterance: an utterance is PRIME iff its last
word falls inside the prime span and TARGET iff its first word falls inside
the target span, so no sentence's rules are ever divided across sections.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

from .treebank import ProductionRule, SyntaxTree, extract_rules, parse_bracketed

FORMATS = ("transcript-jsonl", "parsed-jsonl", "rules-jsonl")

# epsilon for word-position comparisons against fractional section boundaries
_BOUNDARY_EPS = 1e-9


class SchemaError(ValueError):
    """A corpus file violates the declared line schema."""


class SplitTooShort(ValueError):
    """Conversation cannot place at least one utterance in both sections."""

    def __init__(self, conv_id: str, reason: str):
        super().__init__(f"conversation {conv_id!r}: {reason}")
        self.conv_id = conv_id
        self.reason = reason


def word_count(text: str) -> int:
    """Whitespace-delimited token count."""
    return len(text.split())


@dataclass
class Utterance:
    speaker: str
    index: int
    text: str | None = None
    trees: list[SyntaxTree] | None = None
    rules: list[str] | None = None
    n_words: int = -1  # resolved in __post_init__ when text is present

    def __post_init__(self):
        if self.text is None and self.trees is None and self.rules is None:
            raise ValueError(
                f"utterance {self.index} of {self.speaker!r} has no text, trees or rules"
            )
        if self.n_words < 0:
            if self.text is None:
                raise ValueError(
                    f"utterance {self.index}: word count required when text is absent"
                )
            self.n_words = word_count(self.text)


@dataclass
class Conversation:
    id: str
    participants: tuple[tuple[str, str | None], tuple[str, str | None]]
    utterances: list[Utterance]
    topic: str | None = None

    def __post_init__(self):
        speakers = [s for s, _ in self.participants]
        if len(set(speakers)) != 2:
            raise ValueError(f"conversation {self.id!r} needs two distinct speakers")
        for i, utt in enumerate(self.utterances):
            if utt.index != i:
                raise ValueError(
                    f"conversation {self.id!r}: utterance indices not consecutive at {i}"
                )
            if utt.speaker not in speakers:
                raise ValueError(
                    f"conversation {self.id!r}: unknown speaker {utt.speaker!r}"
                )
            if i > 0 and utt.speaker == self.utterances[i - 1].speaker:
                raise ValueError(
                    f"conversation {self.id!r}: speakers do not alternate at turn {i}"
                )

    @property
    def speakers(self) -> tuple[str, str]:
        return (self.participants[0][0], self.participants[1][0])

    def persona_of(self, speaker: str) -> str | None:
        for s, p in self.participants:
            if s == speaker:
                return p
        raise KeyError(speaker)

    @property
    def personas(self) -> tuple[str | None, str | None]:
        return (self.participants[0][1], self.participants[1][1])

    def total_words(self) -> int:
        return sum(u.n_words for u in self.utterances)

    def partner_of(self, speaker: str) -> str:
        a, b = self.speakers
        if speaker == a:
            return b
        if speaker == b:
            return a
        raise KeyError(speaker)


def _require(record: dict, key: str, types, conv_id, lineno: int):
    if key not in record:
        raise SchemaError(
            f"line {lineno} (conversation {conv_id!r}): missing field {key!r}"
        )
    value = record[key]
    if not isinstance(value, types):
        raise SchemaError(
            f"line {lineno} (conversation {conv_id!r}): field {key!r} has wrong type"
        )
    return value


def load_corpus(path, format: str = "transcript-jsonl", include_lexical: bool = False,
                strip_function_tags: bool = True, drop_traces: bool = True
                ) -> list[Conversation]:
    """Load and validate a JSONL corpus.

    ``parsed-jsonl`` input gets its trees parsed and its per-utterance rules
    extracted immediately (honoring ``include_lexical``); ``rules-jsonl``
    carries pre-extracted rules and an explicit ``word_count``.
    """
    if format not in FORMATS:
        raise ValueError(f"unknown corpus format {format!r}; expected one of {FORMATS}")

    by_conv: dict[str, list] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaError(f"line {lineno}: invalid JSON: {exc}") from exc
            conv_id = _require(record, "conv_id", str, record.get("conv_id"), lineno)
            turn = _require(record, "turn", int, conv_id, lineno)
            speaker = _require(record, "speaker", str, conv_id, lineno)
            persona = record.get("persona")
            if persona is not None and not isinstance(persona, str):
                raise SchemaError(
                    f"line {lineno} (conversation {conv_id!r}): field 'persona' has wrong type"
                )
            entry = {"turn": turn, "speaker": speaker, "persona": persona,
                     "topic": record.get("topic"), "lineno": lineno}
            if format == "rules-jsonl":
                rules = _require(record, "rules", list, conv_id, lineno)
                parsed_rules = []
                for r in rules:
                    if not isinstance(r, str):
                        raise SchemaError(
                            f"line {lineno} (conversation {conv_id!r}): "
                            f"rules must be strings"
                        )
                    try:
                        parsed_rules.append(str(ProductionRule.from_string(r)))
                    except ValueError as exc:
                        raise SchemaError(
                            f"line {lineno} (conversation {conv_id!r}): {exc}"
                        ) from exc
                entry["rules"] = parsed_rules
                entry["n_words"] = _require(record, "word_count", int, conv_id, lineno)
            else:
                entry["text"] = _require(record, "text", str, conv_id, lineno)
                if format == "parsed-jsonl":
                    tree_strs = _require(record, "trees", list, conv_id, lineno)
                    try:
                        entry["trees"] = [
                            parse_bracketed(t, strip_function_tags=strip_function_tags,
                                            drop_traces=drop_traces)
                            for t in tree_strs
                        ]
                    except Exception as exc:
                        raise SchemaError(
                            f"line {lineno} (conversation {conv_id!r}): bad tree: {exc}"
                        ) from exc
            by_conv.setdefault(conv_id, []).append(entry)

    conversations = []
    for conv_id, entries in by_conv.items():
        entries.sort(key=lambda e: e["turn"])
        speakers: list[str] = []
        personas: dict[str, str | None] = {}
        for e in entries:
            spk = e["speaker"]
            if spk not in speakers:
                speakers.append(spk)
            prev = personas.get(spk)
            if prev is not None and e["persona"] is not None and prev != e["persona"]:
                raise SchemaError(
                    f"line {e['lineno']} (conversation {conv_id!r}): speaker {spk!r} "
                    f"mapped to two personas"
                )
            if e["persona"] is not None:
                personas[spk] = e["persona"]
        if len(speakers) > 2:
            raise SchemaError(
                f"conversation {conv_id!r} has {len(speakers)} speakers; exactly 2 allowed"
            )
        if len(speakers) == 1:
            # a second, silent participant is not representable in JSONL
            raise SchemaError(f"conversation {conv_id!r} has a single speaker")
        expected = [e["turn"] for e in entries]
        if expected != list(range(len(entries))):
            raise SchemaError(
                f"conversation {conv_id!r}: turn numbers are not consecutive from 0"
            )
        utterances = []
        for e in entries:
            try:
                utt = Utterance(
                    speaker=e["speaker"], index=e["turn"], text=e.get("text"),
                    trees=e.get("trees"), rules=e.get("rules"),
                    n_words=e.get("n_words", -1),
                )
            except ValueError as exc:
                raise SchemaError(
                    f"line {e['lineno']} (conversation {conv_id!r}): {exc}"
                ) from exc
            utterances.append(utt)
        topic = next((e["topic"] for e in entries if e["topic"]), None)
        participants = tuple((s, personas.get(s)) for s in speakers)
        try:
            conversations.append(Conversation(
                id=conv_id, participants=participants, utterances=utterances,
                topic=topic,
            ))
        except ValueError as exc:
            raise SchemaError(str(exc)) from exc
        if format == "parsed-jsonl":
            attach_rules([conversations[-1]], include_lexical=include_lexical)
    return conversations


def attach_rules(conversations: list[Conversation], include_lexical: bool = False
                 ) -> list[Conversation]:
    """Fill ``utterance.rules`` from parsed trees, in place."""
    for conv in conversations:
        for utt in conv.utterances:
            if utt.rules is not None:
                continue
            if utt.trees is None:
                raise ValueError(
                    f"conversation {conv.id!r}, utterance {utt.index}: "
                    f"no trees to extract rules from"
                )
            utt.rules = [
                str(r)
                for tree in utt.trees
                for r in extract_rules(tree, include_lexical=include_lexical)
            ]
    return conversations


@dataclass
class SplitSections:
    """Per-speaker rule multisets for the PRIME and TARGET sections."""

    conv_id: str
    prime_rules: dict[str, Counter]
    target_rules: dict[str, Counter]
    prime_words: int
    target_words: int
    discarded_words: int
    prime_utterances: tuple[int, ...]
    target_utterances: tuple[int, ...]
    discarded_utterances: tuple[int, ...]


def split_prime_target(conv: Conversation, prime_frac: float = 0.49,
                       gap_frac: float = 0.02) -> SplitSections:
    """Assign utterances to PRIME / gap / TARGET by word position.

    An utterance is PRIME iff its last word lies within the first
    ``prime_frac`` of the conversation's words and TARGET iff its first word
    lies within the last ``prime_frac``; everything else is discarded with
    the gap. Raises SplitTooShort when either section would be empty.
    """
    if abs(2 * prime_frac + gap_frac - 1.0) > 1e-9:
        raise ValueError("prime_frac*2 + gap_frac must equal 1")
    if not conv.utterances:
        raise SplitTooShort(conv.id, "no utterances")
    total = conv.total_words()
    if total == 0:
        raise SplitTooShort(conv.id, "conversation has no words")
    prime_limit = prime_frac * total
    target_cut = total - prime_limit

    prime_idx, target_idx, gap_idx = [], [], []
    prime_rules = {s: Counter() for s in conv.speakers}
    target_rules = {s: Counter() for s in conv.speakers}
    counts = [0, 0, 0]  # prime, gap, target words
    done = 0
    for utt in conv.utterances:
        start = done + 1
        end = done + utt.n_words
        done = end
        if end <= prime_limit + _BOUNDARY_EPS:
            prime_idx.append(utt.index)
            counts[0] += utt.n_words
            if utt.rules:
                prime_rules[utt.speaker].update(utt.rules)
        elif start > target_cut + _BOUNDARY_EPS:
            target_idx.append(utt.index)
            counts[2] += utt.n_words
            if utt.rules:
                target_rules[utt.speaker].update(utt.rules)
        else:
            gap_idx.append(utt.index)
            counts[1] += utt.n_words
    if not prime_idx or not target_idx:
        raise SplitTooShort(
            conv.id,
            f"cannot place an utterance in both sections "
            f"(prime={len(prime_idx)}, target={len(target_idx)})",
        )
    return SplitSections(
        conv_id=conv.id,
        prime_rules=prime_rules,
        target_rules=target_rules,
        prime_words=counts[0],
        target_words=counts[2],
        discarded_words=counts[1],
        prime_utterances=tuple(prime_idx),
        target_utterances=tuple(target_idx),
        discarded_utterances=tuple(gap_idx),
    )


@dataclass
class SplitReport:
    """Outcome of splitting a whole corpus; excluded conversations are kept."""

    n_split: int
    excluded: list[tuple[str, str]] = field(default_factory=list)


def split_corpus(conversations: list[Conversation], prime_frac: float = 0.49,
                 gap_frac: float = 0.02) -> tuple[dict[str, SplitSections], SplitReport]:
    """Split every conversation; too-short ones are excluded and reported."""
    sections: dict[str, SplitSections] = {}
    report = SplitReport(n_split=0)
    for conv in conversations:
        try:
            sections[conv.id] = split_prime_target(conv, prime_frac, gap_frac)
            report.n_split += 1
        except SplitTooShort as exc:
            report.excluded.append((conv.id, exc.reason))
    return sections, report


@dataclass
class CorpusStats:
    """Histogram-ready descriptive tables for a loaded corpus."""

    conversation_lengths: list[tuple[str, int, int]]      # conv_id, words, utterances
    utterance_lengths: list[tuple[str, int, str, int]]    # conv_id, turn, speaker, words
    speaker_turns: list[tuple[str, str, int, int]]        # conv_id, speaker, utts, words
    rule_counts: list[tuple[str, int]]                    # rule, tokens
    n_conversations: int
    n_rule_types: int
    n_rule_tokens: int

    def tables(self) -> dict[str, tuple[list[str], list[tuple]]]:
        return {
            "conversation_lengths": (
                ["conv_id", "word_count", "n_utterances"], self.conversation_lengths),
            "utterance_lengths": (
                ["conv_id", "turn", "speaker", "word_count"], self.utterance_lengths),
            "speaker_turns": (
                ["conv_id", "speaker", "n_utterances", "n_words"], self.speaker_turns),
            "rule_counts": (["rule", "count"], self.rule_counts),
        }


def corpus_stats(conversations: list[Conversation]) -> CorpusStats:
    conv_rows, utt_rows, spk_rows = [], [], []
    rule_counter: Counter = Counter()
    for conv in conversations:
        conv_rows.append((conv.id, conv.total_words(), len(conv.utterances)))
        per_speaker: dict[str, list[int]] = {s: [0, 0] for s in conv.speakers}
        for utt in conv.utterances:
            utt_rows.append((conv.id, utt.index, utt.speaker, utt.n_words))
            per_speaker[utt.speaker][0] += 1
            per_speaker[utt.speaker][1] += utt.n_words
            if utt.rules:
                rule_counter.update(utt.rules)
        for speaker in conv.speakers:
            n_utts, n_words = per_speaker[speaker]
            spk_rows.append((conv.id, speaker, n_utts, n_words))
    rule_rows = sorted(rule_counter.items(), key=lambda kv: (-kv[1], kv[0]))
    return CorpusStats(
        conversation_lengths=conv_rows,
        utterance_lengths=utt_rows,
        speaker_turns=spk_rows,
        rule_counts=rule_rows,
        n_conversations=len(conversations),
        n_rule_types=len(rule_counter),
        n_rule_tokens=sum(rule_counter.values()),
    )


def write_corpus(conversations: list[Conversation], path, format: str = "transcript-jsonl"):
    """Serialize conversations back to JSONL (inverse of load_corpus)."""
    if format not in FORMATS:
        raise ValueError(f"unknown corpus format {format!r}")
    lines = []
    for conv in conversations:
        for utt in conv.utterances:
            record: dict = {"conv_id": conv.id, "turn": utt.index, "speaker": utt.speaker}
            persona = conv.persona_of(utt.speaker)
            if persona is not None:
                record["persona"] = persona
            if conv.topic is not None and utt.index == 0:
                record["topic"] = conv.topic
            if format == "rules-jsonl":
                record["rules"] = list(utt.rules or [])
                record["word_count"] = utt.n_words
            else:
                record["text"] = utt.text if utt.text is not None else ""
                if format == "parsed-jsonl":
                    record["trees"] = [str(t) for t in (utt.trees or [])]
            lines.append(json.dumps(record, ensure_ascii=False, sort_keys=True))
    from .output import atomic_write_text

    atomic_write_text(path, "\n".join(lines) + "\n")
