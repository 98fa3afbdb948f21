"""Synthetic rule corpora with a plantable cross-speaker adaptation effect.

Two simulated speakers alternate turns, each turn drawing ``rules_per_turn``
rules with replacement from the speaker's current distribution over an
opaque rule vocabulary. The base distribution is Zipf. After a turn, the
*other* speaker's weight on each rule the turn emitted is multiplied by
(1 + strength) for the rest of the conversation, so strength 0 is an
exchangeable null model and positive strength plants exactly the kind of
long-term cross-speaker repetition the sampling pipeline is built to detect.
The boost applies once per distinct rule per turn; boosting per token
instead makes the weights collapse onto a handful of rules within a few
turns, which starves the sampler of rule types.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .corpus import Conversation, Utterance

SPEAKERS = ("S1", "S2")


@dataclass
class SynthConfig:
    vocabulary_size: int = 50
    zipf_exponent: float = 1.1
    strength: float = 0.0          # cross-speaker adaptation boost; 0 = null model
    n_conversations: int = 100
    turns_per_conversation: int = 10
    rules_per_turn: int = 8
    words_per_turn: int = 20       # split bookkeeping only
    base_divergence: float = 0.0   # opposite per-speaker tilt of the base weights
    seed: int = 0

    def __post_init__(self):
        if self.vocabulary_size < 2:
            raise ValueError("vocabulary_size must be at least 2")
        if self.strength < 0:
            raise ValueError("strength must be nonnegative")
        if self.base_divergence < 0:
            raise ValueError("base_divergence must be nonnegative")
        for name in ("n_conversations", "turns_per_conversation",
                     "rules_per_turn", "words_per_turn"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


def rule_vocabulary(size: int) -> list[str]:
    """Opaque rule ids shaped like productions so downstream code is unaware
    the corpus is synthetic."""
    return [f"X{j}→Y{2 * j + 1} Y{2 * j + 2}" for j in range(size)]


def base_distribution(cfg: SynthConfig) -> np.ndarray:
    ranks = np.arange(1, cfg.vocabulary_size + 1, dtype=np.float64)
    weights = ranks ** (-cfg.zipf_exponent)
    return weights / weights.sum()


def speaker_bases(cfg: SynthConfig) -> tuple[np.ndarray, np.ndarray]:
    """Per-speaker starting weights.

    With base_divergence d > 0, the speakers tilt the shared Zipf weights in
    opposite directions (alternating by rule index), exp(+/- d) per rule, so
    they begin with distinct distributions that adaptation can pull together.
    d = 0 gives both speakers the identical base distribution.
    """
    base = base_distribution(cfg)
    if cfg.base_divergence == 0.0:
        return base.copy(), base.copy()
    signs = np.where(np.arange(cfg.vocabulary_size) % 2 == 0, 1.0, -1.0)
    tilt = np.exp(cfg.base_divergence * signs)
    first = base * tilt
    second = base / tilt
    return first / first.sum(), second / second.sum()


def generate_conversation(cfg: SynthConfig, conv_id: str,
                          rng: np.random.Generator) -> Conversation:
    vocab = rule_vocabulary(cfg.vocabulary_size)
    base_a, base_b = speaker_bases(cfg)
    weights = {SPEAKERS[0]: base_a, SPEAKERS[1]: base_b}
    boost = 1.0 + cfg.strength
    utterances = []
    for turn in range(cfg.turns_per_conversation):
        speaker = SPEAKERS[turn % 2]
        partner = SPEAKERS[1 - turn % 2]
        probs = weights[speaker] / weights[speaker].sum()
        draws = rng.choice(cfg.vocabulary_size, size=cfg.rules_per_turn, p=probs)
        if cfg.strength > 0.0:
            for r in set(draws.tolist()):
                weights[partner][r] *= boost
        utterances.append(Utterance(
            speaker=speaker, index=turn,
            rules=[vocab[r] for r in draws],
            n_words=cfg.words_per_turn,
        ))
    return Conversation(
        id=conv_id,
        participants=((SPEAKERS[0], None), (SPEAKERS[1], None)),
        utterances=utterances,
    )


def generate_corpus(cfg: SynthConfig) -> list[Conversation]:
    """Deterministic for a fixed seed; conversations use independent substreams."""
    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.n_conversations)
    return [
        generate_conversation(cfg, f"synth-{i:05d}", np.random.default_rng(streams[i]))
        for i in range(cfg.n_conversations)
    ]


def expected_repetition_gain(p: float) -> float:
    """Occurrence-probability increase from doubling the draw count, p(1-p).

    Under draws with replacement a rule of probability p appears in n draws
    with probability 1-(1-p)^n; going from n=1 to n=2 adds exactly p(1-p).
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    return p * (1.0 - p)


def occurrence_probability(p: float, n_draws: int) -> float:
    """Probability that a rule of probability p appears at least once in
    n independent draws with replacement."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if n_draws < 0:
        raise ValueError("n_draws must be nonnegative")
    return 1.0 - (1.0 - p) ** n_draws


def write_corpus_with_provenance(cfg: SynthConfig, corpus_path, sidecar_path):
    """Emit rules-jsonl plus a sidecar JSON of the generating configuration."""
    from .corpus import write_corpus
    from .output import write_json

    corpus = generate_corpus(cfg)
    write_corpus(corpus, corpus_path, format="rules-jsonl")
    write_json(sidecar_path, {"generator": "synth", "config": cfg.to_dict()})
    return corpus
