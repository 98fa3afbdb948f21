from collections import Counter

import pytest

from adaptometer.corpus import Conversation, Utterance


def rules_conversation(conv_id, turns, personas=(None, None), words=10):
    """Build a two-speaker conversation from (speaker, rules) pairs.

    ``turns`` entries may be (speaker, rules) or (speaker, rules, n_words).
    """
    utterances = []
    speakers = []
    for i, turn in enumerate(turns):
        speaker, rules = turn[0], list(turn[1])
        n_words = turn[2] if len(turn) > 2 else words
        if speaker not in speakers:
            speakers.append(speaker)
        utterances.append(
            Utterance(speaker=speaker, index=i, rules=rules, n_words=n_words)
        )
    assert len(speakers) == 2, "test conversations need two speakers"
    participants = tuple(zip(speakers, personas))
    return Conversation(id=conv_id, participants=participants, utterances=utterances)


@pytest.fixture
def two_conv_corpus():
    """Small two-conversation corpus with known rule placement."""
    c1 = rules_conversation("c1", [
        ("A", ["R1", "R2"], 30),
        ("B", ["R3"], 5),
        ("A", ["R2"], 30),
    ])
    c2 = rules_conversation("c2", [
        ("A", ["R2", "R4"], 30),
        ("B", ["R1"], 5),
        ("A", ["R4"], 30),
    ])
    return [c1, c2]


def section_counts(sections):
    out = {}
    for key, counter in sections.items():
        out[key] = Counter(counter)
    return out
