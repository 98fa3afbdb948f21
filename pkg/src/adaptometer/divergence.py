"""Rule distributions, Jensen-Shannon divergence, and adaptation trajectories.

JSD is computed base 2, so values live in [0, 1] with 1 reached exactly for
disjoint supports. Trajectories cut every conversation into fixed-width word
windows, pool each agent's rule counts per window across conversations, and
track the divergence between the two agents' pooled distributions; bootstrap
resampling of conversations gives the error bars.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .corpus import Conversation


@dataclass
class RuleDistribution:
    """Normalized rule frequencies for one speaker/section/agent."""

    probs: dict[str, float]

    def __post_init__(self):
        if not self.probs:
            raise ValueError("empty distribution")
        total = sum(self.probs.values())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, not 1")
        if any(p < 0 for p in self.probs.values()):
            raise ValueError("negative probability")

    @property
    def support_size(self) -> int:
        return len(self.probs)


def rule_distribution(counts) -> RuleDistribution:
    """Normalize a rule -> count mapping into a distribution."""
    total = sum(counts.values())
    if total <= 0:
        raise ValueError("cannot normalize: zero total count")
    return RuleDistribution({rule: c / total for rule, c in counts.items() if c > 0})


def jsd(p: RuleDistribution, q: RuleDistribution) -> float:
    """Jensen-Shannon divergence, log base 2; supports may differ."""
    total = 0.0
    for rule in p.probs.keys() | q.probs.keys():
        a = p.probs.get(rule, 0.0)
        b = q.probs.get(rule, 0.0)
        m = 0.5 * (a + b)
        if a > 0.0:
            total += 0.5 * a * math.log2(a / m)
        if b > 0.0:
            total += 0.5 * b * math.log2(b / m)
    # clamp the float noise at the identical-distribution end
    return min(max(total, 0.0), 1.0)


def _agent_of(conv: Conversation, speaker: str) -> str:
    persona = conv.persona_of(speaker)
    return persona if persona is not None else speaker


def pairwise_jsd_matrix(conversations: list[Conversation]
                        ) -> tuple[list[str], np.ndarray]:
    """Symmetric JSD matrix over per-agent rule distributions.

    An agent's distribution pools every utterance it produced anywhere in
    the corpus; agents are persona ids when present, else speaker ids.
    """
    counts: dict[str, Counter] = {}
    for conv in conversations:
        for utt in conv.utterances:
            agent = _agent_of(conv, utt.speaker)
            if utt.rules:
                counts.setdefault(agent, Counter()).update(utt.rules)
            else:
                counts.setdefault(agent, Counter())
    agents = sorted(counts)
    if len(agents) < 2:
        raise ValueError("need at least two agents for a divergence matrix")
    dists = {}
    for agent in agents:
        if not counts[agent]:
            raise ValueError(f"agent {agent!r} produced no rules")
        dists[agent] = rule_distribution(counts[agent])
    matrix = np.zeros((len(agents), len(agents)))
    for i, a in enumerate(agents):
        for j in range(i + 1, len(agents)):
            value = jsd(dists[a], dists[agents[j]])
            matrix[i, j] = matrix[j, i] = value
    return agents, matrix


@dataclass
class SplitCell:
    """Pooled per-agent rule counts for one word window."""

    split_index: int
    counts_a: Counter
    counts_b: Counter
    n_conversations: int  # conversations whose word span reaches this window


def split_trajectory(conversations: list[Conversation], pair: tuple[str, str],
                     split_words: int = 200) -> list[SplitCell]:
    """Assign utterances to fixed-width word windows and pool rule counts.

    An utterance belongs to the window containing its midpoint word, so a
    sentence's rules never straddle two windows. A conversation counts as
    contributing to every window its total word span reaches.
    """
    if split_words <= 0:
        raise ValueError("split_words must be positive")
    a, b = pair
    if a == b:
        raise ValueError("pair must name two distinct agents")
    cells: dict[int, SplitCell] = {}
    max_split = -1
    spans = []
    for conv in conversations:
        agents = {_agent_of(conv, s) for s in conv.speakers}
        if agents != {a, b}:
            raise ValueError(
                f"conversation {conv.id!r} involves agents {sorted(agents)}, "
                f"expected {sorted(pair)}"
            )
        done = 0
        for utt in conv.utterances:
            start, end = done + 1, done + utt.n_words
            done = end
            midpoint = 0.5 * (start + end)
            k = int(math.floor((midpoint - 1.0) / split_words))
            k = max(k, 0)
            max_split = max(max_split, k)
            cell = cells.get(k)
            if cell is None:
                cell = cells[k] = SplitCell(k, Counter(), Counter(), 0)
            if utt.rules:
                target = cell.counts_a if _agent_of(conv, utt.speaker) == a else cell.counts_b
                target.update(utt.rules)
        spans.append(done)
    result = []
    for k in range(max_split + 1):
        cell = cells.get(k) or SplitCell(k, Counter(), Counter(), 0)
        cell.n_conversations = sum(1 for s in spans if s > k * split_words)
        result.append(cell)
    return result


def trajectory_jsd(cells: list[SplitCell]) -> dict[int, float]:
    """Per-window JSD; windows where either agent has no rules are omitted."""
    values = {}
    for cell in cells:
        if cell.counts_a and cell.counts_b:
            values[cell.split_index] = jsd(
                rule_distribution(cell.counts_a), rule_distribution(cell.counts_b)
            )
    return values


@dataclass
class TrajectoryReport:
    split_words: int
    n_bootstrap: int
    rows: list[tuple[int, float, float, int]]  # split, mean jsd, std jsd, n convs

    def header(self) -> list[str]:
        return ["split_index", "mean_jsd", "std_jsd", "n_conversations"]


def bootstrap_trajectory(conversations: list[Conversation], pair: tuple[str, str],
                         n_bootstrap: int = 100, seed: int = 0,
                         split_words: int = 200) -> TrajectoryReport:
    """Conversation-level bootstrap of the split trajectory.

    Each resample draws len(conversations) conversations with replacement,
    recomputes pooled per-window JSDs, and the report carries the mean and
    population standard deviation over resamples (windows are skipped in
    resamples where either agent has no rules there).
    """
    if len(conversations) < 2:
        raise ValueError("bootstrap needs at least two conversations")
    point_cells = split_trajectory(conversations, pair, split_words)
    n_splits = len(point_cells)
    root = np.random.SeedSequence(seed)
    streams = root.spawn(n_bootstrap)
    values: list[list[float]] = [[] for _ in range(n_splits)]
    n = len(conversations)
    for b in range(n_bootstrap):
        rng = np.random.default_rng(streams[b])
        picks = rng.integers(0, n, size=n)
        resample = [conversations[i] for i in picks]
        sampled = trajectory_jsd(split_trajectory(resample, pair, split_words))
        for k, v in sampled.items():
            if k < n_splits:
                values[k].append(v)
    rows = []
    for cell in point_cells:
        got = values[cell.split_index]
        if not got:
            continue
        arr = np.asarray(got)
        rows.append((
            cell.split_index, float(arr.mean()), float(arr.std()),
            cell.n_conversations,
        ))
    return TrajectoryReport(split_words=split_words, n_bootstrap=n_bootstrap, rows=rows)
