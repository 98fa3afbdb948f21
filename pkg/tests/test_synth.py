import json
import math

import numpy as np
import pytest

from adaptometer.cli import run_analysis
from adaptometer.divergence import jsd, rule_distribution
from adaptometer.glmm import build_design, default_formula, fit_logistic
from adaptometer.sampling import (
    SamplingConfig, build_frequency_table, build_samples, center, filter_rules,
)
from adaptometer.corpus import split_corpus
from adaptometer.synth import (
    SynthConfig, base_distribution, expected_repetition_gain, generate_corpus,
    occurrence_probability, rule_vocabulary, speaker_bases,
    write_corpus_with_provenance,
)


def test_config_validation():
    with pytest.raises(ValueError):
        SynthConfig(vocabulary_size=1)
    with pytest.raises(ValueError):
        SynthConfig(strength=-0.1)
    with pytest.raises(ValueError):
        SynthConfig(rules_per_turn=0)


def test_rule_vocabulary_is_production_shaped():
    vocab = rule_vocabulary(3)
    assert vocab[0] == "X0→Y1 Y2"
    assert len(set(vocab)) == 3


def test_fixed_seed_reproduces_corpus_bytes(tmp_path):
    cfg = SynthConfig(n_conversations=8, seed=5)
    p1, p2 = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    write_corpus_with_provenance(cfg, p1, tmp_path / "a.json")
    write_corpus_with_provenance(cfg, p2, tmp_path / "b.json")
    assert p1.read_bytes() == p2.read_bytes()
    sidecar = json.loads((tmp_path / "a.json").read_text())
    assert sidecar["config"]["seed"] == 5


def test_different_seed_changes_corpus():
    a = generate_corpus(SynthConfig(n_conversations=4, seed=1))
    b = generate_corpus(SynthConfig(n_conversations=4, seed=2))
    assert any(
        ua.rules != ub.rules
        for ca, cb in zip(a, b)
        for ua, ub in zip(ca.utterances, cb.utterances)
    )


def test_null_model_converges_to_base_zipf():
    base = base_distribution(SynthConfig(vocabulary_size=30))
    target = rule_distribution({
        rule: p for rule, p in zip(rule_vocabulary(30), base)
    })
    gaps = []
    for n_conv in (30, 600):
        corpus = generate_corpus(SynthConfig(
            vocabulary_size=30, n_conversations=n_conv, strength=0.0, seed=11))
        counts: dict = {}
        for conv in corpus:
            for utt in conv.utterances:
                if utt.speaker == "S1":
                    for rule in utt.rules:
                        counts[rule] = counts.get(rule, 0) + 1
        gaps.append(jsd(rule_distribution(counts), target))
    assert gaps[1] < gaps[0]
    assert gaps[1] < 0.01


def test_expected_repetition_gain_values():
    assert expected_repetition_gain(0.2) == 0.2 * (1.0 - 0.2)
    assert abs(expected_repetition_gain(0.2) - 0.16) < 1e-15
    assert expected_repetition_gain(0.0) == 0.0
    assert expected_repetition_gain(1.0) == 0.0
    with pytest.raises(ValueError):
        expected_repetition_gain(1.5)


def test_gain_monte_carlo_at_p03():
    rng = np.random.default_rng(2024)
    trials = 1_000_000
    u = rng.random((trials, 2))
    in_one = u[:, 0] < 0.3
    in_two = (u[:, 0] < 0.3) | (u[:, 1] < 0.3)
    gain = in_two.mean() - in_one.mean()
    se = math.sqrt((in_two.astype(float) - in_one.astype(float)).var() / trials)
    assert abs(gain - 0.21) <= 3 * se


def test_occurrence_probability_model():
    assert occurrence_probability(0.2, 1) == pytest.approx(0.2)
    assert occurrence_probability(0.2, 0) == 0.0
    rng = np.random.default_rng(99)
    trials = 200_000
    for p in (0.05, 0.2, 0.5):
        for n in (1, 2, 5):
            hits = (rng.random((trials, n)) < p).any(axis=1)
            estimate = hits.mean()
            se = math.sqrt(estimate * (1 - estimate) / trials) or 1e-9
            assert abs(estimate - occurrence_probability(p, n)) <= 3 * se


def test_speaker_bases_tilt():
    flat = speaker_bases(SynthConfig(base_divergence=0.0))
    assert np.array_equal(flat[0], flat[1])
    a, b = speaker_bases(SynthConfig(base_divergence=0.8))
    gap = jsd(
        rule_distribution({f"r{i}": float(v) for i, v in enumerate(a)}),
        rule_distribution({f"r{i}": float(v) for i, v in enumerate(b)}),
    )
    assert gap > 0.1
    assert a.sum() == pytest.approx(1.0) and b.sum() == pytest.approx(1.0)


def fitted_same_conv(strength, seed):
    cfg = SynthConfig(vocabulary_size=30, n_conversations=100,
                      turns_per_conversation=8, rules_per_turn=6,
                      words_per_turn=20, strength=strength, seed=seed)
    corpus = generate_corpus(cfg)
    sections, _ = split_corpus(corpus)
    freq = build_frequency_table(corpus)
    scfg = SamplingConfig(seed=seed)
    eligible = filter_rules(freq, scfg)
    table, _ = build_samples(sections, corpus, freq, eligible, scfg)
    centered, _ = center(table)
    fit = fit_logistic(build_design(centered, default_formula()))
    return fit.term("same_conv").beta


def test_effect_estimate_monotone_in_strength():
    means = []
    for strength in (0.0, 0.25, 0.5):
        betas = [fitted_same_conv(strength, seed) for seed in range(20)]
        means.append(float(np.mean(betas)))
    assert means[0] < means[1] < means[2]


def test_null_model_speakers_exchangeable():
    betas = [fitted_same_conv(0.0, seed) for seed in range(100, 120)]
    mean = float(np.mean(betas))
    spread = float(np.std(betas, ddof=1)) / math.sqrt(len(betas))
    assert abs(mean) <= 3 * spread


def test_planted_effect_detected_end_to_end():
    cfg = SynthConfig(vocabulary_size=50, n_conversations=200,
                      turns_per_conversation=10, rules_per_turn=8,
                      words_per_turn=20, strength=0.5, seed=77)
    fit, table, _ = run_analysis(generate_corpus(cfg), seed=77)
    stat = fit.term("same_conv")
    assert stat.beta > 0 and stat.p < 0.01
