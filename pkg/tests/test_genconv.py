import itertools

import pytest

from adaptometer.genconv import (
    ConversationAborted, DEFAULT_TOPIC, GenerationConfig, HttpTransport,
    PERSONAS, PersonaSpec, RepetitionVerdict, ScriptedTransport, TransportError,
    build_system_prompt, detect_repetition, generate_repeated_pair,
    generate_round_robin, run_conversation, trigram_jaccard,
)


def cfg(**kw):
    defaults = dict(word_threshold=800, max_attempts=3, backoff_base=0.0,
                    timeout_seconds=1.0)
    defaults.update(kw)
    return GenerationConfig(**defaults)


# ---------------------------------------------------------------- personas --

def test_registry_has_17_unique_personas():
    assert sorted(PERSONAS) == list(range(1, 18))
    texts = [p.text for p in PERSONAS.values()]
    assert len(set(texts)) == 17
    assert all(texts)


def test_persona_one_text():
    assert "Your language is precise, and unambiguous." in PERSONAS[1].text


def test_prompt_contains_persona_and_topic_once():
    prompt = build_system_prompt(PERSONAS[1], DEFAULT_TOPIC)
    assert PERSONAS[1].text in prompt
    assert prompt.count(DEFAULT_TOPIC) == 1
    assert prompt.rstrip().endswith(DEFAULT_TOPIC)


def test_prompts_differ_only_in_language_slot():
    a = build_system_prompt(PERSONAS[1], DEFAULT_TOPIC)
    b = build_system_prompt(PERSONAS[2], DEFAULT_TOPIC)
    assert a.replace(PERSONAS[1].text, "@") == b.replace(PERSONAS[2].text, "@")


def test_prompt_role_parameterization():
    a = build_system_prompt(PERSONAS[3], "tea", role="SpeakerA")
    b = build_system_prompt(PERSONAS[3], "tea", role="SpeakerB")
    assert "You are SpeakerA." in a
    assert "You are SpeakerB." in b
    assert "conversation with SpeakerB" in a
    assert "conversation with SpeakerA" in b


# ----------------------------------------------------------- conversations --

def hundred_words(tag):
    return " ".join(f"{tag}w{i}" for i in range(100))


def test_stopping_rule_cuts_after_first_overflow_turn():
    script = [hundred_words(f"t{i}") for i in range(30)]
    transport = ScriptedTransport(script)
    conv = run_conversation(PERSONAS[1], PERSONAS[2], cfg(), transport)
    # 8 turns reach exactly 800 words; the 9th is the first to surpass it
    assert len(conv.utterances) == 9
    assert conv.total_words() == 900


def test_turns_alternate_starting_with_a():
    transport = ScriptedTransport([hundred_words(f"t{i}") for i in range(12)])
    conv = run_conversation(PERSONAS[1], PERSONAS[2], cfg(), transport)
    for utt in conv.utterances:
        expected = "SpeakerA" if utt.index % 2 == 0 else "SpeakerB"
        assert utt.speaker == expected
    assert conv.persona_of("SpeakerA") == "1"
    assert conv.persona_of("SpeakerB") == "2"
    assert conv.topic == DEFAULT_TOPIC


def test_requests_carry_one_system_message_and_full_history():
    transport = ScriptedTransport([hundred_words(f"t{i}") for i in range(12)])
    run_conversation(PERSONAS[1], PERSONAS[2], cfg(), transport)
    for k, messages in enumerate(transport.calls):
        assert [m["role"] for m in messages].count("system") == 1
        assert messages[0]["role"] == "system"
        # the system prompt belongs to the agent whose turn it is
        own_persona = PERSONAS[1] if k % 2 == 0 else PERSONAS[2]
        assert own_persona.text in messages[0]["content"]
        assert len(messages) == k + 1  # system + k prior turns
        roles = [m["role"] for m in messages[1:]]
        # from the requesting agent's view the last history turn is the partner's
        if roles:
            assert roles[-1] == "user"
            assert all(r1 != r2 for r1, r2 in zip(roles, roles[1:]))


def test_scripted_conversation_is_reproducible():
    script = [hundred_words(f"t{i}") for i in range(12)]
    c1 = run_conversation(PERSONAS[1], PERSONAS[2], cfg(), ScriptedTransport(script))
    c2 = run_conversation(PERSONAS[1], PERSONAS[2], cfg(), ScriptedTransport(script))
    assert [u.text for u in c1.utterances] == [u.text for u in c2.utterances]


def test_max_turns_cap():
    transport = ScriptedTransport(["three short words"])
    conv = run_conversation(PERSONAS[1], PERSONAS[2],
                            cfg(word_threshold=10_000, max_turns=6), transport)
    assert len(conv.utterances) == 6


def test_empty_reply_aborts_with_partial_transcript():
    class EmptyAfterTwo:
        def __init__(self):
            self.n = 0

        def complete(self, messages):
            self.n += 1
            return hundred_words(f"t{self.n}") if self.n <= 2 else "   "

    with pytest.raises(ConversationAborted) as err:
        run_conversation(PERSONAS[1], PERSONAS[2], cfg(), EmptyAfterTwo())
    assert "empty model reply" in str(err.value)
    assert len(err.value.turns) == 2


def test_transport_failure_aborts():
    class Failing:
        def complete(self, messages):
            raise TransportError("boom")

    with pytest.raises(ConversationAborted) as err:
        run_conversation(PERSONAS[1], PERSONAS[2], cfg(), Failing())
    assert err.value.turns == []


# -------------------------------------------------------------- repetition --

def make_conv(texts):
    from adaptometer.corpus import Conversation, Utterance

    utts = [
        Utterance(speaker="SpeakerA" if i % 2 == 0 else "SpeakerB", index=i, text=t)
        for i, t in enumerate(texts)
    ]
    return Conversation(
        id="c", participants=(("SpeakerA", "1"), ("SpeakerB", "2")),
        utterances=utts, topic="t",
    )


def test_verbatim_repeat_is_flagged():
    conv = make_conv(["hello there friend", "fine and well", "hello there friend",
                      "quite different words"])
    verdict = detect_repetition(conv)
    assert verdict.flagged
    assert (0, 2, 1.0) in verdict.evidence


def test_distinct_turns_not_flagged():
    conv = make_conv([
        "alpha beta gamma delta", "one two three four",
        "epsilon zeta eta theta", "five six seven eight",
    ])
    assert not detect_repetition(conv).flagged


def test_trigram_jaccard_hand_value():
    t1 = "a b c d e f g"   # trigrams: abc bcd cde def efg
    t2 = "b c d e f g"     # trigrams: bcd cde def efg
    assert trigram_jaccard(t1, t2) == pytest.approx(0.8)


def test_jaccard_080_flagged_at_threshold():
    t1 = "a b c d e f g"
    t2 = "b c d e f g"
    conv = make_conv([t1, "unrelated reply here now", t2, "other words again now"])
    verdict = detect_repetition(conv, threshold=0.8, window=4)
    assert verdict.flagged
    assert any(i == 0 and j == 2 and s == pytest.approx(0.8)
               for i, j, s in verdict.evidence)
    assert not detect_repetition(conv, threshold=0.85, window=4).flagged


def test_repetition_verdict_requires_evidence_when_flagged():
    with pytest.raises(ValueError):
        RepetitionVerdict(flagged=True, evidence=[])


def test_detection_is_pure_replay():
    conv = make_conv(["same words here now", "b", "same words here now", "d"])
    v1 = detect_repetition(conv)
    v2 = detect_repetition(conv)
    assert v1.flagged == v2.flagged and v1.evidence == v2.evidence


# -------------------------------------------------------------- round robin --

def distinct_script(n, words=40):
    return [" ".join(f"s{k}w{i}" for i in range(words)) for k in range(n)]


def test_round_robin_pair_count():
    personas = [PERSONAS[i] for i in (1, 2, 3)]
    run = generate_round_robin(personas, cfg(word_threshold=100),
                               ScriptedTransport(distinct_script(64)))
    assert len(run.conversations) == 3
    assert {c.id for c in run.conversations} == {"p01-p02", "p01-p03", "p02-p03"}


def test_round_robin_17_personas_gives_136():
    personas = list(PERSONAS.values())
    run = generate_round_robin(personas, cfg(word_threshold=50),
                               ScriptedTransport(distinct_script(97)))
    assert len(run.conversations) == 136
    assert len(run.conversations) == len(list(itertools.combinations(range(17), 2)))


def test_flagged_conversations_excluded_from_analysis_but_kept_raw():
    looping = ScriptedTransport(["same answer every time"])
    personas = [PERSONAS[i] for i in (1, 2)]
    run = generate_round_robin(personas, cfg(word_threshold=12), looping)
    assert len(run.conversations) == 1
    assert run.analysis == []
    report = run.exclusion_report()
    assert report["n_generated"] == 1 and report["n_analysis"] == 0
    assert report["flagged"][0]["conv_id"] == "p01-p02"


def test_repeated_pair_mode():
    run = generate_repeated_pair(PERSONAS[5], PERSONAS[6], 5,
                                 cfg(word_threshold=100),
                                 ScriptedTransport(distinct_script(64)))
    assert len(run.conversations) == 5
    assert all(c.id.startswith("p05-p06-r") for c in run.conversations)
    assert all(c.persona_of("SpeakerA") == "5" for c in run.conversations)


# ---------------------------------------------------------------- transport --

class FakeResponse:
    def __init__(self, status, payload=None, text=""):
        self.status_code = status
        self._payload = payload
        self.text = text

    def json(self):
        if self._payload is None:
            raise ValueError("no json")
        return self._payload


def test_http_transport_retries_then_succeeds(monkeypatch):
    responses = [FakeResponse(500), FakeResponse(429),
                 FakeResponse(200, {"choices": [{"message": {"content": "hi"}}]})]
    calls = []

    def fake_post(self, url, json=None, timeout=None, headers=None):
        calls.append(url)
        return responses[len(calls) - 1]

    monkeypatch.setattr("requests.Session.post", fake_post)
    transport = HttpTransport(cfg(max_attempts=3, requests_per_minute=100_000), "k")
    assert transport.complete([{"role": "system", "content": "s"}]) == "hi"
    assert len(calls) == 3
    assert transport.request_count == 3


def test_http_transport_gives_up_after_max_attempts(monkeypatch):
    monkeypatch.setattr("requests.Session.post",
                        lambda self, url, **kw: FakeResponse(503))
    transport = HttpTransport(cfg(max_attempts=2, requests_per_minute=100_000), "k")
    with pytest.raises(TransportError, match="2 attempts"):
        transport.complete([])


def test_http_transport_nonretryable_error_is_fatal(monkeypatch):
    monkeypatch.setattr("requests.Session.post",
                        lambda self, url, **kw: FakeResponse(404, text="nope"))
    transport = HttpTransport(cfg(requests_per_minute=100_000), "k")
    with pytest.raises(TransportError, match="404"):
        transport.complete([])


def test_http_transport_requires_key():
    with pytest.raises(ValueError):
        HttpTransport(cfg(), "")


def test_persona_spec_validation():
    with pytest.raises(ValueError):
        PersonaSpec(id=1, text="")
