"""Two-agent conversation generation over an OpenAI-compatible chat API.

Each agent gets a system prompt built from a shared template with a persona
slot and a topic slot. Turns strictly alternate starting with agent A; every
request carries the requesting agent's system prompt plus the full prior
history, with the agent's own turns as assistant messages and the partner's
as user messages. Generation stops after the first turn that pushes the
total word count past the threshold.

Degenerate runs are handled after the fact: conversations whose trailing
turns repeat (verbatim anywhere, or near-verbatim by word-trigram Jaccard
between same-speaker turns) are flagged and excluded from analysis output
while staying in the raw transcripts.
"""
from __future__ import annotations

import itertools
import random
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import requests

from .corpus import Conversation, Utterance, word_count

ROLE_A = "SpeakerA"
ROLE_B = "SpeakerB"

SYSTEM_PROMPT_TEMPLATE = (
    "You are in a conversation. There are two speakers, SpeakerA and SpeakerB.\n"
    "You are {role}. The conversation will consists of turns in the form:\n"
    "[SpeakerA's utterances]\n"
    "[SpeakerB's utterances]\n"
    "[SpeakerA's utterances]\n"
    "…\n"
    "You need to only give [{role}'s utterances]. You will be prompted by "
    "[Language] that will instruct you on the language that you shall use as "
    "{role}. Further, you will be prompted by [Topic], the topic of the "
    "conversation. Behave as in a normal conversation with {partner} to "
    "discuss the [Topic].\n"
    "[Language] {language} [Topic] {topic}"
)

DEFAULT_TOPIC = "What makes a day a good day?"

_PERSONA_TEXTS = [
    "Your language is precise, and unambiguous. You use clear and simple sentences.",
    "Your language is gentle and thoughtful. You use concise and not overly "
    "complex sentences, to convey meaning efficiently.",
    "Your language is dynamic, and provocative. You often use vivid metaphors.",
    "Your language is introspective, and deliberate. You use contemplative phrasing.",
    "Your language is smooth and reassuring. You employ gentle pauses and a "
    "steady rhythm.",
    "Your language is analytical and precise. You use complex sentence "
    "structures sparingly, preferring clear, well-organized sentences.",
    "Your language is conversational and warm. You use relaxed, varied "
    "sentence structures that mirror casual speech, inviting readers into an "
    "open, friendly dialogue.",
    "Your language is inquisitive and reflective. You frequently use "
    "open-ended questions and layered sentences that encourage readers to "
    "pause and ponder.",
    "Your language is poetic and evocative. You lean into complex, image-rich "
    "sentences that build vivid scenes and sensations, letting metaphors flow "
    "freely.",
    "Your language is structured and methodical. You rely on orderly, "
    "sequential sentences that build upon each other in a clear, logical "
    "progression, guiding readers through a well-defined thought process.",
    "Your language is hesitant and unsure. You use fragmented sentences and "
    "trailing thoughts, leaving ideas partially formed, as if questioning "
    "each phrase.",
    "Your language is overly cautious and repetitive. You tend to rephrase "
    "ideas multiple times in a single sentence.",
    "Your language is anxious and scattered. You jump between ideas "
    "mid-sentence, creating a disjointed flow that feels hurried and restless.",
    "Your language is straightforward, and no-nonsense. You avoid fluff and filler.",
    "Your language is crisp and engaging. You use short, impactful sentences "
    "to create emphasis.",
    "Your language is bold and unapologetic. You rely on direct, declarative "
    "sentences that avoid qualifiers.",
    "Your language is understated and subtle. You use concise sentences that "
    "suggest rather than state.",
]


@dataclass(frozen=True)
class PersonaSpec:
    id: int
    text: str

    def __post_init__(self):
        if not self.text:
            raise ValueError("persona text must be nonempty")


PERSONAS: dict[int, PersonaSpec] = {
    i + 1: PersonaSpec(id=i + 1, text=text) for i, text in enumerate(_PERSONA_TEXTS)
}


@dataclass
class GenerationConfig:
    endpoint: str = "https://api.openai.com/v1/chat/completions"
    model: str = "gpt-4o-2024-08-06"
    api_key_env: str = "ADAPTOMETER_API_KEY"
    topic: str = DEFAULT_TOPIC
    word_threshold: int = 800
    max_turns: int = 200
    timeout_seconds: float = 60.0
    max_attempts: int = 4
    backoff_base: float = 1.5
    requests_per_minute: int = 60
    concurrency: int = 1
    sampling: dict | None = None  # absent means provider defaults

    def __post_init__(self):
        if self.word_threshold <= 0:
            raise ValueError("word_threshold must be positive")
        if self.max_attempts < 1:
            raise ValueError("max_attempts must be at least 1")


class TransportError(RuntimeError):
    pass


class ConversationAborted(RuntimeError):
    """A conversation could not be completed; carries the partial transcript."""

    def __init__(self, message: str, turns: list[tuple[str, str]]):
        super().__init__(message)
        self.turns = turns


def build_system_prompt(persona: PersonaSpec, topic: str = DEFAULT_TOPIC,
                        role: str = ROLE_A) -> str:
    """Instantiate the shared template with the persona at the [Language]
    slot and the topic at the [Topic] slot."""
    partner = ROLE_B if role == ROLE_A else ROLE_A
    return SYSTEM_PROMPT_TEMPLATE.format(
        role=role, partner=partner, language=persona.text, topic=topic
    )


class _RateLimiter:
    """Token bucket over requests per minute; safe for concurrent use."""

    def __init__(self, per_minute: int):
        self.capacity = max(per_minute, 1)
        self.tokens = float(self.capacity)
        self.refill_per_second = self.capacity / 60.0
        self.stamp = time.monotonic()
        self.lock = threading.Lock()

    def acquire(self):
        while True:
            with self.lock:
                now = time.monotonic()
                self.tokens = min(
                    self.capacity, self.tokens + (now - self.stamp) * self.refill_per_second
                )
                self.stamp = now
                if self.tokens >= 1.0:
                    self.tokens -= 1.0
                    return
                wait = (1.0 - self.tokens) / self.refill_per_second
            time.sleep(wait)


class HttpTransport:
    """OpenAI-compatible chat-completions client with retry and backoff."""

    retryable_status = (408, 409, 429, 500, 502, 503, 504)

    def __init__(self, cfg: GenerationConfig, api_key: str):
        if not api_key:
            raise ValueError("api key must be nonempty")
        self.cfg = cfg
        self.api_key = api_key
        self.session = requests.Session()
        self.limiter = _RateLimiter(cfg.requests_per_minute)
        self.request_count = 0
        self._count_lock = threading.Lock()

    def complete(self, messages: list[dict]) -> str:
        cfg = self.cfg
        body = {"model": cfg.model, "messages": messages}
        if cfg.sampling:
            body.update(cfg.sampling)
        last_error = None
        for attempt in range(cfg.max_attempts):
            if attempt:
                delay = cfg.backoff_base ** attempt + random.uniform(0.0, 0.25)
                time.sleep(delay)
            self.limiter.acquire()
            with self._count_lock:
                self.request_count += 1
            try:
                response = self.session.post(
                    cfg.endpoint, json=body, timeout=cfg.timeout_seconds,
                    headers={"Authorization": f"Bearer {self.api_key}"},
                )
            except requests.RequestException as exc:
                last_error = f"request failed: {exc}"
                continue
            if response.status_code in self.retryable_status:
                last_error = f"HTTP {response.status_code}"
                continue
            if response.status_code != 200:
                raise TransportError(
                    f"HTTP {response.status_code}: {response.text[:500]}"
                )
            try:
                payload = response.json()
                content = payload["choices"][0]["message"]["content"]
            except (ValueError, LookupError, TypeError) as exc:
                raise TransportError(f"malformed response payload: {exc}") from exc
            return content if isinstance(content, str) else ""
        raise TransportError(
            f"gave up after {cfg.max_attempts} attempts ({last_error})"
        )


class ScriptedTransport:
    """Deterministic fake transport: replies cycle through a fixed script."""

    def __init__(self, script: list[str]):
        if not script:
            raise ValueError("script must be nonempty")
        self.script = list(script)
        self.calls: list[list[dict]] = []
        self._lock = threading.Lock()

    def complete(self, messages: list[dict]) -> str:
        with self._lock:
            self.calls.append(messages)
            return self.script[(len(self.calls) - 1) % len(self.script)]


def _history_messages(system_prompt: str, turns: list[tuple[str, str]],
                      own_role: str) -> list[dict]:
    messages = [{"role": "system", "content": system_prompt}]
    for speaker, text in turns:
        role = "assistant" if speaker == own_role else "user"
        messages.append({"role": role, "content": text})
    return messages


def run_conversation(persona_a: PersonaSpec, persona_b: PersonaSpec,
                     cfg: GenerationConfig, transport,
                     conv_id: str | None = None) -> Conversation:
    """Alternate turns (A first) until the word threshold is surpassed."""
    prompts = {
        ROLE_A: build_system_prompt(persona_a, cfg.topic, role=ROLE_A),
        ROLE_B: build_system_prompt(persona_b, cfg.topic, role=ROLE_B),
    }
    turns: list[tuple[str, str]] = []
    total_words = 0
    for turn in range(cfg.max_turns):
        role = ROLE_A if turn % 2 == 0 else ROLE_B
        messages = _history_messages(prompts[role], turns, role)
        text = ""
        try:
            for _ in range(cfg.max_attempts):
                text = transport.complete(messages).strip()
                if text:
                    break
        except TransportError as exc:
            raise ConversationAborted(
                f"turn {turn}: transport failed: {exc}", turns
            ) from exc
        if not text:
            raise ConversationAborted(f"turn {turn}: empty model reply", turns)
        turns.append((role, text))
        total_words += word_count(text)
        if total_words > cfg.word_threshold:
            break
    if conv_id is None:
        conv_id = f"p{persona_a.id:02d}-p{persona_b.id:02d}"
    utterances = [
        Utterance(speaker=speaker, index=i, text=text)
        for i, (speaker, text) in enumerate(turns)
    ]
    return Conversation(
        id=conv_id,
        participants=((ROLE_A, str(persona_a.id)), (ROLE_B, str(persona_b.id))),
        utterances=utterances,
        topic=cfg.topic,
    )


@dataclass
class RepetitionVerdict:
    flagged: bool
    evidence: list[tuple[int, int, float]] = field(default_factory=list)

    def __post_init__(self):
        if self.flagged and not self.evidence:
            raise ValueError("a flagged verdict requires evidence")


def _trigrams(text: str) -> set[tuple[str, str, str]]:
    tokens = text.split()
    return {tuple(tokens[i:i + 3]) for i in range(len(tokens) - 2)}


def trigram_jaccard(a: str, b: str) -> float:
    ta, tb = _trigrams(a), _trigrams(b)
    if not ta and not tb:
        return 0.0
    union = ta | tb
    return len(ta & tb) / len(union)


def detect_repetition(conv: Conversation, threshold: float = 0.8,
                      window: int = 4) -> RepetitionVerdict:
    """Flag looping conversations.

    Either some turn text repeats verbatim anywhere, or two same-speaker
    turns within the trailing window are near-identical by word-trigram
    Jaccard similarity.
    """
    texts = [(u.index, u.speaker, u.text or "") for u in conv.utterances]
    if len(texts) < 2:
        raise ValueError("repetition detection needs at least two turns")
    evidence = []
    for (i, _, a), (j, _, b) in itertools.combinations(texts, 2):
        if a == b and a.strip():
            evidence.append((i, j, 1.0))
    tail = texts[-window:]
    for (i, spk_i, a), (j, spk_j, b) in itertools.combinations(tail, 2):
        if spk_i != spk_j or a == b:
            continue
        score = trigram_jaccard(a, b)
        if score >= threshold:
            evidence.append((i, j, score))
    evidence.sort()
    return RepetitionVerdict(flagged=bool(evidence), evidence=evidence)


@dataclass
class GenerationRun:
    """Raw transcripts, the post-exclusion analysis corpus, and the evidence."""

    conversations: list[Conversation]
    analysis: list[Conversation]
    verdicts: dict[str, RepetitionVerdict]
    aborted: list[dict]
    repetition_threshold: float

    def exclusion_report(self) -> dict:
        return {
            "n_generated": len(self.conversations),
            "n_analysis": len(self.analysis),
            "flagged": [
                {
                    "conv_id": cid,
                    "evidence": [
                        {"turn_i": i, "turn_j": j, "similarity": s}
                        for i, j, s in verdict.evidence
                    ],
                }
                for cid, verdict in sorted(self.verdicts.items())
                if verdict.flagged
            ],
            "aborted": self.aborted,
            "repetition_threshold": self.repetition_threshold,
        }


def _drive(jobs, cfg: GenerationConfig, transport,
           repetition_threshold: float, repetition_window: int) -> GenerationRun:
    def run_one(job):
        persona_a, persona_b, conv_id = job
        return run_conversation(persona_a, persona_b, cfg, transport, conv_id=conv_id)

    results: list = [None] * len(jobs)
    aborted: list[dict] = []
    if cfg.concurrency > 1:
        with ThreadPoolExecutor(max_workers=cfg.concurrency) as pool:
            futures = {pool.submit(run_one, job): k for k, job in enumerate(jobs)}
            for future, k in futures.items():
                try:
                    results[k] = future.result()
                except ConversationAborted as exc:
                    aborted.append({"conv_id": jobs[k][2], "error": str(exc),
                                    "partial_turns": len(exc.turns)})
    else:
        for k, job in enumerate(jobs):
            try:
                results[k] = run_one(job)
            except ConversationAborted as exc:
                aborted.append({"conv_id": job[2], "error": str(exc),
                                "partial_turns": len(exc.turns)})
    conversations = [c for c in results if c is not None]
    verdicts = {
        c.id: (detect_repetition(c, threshold=repetition_threshold,
                                 window=repetition_window)
               if len(c.utterances) >= 2 else RepetitionVerdict(False))
        for c in conversations
    }
    analysis = [c for c in conversations if not verdicts[c.id].flagged]
    return GenerationRun(
        conversations=conversations, analysis=analysis, verdicts=verdicts,
        aborted=sorted(aborted, key=lambda a: a["conv_id"]),
        repetition_threshold=repetition_threshold,
    )


def generate_round_robin(personas: list[PersonaSpec], cfg: GenerationConfig,
                         transport, repetition_threshold: float = 0.8,
                         repetition_window: int = 4) -> GenerationRun:
    """One conversation per unordered persona pair."""
    if len(personas) < 2:
        raise ValueError("round robin needs at least two personas")
    ordered = sorted(personas, key=lambda p: p.id)
    jobs = [
        (a, b, f"p{a.id:02d}-p{b.id:02d}")
        for a, b in itertools.combinations(ordered, 2)
    ]
    return _drive(jobs, cfg, transport, repetition_threshold, repetition_window)


def generate_repeated_pair(persona_a: PersonaSpec, persona_b: PersonaSpec,
                           n_conversations: int, cfg: GenerationConfig,
                           transport, repetition_threshold: float = 0.8,
                           repetition_window: int = 4) -> GenerationRun:
    """N conversations for one fixed pair (fine-grained trajectory corpora)."""
    if n_conversations < 1:
        raise ValueError("n_conversations must be positive")
    jobs = [
        (persona_a, persona_b,
         f"p{persona_a.id:02d}-p{persona_b.id:02d}-r{k:04d}")
        for k in range(n_conversations)
    ]
    return _drive(jobs, cfg, transport, repetition_threshold, repetition_window)
