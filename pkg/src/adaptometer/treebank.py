"""Bracketed constituency trees and context-free production rule extraction.

Trees arrive as Penn-Treebank-style bracketings, one per line or embedded in
corpus JSONL. A node either has children (phrasal node) or a single terminal
word (preterminal). Each node contributes one production rule; preterminal
rules (``NN -> tea``) are the lexical ones and are dropped by default so that
downstream repetition counts measure syntactic rather than lexical reuse.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

RULE_ARROW = "→"  # separator used in the serialized "LHS→RHS1 RHS2" form
TRACE_LABEL = "-NONE-"


class TreeParseError(ValueError):
    """Malformed bracketing. Carries the byte offset of the failure."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


@dataclass(frozen=True)
class SyntaxTree:
    """One node of a constituency tree.

    Exactly one of ``children`` / ``word`` is populated: phrasal nodes carry
    children, preterminals carry the terminal word.
    """

    label: str
    children: tuple["SyntaxTree", ...] = ()
    word: str | None = None

    def __post_init__(self):
        if not self.label:
            raise ValueError("tree node with empty label")
        if self.word is None and not self.children:
            raise ValueError(f"node {self.label!r} has neither children nor a word")
        if self.word is not None and self.children:
            raise ValueError(f"node {self.label!r} has both children and a word")
        if self.word == "":
            raise ValueError(f"node {self.label!r} has an empty word")

    @property
    def is_leaf(self) -> bool:
        return self.word is not None

    def nodes(self) -> Iterator["SyntaxTree"]:
        """Pre-order traversal over all nodes."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def words(self) -> list[str]:
        return [n.word for n in self.nodes() if n.word is not None]

    def __str__(self) -> str:
        return serialize(self)


@dataclass(frozen=True)
class ProductionRule:
    """A context-free rewrite ``lhs -> rhs``.

    Two rules are equal iff their lhs and rhs symbol sequences are equal;
    ``lexical`` is derived metadata (true iff the rhs is a terminal word)
    and excluded from comparison.
    """

    lhs: str
    rhs: tuple[str, ...]
    lexical: bool = field(default=False, compare=False)

    def __post_init__(self):
        if not self.lhs:
            raise ValueError("rule with empty lhs")
        if not self.rhs:
            raise ValueError(f"rule {self.lhs!r} with empty rhs")

    def __str__(self) -> str:
        return f"{self.lhs}{RULE_ARROW}{' '.join(self.rhs)}"

    @classmethod
    def from_string(cls, text: str) -> "ProductionRule":
        lhs, sep, rest = text.partition(RULE_ARROW)
        if not sep:
            raise ValueError(f"rule string {text!r} lacks the {RULE_ARROW!r} separator")
        rhs = tuple(rest.split())
        if not lhs or not rhs:
            raise ValueError(f"rule string {text!r} has an empty side")
        return cls(lhs=lhs, rhs=rhs)


def strip_function_tag(label: str) -> str:
    """Remove ``-SBJ``/``=2`` style suffixes from a nonterminal label.

    Labels that start with ``-`` or ``=`` (``-NONE-``, ``-LRB-``) are
    punctuation/trace tags, not tagged nonterminals, and pass through.
    """
    if label[0] in "-=":
        return label
    cut = len(label)
    for ch in "-=":
        pos = label.find(ch)
        if pos != -1:
            cut = min(cut, pos)
    return label[:cut]


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            tokens.append((ch, i))
            i += 1
        else:
            start = i
            while i < n and not text[i].isspace() and text[i] not in "()":
                i += 1
            tokens.append((text[start:i], start))
    return tokens


def parse_bracketed(
    text: str,
    strip_function_tags: bool = True,
    drop_traces: bool = True,
) -> SyntaxTree:
    """Parse one bracketed tree, tolerating the treebank outer ``( ... )`` wrapper.

    Raises TreeParseError with a byte offset for unbalanced parentheses, empty
    input, and label-less nodes.
    """
    tokens = _tokenize(text)
    if not tokens:
        raise TreeParseError("empty input", 0)

    pos = 0

    def parse_node() -> tuple[str, int, list, str | None]:
        # returns (label, offset, children, word)
        nonlocal pos
        tok, off = tokens[pos]
        if tok != "(":
            raise TreeParseError(f"expected '(' but found {tok!r}", off)
        pos += 1
        if pos >= len(tokens):
            raise TreeParseError("unbalanced at end of input", len(text))
        label_tok, label_off = tokens[pos]
        if label_tok == ")":
            raise TreeParseError("node with neither children nor word", label_off)
        if label_tok == "(":
            label = ""  # treebank wrapper "( ... )"
        else:
            label = label_tok
            pos += 1
        children: list = []
        word = None
        while True:
            if pos >= len(tokens):
                raise TreeParseError("unbalanced at end of input", len(text))
            tok, off = tokens[pos]
            if tok == ")":
                pos += 1
                break
            if tok == "(":
                children.append(parse_node())
            else:
                if word is not None or children:
                    raise TreeParseError(
                        "node mixes words and subtrees or has multiple words", off
                    )
                word = tok
                pos += 1
        if word is None and not children:
            raise TreeParseError("node with neither children nor word", label_off)
        return (label, label_off, children, word)

    root = parse_node()
    if pos != len(tokens):
        raise TreeParseError("trailing content after tree", tokens[pos][1])

    def build(node) -> SyntaxTree | None:
        label, off, children, word = node
        if word is not None:
            if drop_traces and label == TRACE_LABEL:
                return None
            if strip_function_tags:
                label = strip_function_tag(label)
            if not label:
                raise TreeParseError("node with empty label", off)
            return SyntaxTree(label=label, word=word)
        built = [c for c in (build(ch) for ch in children) if c is not None]
        if not built:
            if drop_traces and children:
                return None  # an all-trace constituent vanishes with its traces
            raise TreeParseError("node with neither children nor word", off)
        if label == "":
            if len(built) == 1 and node is root:
                return built[0]
            raise TreeParseError("node with empty label", off)
        if strip_function_tags:
            label = strip_function_tag(label)
            if not label:
                raise TreeParseError("node with empty label", off)
        return SyntaxTree(label=label, children=tuple(built))

    tree = build(root)
    if tree is None:
        raise TreeParseError("tree is empty after trace removal", tokens[0][1])
    return tree


def serialize(tree: SyntaxTree) -> str:
    """Canonical single-space bracketing; `parse_bracketed` inverts it."""
    if tree.is_leaf:
        return f"({tree.label} {tree.word})"
    inner = " ".join(serialize(c) for c in tree.children)
    return f"({tree.label} {inner})"


def extract_rules(tree: SyntaxTree, include_lexical: bool = False) -> list[ProductionRule]:
    """One production per node, in pre-order.

    Preterminal nodes yield lexical rules (``NN -> tea``); those are omitted
    unless ``include_lexical`` is set, so the default output covers purely
    syntactic structure.
    """
    rules = []
    for node in tree.nodes():
        if node.is_leaf:
            if include_lexical:
                rules.append(ProductionRule(node.label, (node.word,), lexical=True))
        else:
            rules.append(
                ProductionRule(node.label, tuple(c.label for c in node.children))
            )
    return rules


def read_tree_file(path, **parse_opts) -> list[SyntaxTree]:
    """Read a one-tree-per-line UTF-8 file; blank lines are skipped."""
    trees = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                trees.append(parse_bracketed(line, **parse_opts))
    return trees
