"""Course-relevance graph: TF-IDF vectors and pairwise cosine similarity.

Weights use raw term counts times ln(N/df); terms appearing in every
document carry no signal between courses and are dropped.  All operations
are pure and deterministic: ties and orderings are resolved by canonical
(lexicographic) course ids so repeated runs emit identical edge lists.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)

# Hiragana, Katakana, CJK extension A, CJK unified, CJK compatibility.
_CJK_RANGES = ((0x3040, 0x30FF), (0x3400, 0x4DBF), (0x4E00, 0x9FFF), (0xF900, 0xFAFF))


@dataclass(frozen=True)
class RenderPolicy:
    """Edge retention policy: similarity floor plus optional per-course top-k."""

    min_similarity: float = 0.2
    top_k: int | None = None

    def __post_init__(self) -> None:
        if self.top_k is not None and self.top_k < 1:
            raise ValueError("top_k must be >= 1 when set")


@dataclass(frozen=True)
class DocumentVector:
    course_id: str
    weights: Mapping[str, float]


@dataclass(frozen=True)
class RelevanceEdge:
    course_a: str  # course_a < course_b lexicographically
    course_b: str
    similarity: float


@dataclass(frozen=True)
class RelevanceGraph:
    policy: RenderPolicy
    edges: tuple[RelevanceEdge, ...]

    def neighbors(self, course_id: str) -> list[tuple[str, float]]:
        """(partner, similarity) pairs, strongest first, ties by partner id."""
        found = []
        for e in self.edges:
            if e.course_a == course_id:
                found.append((e.course_b, e.similarity))
            elif e.course_b == course_id:
                found.append((e.course_a, e.similarity))
        found.sort(key=lambda item: (-item[1], item[0]))
        return found


def _is_cjk(ch: str) -> bool:
    code = ord(ch)
    return any(lo <= code <= hi for lo, hi in _CJK_RANGES)


def _runs(text: str):
    """Split text into maximal (is_cjk, segment) runs."""
    start = 0
    while start < len(text):
        cjk = _is_cjk(text[start])
        end = start + 1
        while end < len(text) and _is_cjk(text[end]) == cjk:
            end += 1
        yield cjk, text[start:end]
        start = end


def tokenize(text: str, mode: str = "word") -> list[str]:
    """Split text into terms.

    ``word`` splits on whitespace/punctuation and lowercases.  ``cjk_bigram``
    emits character bigrams over CJK runs (a lone CJK character stands alone)
    and word tokens elsewhere.  ``auto`` picks per run, which makes it behave
    like ``cjk_bigram``; it exists so callers need not inspect their text.
    """
    if mode == "word":
        return _WORD_RE.findall(text.lower())
    if mode not in ("cjk_bigram", "auto"):
        raise ValueError(f"unknown tokenizer mode '{mode}'")
    tokens: list[str] = []
    for cjk, segment in _runs(text):
        if cjk:
            if len(segment) == 1:
                tokens.append(segment)
            else:
                tokens.extend(segment[i : i + 2] for i in range(len(segment) - 1))
        else:
            tokens.extend(_WORD_RE.findall(segment.lower()))
    return tokens


def build_tfidf(
    corpus: Sequence[tuple[str, str]],
    mode: str = "word",
    stop_words: frozenset[str] = frozenset(),
) -> list[DocumentVector]:
    """Vectorize (course_id, text) pairs; weight = tf * ln(N / df)."""
    if not corpus:
        raise ValueError("empty corpus")
    tokenized = [
        (course_id, [t for t in tokenize(text, mode) if t not in stop_words])
        for course_id, text in corpus
    ]
    n = len(tokenized)
    df: Counter[str] = Counter()
    for _, terms in tokenized:
        df.update(set(terms))
    vectors = []
    for course_id, terms in tokenized:
        tf = Counter(terms)
        weights = {
            term: count * math.log(n / df[term]) for term, count in tf.items() if df[term] < n
        }
        vectors.append(DocumentVector(course_id=course_id, weights=weights))
    return vectors


def _norm(weights: Mapping[str, float]) -> float:
    return math.sqrt(math.fsum(w * w for w in weights.values()))


def cosine_similarity(u: DocumentVector, v: DocumentVector) -> float:
    """Normalized dot product in [0, 1]; defined as 0 when either vector is empty.

    The dot product is accumulated over the sorted shared terms so the
    result is exactly symmetric in its arguments.
    """
    wu, wv = u.weights, v.weights
    if not wu or not wv:
        return 0.0
    if wu == wv:
        return 1.0
    shared = sorted(set(wu) & set(wv))
    if not shared:
        return 0.0
    dot = math.fsum(wu[t] * wv[t] for t in shared)
    return min(1.0, dot / (_norm(wu) * _norm(wv)))


def build_graph(vectors: Sequence[DocumentVector], policy: RenderPolicy) -> RelevanceGraph:
    """Score all pairs and retain edges per policy.

    An edge is kept when its similarity reaches the floor and, when top_k is
    set, when it ranks within the top_k strongest edges of either endpoint.
    Output order: descending similarity, then canonical pair order.
    """
    if len(vectors) < 2:
        raise ValueError("need at least 2 document vectors")
    ids = [v.course_id for v in vectors]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate course_id among vectors")

    by_id = sorted(vectors, key=lambda v: v.course_id)
    edges: list[RelevanceEdge] = []
    for i in range(len(by_id)):
        for j in range(i + 1, len(by_id)):
            s = cosine_similarity(by_id[i], by_id[j])
            if s >= policy.min_similarity:
                edges.append(RelevanceEdge(by_id[i].course_id, by_id[j].course_id, s))

    if policy.top_k is not None:
        incident: dict[str, list[RelevanceEdge]] = {}
        for e in edges:
            incident.setdefault(e.course_a, []).append(e)
            incident.setdefault(e.course_b, []).append(e)
        keep: set[tuple[str, str]] = set()
        for course_id, touching in incident.items():
            touching.sort(
                key=lambda e: (
                    -e.similarity,
                    e.course_b if e.course_a == course_id else e.course_a,
                )
            )
            for e in touching[: policy.top_k]:
                keep.add((e.course_a, e.course_b))
        edges = [e for e in edges if (e.course_a, e.course_b) in keep]

    edges.sort(key=lambda e: (-e.similarity, e.course_a, e.course_b))
    return RelevanceGraph(policy=policy, edges=tuple(edges))


def thickness_for(similarity: float, policy: RenderPolicy) -> float:
    """Linear rescale of similarity from [tau, 1] onto [0, 1]."""
    tau = policy.min_similarity
    if similarity < tau:
        raise ValueError(f"similarity {similarity} below policy floor {tau}")
    if tau >= 1.0:
        return 1.0
    return min(1.0, max(0.0, (similarity - tau) / (1.0 - tau)))


def graph_export_dict(graph: RelevanceGraph) -> dict:
    """JSON-ready export: policy plus edges with rendered thickness."""
    return {
        "policy": {
            "min_similarity": graph.policy.min_similarity,
            "top_k": graph.policy.top_k,
        },
        "edges": [
            {
                "a": e.course_a,
                "b": e.course_b,
                "similarity": e.similarity,
                "thickness": thickness_for(e.similarity, graph.policy),
            }
            for e in graph.edges
        ],
    }
