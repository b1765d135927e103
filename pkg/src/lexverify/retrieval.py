"""Hybrid lexical/semantic retrieval over a statute corpus.

BM25 (Okapi, k1 = 1.2, b = 0.75) over an inverted index plus cosine
similarity over a pluggable embedder, fused as

    hybrid = alpha * sim_norm + (1 - alpha) * bm25_norm

with alpha = 0.8 by default.  Cosine similarity is mapped from [-1, 1] to
[0, 1]; BM25 is min-max normalized within the merged candidate set (all
candidates equal -> 1.0).  The corpus is a few thousand provisions, so exact
scans beat any approximate index.

The expansion pipeline (queries -> hybrid search -> rerank -> usefulness
filter -> dedup) takes its generative steps through ports so tests run fully
deterministic doubles; the default embedder is a hashed bag-of-words
projection, stable across platforms.
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from collections import Counter
from dataclasses import dataclass, replace
from typing import Protocol, Sequence

BM25_K1 = 1.2
BM25_B = 0.75
DEFAULT_ALPHA = 0.8
EMBED_DIM = 64


class RetrievalPortError(RuntimeError):
    """A pluggable port misbehaved; carries the query being processed."""

    def __init__(self, message: str, query: str = ""):
        super().__init__(message + (f" (query: {query!r})" if query else ""))
        self.query = query


class DimensionMismatch(ValueError):
    pass


class DuplicateDocId(ValueError):
    pass


@dataclass(frozen=True)
class Doc:
    doc_id: str
    text: str
    law: str = ""
    article: str = ""


@dataclass(frozen=True)
class ScoredDoc:
    doc_id: str
    bm25: float = 0.0
    sim_vec: float = 0.0
    hybrid: float = 0.0
    rerank: float | None = None


def load_corpus(text: str) -> list[Doc]:
    """JSON Lines, one document per line: {doc_id, text, law?, article?}."""
    docs = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        obj = json.loads(line)
        docs.append(Doc(doc_id=obj["doc_id"], text=obj["text"],
                        law=obj.get("law", ""), article=obj.get("article", "")))
    return docs


# ---------------------------------------------------------------------------
# Tokenization and the deterministic test embedder
# ---------------------------------------------------------------------------

_WORD = re.compile(r"\w+", re.UNICODE)
_CJK = re.compile(r"[一-鿿]")


def tokenize(text: str, cjk_bigrams: bool = True) -> list[str]:
    """Lowercase Unicode-word split; CJK runs additionally emit character
    bigrams so Chinese text gets useful lexical units."""
    tokens = []
    for w in _WORD.findall(text.lower()):
        if cjk_bigrams and _CJK.search(w) and len(w) > 1:
            tokens.extend(w[i:i + 2] for i in range(len(w) - 1))
        else:
            tokens.append(w)
    return tokens


class EmbedderPort(Protocol):
    dim: int

    def embed(self, text: str) -> list[float]: ...


class HashedEmbedder:
    """Hashed bag-of-words projected to a fixed dimension, unit-normalized.

    sha256 of each token picks a coordinate and sign, so embeddings are
    identical across platforms and runs, which keeps CI hermetic."""

    def __init__(self, dim: int = EMBED_DIM):
        self.dim = dim

    def embed(self, text: str) -> list[float]:
        vec = [0.0] * self.dim
        for tok in tokenize(text):
            digest = hashlib.sha256(tok.encode("utf-8")).digest()
            idx = int.from_bytes(digest[:4], "big") % self.dim
            sign = 1.0 if digest[4] % 2 == 0 else -1.0
            vec[idx] += sign
        norm = math.sqrt(sum(x * x for x in vec))
        if norm == 0.0:
            return vec
        return [x / norm for x in vec]


def cosine(a: Sequence[float], b: Sequence[float]) -> float:
    return sum(x * y for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# Index
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Index:
    docs: tuple[Doc, ...]
    by_id: dict[str, int]
    term_freqs: tuple[Counter, ...]
    doc_lens: tuple[int, ...]
    avg_len: float
    idf: dict[str, float]
    vectors: tuple[tuple[float, ...], ...]
    embedder: EmbedderPort

    def doc(self, doc_id: str) -> Doc:
        return self.docs[self.by_id[doc_id]]


def index_build(docs: Sequence[Doc], embedder: EmbedderPort | None = None) -> Index:
    embedder = embedder or HashedEmbedder()
    by_id: dict[str, int] = {}
    for i, d in enumerate(docs):
        if d.doc_id in by_id:
            raise DuplicateDocId(d.doc_id)
        by_id[d.doc_id] = i

    term_freqs = tuple(Counter(tokenize(d.text)) for d in docs)
    doc_lens = tuple(sum(tf.values()) for tf in term_freqs)
    n = len(docs)
    avg_len = (sum(doc_lens) / n) if n else 0.0
    df = Counter()
    for tf in term_freqs:
        df.update(tf.keys())
    # +1 inside the log keeps idf nonnegative for very common terms
    idf = {t: math.log(1.0 + (n - k + 0.5) / (k + 0.5)) for t, k in df.items()}

    vectors = []
    dim = None
    for d in docs:
        v = tuple(embedder.embed(d.text))
        if dim is None:
            dim = len(v)
        elif len(v) != dim:
            raise DimensionMismatch(f"embedder returned {len(v)}-dim vector, expected {dim}")
        vectors.append(v)

    return Index(docs=tuple(docs), by_id=by_id, term_freqs=term_freqs,
                 doc_lens=doc_lens, avg_len=avg_len, idf=idf,
                 vectors=tuple(vectors), embedder=embedder)


def bm25_score(index: Index, query_tokens: Sequence[str], i: int) -> float:
    tf = index.term_freqs[i]
    if not tf:
        return 0.0
    norm = BM25_K1 * (1.0 - BM25_B + BM25_B * index.doc_lens[i] / index.avg_len)
    score = 0.0
    for t in query_tokens:
        f = tf.get(t)
        if not f:
            continue
        score += index.idf.get(t, 0.0) * f * (BM25_K1 + 1.0) / (f + norm)
    return score


def bm25_search(index: Index, query: str, k: int) -> list[ScoredDoc]:
    """Okapi BM25 top-k; only documents matching at least one query term
    score, descending score with doc_id tie-break."""
    if k < 1:
        raise ValueError("k must be >= 1")
    tokens = tokenize(query)
    hits = []
    for i, d in enumerate(index.docs):
        s = bm25_score(index, tokens, i)
        if s > 0.0:
            hits.append(ScoredDoc(doc_id=d.doc_id, bm25=s))
    hits.sort(key=lambda h: (-h.bm25, h.doc_id))
    return hits[:k]


def vector_search(index: Index, query: str, k: int,
                  embedder: EmbedderPort | None = None) -> list[ScoredDoc]:
    """Cosine similarity over unit vectors, whole corpus ranked."""
    if k < 1:
        raise ValueError("k must be >= 1")
    emb = embedder or index.embedder
    q = emb.embed(query)
    if len(q) != (len(index.vectors[0]) if index.vectors else len(q)):
        raise DimensionMismatch("query embedding dimension differs from index")
    hits = [ScoredDoc(doc_id=d.doc_id, sim_vec=cosine(q, index.vectors[i]))
            for i, d in enumerate(index.docs)]
    hits.sort(key=lambda h: (-h.sim_vec, h.doc_id))
    return hits[:k]


def combine_hybrid(sim_norm: float, bm25_norm: float, alpha: float) -> float:
    return alpha * sim_norm + (1.0 - alpha) * bm25_norm


def hybrid_search(index: Index, query: str, k: int,
                  alpha: float = DEFAULT_ALPHA) -> list[ScoredDoc]:
    """Union the BM25 and vector candidate sets, score every candidate on
    both axes, normalize, fuse, and return the top-k by hybrid score."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if not index.docs:
        return []
    tokens = tokenize(query)
    qvec = index.embedder.embed(query)

    candidates = {h.doc_id for h in bm25_search(index, query, k)}
    candidates |= {h.doc_id for h in vector_search(index, query, k)}

    scored = []
    raw = []
    for doc_id in sorted(candidates):
        i = index.by_id[doc_id]
        raw.append((doc_id, bm25_score(index, tokens, i), cosine(qvec, index.vectors[i])))
    if not raw:
        return []
    lo = min(b for _, b, _ in raw)
    hi = max(b for _, b, _ in raw)
    for doc_id, b, s in raw:
        bm25_norm = 1.0 if hi == lo else (b - lo) / (hi - lo)
        sim_norm = (s + 1.0) / 2.0
        scored.append(ScoredDoc(doc_id=doc_id, bm25=b, sim_vec=s,
                                hybrid=combine_hybrid(sim_norm, bm25_norm, alpha)))
    scored.sort(key=lambda h: (-h.hybrid, h.doc_id))
    return scored[:k]


# ---------------------------------------------------------------------------
# Expansion pipeline ports
# ---------------------------------------------------------------------------

class RerankerPort(Protocol):
    def rerank(self, query: str, docs: Sequence[ScoredDoc], index: Index) -> list[ScoredDoc]: ...


class FilterPort(Protocol):
    def filter_useful(self, docs: Sequence[Doc], base: Doc) -> list[Doc]: ...


class QueryGenPort(Protocol):
    def queries(self, base: Doc) -> list[str]: ...


class IdentityReranker:
    """Keeps the incoming order; rerank score mirrors the hybrid score."""

    def rerank(self, query, docs, index):
        return [replace(d, rerank=d.hybrid) for d in docs]


class OverlapReranker:
    """Deterministic stand-in for a cross-encoder: token overlap with the
    query, stable within equal scores."""

    def rerank(self, query, docs, index):
        q = set(tokenize(query))
        rescored = []
        for d in docs:
            toks = set(tokenize(index.doc(d.doc_id).text))
            denom = len(q) or 1
            rescored.append(replace(d, rerank=len(q & toks) / denom))
        rescored.sort(key=lambda h: (-(h.rerank or 0.0), h.doc_id))
        return rescored


class AcceptAllFilter:
    def filter_useful(self, docs, base):
        return list(docs)


class EchoQueryGen:
    """Single query: the base document's text."""

    def queries(self, base):
        return [base.text]


@dataclass
class ExpansionPorts:
    query_gen: QueryGenPort
    reranker: RerankerPort
    filter: FilterPort


def expand_article(base: Doc, index: Index, ports: ExpansionPorts,
                   alpha: float = DEFAULT_ALPHA, k: int = 10) -> list[Doc]:
    """Supplementary provisions for a base article: generated queries fan out
    through hybrid search, reranking and the usefulness filter; results are
    deduplicated by doc_id in first-seen order."""
    queries = ports.query_gen.queries(base)
    out: list[Doc] = []
    seen: set[str] = set()
    for q in queries:
        hits = hybrid_search(index, q, k, alpha)
        reranked = ports.reranker.rerank(q, hits, index)
        if Counter(d.doc_id for d in reranked) != Counter(d.doc_id for d in hits):
            raise RetrievalPortError("reranker output is not a permutation of its input", q)
        docs = [index.doc(d.doc_id) for d in reranked]
        kept = ports.filter.filter_useful(docs, base)
        known = {d.doc_id for d in docs}
        for d in kept:
            if d.doc_id not in known:
                continue  # port hallucinated an id; subset contract enforced
            if d.doc_id not in seen:
                seen.add(d.doc_id)
                out.append(index.doc(d.doc_id))
    return out
