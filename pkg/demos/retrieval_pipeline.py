#!/usr/bin/env python3
"""Hybrid statute retrieval: BM25 + embedding fusion, then the supplementary
expansion pipeline with deterministic ports."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from lexverify.gateway import MockCompletionPort, filter_useful, gen_queries
from lexverify.retrieval import (
    Doc,
    ExpansionPorts,
    OverlapReranker,
    bm25_search,
    expand_article,
    hybrid_search,
    index_build,
    vector_search,
)

corpus = [
    Doc("ratio", "Capital adequacy ratio: own capital over risk capital, times one hundred."),
    Doc("levels", "Capital level classification: adequate, inadequate, significantly inadequate, severely inadequate."),
    Doc("plan", "The insurer shall submit a capital improvement plan and execute it under supervision."),
    Doc("removal", "Removal of responsible persons and prior approval of asset disposal for significantly inadequate insurers."),
    Doc("penalty", "Administrative penalty applies when supervisory measures are not executed."),
    Doc("zebra", "Migration of zebra herds across seasonal floodplains."),
]
index = index_build(corpus)

query = "capital adequacy improvement plan"
print(f"query: {query!r}\n")
print("BM25 (lexical):")
for hit in bm25_search(index, query, 3):
    print(f"  {hit.doc_id:8s} {hit.bm25:.4f}")
print("vector (semantic, hashed bag-of-words embedder):")
for hit in vector_search(index, query, 3):
    print(f"  {hit.doc_id:8s} {hit.sim_vec:.4f}")
print("hybrid (alpha = 0.8):")
for hit in hybrid_search(index, query, 3, alpha=0.8):
    print(f"  {hit.doc_id:8s} hybrid={hit.hybrid:.4f} (bm25 {hit.bm25:.3f}, sim {hit.sim_vec:.3f})")

port = MockCompletionPort()


class QueryGen:
    def queries(self, base):
        return gen_queries(base, port)


class Filter:
    def filter_useful(self, docs, base):
        return filter_useful(docs, base, port)


ports = ExpansionPorts(query_gen=QueryGen(), reranker=OverlapReranker(), filter=Filter())
supplementary = expand_article(index.doc("ratio"), index, ports, k=4)
print("\nsupplementary set for the ratio provision:")
for doc in supplementary:
    print(f"  {doc.doc_id}: {doc.text[:70]}")
