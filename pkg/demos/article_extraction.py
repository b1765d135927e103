#!/usr/bin/env python3
"""Rule-based article and clause extraction from raw legal text, in both the
English and Chinese pattern sets."""

import json
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from lexverify.legalparse import articles_to_json, default_patterns, extract_articles

for lang in ("en", "zh"):
    text = (REPO / "fixtures" / "articles" / f"insurance_excerpt_{lang}.txt").read_text()
    amap = extract_articles(text, default_patterns(lang))
    print(f"--- {lang}: {len(amap)} articles, "
          f"{amap.skipped_headings} headings skipped, "
          f"{amap.discarded_lines} pre-article lines discarded")
    for num, article in amap.articles.items():
        print(f"Article {num}: {len(article.clauses)} clauses; "
              f"content: {article.content[:48]!r}")
    print(json.dumps(articles_to_json(amap)["articles"].get("143-6", {}),
                     ensure_ascii=False, indent=2)[:400])
    print()
