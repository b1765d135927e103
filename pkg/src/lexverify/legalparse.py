"""Rule-based extraction of articles and clauses from raw legal text.

A line-oriented state machine: whitespace is normalized per line, section
headings are skipped, an article-header line opens a new article and resets
the clause cursor, clause-pattern lines start a new clause, continuation
lines extend the open clause, and anything else inside an article becomes
article content.  Text before the first article header is discarded but
counted, so nothing disappears silently.

Input is plain UTF-8 text; converting PDFs or other source formats to text
happens upstream.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Any, Callable, Mapping


class UnknownLanguage(ValueError):
    pass


@dataclass(frozen=True)
class PatternSet:
    article: re.Pattern
    clause: re.Pattern
    headings: tuple[re.Pattern, ...]
    number_normalizer: Callable[[str], str] | None = None


@dataclass(frozen=True)
class Article:
    title: str
    clauses: tuple[str, ...]
    content: str


@dataclass(frozen=True)
class ArticleMap:
    articles: dict[str, Article]
    discarded_lines: int = 0
    skipped_headings: int = 0

    def __len__(self):
        return len(self.articles)

    def __getitem__(self, num: str) -> Article:
        return self.articles[num]


def articles_to_json(amap: ArticleMap) -> dict[str, Any]:
    return {
        "articles": {
            num: {"title": a.title, "clauses": list(a.clauses), "content": a.content}
            for num, a in amap.articles.items()
        },
        "diagnostics": {
            "discarded_lines": amap.discarded_lines,
            "skipped_headings": amap.skipped_headings,
        },
    }


def articles_from_json(obj: Mapping[str, Any]) -> ArticleMap:
    diag = obj.get("diagnostics", {})
    return ArticleMap(
        articles={
            num: Article(title=a.get("title", ""), clauses=tuple(a.get("clauses", ())),
                         content=a.get("content", ""))
            for num, a in obj.get("articles", {}).items()
        },
        discarded_lines=diag.get("discarded_lines", 0),
        skipped_headings=diag.get("skipped_headings", 0),
    )


# ---------------------------------------------------------------------------
# Default patterns
# ---------------------------------------------------------------------------

_ZH_DIGITS = {"零": 0, "〇": 0, "○": 0, "一": 1, "二": 2, "三": 3, "四": 4,
              "五": 5, "六": 6, "七": 7, "八": 8, "九": 9}


def zh_number(text: str) -> str:
    """Chinese numerals to arabic digits, supporting both the positional
    style (yi-bai-si-shi-san = 143) and the digit-sequence style
    (yi-si-san = 143)."""
    text = text.strip()
    if text.isdigit():
        return text
    if "十" in text or "百" in text:
        total, current = 0, 0
        for ch in text:
            if ch == "百":
                total += (current or 1) * 100
                current = 0
            elif ch == "十":
                total += (current or 1) * 10
                current = 0
            elif ch in _ZH_DIGITS:
                current = _ZH_DIGITS[ch]
            else:
                raise ValueError(f"not a Chinese numeral: {text!r}")
        return str(total + current)
    digits = []
    for ch in text:
        if ch.isdigit():
            digits.append(ch)
        elif ch in _ZH_DIGITS:
            digits.append(str(_ZH_DIGITS[ch]))
        else:
            raise ValueError(f"not a Chinese numeral: {text!r}")
    return str(int("".join(digits)))


def _zh_article_number(m: re.Match) -> str:
    num = zh_number(m.group("num"))
    suffix = m.groupdict().get("suffix")
    return f"{num}-{zh_number(suffix)}" if suffix else num


def default_patterns(language: str) -> PatternSet:
    lang = language.lower()
    if lang == "en":
        return PatternSet(
            article=re.compile(r"^Article\s+(?P<num>\d+(?:-\d+)*)\s*[:.]?\s*(?P<title>.*)$"),
            clause=re.compile(r"^\d+\.\s"),
            headings=(re.compile(r"^(Chapter|Section|Part|Title|Book)\b", re.IGNORECASE),),
        )
    if lang == "zh":
        zh_num = r"[0-9一二三四五六七八九十百零〇○]+"
        return PatternSet(
            article=re.compile(
                rf"^第\s*(?P<num>{zh_num})\s*條(?:之(?P<suffix>{zh_num}))?\s*(?P<title>.*)$"),
            clause=re.compile(r"^([0-9]+[.、]|[一二三四五六七八九十]+、)\s*"),
            headings=(re.compile(rf"^第\s*{zh_num}\s*(章|節|编|編)"),),
            number_normalizer=None,  # handled via the named groups below
        )
    raise UnknownLanguage(language)


def patterns_from_config(obj: Mapping[str, Any]) -> PatternSet:
    """PatternSet from a JSON config: {"article": ..., "clause": ...,
    "headings": [...]} with Python regex syntax; `article` needs a named
    group `num` and may have `title`."""
    return PatternSet(
        article=re.compile(obj["article"]),
        clause=re.compile(obj["clause"]),
        headings=tuple(re.compile(h) for h in obj.get("headings", ())),
    )


# ---------------------------------------------------------------------------
# Extraction
# ---------------------------------------------------------------------------

_WS = re.compile(r"\s+")


def _normalize(line: str) -> str:
    return _WS.sub(" ", line.strip())


def _article_key(patterns: PatternSet, m: re.Match) -> str:
    if "suffix" in m.groupdict():
        return _zh_article_number(m)
    num = m.group("num")
    if patterns.number_normalizer:
        num = patterns.number_normalizer(num)
    return num


def extract_articles(text: str, patterns: PatternSet | None = None) -> ArticleMap:
    """Parse raw legal text into an ordered article map.

    A repeated article number reopens the existing entry rather than erasing
    it, so every kept input line survives into exactly one bucket.
    """
    if patterns is None:
        patterns = default_patterns("en")

    articles: dict[str, dict] = {}
    current: dict | None = None
    open_clause = False
    discarded = skipped = 0

    for raw_line in text.splitlines():
        line = _normalize(raw_line)
        if not line:
            continue
        if any(h.match(line) for h in patterns.headings):
            skipped += 1
            continue
        m = patterns.article.match(line)
        if m:
            num = _article_key(patterns, m)
            title = (m.groupdict().get("title") or "").strip()
            if num in articles:
                current = articles[num]
                if title and not current["title"]:
                    current["title"] = title
            else:
                current = {"title": title, "clauses": [], "content": []}
                articles[num] = current
            open_clause = False
            continue
        if current is None:
            discarded += 1
            continue
        if patterns.clause.match(line):
            current["clauses"].append(line)
            open_clause = True
        elif open_clause:
            current["clauses"][-1] += " " + line
        else:
            current["content"].append(line)

    return ArticleMap(
        articles={
            num: Article(title=a["title"], clauses=tuple(a["clauses"]),
                         content="\n".join(a["content"]))
            for num, a in articles.items()
        },
        discarded_lines=discarded,
        skipped_headings=skipped,
    )


def render_articles(amap: ArticleMap, style: str = "en") -> str:
    """Text form whose re-extraction (with the same language's default
    patterns) reproduces the map."""
    lines = []
    for num, a in amap.articles.items():
        if style == "zh":
            base, _, suffix = num.partition("-")
            header = f"第{base}條" + (f"之{suffix}" if suffix else "")
        else:
            header = f"Article {num}"
        if a.title:
            header += f" {a.title}"
        lines.append(header)
        if a.content:
            lines.extend(a.content.splitlines())
        lines.extend(a.clauses)
    return "\n".join(lines) + ("\n" if lines else "")
