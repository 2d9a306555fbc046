"""Linking: access paths to documentation, qualified names to forum posts.

Documentation linking maps a dotted access path to the longest prefix found
in the documentation index: a full-path hit is a direct match, a proper
prefix a partial match, and no prefix at all a missed link.

Forum linking runs a small ranked retrieval index over locally ingested
post dumps. Scoring is a fixed, reproducible TF-IDF over weighted fields
(title x3, code spans x2, question and answer bodies x1); query terms are
the rendered path plus each of its components.
"""

from __future__ import annotations

import html
import json
import math
import random
import re
import xml.etree.ElementTree as ET
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .docs import DocIndex
from .graphmodel import ProgramGraph

MAX_POST_MATCHES = 5000  # hard cap on matches returned per query

FIELD_WEIGHTS = {"title": 3.0, "code": 2.0, "question": 1.0, "answers": 1.0}


# ---------------------------------------------------------------------------
# Documentation linking


@dataclass(frozen=True)
class LinkResult:
    query: tuple[str, ...]
    outcome: str  # "direct" | "partial" | "missed"
    matched_prefix: tuple[str, ...] | None = None


def link_path(path: tuple[str, ...], index: DocIndex) -> LinkResult:
    """Classify one access path against the documentation index."""
    if not path:
        raise ValueError("empty path")
    if index.exact(path) is not None:
        return LinkResult(path, "direct", path)
    entry = index.longest_prefix(path)
    if entry is None:
        return LinkResult(path, "missed")
    return LinkResult(path, "partial", entry.qualified_name)


def link_stats(
    graphs: list[ProgramGraph],
    index: DocIndex,
    count_occurrences: bool = False,
) -> dict[str, dict[str, int]]:
    """Direct/partial/missed counts by kind over a graph corpus.

    Each unique label counts once unless ``count_occurrences`` is set.
    Partial and missed links have no authoritative kind and land in the
    "function" bucket by convention.
    """
    stats = {
        outcome: {"class": 0, "function": 0, "method": 0}
        for outcome in ("direct", "partial", "missed")
    }
    labels: Counter[tuple[str, ...]] = Counter()
    for graph in graphs:
        for node in graph.nodes.values():
            if node.label:
                labels[node.label] += 1
    for label in sorted(labels):
        result = link_path(label, index)
        if result.outcome == "direct":
            kind = index.exact(label).kind  # type: ignore[union-attr]
        else:
            kind = "function"
        stats[result.outcome][kind] += labels[label] if count_occurrences else 1
    return stats


# ---------------------------------------------------------------------------
# Forum posts


class FormatError(Exception):
    """Post dump is neither the XML row format nor JSON lines."""


@dataclass(frozen=True)
class Answer:
    answer_id: int
    body: str
    votes: int = 0


@dataclass(frozen=True)
class ForumPost:
    post_id: int
    title: str
    question_body: str
    answers: tuple[Answer, ...] = ()
    tags: tuple[str, ...] = ()
    votes: int = 0


@dataclass(frozen=True)
class ForumLink:
    qualified_name: tuple[str, ...]
    post_id: int
    score: float


@dataclass
class IngestResult:
    posts: list[ForumPost]
    skipped: int = 0


def _parse_tags(raw) -> tuple[str, ...]:
    if isinstance(raw, (list, tuple)):
        return tuple(str(t) for t in raw)
    if isinstance(raw, str):
        return tuple(re.findall(r"<([^<>]+)>", raw))
    return ()


def _rows_from_xml(text: str):
    try:
        root = ET.fromstring(text)
    except ET.ParseError as exc:
        raise FormatError(f"not parseable as an XML post dump: {exc}") from exc
    if root.tag == "row":
        yield dict(root.attrib)
        return
    for elem in root.iter("row"):
        yield dict(elem.attrib)


def _rows_from_jsonl(text: str) -> tuple[list[dict], int]:
    rows: list[dict] = []
    bad = 0
    saw_content = False
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        saw_content = True
        try:
            obj = json.loads(line)
        except json.JSONDecodeError:
            bad += 1
            continue
        if isinstance(obj, dict):
            rows.append(obj)
        else:
            bad += 1
    if saw_content and not rows:
        raise FormatError("no JSON object rows found in post dump")
    return rows, bad


def ingest_posts(dump_path: str | Path) -> IngestResult:
    """Read a post dump (XML rows or JSON lines) into joined ForumPosts.

    Questions join with their answers by parent id; malformed rows and
    orphan answers are skipped and counted. Output is ordered by post id.
    """
    text = Path(dump_path).read_text(encoding="utf-8")
    skipped = 0
    if text.lstrip().startswith("<"):
        raw_rows = list(_rows_from_xml(text))
        rows = []
        for attrs in raw_rows:
            rows.append(
                {
                    "id": attrs.get("Id"),
                    "postTypeId": attrs.get("PostTypeId"),
                    "parentId": attrs.get("ParentId"),
                    "title": attrs.get("Title", ""),
                    "body": attrs.get("Body", ""),
                    "tags": attrs.get("Tags", ""),
                    "score": attrs.get("Score", 0),
                }
            )
    else:
        rows, skipped = _rows_from_jsonl(text)

    questions: dict[int, dict] = {}
    answer_rows: list[dict] = []
    for row in rows:
        try:
            post_id = int(row["id"])
            type_id = int(row["postTypeId"])
        except (KeyError, TypeError, ValueError):
            skipped += 1
            continue
        if type_id == 1:
            questions[post_id] = row
        elif type_id == 2:
            answer_rows.append(row)
        # other post types (wiki, moderator rows) are irrelevant, not errors

    answers: dict[int, list[Answer]] = {qid: [] for qid in questions}
    for row in answer_rows:
        parent = row.get("parentId")
        try:
            parent_id = int(parent)
        except (TypeError, ValueError):
            skipped += 1
            continue
        if parent_id not in answers:
            skipped += 1
            continue
        answers[parent_id].append(
            Answer(
                answer_id=int(row["id"]),
                body=str(row.get("body") or ""),
                votes=int(row.get("score") or 0),
            )
        )

    posts = []
    for qid in sorted(questions):
        row = questions[qid]
        posts.append(
            ForumPost(
                post_id=qid,
                title=str(row.get("title") or ""),
                question_body=str(row.get("body") or ""),
                answers=tuple(sorted(answers[qid], key=lambda a: a.answer_id)),
                tags=_parse_tags(row.get("tags")),
                votes=int(row.get("score") or 0),
            )
        )
    return IngestResult(posts=posts, skipped=skipped)


# ---------------------------------------------------------------------------
# Ranked retrieval

_CODE_SPAN = re.compile(r"<code>(.*?)</code>", re.IGNORECASE | re.DOTALL)
_PROSE_TOKEN = re.compile(r"[a-z0-9]+")
_CODE_TOKEN = re.compile(r"[a-z0-9_.]+")


def tokenize_prose(text: str) -> list[str]:
    return _PROSE_TOKEN.findall(text.lower())


def tokenize_code(text: str) -> list[str]:
    """Code keeps dotted/underscored names whole, and also emits the dotted
    name's components so bare path pieces match inside code."""
    tokens: list[str] = []
    for raw in _CODE_TOKEN.findall(text.lower()):
        token = raw.strip(".")
        if not token:
            continue
        tokens.append(token)
        if "." in token:
            tokens.extend(part for part in token.split(".") if part)
    return tokens


def code_spans(body: str) -> list[str]:
    return [html.unescape(m) for m in _CODE_SPAN.findall(body)]


@dataclass
class _PostDoc:
    post_id: int
    field_counts: dict[str, Counter]
    first_match_tokens: set[str]  # title + code tokens, for the gating filter


@dataclass
class PostIndex:
    """Immutable-after-build TF-IDF index over ingested posts."""

    posts: dict[int, ForumPost] = field(default_factory=dict)
    docs: dict[int, _PostDoc] = field(default_factory=dict)
    doc_freq: dict[str, Counter] = field(default_factory=dict)  # field -> term -> df

    @property
    def size(self) -> int:
        return len(self.docs)

    def idf(self, fieldname: str, term: str) -> float:
        df = self.doc_freq.get(fieldname, Counter()).get(term, 0)
        return math.log((1 + self.size) / (1 + df)) + 1.0


def _post_document(post: ForumPost) -> _PostDoc:
    answer_text = " ".join(a.body for a in post.answers)
    spans = code_spans(post.question_body) + code_spans(answer_text)
    counts = {
        "title": Counter(tokenize_prose(post.title)),
        "question": Counter(tokenize_prose(post.question_body)),
        "answers": Counter(tokenize_prose(answer_text)),
        "code": Counter(tokenize_code("\n".join(spans))),
    }
    gate = set(counts["title"]) | set(counts["code"])
    return _PostDoc(post.post_id, counts, gate)


def build_post_index(posts: list[ForumPost]) -> PostIndex:
    index = PostIndex()
    index.doc_freq = {name: Counter() for name in FIELD_WEIGHTS}
    for post in posts:
        doc = _post_document(post)
        index.posts[post.post_id] = post
        index.docs[post.post_id] = doc
        for fieldname, counts in doc.field_counts.items():
            for term in counts:
                index.doc_freq[fieldname][term] += 1
    return index


def query_terms(name: tuple[str, ...]) -> list[str]:
    """Rendered full path plus each component, lowercased and deduplicated."""
    terms = [".".join(name).lower()]
    for component in name:
        low = component.lower()
        if low not in terms:
            terms.append(low)
    return terms


def link_posts(name: tuple[str, ...], index: PostIndex, k: int = MAX_POST_MATCHES) -> list[ForumLink]:
    """Rank posts for a qualified name; ties break toward lower post ids.

    A post is only eligible when the first path component appears in its
    title or code spans, which suppresses same-name hits from other
    languages' identically named classes.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    k = min(k, MAX_POST_MATCHES)
    terms = query_terms(name)
    gate_term = name[0].lower()
    scored: list[tuple[float, int]] = []
    for post_id in sorted(index.docs):
        doc = index.docs[post_id]
        if gate_term not in doc.first_match_tokens:
            continue
        score = 0.0
        for fieldname, weight in FIELD_WEIGHTS.items():
            counts = doc.field_counts[fieldname]
            for term in terms:
                tf = counts.get(term, 0)
                if tf:
                    score += weight * tf * index.idf(fieldname, term)
        if score > 0.0:
            scored.append((score, post_id))
    scored.sort(key=lambda pair: (-pair[0], pair[1]))
    return [ForumLink(name, post_id, score) for score, post_id in scored[:k]]


def sample_links(links: list[ForumLink], n: int = 100, seed: int = 0) -> list[ForumLink]:
    """Seeded sample of links for manual relevance annotation."""
    ordered = sorted(links, key=lambda l: (l.qualified_name, l.post_id))
    if len(ordered) <= n:
        return ordered
    return random.Random(seed).sample(ordered, n)
