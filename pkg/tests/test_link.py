from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codegraph.docs import DocEntry, build_index
from codegraph.link import (
    FormatError,
    build_post_index,
    ingest_posts,
    link_path,
    link_posts,
    link_stats,
    sample_links,
    tokenize_code,
    tokenize_prose,
)
from conftest import FIXTURES, analyze_text
from oracles import brute_tfidf_ranking

PANDAS_INDEX = build_index(
    [DocEntry(("pandas",), "function"), DocEntry(("pandas", "read_csv"), "function")]
)


def test_direct_partial_missed_examples():
    assert link_path(("pandas", "read_csv"), PANDAS_INDEX).outcome == "direct"
    partial = link_path(("pandas", "read_csv", "merge"), PANDAS_INDEX)
    assert partial.outcome == "partial"
    assert partial.matched_prefix == ("pandas", "read_csv")
    assert link_path(("numpy", "array"), PANDAS_INDEX).outcome == "missed"


def test_prefix_key_without_root_still_partial():
    index = build_index([DocEntry(("pandas", "read_csv"), "function")])
    assert link_path(("pandas", "read_csv", "merge"), index).outcome == "partial"
    assert link_path(("pandas",), index).outcome == "missed"


@given(
    st.sets(st.tuples(*[st.sampled_from("ab")] * 2), min_size=0, max_size=6),
    st.lists(st.sampled_from("ab"), min_size=1, max_size=4),
)
@settings(max_examples=200, deadline=None)
def test_link_trichotomy(keys, query_parts):
    index = build_index([DocEntry(tuple(k), "function") for k in sorted(keys)])
    result = link_path(tuple(query_parts), index)
    assert result.outcome in ("direct", "partial", "missed")
    if result.outcome == "direct":
        assert result.matched_prefix == result.query
    elif result.outcome == "partial":
        assert result.matched_prefix != result.query
        assert result.query[: len(result.matched_prefix)] == result.matched_prefix


def test_adding_entries_never_demotes():
    rank = {"missed": 0, "partial": 1, "direct": 2}
    query = ("pandas", "read_csv", "merge")
    grow = [
        DocEntry(("pandas",), "function"),
        DocEntry(("pandas", "read_csv"), "function"),
        DocEntry(("pandas", "read_csv", "merge"), "function"),
    ]
    previous = rank[link_path(query, build_index([])).outcome]
    for upto in range(1, len(grow) + 1):
        outcome = rank[link_path(query, build_index(grow[:upto])).outcome]
        assert outcome >= previous
        previous = outcome


def test_link_stats_unique_label_counting():
    _, g1 = analyze_text('import pandas as pd\npd.read_csv("a")\n')
    stats = link_stats([g1], PANDAS_INDEX)
    assert stats["direct"]["function"] == 2  # pandas (import), pandas.read_csv
    _, g2 = analyze_text('import pandas as pd\npd.read_csv("a").merge(x)\n')
    stats = link_stats([g1, g2], PANDAS_INDEX)
    assert stats["partial"]["function"] == 1
    total = sum(sum(by_kind.values()) for by_kind in stats.values())
    labels = {n.label for g in (g1, g2) for n in g.nodes.values() if n.label}
    assert total == len(labels)


def test_link_stats_empty_corpus_all_zero():
    stats = link_stats([], PANDAS_INDEX)
    assert all(v == 0 for by_kind in stats.values() for v in by_kind.values())


def test_link_stats_direct_kind_from_doc_entry():
    index = build_index([DocEntry(("sklearn", "svm", "SVC"), "class")])
    _, g = analyze_text("from sklearn import svm\nm = svm.SVC()\n")
    stats = link_stats([g], index)
    assert stats["direct"]["class"] == 1


# -- ingestion ---------------------------------------------------------------


def test_ingest_question_with_answers(tmp_path):
    dump = tmp_path / "posts.jsonl"
    dump.write_text(
        '{"id": 1, "postTypeId": 1, "title": "T", "body": "B", "tags": ["x"], "score": 3}\n'
        '{"id": 2, "postTypeId": 2, "parentId": 1, "body": "A1", "score": 1}\n'
        '{"id": 3, "postTypeId": 2, "parentId": 1, "body": "A2", "score": 0}\n'
    )
    result = ingest_posts(dump)
    assert len(result.posts) == 1
    assert [a.answer_id for a in result.posts[0].answers] == [2, 3]
    assert result.posts[0].tags == ("x",)
    assert result.skipped == 0


def test_orphan_answer_skipped_and_counted(tmp_path):
    dump = tmp_path / "posts.jsonl"
    dump.write_text(
        '{"id": 1, "postTypeId": 1, "title": "T", "body": "B"}\n'
        '{"id": 9, "postTypeId": 2, "parentId": 777, "body": "orphan"}\n'
    )
    result = ingest_posts(dump)
    assert len(result.posts) == 1
    assert result.skipped == 1


def test_ten_post_fixture_ordered_by_id():
    result = ingest_posts(FIXTURES / "posts10.jsonl")
    ids = [p.post_id for p in result.posts]
    assert ids == sorted(ids) and len(ids) == 10
    assert result.skipped == 0


def test_xml_row_format_accepted(tmp_path):
    dump = tmp_path / "posts.xml"
    dump.write_text(
        "<posts>\n"
        '  <row Id="5" PostTypeId="1" Title="How to read csv" Body="&lt;code&gt;pandas.read_csv&lt;/code&gt;" Tags="&lt;pandas&gt;" Score="2" />\n'
        '  <row Id="6" PostTypeId="2" ParentId="5" Body="use read_csv" Score="1" />\n'
        "</posts>\n"
    )
    result = ingest_posts(dump)
    assert len(result.posts) == 1
    post = result.posts[0]
    assert post.answers[0].answer_id == 6
    assert post.tags == ("pandas",)
    assert "pandas.read_csv" in post.question_body


def test_unrecognized_format_raises(tmp_path):
    dump = tmp_path / "posts.bin"
    dump.write_text("just some prose, definitely not rows\nmore prose\n")
    with pytest.raises(FormatError):
        ingest_posts(dump)


# -- retrieval ------------------------------------------------------------------


def test_tokenizers_follow_contract():
    assert tokenize_prose("Use sklearn.svm.SVC today!") == ["use", "sklearn", "svm", "svc", "today"]
    toks = tokenize_code("model = sklearn.svm.SVC(kernel='rbf')")
    assert "sklearn.svm.svc" in toks and "svc" in toks and "read_csv" not in toks
    assert "model" in toks


def test_ranking_matches_brute_force_oracle():
    posts = ingest_posts(FIXTURES / "posts10.jsonl").posts
    index = build_post_index(posts)
    for name in [
        ("sklearn", "svm", "SVC"),
        ("pandas", "read_csv"),
        ("sklearn", "model_selection", "train_test_split"),
        ("numpy", "mean"),
        ("pandas", "DataFrame", "merge"),
    ]:
        got = [(l.post_id, l.score) for l in link_posts(name, index)]
        expected = brute_tfidf_ranking(posts, name, 5000)
        assert [p for p, _ in got] == [p for p, _ in expected], name
        for (_, a), (_, b) in zip(got, expected):
            assert a == pytest.approx(b)


def test_scores_nonincreasing_and_capped():
    posts = ingest_posts(FIXTURES / "posts10.jsonl").posts
    index = build_post_index(posts)
    links = link_posts(("sklearn", "svm", "SVC"), index, k=999_999)
    scores = [l.score for l in links]
    assert scores == sorted(scores, reverse=True)
    assert len(links) <= 5000


def test_no_term_hits_yields_empty():
    posts = ingest_posts(FIXTURES / "posts10.jsonl").posts
    index = build_post_index(posts)
    assert link_posts(("tensorflow", "keras"), index) == []


def test_k_one_returns_single_best():
    posts = ingest_posts(FIXTURES / "posts10.jsonl").posts
    index = build_post_index(posts)
    links = link_posts(("pandas", "read_csv"), index, k=1)
    assert len(links) == 1
    assert links[0].post_id == 102  # the read_csv performance question


def test_cross_language_gate_excludes_java_post():
    posts = ingest_posts(FIXTURES / "posts10.jsonl").posts
    index = build_post_index(posts)
    hits = {l.post_id for l in link_posts(("sklearn", "svm", "SVC"), index)}
    assert 108 not in hits  # the Java Formatter question


def test_sample_links_deterministic():
    posts = ingest_posts(FIXTURES / "posts10.jsonl").posts
    index = build_post_index(posts)
    links = link_posts(("pandas", "read_csv"), index)
    assert sample_links(links, n=2, seed=5) == sample_links(links, n=2, seed=5)
    assert len(sample_links(links, n=2, seed=5)) == min(2, len(links))
