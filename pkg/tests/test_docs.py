from __future__ import annotations

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from codegraph.docs import (
    DocEntry,
    build_index,
    class_hierarchy,
    extract_docs,
    load_entries,
    save_entries,
)
from codegraph.frontend import SourceFile, parse_source
from conftest import FIXTURES


def _extract(module: tuple[str, ...], src: str):
    tree = parse_source(SourceFile.from_bytes("mod.py", src.encode()))
    return extract_docs(module, tree)


def test_class_and_method_entries():
    entries = _extract(("m",), "class C:\n    def f(self):\n        'doc'\n")
    by_name = {e.rendered_name(): e for e in entries}
    assert by_name["m.C"].kind == "class"
    assert by_name["m.C.f"].kind == "method"
    assert by_name["m.C.f"].docstring == "doc"


def test_missing_docstring_is_empty():
    entries = _extract(("m",), "def f(x):\n    return x\n")
    assert entries[0].docstring == ""
    assert entries[0].kind == "function"


def test_params_defaults_and_annotations():
    entries = _extract(("m",), "def f(a, b: int = 3, *args, c=None) -> str:\n    pass\n")
    entry = entries[0]
    params = {p.name: p for p in entry.params}
    assert not params["a"].has_default
    assert params["b"].has_default and params["b"].annotation == "int"
    assert "*args" in params and params["c"].has_default
    assert entry.returns == "str"


def test_base_resolution_through_imports():
    src = "from sklearn.svm._base import BaseSVC\n\nclass SVC(BaseSVC):\n    'doc'\n"
    entries = _extract(("sklearn", "svm"), src)
    svc = next(e for e in entries if e.rendered_name() == "sklearn.svm.SVC")
    assert svc.bases == (("sklearn", "svm", "_base", "BaseSVC"),)


def test_base_resolution_same_module_and_unresolved():
    src = "class A:\n    pass\n\nclass B(A, Foo):\n    pass\n"
    entries = _extract(("m",), src)
    b = next(e for e in entries if e.rendered_name() == "m.B")
    assert b.bases == (("m", "A"),)
    assert b.unresolved_bases == ("Foo",)


def test_fixture_module_extraction():
    path = FIXTURES / "modules" / "sklearn" / "svm.py"
    tree = parse_source(SourceFile.from_bytes(str(path), path.read_bytes()))
    entries = extract_docs(("sklearn", "svm"), tree)
    names = {e.rendered_name() for e in entries}
    assert {"sklearn.svm.SVC", "sklearn.svm.SVC.fit", "sklearn.svm.NuSVC"} <= names


# -- index ---------------------------------------------------------------------


def test_index_exact_and_prefix_depth():
    index = build_index(
        [DocEntry(("pandas",), "function"), DocEntry(("pandas", "read_csv"), "function")]
    )
    assert index.exact(("pandas", "read_csv")) is not None
    assert index.longest_prefix(("pandas", "read_csv", "merge")).rendered_name() == "pandas.read_csv"


def test_duplicate_entries_overwrite_with_warning():
    index = build_index(
        [
            DocEntry(("m", "f"), "function", "first"),
            DocEntry(("m", "f"), "function", "second"),
        ]
    )
    assert len(index) == 1
    assert index.duplicate_warnings == 1
    assert index.exact(("m", "f")).docstring == "second"


def _linear_scan_longest_prefix(keys: list[tuple[str, ...]], query: tuple[str, ...]):
    best = None
    for key in keys:
        if len(key) <= len(query) and tuple(query[: len(key)]) == key and (
            best is None or len(key) > len(best)
        ):
            best = key
    return best


def test_longest_prefix_against_linear_scan_10k():
    rng = random.Random(42)
    parts = ["alpha", "beta", "gamma", "delta", "eps"]
    keys = {
        tuple(rng.choice(parts) for _ in range(rng.randint(1, 4))) for _ in range(10_000)
    }
    index = build_index([DocEntry(k, "function") for k in sorted(keys)])
    key_list = sorted(keys)
    for _ in range(100):
        probe = tuple(rng.choice(parts) for _ in range(rng.randint(1, 6)))
        expected = _linear_scan_longest_prefix(key_list, probe)
        got = index.longest_prefix(probe)
        assert (got.qualified_name if got else None) == expected


@given(
    st.sets(
        st.tuples(*[st.sampled_from("abcd")] * 2).map(tuple), min_size=0, max_size=12
    ),
    st.lists(st.sampled_from("abcd"), min_size=1, max_size=5),
)
@settings(max_examples=200, deadline=None)
def test_longest_prefix_is_maximal_prefix(keys, query_parts):
    keys = {tuple(k) for k in keys}
    index = build_index([DocEntry(k, "function") for k in sorted(keys)])
    query = tuple(query_parts)
    got = index.longest_prefix(query)
    expected = _linear_scan_longest_prefix(sorted(keys), query)
    assert (got.qualified_name if got else None) == expected


# -- hierarchy --------------------------------------------------------------------


def test_hierarchy_pairs_and_unresolved_count():
    entries = _extract(
        ("m",), "class A:\n    pass\nclass B(A):\n    pass\nclass C(Foo):\n    pass\n"
    )
    pairs, unresolved = class_hierarchy(entries)
    assert (("m", "B"), ("m", "A")) in pairs
    assert unresolved == 1


def test_diamond_bases_produce_two_pairs():
    entries = _extract(("m",), "class B:\n    pass\nclass C:\n    pass\nclass A(B, C):\n    pass\n")
    pairs, _ = class_hierarchy(entries)
    assert (("m", "A"), ("m", "B")) in pairs and (("m", "A"), ("m", "C")) in pairs


def test_entries_survive_save_load_round_trip(tmp_path):
    path = FIXTURES / "modules" / "pandas" / "__init__.py"
    tree = parse_source(SourceFile.from_bytes(str(path), path.read_bytes()))
    entries = extract_docs(("pandas",), tree)
    out = tmp_path / "index.jsonl"
    save_entries(entries, str(out))
    loaded = load_entries(str(out))
    assert sorted(loaded, key=lambda e: e.rendered_name()) == sorted(
        entries, key=lambda e: e.rendered_name()
    )
