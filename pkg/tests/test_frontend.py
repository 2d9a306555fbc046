from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codegraph.frontend import (
    EncodingError,
    NotebookFormatError,
    SourceFile,
    SourceSyntaxError,
    collect_imports,
    dedupe,
    load_source_file,
    notebook_to_source,
    parse_source,
)
from conftest import FIXTURES


def _parse(text: str, path: str = "t.py"):
    return parse_source(SourceFile.from_bytes(path, text.encode("utf-8")))


def test_minimal_program_has_one_assign_node():
    tree = _parse("x = 1\n")
    assigns = [n for n in tree.nodes if n.kind == "assign"]
    assert len(assigns) == 1
    assert assigns[0].location.start_line == 1


def test_malformed_input_raises_at_line_one():
    with pytest.raises(SourceSyntaxError) as exc:
        _parse("def f(:\n")
    assert exc.value.line == 1
    assert exc.value.code == "syntax"


def test_python2_print_gets_distinct_error_code():
    with pytest.raises(SourceSyntaxError) as exc:
        _parse('print "hello"\n')
    assert exc.value.code == "python2"


def test_running_example_has_exactly_seven_calls():
    tree = _parse((FIXTURES / "running_example.py").read_text())
    assert len(tree.call_locations()) == 7


def test_call_locations_are_in_source_order():
    tree = _parse("a(b(), c())\nd()\n")
    locs = tree.call_locations()
    assert locs == sorted(locs)
    assert len(locs) == 4


def test_child_locations_contained_in_parent():
    tree = _parse("@dec\ndef f(x):\n    return g(x)\n")

    def check(node):
        for child in node.children:
            assert (node.location.start_line, node.location.start_col) <= (
                child.location.start_line,
                child.location.start_col,
            )
            assert (child.location.end_line, child.location.end_col) <= (
                node.location.end_line,
                node.location.end_col,
            )
            check(child)

    check(tree.root)


def test_undecodable_bytes_raise_encoding_error():
    with pytest.raises(EncodingError):
        parse_source(SourceFile.from_bytes("t.py", b"\xff\xfe x = 1"))


def test_bom_is_tolerated():
    tree = parse_source(SourceFile.from_bytes("t.py", b"\xef\xbb\xbfx = 1\n"))
    assert any(n.kind == "assign" for n in tree.nodes)


@given(st.binary(max_size=800))
@settings(max_examples=300, deadline=None)
def test_parse_never_panics_on_arbitrary_bytes(data):
    try:
        tree = parse_source(SourceFile.from_bytes("fuzz.py", data))
    except (SourceSyntaxError, EncodingError):
        return
    assert tree.root is not None


# -- digests and dedup -------------------------------------------------------


def test_digest_is_pure_function_of_content():
    a = SourceFile.from_bytes("a.py", b"x = 1\n")
    b = SourceFile.from_bytes("b.py", b"x = 1\n")
    assert a.digest == b.digest
    assert len(a.digest) == 32 and a.digest == a.digest.lower()


def test_dedupe_keeps_first_occurrence():
    a = SourceFile.from_bytes("a.py", b"same")
    a2 = SourceFile.from_bytes("a2.py", b"same")
    b = SourceFile.from_bytes("b.py", b"other")
    assert dedupe([a, a2]) == [a]
    assert dedupe([a, b, a2]) == [a, b]


def test_dedupe_hundred_files_forty_unique():
    files = [SourceFile.from_bytes(f"f{i}.py", f"v = {i % 40}\n".encode()) for i in range(100)]
    out = dedupe(files)
    # oracle: a plain hash-set scan over the same sequence
    seen, expected = set(), []
    for f in files:
        if f.digest not in seen:
            seen.add(f.digest)
            expected.append(f)
    assert out == expected
    assert len(out) == 40


@given(st.lists(st.binary(max_size=12), max_size=30))
@settings(max_examples=100, deadline=None)
def test_dedupe_is_idempotent(blobs):
    files = [SourceFile.from_bytes(f"f{i}", blob) for i, blob in enumerate(blobs)]
    once = dedupe(files)
    assert dedupe(once) == once


# -- imports -----------------------------------------------------------------


def test_import_binding_shapes():
    tree = _parse(
        "import pandas as pd\n"
        "import a.b\n"
        "import a.b as c\n"
        "from sklearn import svm\n"
        "from x import *\n"
    )
    bindings = collect_imports(tree)
    as_pairs = [(b.local_name, b.qualified_path, b.wildcard) for b in bindings]
    assert ("pd", ("pandas",), False) in as_pairs
    assert ("a", ("a",), False) in as_pairs
    assert ("c", ("a", "b"), False) in as_pairs
    assert ("svm", ("sklearn", "svm"), False) in as_pairs
    assert ("*", ("x",), True) in as_pairs


def test_imports_inside_functions_are_collected():
    tree = _parse("def f():\n    import numpy as np\n")
    assert [(b.local_name, b.qualified_path) for b in collect_imports(tree)] == [
        ("np", ("numpy",))
    ]


# -- notebooks ---------------------------------------------------------------


def test_notebook_cells_concatenate_with_boundaries():
    doc = {
        "cells": [
            {"cell_type": "markdown", "source": ["# title\n"]},
            {"cell_type": "code", "source": ["%matplotlib inline\n", "import numpy as np\n"]},
            {"cell_type": "code", "source": "np.arange(3)\n"},
        ]
    }
    out = notebook_to_source("n.ipynb", json.dumps(doc).encode()).decode()
    assert "# --- cell 1 ---" in out and "# --- cell 2 ---" in out
    assert "#%matplotlib inline" in out  # magics stripped as comments
    tree = parse_source(SourceFile.from_bytes("n.ipynb", out.encode()))
    assert len(tree.call_locations()) == 1


def test_notebook_fixture_loads_and_parses():
    path = FIXTURES / "corpus25" / "23_notebook.ipynb"
    source = load_source_file(str(path), path.read_bytes())
    tree = parse_source(source)
    assert len(tree.call_locations()) == 3  # read_csv, nlargest, plot


def test_bad_notebook_raises_format_error():
    with pytest.raises(NotebookFormatError):
        notebook_to_source("bad.ipynb", b"not json at all")
