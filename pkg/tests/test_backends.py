"""Coordinate backend, graph files: parsing, structural checks, admission."""
import pytest

from crystal_ca import (
    AlgebraSpec,
    BackendMissing,
    BuiltinA1,
    GraphError,
    admission_errors,
    delta,
    enumerate_crystal,
    export_graph_text,
    load_graph,
    make_backend,
    parse_element,
)

A1_1 = AlgebraSpec("A1", 1)
A1_2 = AlgebraSpec("A1", 2)


def write_graph(tmp_path, text, name="g.graph"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_builtin_frozen_ops():
    bk = BuiltinA1(2)
    top = delta(A1_2, 4, "1")
    assert top.x == (4, 0, 0)
    assert bk.f(1, top).x == (3, 1, 0)
    assert bk.f(2, top) is None
    assert bk.f(0, top) is None
    bot = delta(A1_2, 4, "3")
    assert bk.e(2, bot).x == (0, 1, 3)
    assert bk.f(0, bot).x == (1, 0, 3)
    assert bk.eps(0, top) == 4 and bk.phi(0, bot) == 4


def test_builtin_matches_definitions():
    bk = BuiltinA1(2)
    for el in enumerate_crystal(A1_2, 3):
        for i in A1_2.index_set:
            up, down = bk.e(i, el), bk.f(i, el)
            assert (up is None) == (bk.eps(i, el) == 0)
            assert (down is None) == (bk.phi(i, el) == 0)
            if up is not None:
                assert bk.f(i, up) == el


def test_export_roundtrip(a1_2):
    text = export_graph_text(a1_2, 2)
    assert text == export_graph_text(a1_2, 2)
    assert text.splitlines()[0] == "A1 2 2"


def test_export_load_admission_roundtrip(tmp_path, a1_2):
    path = write_graph(tmp_path, export_graph_text(a1_2, 2))
    provider = load_graph(path)
    assert admission_errors(provider) == []
    bk = make_backend(A1_2, (path,))
    assert 2 in bk.graphs
    for el in enumerate_crystal(A1_2, 2):
        for i in A1_2.index_set:
            assert bk.f(i, el) == a1_2.f(i, el)
            assert bk.eps(i, el) == a1_2.eps(i, el)


def test_hand_built_two_node_graph(tmp_path):
    path = write_graph(tmp_path, "A1 1 1\n1 1 2\n2 0 1\n")
    provider = load_graph(path)
    one = parse_element(A1_1, "1")
    assert provider.f(1, one).word() == "2"
    assert provider.e(1, one) is None
    assert provider.phi(0, one) == 0 and provider.eps(0, one) == 1


def test_comments_and_blank_lines(tmp_path):
    text = "# two letters\n\nA1 1 1  # header\n1 1 2\n\n2 0 1 # wrap\n"
    provider = load_graph(write_graph(tmp_path, text))
    assert provider.l == 1


@pytest.mark.parametrize("text,fragment", [
    ("", "empty graph file"),
    ("A1 1\n", "header"),
    ("Z9 1 1\n", "unknown family"),
    ("A1 one 1\n", "must be integers"),
    ("A1 1 0\n", "must be positive"),
    ("A1 1 1\n1 1\n", "source color target"),
    ("A1 1 1\n1 x 2\n", "color must be an integer"),
    ("A1 1 1\n1 5 2\n", "outside 0..1"),
    ("A1 1 1\nz 1 2\n", "unexpected character"),
    ("A1 1 2\n11 1 12\n11 1 22\n", "second 1-arrow out of"),
    ("A1 1 2\n11 1 12\n22 1 12\n", "two 1-arrows into"),
    ("A1 1 2\n11 1 12\n12 1 11\n22 0 12\n", "form a cycle"),
    ("A1 1 2\n11 1 12\n", "unreached"),
])
def test_structural_rejections(tmp_path, text, fragment):
    with pytest.raises(GraphError, match=fragment):
        load_graph(write_graph(tmp_path, text))


def test_tampered_graph_fails_admission(tmp_path):
    # rewired 1-arrow: structurally legal, but the operator laws break
    text = "A1 1 2\n11 1 22\n22 0 12\n12 0 11\n"
    path = write_graph(tmp_path, text)
    with pytest.raises(GraphError, match="admission failed"):
        load_graph(path)
    provider = load_graph(path, admit=False)
    assert admission_errors(provider) != []


def test_admit_flag_skips_checks(tmp_path):
    text = "A1 1 2\n11 1 22\n22 0 12\n12 0 11\n"
    provider = load_graph(write_graph(tmp_path, text), admit=False)
    assert provider.phi(1, parse_element(A1_1, "12")) == 0


def test_make_backend_family_mismatch(tmp_path):
    path = write_graph(tmp_path, "A1 1 1\n1 1 2\n2 0 1\n")
    with pytest.raises(GraphError, match="need C1 rank 2"):
        make_backend(AlgebraSpec("C1", 2), (path,))


def test_make_backend_duplicate_level(tmp_path):
    path = write_graph(tmp_path, "A1 1 1\n1 1 2\n2 0 1\n")
    with pytest.raises(GraphError, match="duplicate graph"):
        make_backend(A1_1, (path, path))


def test_backend_missing_without_graphs():
    spec = AlgebraSpec("A2odd", 3)
    bk = make_backend(spec)
    assert not bk.covers(1)
    el = delta(spec, 1, "1")
    with pytest.raises(BackendMissing):
        bk.eps(1, el)


def test_builtin_covers_every_level(a1_1):
    assert a1_1.covers(1) and a1_1.covers(17)


def test_graph_preferred_over_builtin(tmp_path, a1_1):
    # a registered graph serves its level; the coordinate rules serve the rest
    path = write_graph(tmp_path, "A1 1 1\n1 1 2\n2 0 1\n")
    bk = make_backend(A1_1, (path,))
    assert bk.provider_for(1) is bk.graphs[1]
    assert isinstance(bk.provider_for(3), BuiltinA1)
