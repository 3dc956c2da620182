"""Element construction, text round trips, and enumeration."""
import pytest

from crystal_ca import (
    AlgebraSpec,
    CapExceeded,
    CrystalElement,
    FormatError,
    Tensor,
    delta,
    enumerate_crystal,
    from_counts,
    parse_element,
    parse_tensor,
)

A13 = AlgebraSpec("A1", 3)
A2ODD3 = AlgebraSpec("A2odd", 3)
A2EVEN2 = AlgebraSpec("A2even", 2)
B13 = AlgebraSpec("B1", 3)
C12 = AlgebraSpec("C1", 2)
D14 = AlgebraSpec("D1", 4)
D22 = AlgebraSpec("D2", 2)


def test_coordinate_validation():
    CrystalElement(A13, 6, (3, 2, 1, 0))
    with pytest.raises(ValueError):
        CrystalElement(A13, 6, (3, 2, 1, 1))
    with pytest.raises(ValueError):
        CrystalElement(A13, 6, (3, 2, 1))
    with pytest.raises(ValueError):
        CrystalElement(A13, 6, (7, -1, 0, 0))
    with pytest.raises(ValueError):
        CrystalElement(A13, 0, (0, 0, 0, 0))


def test_family_constraints():
    # stored middle slot is 0/1 only
    with pytest.raises(ValueError):
        CrystalElement(B13, 5, (1, 0, 0, 2, 1, 0, 1))
    CrystalElement(B13, 5, (1, 0, 0, 1, 2, 1, 0))
    # at most one of the two middle slots of D1
    with pytest.raises(ValueError):
        CrystalElement(D14, 4, (1, 0, 0, 1, 1, 0, 0, 1))
    CrystalElement(D14, 4, (1, 0, 0, 2, 0, 0, 0, 1))
    # parity for C1
    with pytest.raises(ValueError):
        CrystalElement(C12, 3, (1, 0, 0, 1))
    CrystalElement(C12, 3, (1, 0, 0, 2))
    # slack allowed only where the family permits it
    CrystalElement(A2EVEN2, 3, (1, 0, 0, 0))
    with pytest.raises(ValueError):
        CrystalElement(A2ODD3, 3, (1, 0, 0, 0, 0, 0))


def test_derived_coordinates():
    el = CrystalElement(A2EVEN2, 3, (1, 0, 0, 0))
    assert el.get("0") == 2
    el = CrystalElement(C12, 4, (1, 0, 0, 1))
    assert el.get("0") == 1
    el = CrystalElement(D22, 5, (1, 0, 1, 1, 0))
    assert el.get("e") == 2
    assert el.get("0") == 1


def test_words_and_parsing_roundtrip():
    assert CrystalElement(A13, 6, (3, 2, 1, 0)).word() == "111223"
    el = from_counts(A2ODD3, {"1": 2, "2": 1, "3": 3, "3b": 1})
    assert el.word() == "1123333b"
    assert parse_element(A2ODD3, "1123333b") == el
    assert parse_element(A2ODD3, "3b 3 31 2 31") == el  # order and spaces free
    d2 = from_counts(D22, {"1": 1, "0": 1, "e": 2, "2b": 1})
    assert d2.word() == "10ee2b"
    assert d2.l == 5
    assert parse_element(D22, "10ee2b") == d2


def test_capacity_inference_per_family():
    assert parse_element(A13, "1122").l == 4
    assert parse_element(B13, "1203b").l == 4          # stored zero counts once
    assert parse_element(C12, "1102b").l == 5          # derived zero counts twice
    assert parse_element(A2EVEN2, "120").l == 3
    assert parse_element(D22, "10ee2b").l == 5
    with pytest.raises(FormatError):
        parse_element(A13, "112", l=4)


def test_parse_errors_carry_position():
    with pytest.raises(FormatError) as err:
        parse_element(A13, "11x23")
    assert err.value.pos == 2
    with pytest.raises(FormatError) as err:
        parse_element(A13, "1152")
    assert err.value.pos == 2
    with pytest.raises(FormatError):
        parse_element(A13, "")
    with pytest.raises(FormatError) as err:
        parse_element(A13, "112b")  # bars are not A1 letters
    assert err.value.pos == 2
    with pytest.raises(FormatError):
        parse_element(A2ODD3, "12e")  # empty marker only in D2


def test_parse_tensor():
    t = parse_tensor(A13, "111223.344")
    assert t.shape == (6, 3)
    assert t.word() == "111223.344"
    t = parse_tensor(A2ODD3, "1 2b.3.3b 1b.2")
    assert [f.word() for f in t.factors] == ["12b", "3", "3b1b", "2"]
    with pytest.raises(FormatError):
        parse_tensor(A13, "11..22")
    with pytest.raises(FormatError):
        parse_tensor(A13, "11.22", shape=(2, 2, 2))


def test_tensor_validation():
    a = parse_element(A13, "12")
    b = parse_element(A2ODD3, "12")
    with pytest.raises(ValueError):
        Tensor((a, b))
    with pytest.raises(ValueError):
        Tensor(())


def test_rank_printability_guard():
    big = AlgebraSpec("A1", 9)
    with pytest.raises(FormatError):
        delta(big, 1, "1").word()
    with pytest.raises(FormatError):
        parse_element(big, "1")


def test_delta():
    assert delta(A13, 6, "1").word() == "111111"
    assert delta(A2ODD3, 2, "3b").word() == "3b3b"
    assert delta(D14, 3, "4").x == (0, 0, 0, 3, 0, 0, 0, 0)
    with pytest.raises(ValueError):
        delta(B13, 2, "0")
    with pytest.raises(ValueError):
        delta(D22, 2, "e")


def test_enumeration_counts_and_order():
    assert [el.x for el in enumerate_crystal(AlgebraSpec("A1", 1), 1)] == [(0, 1), (1, 0)]
    assert len(enumerate_crystal(A13, 3)) == 20
    assert len(enumerate_crystal(A2EVEN2, 1)) == 5
    assert len(enumerate_crystal(C12, 2)) == 11
    assert len(enumerate_crystal(D14, 1)) == 8
    assert len(enumerate_crystal(D22, 1)) == 6
    els = enumerate_crystal(A13, 2)
    assert [e.x for e in els] == sorted(e.x for e in els)
    assert len(set(els)) == len(els)


def test_enumeration_respects_constraints():
    for el in enumerate_crystal(D14, 2):
        assert el.x[3] == 0 or el.x[4] == 0
    for el in enumerate_crystal(C12, 3):
        assert (3 - sum(el.x)) % 2 == 0
    for el in enumerate_crystal(B13, 2):
        assert el.x[3] in (0, 1)


def test_enumeration_cap():
    with pytest.raises(CapExceeded):
        enumerate_crystal(A13, 3, cap=5)
