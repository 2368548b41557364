import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solcot.chem import (
    BondOrder,
    KekulizationError,
    SmilesError,
    SmilesSyntaxError,
    StereochemistryIgnored,
    UnbalancedParenthesis,
    UnclosedRing,
    UnknownAtomSymbol,
    ValenceViolation,
    compute_descriptors,
    parse_smiles,
)
from solcot.chem.elements import ORGANIC_SUBSET


def test_benzene_graph():
    m = parse_smiles("c1ccccc1")
    assert len(m.atoms) == 6 and all(a.aromatic and a.element == "C" for a in m.atoms)
    assert len(m.bonds) == 6 and all(b.order is BondOrder.AROMATIC for b in m.bonds)
    assert len(m.rings) == 1
    assert [a.h_count for a in m.atoms] == [1] * 6


def test_acetic_acid_graph():
    m = parse_smiles("CC(=O)O")
    assert len(m.atoms) == 4
    assert [b.order for b in m.bonds].count(BondOrder.DOUBLE) == 1
    assert m.rings == ()
    assert [a.h_count for a in m.atoms] == [3, 0, 0, 1]


@pytest.mark.parametrize(
    "text, error, position",
    [
        ("C1CC", UnclosedRing, 1),
        ("CC(C", UnbalancedParenthesis, 2),
        ("CC)C", UnbalancedParenthesis, 2),
        ("CXx", UnknownAtomSymbol, 1),
        ("C*", UnknownAtomSymbol, 1),
        ("C=C=C=C(C)(C)(C)C", ValenceViolation, 6),
        ("c1cccc1", KekulizationError, 0),
        ("", SmilesSyntaxError, 0),
    ],
)
def test_errors_name_the_position(text, error, position):
    with pytest.raises(error) as info:
        parse_smiles(text)
    assert info.value.position == position


def test_bracket_atoms_charges_and_hydrogens():
    m = parse_smiles("[NH4+].[O-]C(=O)C")
    assert m.atoms[0].charge == 1 and m.atoms[0].h_count == 4
    assert m.atoms[1].charge == -1 and m.atoms[1].h_count == 0


def test_two_digit_ring_closure():
    m = parse_smiles("C%12CC%12")
    assert len(m.rings) == 1 and all(a.in_ring for a in m.atoms)


@pytest.mark.parametrize("text", ["C[C@H](O)N", "F/C=C/F"])
def test_stereo_ignored_with_warning(text):
    with pytest.warns(StereochemistryIgnored):
        m = parse_smiles(text)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        plain = parse_smiles(text.replace("@", "").replace("/", ""))
    assert [a.h_count for a in m.atoms] == [a.h_count for a in plain.atoms]


def test_isotopes_accepted():
    m = parse_smiles("[13CH4]")
    assert m.atoms[0].isotope == 13 and m.atoms[0].h_count == 4


def _check_invariants(m):
    seen = set()
    for b in m.bonds:
        assert 0 <= b.begin < len(m.atoms) and 0 <= b.end < len(m.atoms)
        assert b.begin != b.end
        key = frozenset((b.begin, b.end))
        assert key not in seen
        seen.add(key)
    ring_atoms = {i for r in m.rings for i in r}
    for i, a in enumerate(m.atoms):
        assert a.h_count >= 0
        if a.aromatic:
            assert i in ring_atoms
        if a.element in ORGANIC_SUBSET and a.charge == 0 and not a.aromatic:
            assert m.valence(i) in ORGANIC_SUBSET[a.element]


def test_graph_invariants_on_esol(esol_records):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for r in esol_records:
            _check_invariants(parse_smiles(r.smiles))


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=1127))
def test_parse_round_trip_determinism(esol_records, k):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a, b = parse_smiles(esol_records[k].smiles), parse_smiles(esol_records[k].smiles)
    assert a.atoms == b.atoms and a.bonds == b.bonds and a.rings == b.rings
    assert compute_descriptors(a) == compute_descriptors(b)


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="CNOcno()=#123[]+-H%@/\\Bclr", max_size=20))
def test_parser_fails_only_with_its_own_errors(text):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            parse_smiles(text)
        except SmilesError:
            pass
