import pytest

from solcot.chem import parse_smiles
from solcot.chem.smarts import MatchGraph, SmartsParseError, compile_smarts


def count(pattern: str, smiles: str, explicit_h: bool = False) -> int:
    g = MatchGraph(parse_smiles(smiles), explicit_hydrogens=explicit_h)
    return len(compile_smarts(pattern).find_matches(g))


@pytest.mark.parametrize(
    "pattern, smiles, expected",
    [
        ("C(=O)[OH]", "CC(=O)O", 1),
        ("c", "c1ccccc1", 6),
        ("[c,n]", "c1ccncc1", 6),
        ("[#7]", "CN(C)C=O", 1),
        ("[!#6]", "OCCN", 2),
        ("[CX4]", "CC(C)(C)C", 5),
        ("[R]", "C1CC1C", 3),
        ("[r5]", "C1CCCC1CC1CC1", 5),
        ("[$(C=O)]", "CC(=O)C", 1),
        ("[O;H1]", "OCCO", 2),
        ("[N+]", "C[N+](C)(C)C", 1),
        ("*~*", "C#N", 1),
        ("C@C", "C1CC1", 3),
        ("C!@C", "C1CC1C", 1),
        ("[#1]", "CO", 4),
    ],
)
def test_match_counts(pattern, smiles, expected):
    assert count(pattern, smiles, explicit_h=pattern == "[#1]") == expected


def test_default_bond_is_single_or_aromatic():
    assert count("cc", "c1ccccc1") == 6
    assert count("CC", "C=C") == 0


def test_ring_closure_in_pattern():
    assert count("C1CC1", "C1CC1") == 1


@pytest.mark.parametrize("bad", ["C(", "[C", "C1C", "[Qq]"])
def test_parse_errors(bad):
    with pytest.raises(SmartsParseError):
        compile_smarts(bad)
