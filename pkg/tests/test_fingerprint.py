import pytest
from hypothesis import given
from hypothesis import strategies as st

from solcot.chem import Fingerprint, WidthMismatch, morgan_fingerprint, parse_smiles, tanimoto


def fp(bits, n_bits=2048):
    return Fingerprint(frozenset(bits), n_bits=n_bits)


def test_deterministic():
    a = morgan_fingerprint(parse_smiles("CC(=O)Nc1ccc(O)cc1"))
    b = morgan_fingerprint(parse_smiles("CC(=O)Nc1ccc(O)cc1"))
    assert a == b and a.popcount > 0


def test_radius_zero_is_atom_identities():
    f = morgan_fingerprint(parse_smiles("CO"), radius=0)
    assert 1 <= f.popcount <= 2


def test_benzene_and_cyclohexane_differ():
    a = morgan_fingerprint(parse_smiles("c1ccccc1"))
    b = morgan_fingerprint(parse_smiles("C1CCCCC1"))
    assert a != b


def test_radius_grows_the_bit_set():
    m = parse_smiles("CCCCO")
    sizes = [morgan_fingerprint(m, radius=r).popcount for r in range(4)]
    assert sizes == sorted(sizes)


@pytest.mark.parametrize("radius, n_bits", [(-1, 2048), (2, 1000), (2, 32)])
def test_rejects_bad_parameters(radius, n_bits):
    with pytest.raises(ValueError):
        morgan_fingerprint(parse_smiles("C"), radius=radius, n_bits=n_bits)


def test_fixed_width_and_popcount_bound():
    f = morgan_fingerprint(parse_smiles("c1ccc2ccccc2c1"), n_bits=64)
    assert f.n_bits == 64 and f.popcount <= 64 and all(0 <= b < 64 for b in f.bits)
    assert f.to_array().shape == (64,) and f.to_array().sum() == f.popcount


def test_tanimoto_examples():
    x = fp({1, 5, 9})
    assert tanimoto(x, x) == 1.0
    assert tanimoto(fp({1, 2}), fp({3, 4})) == 0.0
    assert tanimoto(fp({1, 2, 3}), fp({2, 3, 4})) == 0.5
    assert tanimoto(fp(set()), fp(set())) == 1.0


def test_tanimoto_width_mismatch():
    with pytest.raises(WidthMismatch):
        tanimoto(fp({1}, 2048), fp({1}, 1024))


bitsets = st.frozensets(st.integers(min_value=0, max_value=255), max_size=40)


@given(bitsets, bitsets)
def test_tanimoto_properties(a, b):
    s = tanimoto(fp(a, 256), fp(b, 256))
    assert s == tanimoto(fp(b, 256), fp(a, 256))
    assert 0.0 <= s <= 1.0
    assert (s == 1.0) == (a == b)
