"""Element data used by the parser and descriptor code.

Average atomic weights follow the IUPAC values commonly shipped with
cheminformatics toolkits (H = 1.008, C = 12.011, ...).
"""

from __future__ import annotations

from typing import NamedTuple


class Element(NamedTuple):
    number: int
    weight: float
    valences: tuple[int, ...]  # empty tuple = no valence model (metals)
    outer_electrons: int


ELEMENTS: dict[str, Element] = {
    "H": Element(1, 1.008, (1,), 1),
    "Li": Element(3, 6.941, (1,), 1),
    "B": Element(5, 10.812, (3,), 3),
    "C": Element(6, 12.011, (4,), 4),
    "N": Element(7, 14.007, (3,), 5),
    "O": Element(8, 15.999, (2,), 6),
    "F": Element(9, 18.998, (1,), 7),
    "Na": Element(11, 22.99, (1,), 1),
    "Mg": Element(12, 24.305, (2,), 2),
    "Al": Element(13, 26.982, (3,), 3),
    "Si": Element(14, 28.086, (4,), 4),
    "P": Element(15, 30.974, (3, 5), 5),
    "S": Element(16, 32.067, (2, 4, 6), 6),
    "Cl": Element(17, 35.453, (1,), 7),
    "K": Element(19, 39.098, (1,), 1),
    "Ca": Element(20, 40.078, (2,), 2),
    "Fe": Element(26, 55.845, (), 8),
    "Cu": Element(29, 63.546, (), 11),
    "Zn": Element(30, 65.39, (), 2),
    "Ge": Element(32, 72.61, (4,), 4),
    "As": Element(33, 74.922, (3, 5), 5),
    "Se": Element(34, 78.96, (2, 4, 6), 6),
    "Br": Element(35, 79.904, (1,), 7),
    "Sn": Element(50, 118.711, (2, 4), 4),
    "Te": Element(52, 127.6, (2, 4, 6), 6),
    "I": Element(53, 126.904, (1, 3, 5), 7),
    "Pt": Element(78, 195.078, (), 10),
    "Hg": Element(80, 200.59, (), 2),
    "Pb": Element(82, 207.2, (2, 4), 4),
}

SYMBOL_BY_NUMBER = {e.number: s for s, e in ELEMENTS.items()}

# Unbracketed atoms allowed in SMILES and the valences used to fill in
# implicit hydrogens.
ORGANIC_SUBSET: dict[str, tuple[int, ...]] = {
    "B": (3,),
    "C": (4,),
    "N": (3,),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
}

AROMATIC_SYMBOLS = {"b": "B", "c": "C", "n": "N", "o": "O", "p": "P", "s": "S",
                    "se": "Se", "as": "As", "te": "Te"}

# elements that may take part in an aromatic ring
AROMATIC_CAPABLE = {"B", "C", "N", "O", "P", "S", "As", "Se", "Te"}


def allowed_valences(symbol: str, charge: int) -> tuple[int, ...]:
    """Valences permitted for ``symbol`` carrying formal ``charge``.

    Electron-rich atoms gain a bond per positive charge (N+ has valence
    4), electron-poor ones lose one (B+ has 2), and carbon loses a bond
    for either sign. An empty tuple means there is no valence model.
    """
    element = ELEMENTS[symbol]
    if charge == 0 or not element.valences:
        return element.valences
    if element.outer_electrons < 4:
        shifted = (v - charge for v in element.valences)
    elif element.outer_electrons == 4:
        shifted = (v - abs(charge) for v in element.valences)
    else:
        shifted = (v + charge for v in element.valences)
    return tuple(v for v in shifted if v >= 0)


def more_electronegative(a: str, b: str) -> bool:
    """Crude ordering: more outer electrons wins, ties go to the lighter element."""
    ea, eb = ELEMENTS[a], ELEMENTS[b]
    if ea.outer_electrons != eb.outer_electrons:
        return ea.outer_electrons > eb.outer_electrons
    return ea.number < eb.number
