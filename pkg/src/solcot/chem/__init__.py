"""SMILES parsing, descriptor calculation and fingerprint similarity."""

from .descriptors import DESCRIPTOR_NAMES, DescriptorVector, compute_descriptors
from .fingerprint import Fingerprint, WidthMismatch, morgan_fingerprint, tanimoto
from .molecule import Atom, Bond, BondOrder, Molecule
from .smiles import (
    KekulizationError,
    SmilesError,
    SmilesSyntaxError,
    StereochemistryIgnored,
    UnbalancedParenthesis,
    UnclosedRing,
    UnknownAtomSymbol,
    ValenceViolation,
    parse_smiles,
)

__all__ = [
    "Atom",
    "Bond",
    "BondOrder",
    "DESCRIPTOR_NAMES",
    "DescriptorVector",
    "Fingerprint",
    "KekulizationError",
    "Molecule",
    "SmilesError",
    "SmilesSyntaxError",
    "StereochemistryIgnored",
    "UnbalancedParenthesis",
    "UnclosedRing",
    "UnknownAtomSymbol",
    "ValenceViolation",
    "WidthMismatch",
    "compute_descriptors",
    "morgan_fingerprint",
    "parse_smiles",
    "tanimoto",
]
