"""Molecule records and their two wire formats.

The canonical interchange format is JSON-lines, one molecule per line::

    {"id": "mol-0001",
     "atoms": [{"element": "C", "xyz": [0.0, 0.0, 0.0], "charge": -0.1}, ...],
     "bonds": [{"i": 0, "j": 1, "type": "single",
                "direction": "none", "in_ring": false}, ...],
     "labels": [1, 0, null]}

``labels`` holds one entry per prediction task; ``null`` marks a missing
label.  ``charge`` is a partial charge and defaults to 0.0; ``direction``
defaults to "none" and ``in_ring`` is recomputed from the bond graph when
absent.

A strict subset of MDL SDF V2000 is also readable: counts line, atom
block (fixed columns), bond block (types 1..4), "M  CHG" property lines,
and the ``$$$$`` record separator.  Everything else in the property/data
blocks is ignored.  SDF records carry no labels (all tasks missing).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .elements import element_info
from .errors import MoleculeParseError

__all__ = [
    "Atom",
    "Bond",
    "BondDirection",
    "BondType",
    "Molecule",
    "molecule_from_json_dict",
    "molecule_to_json_dict",
    "parse_molecule_json",
    "parse_sdf",
    "read_molecules_jsonl",
    "read_sdf",
    "ring_bond_flags",
    "write_molecules_jsonl",
]


class BondType(Enum):
    SINGLE = "single"
    DOUBLE = "double"
    TRIPLE = "triple"
    AROMATIC = "aromatic"


class BondDirection(Enum):
    """Wedge/hash style stereo annotation on a covalent bond."""

    NONE = "none"
    BEGIN_WEDGE = "beginwedge"
    BEGIN_DASH = "begindash"
    END_DOWN_RIGHT = "enddownright"
    END_UP_RIGHT = "endupright"
    EITHER_DOUBLE = "eitherdouble"
    UNKNOWN = "unknown"


@dataclass
class Atom:
    element: str
    position: np.ndarray  # (3,) float64, Angstrom
    partial_charge: float = 0.0

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64)
        if self.position.shape != (3,):
            raise ValueError(f"position must be length 3, got {self.position.shape}")
        self.partial_charge = float(self.partial_charge)

    @property
    def atomic_number(self) -> int:
        return element_info(self.element).atomic_number


@dataclass
class Bond:
    i: int
    j: int
    bond_type: BondType
    direction: BondDirection = BondDirection.NONE
    in_ring: bool = False


@dataclass
class Molecule:
    id: str
    atoms: list[Atom]
    bonds: list[Bond] = field(default_factory=list)
    labels: list[int | None] = field(default_factory=list)

    @property
    def n_atoms(self) -> int:
        return len(self.atoms)

    @property
    def positions(self) -> np.ndarray:
        return np.stack([a.position for a in self.atoms]) if self.atoms \
            else np.zeros((0, 3))

    def validate(self):
        """Raise ValueError on any structural invariant violation."""
        if not self.atoms:
            raise ValueError(f"molecule {self.id!r} has no atoms")
        for idx, atom in enumerate(self.atoms):
            if not np.isfinite(atom.position).all():
                raise ValueError(
                    f"molecule {self.id!r}: atom {idx} has non-finite position"
                )
            if not np.isfinite(atom.partial_charge):
                raise ValueError(
                    f"molecule {self.id!r}: atom {idx} has non-finite charge"
                )
        seen = set()
        n = self.n_atoms
        for b, bond in enumerate(self.bonds):
            if not (0 <= bond.i < n and 0 <= bond.j < n):
                raise ValueError(
                    f"molecule {self.id!r}: bond {b} references atom outside 0..{n - 1}"
                )
            if bond.i == bond.j:
                raise ValueError(
                    f"molecule {self.id!r}: bond {b} is a self-bond on atom {bond.i}"
                )
            pair = (min(bond.i, bond.j), max(bond.i, bond.j))
            if pair in seen:
                raise ValueError(
                    f"molecule {self.id!r}: duplicate bond between atoms {pair}"
                )
            seen.add(pair)
        for t, lab in enumerate(self.labels):
            if lab not in (0, 1, None):
                raise ValueError(
                    f"molecule {self.id!r}: label {t} must be 0, 1 or null, got {lab!r}"
                )

    def refresh_ring_flags(self):
        """Recompute every bond's in_ring flag from the bond graph."""
        flags = ring_bond_flags(self.n_atoms, [(b.i, b.j) for b in self.bonds])
        for bond, flag in zip(self.bonds, flags):
            bond.in_ring = bool(flag)


def ring_bond_flags(n_atoms, bond_pairs):
    """True for each bond that lies on some cycle (i.e. is not a bridge).

    Iterative bridge finding so deep chains cannot hit the recursion
    limit; parallel edges are handled by tracking edge ids, not parents.
    """
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n_atoms)]
    for eid, (i, j) in enumerate(bond_pairs):
        adj[i].append((j, eid))
        adj[j].append((i, eid))
    disc = [-1] * n_atoms
    low = [0] * n_atoms
    is_bridge = [False] * len(bond_pairs)
    timer = 0
    for root in range(n_atoms):
        if disc[root] != -1:
            continue
        disc[root] = low[root] = timer
        timer += 1
        stack = [(root, -1, iter(adj[root]))]
        while stack:
            v, entry_edge, neighbors = stack[-1]
            advanced = False
            for w, eid in neighbors:
                if eid == entry_edge:
                    continue
                if disc[w] == -1:
                    disc[w] = low[w] = timer
                    timer += 1
                    stack.append((w, eid, iter(adj[w])))
                    advanced = True
                    break
                if disc[w] < low[v]:
                    low[v] = disc[w]
            if advanced:
                continue
            stack.pop()
            if stack:
                u = stack[-1][0]
                if low[v] < low[u]:
                    low[u] = low[v]
                if low[v] > disc[u]:
                    is_bridge[entry_edge] = True
    return [not b for b in is_bridge]


# --- canonical JSON format ---------------------------------------------

_BOND_TYPES = {t.value: t for t in BondType}
_DIRECTIONS = {d.value: d for d in BondDirection}


def molecule_from_json_dict(doc, *, source=None, line=None):
    """Build a Molecule from a parsed JSON object, validating as we go."""

    def fail(msg):
        raise MoleculeParseError(msg, source=source, line=line)

    if not isinstance(doc, dict):
        fail(f"molecule record must be an object, got {type(doc).__name__}")
    mol_id = doc.get("id")
    if not isinstance(mol_id, str) or not mol_id:
        fail("missing or empty 'id'")
    raw_atoms = doc.get("atoms")
    if not isinstance(raw_atoms, list) or not raw_atoms:
        fail(f"molecule {mol_id!r}: 'atoms' must be a non-empty list")

    atoms = []
    for idx, rec in enumerate(raw_atoms):
        if not isinstance(rec, dict):
            fail(f"molecule {mol_id!r}: atom {idx} must be an object")
        element = rec.get("element")
        if not isinstance(element, str):
            fail(f"molecule {mol_id!r}: atom {idx} missing 'element'")
        xyz = rec.get("xyz")
        if (not isinstance(xyz, list)) or len(xyz) != 3 \
                or not all(isinstance(c, (int, float)) for c in xyz):
            fail(f"molecule {mol_id!r}: atom {idx} needs 'xyz' with 3 numbers")
        charge = rec.get("charge", 0.0)
        if not isinstance(charge, (int, float)):
            fail(f"molecule {mol_id!r}: atom {idx} has non-numeric 'charge'")
        try:
            element_info(element)
        except Exception as exc:
            fail(f"molecule {mol_id!r}: atom {idx}: {exc}")
        atoms.append(Atom(element=element, position=np.array(xyz, dtype=float),
                          partial_charge=float(charge)))

    bonds = []
    saw_ring_flag = False
    for idx, rec in enumerate(doc.get("bonds", []) or []):
        if not isinstance(rec, dict):
            fail(f"molecule {mol_id!r}: bond {idx} must be an object")
        try:
            i, j = int(rec["i"]), int(rec["j"])
        except (KeyError, TypeError, ValueError):
            fail(f"molecule {mol_id!r}: bond {idx} needs integer 'i' and 'j'")
        type_str = rec.get("type")
        if type_str not in _BOND_TYPES:
            fail(f"molecule {mol_id!r}: bond {idx} has unknown type {type_str!r} "
                 f"(expected one of {sorted(_BOND_TYPES)})")
        dir_str = rec.get("direction", "none")
        if dir_str not in _DIRECTIONS:
            fail(f"molecule {mol_id!r}: bond {idx} has unknown direction {dir_str!r}")
        if "in_ring" in rec:
            saw_ring_flag = True
            if not isinstance(rec["in_ring"], bool):
                fail(f"molecule {mol_id!r}: bond {idx} 'in_ring' must be boolean")
        bonds.append(Bond(i=i, j=j, bond_type=_BOND_TYPES[type_str],
                          direction=_DIRECTIONS[dir_str],
                          in_ring=bool(rec.get("in_ring", False))))

    labels = doc.get("labels", [])
    if not isinstance(labels, list):
        fail(f"molecule {mol_id!r}: 'labels' must be a list")
    for t, lab in enumerate(labels):
        if lab not in (0, 1, None):
            fail(f"molecule {mol_id!r}: label {t} must be 0, 1 or null, got {lab!r}")

    mol = Molecule(id=mol_id, atoms=atoms, bonds=bonds, labels=list(labels))
    try:
        mol.validate()
    except ValueError as exc:
        fail(str(exc))
    if not saw_ring_flag:
        mol.refresh_ring_flags()
    return mol


def parse_molecule_json(text, *, source=None, line=None):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MoleculeParseError(f"invalid JSON: {exc}", source=source, line=line)
    return molecule_from_json_dict(doc, source=source, line=line)


def molecule_to_json_dict(mol: Molecule) -> dict:
    return {
        "id": mol.id,
        "atoms": [
            {
                "element": a.element,
                "xyz": [float(c) for c in a.position],
                "charge": float(a.partial_charge),
            }
            for a in mol.atoms
        ],
        "bonds": [
            {
                "i": b.i,
                "j": b.j,
                "type": b.bond_type.value,
                "direction": b.direction.value,
                "in_ring": bool(b.in_ring),
            }
            for b in mol.bonds
        ],
        "labels": list(mol.labels),
    }


def read_molecules_jsonl(path) -> list[Molecule]:
    mols = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            mols.append(parse_molecule_json(raw, source=path, line=lineno))
    return mols


def write_molecules_jsonl(path, molecules):
    with open(path, "w", encoding="utf-8") as fh:
        for mol in molecules:
            fh.write(json.dumps(molecule_to_json_dict(mol)) + "\n")


# --- SDF V2000 subset ---------------------------------------------------

_SDF_BOND_TYPES = {1: BondType.SINGLE, 2: BondType.DOUBLE,
                   3: BondType.TRIPLE, 4: BondType.AROMATIC}


def _sdf_int(text, what, record, source):
    try:
        return int(text.strip() or "0")
    except ValueError:
        raise MoleculeParseError(f"bad integer in {what}: {text!r}",
                                 source=source, record=record)


def _sdf_float(text, what, record, source):
    try:
        return float(text.strip())
    except ValueError:
        raise MoleculeParseError(f"bad coordinate in {what}: {text!r}",
                                 source=source, record=record)


def parse_sdf(text, *, source=None) -> list[Molecule]:
    """Parse a concatenated V2000 SDF document into Molecules.

    Supports the fixed-column atom/bond blocks, bond types 1..4 and
    "M  CHG" charges.  An empty document yields an empty list.
    """
    molecules = []
    # Records end with a "$$$$" line; the final separator is optional.
    # Splitting on separator lines (not substrings) keeps the header
    # alignment intact even when a record's title line is empty.
    chunks = []
    current = []
    for raw in text.replace("\r\n", "\n").split("\n"):
        if raw.strip() == "$$$$":
            chunks.append(current)
            current = []
        else:
            current.append(raw)
    chunks.append(current)
    record = 0
    for lines in chunks:
        if not any(ln.strip() for ln in lines):
            continue
        record += 1
        if len(lines) < 4:
            raise MoleculeParseError("truncated header block",
                                     source=source, record=record)
        title = lines[0].strip()
        counts = lines[3]
        if len(counts) < 6:
            raise MoleculeParseError(f"counts line too short: {counts!r}",
                                     source=source, record=record)
        n_atoms = _sdf_int(counts[0:3], "atom count", record, source)
        n_bonds = _sdf_int(counts[3:6], "bond count", record, source)
        if n_atoms < 1:
            raise MoleculeParseError("record has no atoms",
                                     source=source, record=record)
        atom_lines = lines[4:4 + n_atoms]
        bond_lines = lines[4 + n_atoms:4 + n_atoms + n_bonds]
        if len(atom_lines) < n_atoms or len(bond_lines) < n_bonds:
            raise MoleculeParseError(
                f"expected {n_atoms} atom and {n_bonds} bond lines",
                source=source, record=record)

        atoms = []
        for ln in atom_lines:
            if len(ln) < 34:
                raise MoleculeParseError(f"atom line too short: {ln!r}",
                                         source=source, record=record)
            x = _sdf_float(ln[0:10], "atom block", record, source)
            y = _sdf_float(ln[10:20], "atom block", record, source)
            z = _sdf_float(ln[20:30], "atom block", record, source)
            symbol = ln[31:34].strip()
            if not symbol:
                raise MoleculeParseError(f"missing element symbol: {ln!r}",
                                         source=source, record=record)
            try:
                element_info(symbol)
            except Exception as exc:
                raise MoleculeParseError(str(exc), source=source, record=record)
            atoms.append(Atom(element=symbol, position=np.array([x, y, z])))

        bonds = []
        for ln in bond_lines:
            if len(ln) < 9:
                raise MoleculeParseError(f"bond line too short: {ln!r}",
                                         source=source, record=record)
            i = _sdf_int(ln[0:3], "bond block", record, source) - 1
            j = _sdf_int(ln[3:6], "bond block", record, source) - 1
            order = _sdf_int(ln[6:9], "bond block", record, source)
            if order not in _SDF_BOND_TYPES:
                raise MoleculeParseError(
                    f"unsupported bond type {order} (only 1..4)",
                    source=source, record=record)
            bonds.append(Bond(i=i, j=j, bond_type=_SDF_BOND_TYPES[order]))

        # Property block: only M CHG is interpreted.
        for ln in lines[4 + n_atoms + n_bonds:]:
            if ln.startswith("M  CHG"):
                tokens = ln.split()
                try:
                    count = int(tokens[2])
                    pairs = [(int(tokens[3 + 2 * p]) - 1,
                              int(tokens[4 + 2 * p])) for p in range(count)]
                except (IndexError, ValueError):
                    raise MoleculeParseError(f"malformed M  CHG line: {ln!r}",
                                             source=source, record=record)
                for atom_idx, charge in pairs:
                    if not 0 <= atom_idx < len(atoms):
                        raise MoleculeParseError(
                            f"M  CHG references atom {atom_idx + 1} of {len(atoms)}",
                            source=source, record=record)
                    atoms[atom_idx].partial_charge = float(charge)
            elif ln.startswith("M  END"):
                break

        mol_id = title if title else f"sdf-{record}"
        mol = Molecule(id=mol_id, atoms=atoms, bonds=bonds, labels=[])
        try:
            mol.validate()
        except ValueError as exc:
            raise MoleculeParseError(str(exc), source=source, record=record)
        mol.refresh_ring_flags()
        molecules.append(mol)
    return molecules


def read_sdf(path) -> list[Molecule]:
    with open(path, encoding="utf-8") as fh:
        return parse_sdf(fh.read(), source=path)
