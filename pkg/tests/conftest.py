import numpy as np
import pytest

from kagnn.molecules import Atom, Bond, BondType, Molecule, read_molecules_jsonl

FIXTURES = __import__("pathlib").Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def fixture_molecules():
    return read_molecules_jsonl(FIXTURES / "molecules.jsonl")


def make_chain(n_atoms, labels, spacing=1.5, elements=("C", "N")):
    """Straight-line molecule with single bonds; deterministic geometry."""
    atoms = [Atom(element=elements[i % len(elements)],
                  position=np.array([i * spacing, 0.0, 0.0]))
             for i in range(n_atoms)]
    bonds = [Bond(i, i + 1, BondType.SINGLE) for i in range(n_atoms - 1)]
    return Molecule(id=f"chain-{n_atoms}", atoms=atoms, bonds=bonds,
                    labels=list(labels))


@pytest.fixture
def chain_molecule():
    return make_chain(4, labels=[1])
