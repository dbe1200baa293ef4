"""Entanglement per bond of spin-1/2 lattice models from imaginary-time tensor networks."""

from bondent.entanglement import BondEntropyReport, entropy_of, report
from bondent.models import BondModelSpec, LatticeSpec, bond_hamiltonian
from bondent.mps import find_ground_mps
from bondent.peps import find_ground_peps
from bondent.scan import ScanSpec, detect_features, run_scan
from bondent.schedule import EvolutionSchedule

__all__ = [
    "BondEntropyReport",
    "BondModelSpec",
    "EvolutionSchedule",
    "LatticeSpec",
    "ScanSpec",
    "bond_hamiltonian",
    "detect_features",
    "entropy_of",
    "find_ground_mps",
    "find_ground_peps",
    "report",
    "run_scan",
]
__version__ = "0.1.0"
