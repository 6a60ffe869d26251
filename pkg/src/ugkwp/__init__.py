"""Unified gas-kinetic wave-particle solver for the BGK equation on Cartesian meshes."""
from .gas import GasModel, Primitive, to_conservative, to_primitive
from .mesh import Mesh
from .stepper import SimState, run

__version__ = "0.1.0"

__all__ = ["GasModel", "Primitive", "to_conservative", "to_primitive", "Mesh", "SimState", "run"]
