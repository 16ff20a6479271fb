"""Abelian sandpile dynamics driven by discrete harmonic fields."""

from .domain import (Configuration, Domain, RecurrentConfiguration,
                     create_domain, disk, rectangle)
from .group import group_add, group_order, identity, is_recurrent
from .harmonic import basis, check_harmonic, linear_combine, tropical_min
from .potential import build_potential, directional_potentials
from .relax import AvalancheRecord, Odometer, RelaxationError, drop_and_relax, relax

__all__ = [
    "AvalancheRecord", "Configuration", "Domain", "Odometer",
    "RecurrentConfiguration", "RelaxationError", "basis", "build_potential",
    "check_harmonic", "create_domain", "directional_potentials", "disk",
    "drop_and_relax", "group_add", "group_order", "identity", "is_recurrent",
    "linear_combine", "rectangle", "relax", "tropical_min",
]
