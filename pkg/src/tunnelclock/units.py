"""Conversion between dimensionless simulation units and SI for atomic species.

Base length l0 = 1 um. Times are in units of m*l0^2/hbar and velocities in
hbar/(m*l0), with m the atomic mass, so the conversion factors depend only
on the species.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ValidationError

__all__ = ["SpeciesProfile", "species", "to_si", "from_si", "KINDS"]

HBAR = 1.054571817e-34  # J*s, CODATA 2018
ATOMIC_MASS_KG = 1.66053906892e-27  # kg per unified atomic mass unit, CODATA 2022
BASE_LENGTH_M = 1e-6  # l0 = 1 um

# Isotope masses in u, AME2020 atomic mass evaluation.
_ISOTOPE_MASS_U = {
    "Li7": 7.0160034366,
    "Rb87": 86.9091805310,
}

KINDS = ("time", "velocity", "length")


@dataclass(frozen=True)
class SpeciesProfile:
    name: str
    mass_kg: float

    def __post_init__(self):
        if not self.mass_kg > 0:
            raise ValidationError(f"mass must be positive, got {self.mass_kg}")

    @property
    def length_unit(self) -> float:
        """Meters per dimensionless length unit."""
        return BASE_LENGTH_M

    @property
    def time_unit(self) -> float:
        """Seconds per dimensionless time unit: m*l0^2/hbar."""
        return self.mass_kg * BASE_LENGTH_M**2 / HBAR

    @property
    def velocity_unit(self) -> float:
        """m/s per dimensionless velocity unit: hbar/(m*l0)."""
        return HBAR / (self.mass_kg * BASE_LENGTH_M)


def species(name: str) -> SpeciesProfile:
    try:
        mass_u = _ISOTOPE_MASS_U[name]
    except KeyError:
        raise ValidationError(
            f"unknown species {name!r}; known: {', '.join(sorted(_ISOTOPE_MASS_U))}"
        ) from None
    return SpeciesProfile(name=name, mass_kg=mass_u * ATOMIC_MASS_KG)


def _unit(kind: str, profile: SpeciesProfile) -> float:
    if kind == "time":
        return profile.time_unit
    if kind == "velocity":
        return profile.velocity_unit
    if kind == "length":
        return profile.length_unit
    raise ValidationError(f"unknown kind {kind!r}; expected one of {KINDS}")


def to_si(value: float, kind: str, profile: SpeciesProfile) -> float:
    return value * _unit(kind, profile)


def from_si(value: float, kind: str, profile: SpeciesProfile) -> float:
    return value / _unit(kind, profile)
