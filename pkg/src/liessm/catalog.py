"""Named generator sets and small reference systems used across the CLI,
the bundled data files, and the test suite."""

from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .ssm import SSMSpec


def elementary(n: int, i: int, j: int) -> np.ndarray:
    m = np.zeros((n, n))
    m[i, j] = 1.0
    return m


def so3_generators() -> np.ndarray:
    """Rotation generators J1, J2, J3 with [J1, J2] = J3 cyclically."""
    j1 = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]])
    j2 = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
    j3 = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    return np.stack([j1, j2, j3])


def sl2_generators() -> np.ndarray:
    return np.stack([elementary(2, 0, 1), elementary(2, 1, 0)])


def diagonal_generators() -> np.ndarray:
    return np.stack([np.diag([1.0, 2.0, -1.0]), np.diag([0.5, -0.25, 1.5])])


def strict_upper3_generators() -> np.ndarray:
    return np.stack([elementary(3, 0, 1), elementary(3, 1, 2)])


def upper_triangular_basis(n: int) -> list[np.ndarray]:
    return [elementary(n, i, j) for i in range(n) for j in range(i, n)]


def named_generators(name: str) -> np.ndarray:
    table = {
        "so3": so3_generators,
        "sl2": sl2_generators,
        "diagonal3": diagonal_generators,
        "strict_upper3": strict_upper3_generators,
    }
    if name not in table:
        raise ValidationError(f"unknown builtin algebra {name!r}; options: {sorted(table)}")
    return table[name]()


def so3_ssm(scale: float = 0.25) -> SSMSpec:
    """Homogeneous rotation system; the canonical non-solvable target."""
    return SSMSpec.homogeneous(
        so3_generators() * scale, h0=[1.0, 0.0, 0.0], alphabet=("x", "y", "z")
    )


def abelian3_ssm() -> SSMSpec:
    """Diagonal (restricted, in fact abelian) system on the same alphabet.

    The initial state excites every mode, so endpoint clouds have full rank
    and read-out fits are well posed.
    """
    gens = np.stack(
        [
            np.diag([-0.05, 0.05, -0.15]),
            np.diag([0.1, -0.1, 0.05]),
            np.diag([-0.15, 0.1, 0.1]),
        ]
    )
    h0 = np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0)
    return SSMSpec.homogeneous(gens, h0=h0, alphabet=("x", "y", "z"))


def affine_so3_ssm() -> SSMSpec:
    """Rotations plus translations, for the four-path probe."""
    gens = so3_generators()[:2] * 0.5
    b = np.array([[0.1, 0.0, 0.0], [0.0, 0.1, 0.0]])
    return SSMSpec(A=gens, b=b, h0=np.array([1.0, 0.0, 0.0]), alphabet=("x", "y"))


def restricted_affine_ssm() -> SSMSpec:
    """Abelian generators with nonzero translations (order-sensitive state,
    order-symmetric flow)."""
    gens = np.stack([np.diag([-0.2, 0.1, 0.0]), np.diag([0.05, -0.1, 0.2])])
    b = np.array([[0.3, 0.1, -0.2], [0.0, 0.2, 0.1]])
    return SSMSpec(A=gens, b=b, h0=np.array([0.5, -0.25, 1.0]), alphabet=("x", "y"))


def upper2_ssm() -> SSMSpec:
    """2x2 upper-triangular system whose closure has derived length 2."""
    gens = np.stack(
        [np.diag([0.5, 1.5]), np.array([[0.0, 1.0], [0.0, 0.0]])]
    )
    return SSMSpec.homogeneous(gens, h0=[1.0, 1.0], alphabet=("x", "y"))


def upper3_ssm() -> SSMSpec:
    """3x3 upper-triangular system whose closure has derived length 3."""
    gens = np.stack(
        [
            np.diag([0.5, 1.0, 2.0]),
            np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]]),
        ]
    )
    return SSMSpec.homogeneous(gens, h0=[1.0, 1.0, 1.0], alphabet=("x", "y"))


def named_ssm(name: str) -> SSMSpec:
    table = {
        "so3": so3_ssm,
        "abelian3": abelian3_ssm,
        "affine_so3": affine_so3_ssm,
        "restricted_affine": restricted_affine_ssm,
        "upper2": upper2_ssm,
        "upper3": upper3_ssm,
    }
    if name not in table:
        raise ValidationError(f"unknown builtin SSM {name!r}; options: {sorted(table)}")
    return table[name]()
