#!/usr/bin/env python3
"""Regenerate the bundled example systems under data/.

The JSON files are committed; run this only when the catalog changes.
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import numpy as np

from liessm import PiecewisePath, catalog, fileio


def main() -> None:
    root = Path(__file__).resolve().parent.parent / "data"
    (root / "algebras").mkdir(parents=True, exist_ok=True)
    (root / "ssms").mkdir(parents=True, exist_ok=True)
    (root / "paths").mkdir(parents=True, exist_ok=True)

    fileio.save_algebra(
        root / "algebras" / "diagonal3.json",
        3,
        {"D1": np.diag([1.0, 2.0, -1.0]), "D2": np.diag([0.5, -0.25, 1.5])},
    )
    fileio.save_algebra(
        root / "algebras" / "sl2.json",
        2,
        {"E12": catalog.elementary(2, 0, 1), "E21": catalog.elementary(2, 1, 0)},
    )
    fileio.save_algebra(
        root / "algebras" / "strict_upper3.json",
        3,
        {"E12": catalog.elementary(3, 0, 1), "E23": catalog.elementary(3, 1, 2)},
    )
    fileio.save_algebra(
        root / "algebras" / "upper2.json",
        2,
        {"D": np.diag([0.5, 1.5]), "N": catalog.elementary(2, 0, 1)},
    )
    fileio.save_algebra(
        root / "algebras" / "upper3.json",
        3,
        {name: mat for name, mat in zip("ABCDEF", catalog.upper_triangular_basis(3))},
    )
    fileio.save_algebra(
        root / "algebras" / "so3.json",
        3,
        {name: mat for name, mat in zip(("J1", "J2", "J3"), catalog.so3_generators())},
    )

    for name in ("so3", "abelian3", "affine_so3", "restricted_affine", "upper2", "upper3"):
        fileio.save_ssm(root / "ssms" / f"{name}.json", catalog.named_ssm(name))

    alphabet = ("x", "y")
    fileio.save_path(
        root / "paths" / "prefix1.json",
        PiecewisePath(((0, 0.5), (1, 0.5))),
        alphabet,
    )
    fileio.save_path(
        root / "paths" / "prefix2.json",
        PiecewisePath(((1, 0.6), (0, 0.4))),
        alphabet,
    )
    fileio.save_path(
        root / "paths" / "suffix_xy.json",
        PiecewisePath(((0, 0.5), (1, 0.5))),
        alphabet,
    )
    print(f"wrote bundled systems under {root}")


if __name__ == "__main__":
    main()
