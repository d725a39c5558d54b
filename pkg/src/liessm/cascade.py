"""Peeling solvable upper-triangular flows into abelian layer cascades.

The construction repeatedly splits off the strict last column of the active
block: those entries span an abelian ideal, zeroing them is a bracket-
preserving section onto the quotient, and the flow factorizes as
G(t) = Q(t) a(t) with Q the quotient flow and a an abelian flow driven by
the conjugated peeled generator Q^-1 (A - A_quotient) Q. Iterating until the
quotient is abelian yields the layer stack; reassembling the product of all
layer states reconstructs the original transition matrix.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra import classify, lie_closure
from .errors import GuardError, InvariantError, ValidationError
from .flows import PiecewisePath, expm, transition_matrix, truncated_flow
from .linalg import spectral_norm
from .ssm import SSMSpec

__all__ = [
    "CascadeLayer",
    "CascadeDecomposition",
    "ScalingRow",
    "peel_split",
    "decompose",
    "verify_cascade",
    "scaling_experiment",
]


def _pairwise_commuting(mats: np.ndarray, tol: float) -> bool:
    k = mats.shape[0]
    for i in range(k):
        for j in range(i):
            comm = mats[i] @ mats[j] - mats[j] @ mats[i]
            scale = max(1.0, np.linalg.norm(mats[i]) * np.linalg.norm(mats[j]))
            if np.linalg.norm(comm) > tol * scale:
                return False
    return True


def _require_upper_triangular(mats: np.ndarray, tol: float):
    scale = max(1.0, float(np.max(np.abs(mats))))
    lower = np.tril(mats, k=-1)
    if np.max(np.abs(lower)) > tol * scale:
        raise ValidationError(
            "generators are not upper triangular within tolerance; "
            "pre-triangularize the system before decomposing"
        )


@dataclass(frozen=True)
class CascadeLayer:
    """One abelian layer: either the base quotient or a peeled-column ideal."""

    kind: str  # "base" | "ideal"
    gens: np.ndarray  # base: abelian generators; ideal: peeled per-symbol part
    column: int | None = None  # peeled column (ideal layers)
    ideal_basis: tuple = ()  # elementary matrices spanning the ideal
    quotient_gens: np.ndarray | None = None  # generators driving this layer's Q


@dataclass(frozen=True)
class CascadeDecomposition:
    """Ordered abelian layers (base first) reconstructing a solvable flow."""

    source: SSMSpec
    layers: tuple
    derived_length: int

    @property
    def depth(self) -> int:
        return len(self.layers)


def _elementary(n: int, i: int, j: int) -> np.ndarray:
    e = np.zeros((n, n))
    e[i, j] = 1.0
    return e


def peel_split(
    ssm: SSMSpec, block: int | None = None, tol: float = 1e-10, on_abelian: str = "passthrough"
) -> tuple[CascadeLayer, SSMSpec]:
    """Split off the strict last column of the active upper-left block.

    Returns the ideal layer template and the quotient system (same ambient
    dimension, peeled entries zeroed). The zero-column embedding is checked
    to be bracket-preserving, i.e. the extension actually splits. Abelian
    input either passes through as a single base layer or raises, depending
    on ``on_abelian``.
    """
    gens = ssm.A
    n = ssm.n
    m = n if block is None else block
    if not 1 <= m <= n:
        raise ValidationError(f"active block size {m} outside 1..{n}")
    _require_upper_triangular(gens, tol)
    if _pairwise_commuting(gens, tol) or m <= 1:
        if on_abelian == "passthrough":
            return CascadeLayer(kind="base", gens=gens.copy()), ssm
        raise ValidationError("generators are already abelian; nothing to peel")

    col = m - 1
    peeled = np.zeros_like(gens)
    peeled[:, :col, col] = gens[:, :col, col]
    quotient = gens - peeled

    # The section (zero the peeled column) must preserve brackets.
    for i in range(gens.shape[0]):
        for j in range(gens.shape[0]):
            full = gens[i] @ gens[j] - gens[j] @ gens[i]
            sect = full.copy()
            sect[:col, col] = 0.0
            quot = quotient[i] @ quotient[j] - quotient[j] @ quotient[i]
            scale = max(1.0, np.linalg.norm(gens[i]) * np.linalg.norm(gens[j]))
            if np.linalg.norm(quot - sect) > 1e-9 * scale:
                raise InvariantError(
                    "zero-column section failed to preserve brackets; "
                    "the extension does not split in this presentation"
                )

    layer = CascadeLayer(
        kind="ideal",
        gens=peeled,
        column=col,
        ideal_basis=tuple(_elementary(n, i, col) for i in range(col)),
        quotient_gens=quotient.copy(),
    )
    quotient_ssm = SSMSpec(A=quotient, b=ssm.b, h0=ssm.h0, alphabet=ssm.alphabet)
    return layer, quotient_ssm


def decompose(ssm: SSMSpec, tol: float = 1e-10) -> CascadeDecomposition:
    """Recursively peel columns until the remaining quotient is abelian.

    Layers come out base-first, so the product of layer states in list order
    rebuilds the flow. Ties in ideal selection are resolved by always taking
    the strict last column of the active block, making the output
    deterministic.
    """
    _require_upper_triangular(ssm.A, tol)
    report = classify(lie_closure(list(ssm.A)))
    if report.class_label == "non_solvable":
        raise ValidationError("generators do not span a solvable algebra")

    gen_scale = max(1.0, float(np.max(np.abs(ssm.A))))
    ideal_layers = []
    current = ssm
    block = ssm.n
    while not _pairwise_commuting(current.A, tol) and block > 1:
        layer, current = peel_split(current, block=block, tol=tol)
        # A column that was already zero contributes no layer.
        if np.max(np.abs(layer.gens)) > tol * gen_scale:
            ideal_layers.append(layer)
        block -= 1
    if not _pairwise_commuting(current.A, tol):
        raise InvariantError("peeling exhausted the matrix but the quotient is not abelian")
    base = CascadeLayer(kind="base", gens=current.A.copy())
    layers = (base,) + tuple(reversed(ideal_layers))
    return CascadeDecomposition(
        source=ssm, layers=layers, derived_length=report.derived_length or 1
    )


def _ideal_field(decomp: CascadeDecomposition, sym: int, q_base: np.ndarray, comps):
    """Derivatives of the ideal-layer states (a_K, ..., a_1) at one instant.

    ``q_base`` is the exact base flow at this instant; each layer's quotient
    flow is the running product of everything below it.
    """
    derivs = []
    prefix = q_base
    out_of_span = 0.0
    for idx, layer in enumerate(decomp.layers[1:]):
        conj = np.linalg.solve(prefix, layer.gens[sym] @ prefix)
        # The conjugated generator must stay inside the peeled-column span.
        col = layer.column
        outside = conj.copy()
        outside[:col, col] = 0.0
        out_of_span = max(out_of_span, float(np.max(np.abs(outside))))
        derivs.append(conj @ comps[idx])
        prefix = prefix @ comps[idx]
    return derivs, out_of_span


def verify_cascade(
    decomp: CascadeDecomposition,
    paths,
    step: float,
    ideal_tol: float = 1e-9,
) -> float:
    """Max spectral-norm gap between reassembled and direct flows.

    The base layer is abelian with piecewise-constant input, so its flow is
    an exact exponential product; each ideal layer integrates with fixed-step
    RK4 because its generator varies continuously through the conjugation.
    The reconstruction is the ordered product of final layer states. Raises
    if a conjugated ideal generator ever leaves its ideal span.
    """
    if step <= 0.0:
        raise ValidationError("step must be positive")
    n = decomp.source.n
    base = decomp.layers[0]
    worst = 0.0
    gen_scale = max(1.0, float(np.max(np.abs(decomp.source.A))))
    for path in paths:
        q_base = np.eye(n)
        comps = [np.eye(n) for _ in decomp.layers[1:]]
        span_residual = 0.0
        for sym, dur in path.segments:
            substeps = max(1, int(np.ceil(dur / step - 1e-12)))
            h = dur / substeps
            e_half = expm(base.gens[sym] * (0.5 * h))
            for _ in range(substeps):
                q_mid = e_half @ q_base
                q_end = e_half @ q_mid
                k1, r1 = _ideal_field(decomp, sym, q_base, comps)
                k2, r2 = _ideal_field(
                    decomp, sym, q_mid, [y + 0.5 * h * k for y, k in zip(comps, k1)]
                )
                k3, r3 = _ideal_field(
                    decomp, sym, q_mid, [y + 0.5 * h * k for y, k in zip(comps, k2)]
                )
                k4, r4 = _ideal_field(
                    decomp, sym, q_end, [y + h * k for y, k in zip(comps, k3)]
                )
                comps = [
                    y + (h / 6.0) * (a + 2.0 * b + 2.0 * c + d)
                    for y, a, b, c, d in zip(comps, k1, k2, k3, k4)
                ]
                q_base = q_end
                span_residual = max(span_residual, r1, r2, r3, r4)
        if span_residual > ideal_tol * gen_scale:
            raise InvariantError(
                f"conjugated ideal generator left its span (residual {span_residual:.3g})"
            )
        reconstructed = q_base
        for comp in comps:
            reconstructed = reconstructed @ comp
        direct = transition_matrix(decomp.source, path)
        worst = max(worst, spectral_norm(reconstructed - direct))
    return worst


@dataclass(frozen=True)
class ScalingRow:
    """One (epsilon, truncation order) measurement of the flow error."""

    epsilon: float
    order: int
    error: float
    replicate: int
    depth_equiv: int | None  # k with order == 2**(k-1), when that holds

    def to_tuple(self):
        return (self.epsilon, self.order, self.error, self.replicate)


def _depth_equiv(order: int) -> int | None:
    k = order.bit_length()
    return k if order == 2 ** (k - 1) else None


def unit_duration_path(rng, alphabet_size: int) -> PiecewisePath:
    for _ in range(100):
        k = int(rng.integers(3, 7))
        symbols = rng.integers(0, alphabet_size, size=k)
        if len(set(symbols.tolist())) >= 2:
            break
    raw = rng.uniform(0.5, 1.5, size=k)
    durations = raw / raw.sum()
    return PiecewisePath(tuple(zip(symbols.tolist(), durations.tolist())))


def scaling_experiment(
    generators,
    orders,
    eps_grid,
    paths_per_point: int,
    seed: int,
    floor: float = 1e-13,
) -> tuple[list[ScalingRow], dict]:
    """Error of the order-c truncated flow against the true flow, swept in eps.

    Generators are scaled by each eps, random unit-duration paths are drawn
    (one fixed set reused across the grid so per-path constants cancel), and
    the mean spectral error per (eps, order) feeds a log-log slope fit. The
    expected slope for truncation order c is c + 1. Points at the numerical
    floor are dropped from the fit; fewer than three surviving points is an
    error.
    """
    gens = np.asarray(generators, dtype=float)
    eps_values = [float(e) for e in eps_grid]
    orders = sorted(set(int(c) for c in orders))
    if len(eps_values) < 3:
        raise ValidationError("need at least 3 epsilon grid points for a slope fit")
    if any(e <= 0.0 or e >= 1.0 for e in eps_values):
        raise ValidationError("epsilon values must lie in (0, 1)")
    if any(c not in (1, 2, 3) for c in orders):
        raise ValidationError("truncation orders must be in {1, 2, 3}")
    if _pairwise_commuting(gens, 1e-12):
        raise ValidationError(
            "generators commute, so every truncation is exact and the sweep is vacuous"
        )

    paths = [
        unit_duration_path(
            np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(r,))),
            gens.shape[0],
        )
        for r in range(paths_per_point)
    ]

    rows: list[ScalingRow] = []
    means: dict = {c: [] for c in orders}
    for eps in eps_values:
        scaled = gens * eps
        flows = [transition_matrix(scaled, p) for p in paths]
        for c in orders:
            errors = []
            for r, (path, phi) in enumerate(zip(paths, flows)):
                err = spectral_norm(phi - truncated_flow(scaled, path, c))
                errors.append(err)
                rows.append(
                    ScalingRow(
                        epsilon=eps,
                        order=c,
                        error=err,
                        replicate=r,
                        depth_equiv=_depth_equiv(c),
                    )
                )
            means[c].append(float(np.mean(errors)))

    slopes: dict = {}
    log_eps = np.log(np.asarray(eps_values))
    for c in orders:
        mean_arr = np.asarray(means[c])
        keep = mean_arr > floor
        if keep.sum() < 3:
            raise GuardError(
                f"order {c}: only {int(keep.sum())} grid points above the numerical floor; "
                "slope fit rejected"
            )
        slope = float(np.polyfit(log_eps[keep], np.log(mean_arr[keep]), 1)[0])
        slopes[c] = slope
    return rows, slopes
