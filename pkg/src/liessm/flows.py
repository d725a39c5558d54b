"""Flows of piecewise-constant-input linear systems and their Magnus terms.

A path is an ordered list of (symbol, duration) segments; the homogeneous
flow over it is the ordered product of segment matrix exponentials. Because
inputs are piecewise constant, the first three Magnus terms reduce to exact
finite sums over ordered segment indices with polynomial weight factors; no
quadrature is involved on the production side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GuardError, ValidationError
from .linalg import expm, logm_principal, spectral_norm

__all__ = [
    "PiecewisePath",
    "FlowResult",
    "expm",
    "logm_principal",
    "transition_matrix",
    "magnus_terms",
    "commutator_mass",
    "truncated_flow",
    "generator_mass",
    "reverse_path",
    "split_path",
    "permute_segments",
    "scale_path",
]


@dataclass(frozen=True)
class PiecewisePath:
    """Ordered (symbol index, duration) segments over [0, T]."""

    segments: tuple

    def __post_init__(self):
        segs = tuple((int(s), float(d)) for s, d in self.segments)
        if not segs:
            raise ValidationError("a path needs at least one segment")
        for s, d in segs:
            if s < 0:
                raise ValidationError(f"negative symbol index {s}")
            if not np.isfinite(d) or d <= 0.0:
                raise ValidationError(f"segment durations must be positive, got {d}")
        object.__setattr__(self, "segments", segs)

    @property
    def total_duration(self) -> float:
        return float(sum(d for _, d in self.segments))

    @property
    def symbols(self) -> tuple:
        return tuple(s for s, _ in self.segments)

    @property
    def durations(self) -> np.ndarray:
        return np.array([d for _, d in self.segments])


def reverse_path(path: PiecewisePath) -> PiecewisePath:
    """Segments in reversed order, durations kept; an involution."""
    return PiecewisePath(tuple(reversed(path.segments)))


def permute_segments(path: PiecewisePath, order) -> PiecewisePath:
    """Reorder segments by the given permutation of indices."""
    order = list(order)
    if sorted(order) != list(range(len(path.segments))):
        raise ValidationError("order must be a permutation of the segment indices")
    return PiecewisePath(tuple(path.segments[i] for i in order))


def split_path(path: PiecewisePath, at: float) -> tuple[PiecewisePath, PiecewisePath]:
    """Split into the parts before and after time ``at`` (0 < at < T)."""
    total = path.total_duration
    if not 0.0 < at < total:
        raise ValidationError(f"split point {at} outside (0, {total})")
    left, right = [], []
    elapsed = 0.0
    for sym, dur in path.segments:
        if elapsed + dur <= at:
            left.append((sym, dur))
        elif elapsed >= at:
            right.append((sym, dur))
        else:  # segment straddles the split point
            first = at - elapsed
            left.append((sym, first))
            right.append((sym, dur - first))
        elapsed += dur
    return PiecewisePath(tuple(left)), PiecewisePath(tuple(right))


def scale_path(path: PiecewisePath, factor: float) -> PiecewisePath:
    """Stretch every duration by ``factor`` (> 0)."""
    if factor <= 0.0:
        raise ValidationError("scale factor must be positive")
    return PiecewisePath(tuple((s, d * factor) for s, d in path.segments))


def _generator_stack(system) -> np.ndarray:
    """Per-symbol generators as a (k, n, n) array from an SSM or array-like."""
    mats = system.A if hasattr(system, "A") else system
    stack = np.asarray(mats, dtype=float)
    if stack.ndim != 3 or stack.shape[1] != stack.shape[2]:
        raise ValidationError(f"generators must be a (k, n, n) stack, got {stack.shape}")
    if not np.all(np.isfinite(stack)):
        raise ValidationError("generators contain non-finite entries")
    return stack


def _segment_generators(system, path: PiecewisePath) -> tuple[np.ndarray, np.ndarray]:
    stack = _generator_stack(system)
    for sym, _ in path.segments:
        if sym >= stack.shape[0]:
            raise ValidationError(f"symbol {sym} outside alphabet of size {stack.shape[0]}")
    mats = np.stack([stack[sym] for sym, _ in path.segments])
    return mats, path.durations


def transition_matrix(system, path: PiecewisePath) -> np.ndarray:
    """State-transition matrix of the homogeneous flow over ``path``.

    Segments apply in path order: Phi = expm(A_K d_K) ... expm(A_1 d_1).
    Translations, if the system has any, are ignored here.
    """
    mats, durs = _segment_generators(system, path)
    phi = np.eye(mats.shape[1])
    for a, d in zip(mats, durs):
        phi = expm(a * d) @ phi
    return phi


def generator_mass(system, path: PiecewisePath) -> float:
    """Integral of the generator spectral norm along the path."""
    stack = _generator_stack(system)
    norms = {}
    total = 0.0
    for sym, dur in path.segments:
        if sym >= stack.shape[0]:
            raise ValidationError(f"symbol {sym} outside alphabet of size {stack.shape[0]}")
        if sym not in norms:
            norms[sym] = spectral_norm(stack[sym])
        total += norms[sym] * dur
    return total


@dataclass(frozen=True)
class FlowResult:
    """Flow plus the Magnus terms that were requested for it."""

    phi: np.ndarray
    omega1: np.ndarray
    omega2: np.ndarray | None
    omega3: np.ndarray | None
    generator_mass: float


def _omega1(mats: np.ndarray, durs: np.ndarray) -> np.ndarray:
    return np.einsum("k,kij->ij", durs, mats)


def _omega2(mats: np.ndarray, durs: np.ndarray) -> np.ndarray:
    n = mats.shape[1]
    out = np.zeros((n, n))
    for i in range(len(durs)):
        for j in range(i):
            ab = mats[i] @ mats[j] - mats[j] @ mats[i]
            out += 0.5 * durs[i] * durs[j] * ab
    return out


def _omega3(mats: np.ndarray, durs: np.ndarray) -> np.ndarray:
    """Third Magnus term as an exact sum over ordered index triples.

    Splitting the time-ordered simplex by segment membership leaves constant
    integrands on each cell, so each cell contributes its nested-commutator
    value times the cell volume: d_i d_j d_k off the diagonal blocks, and
    d^2/2 weights when two of the three times share a segment (the fully
    coincident cell vanishes by antisymmetry).
    """
    n = mats.shape[1]
    K = len(durs)
    out = np.zeros((n, n))

    def brk(a, b):
        return a @ b - b @ a

    for i in range(K):
        for j in range(i):
            for k in range(j):
                f = brk(mats[i], brk(mats[j], mats[k])) + brk(mats[k], brk(mats[j], mats[i]))
                out += durs[i] * durs[j] * durs[k] * f
    for i in range(K):
        for k in range(i):
            # t1, t2 in segment i; t3 in segment k
            out += 0.5 * durs[i] ** 2 * durs[k] * brk(mats[i], brk(mats[i], mats[k]))
            # t1 in segment i; t2, t3 in segment k
            out += 0.5 * durs[i] * durs[k] ** 2 * brk(mats[k], brk(mats[k], mats[i]))
    return out / 6.0


def magnus_terms(system, path: PiecewisePath, order: int = 3) -> FlowResult:
    """Flow and Magnus terms Omega_1..Omega_order (order in {1, 2, 3})."""
    if order not in (1, 2, 3):
        raise ValidationError(f"unsupported Magnus order {order}; production stops at 3")
    mats, durs = _segment_generators(system, path)
    om1 = _omega1(mats, durs)
    om2 = _omega2(mats, durs) if order >= 2 else None
    om3 = _omega3(mats, durs) if order >= 3 else None
    return FlowResult(
        phi=transition_matrix(system, path),
        omega1=om1,
        omega2=om2,
        omega3=om3,
        generator_mass=generator_mass(system, path),
    )


def commutator_mass(system, path: PiecewisePath) -> float:
    """Spectral norm of the second Magnus term over the path."""
    mats, durs = _segment_generators(system, path)
    return spectral_norm(_omega2(mats, durs))


def truncated_flow(system, path: PiecewisePath, order: int) -> np.ndarray:
    """expm(Omega_1 + ... + Omega_order); requires generator mass < 1.

    The mass guard mirrors the short-window regime in which the expansion
    converges; longer horizons must be split by the caller first.
    """
    if order not in (1, 2, 3):
        raise ValidationError(f"unsupported truncation order {order}")
    mass = generator_mass(system, path)
    if mass >= 1.0:
        raise GuardError(
            f"generator mass {mass:.4g} >= 1: window too long for a truncated expansion"
        )
    mats, durs = _segment_generators(system, path)
    total = _omega1(mats, durs)
    if order >= 2:
        total = total + _omega2(mats, durs)
    if order >= 3:
        total = total + _omega3(mats, durs)
    return expm(total)
