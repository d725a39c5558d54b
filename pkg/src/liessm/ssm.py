"""Affine state-space models over a finite input alphabet.

An SSM assigns to every alphabet symbol a generator A(x) and a translation
b(x); along a piecewise-constant path the state follows
h' = A(x(t)) h + b(x(t)). Simulation is exact: the affine system is
homogenized into one extra dimension and integrated segment-by-segment with
matrix exponentials.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import lie_closure
from .errors import GuardError, ValidationError
from .flows import PiecewisePath, expm, generator_mass, reverse_path, transition_matrix
from .linalg import spectral_norm

__all__ = [
    "SSMSpec",
    "DeepSSMSpec",
    "SimErrorReport",
    "FourPathReport",
    "homogenize",
    "simulate_state",
    "is_restricted",
    "lift",
    "project_lifted",
    "deep_simulate",
    "estimate_sim_error",
    "sample_path",
    "four_path_probe",
]


@dataclass(frozen=True)
class SSMSpec:
    """Finite-alphabet affine system: per-symbol (A, b) plus initial state."""

    A: np.ndarray  # (alphabet_size, n, n)
    b: np.ndarray  # (alphabet_size, n)
    h0: np.ndarray  # (n,)
    alphabet: tuple = ()

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        if A.ndim != 3 or A.shape[1] != A.shape[2]:
            raise ValidationError(f"A must be (alphabet, n, n), got {A.shape}")
        n = A.shape[1]
        b = np.asarray(self.b, dtype=float)
        if b.shape != (A.shape[0], n):
            raise ValidationError(f"b must be {(A.shape[0], n)}, got {b.shape}")
        h0 = np.asarray(self.h0, dtype=float)
        if h0.shape != (n,):
            raise ValidationError(f"h0 must have shape ({n},), got {h0.shape}")
        for arr, name in ((A, "A"), (b, "b"), (h0, "h0")):
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name} has non-finite entries")
        alphabet = tuple(self.alphabet) or tuple(f"x{i}" for i in range(A.shape[0]))
        if len(alphabet) != A.shape[0]:
            raise ValidationError("alphabet size does not match the generator stack")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "h0", h0)
        object.__setattr__(self, "alphabet", alphabet)

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def alphabet_size(self) -> int:
        return self.A.shape[0]

    @property
    def is_homogeneous(self) -> bool:
        return bool(np.all(self.b == 0.0))

    def symbol_index(self, name: str) -> int:
        try:
            return self.alphabet.index(name)
        except ValueError:
            raise ValidationError(f"unknown symbol {name!r}; alphabet is {self.alphabet}") from None

    @classmethod
    def homogeneous(cls, generators, h0=None, alphabet=()) -> "SSMSpec":
        A = np.asarray(generators, dtype=float)
        n = A.shape[1]
        if h0 is None:
            h0 = np.zeros(n)
            h0[0] = 1.0
        return cls(A=A, b=np.zeros((A.shape[0], n)), h0=np.asarray(h0, dtype=float), alphabet=alphabet)


def homogenize(ssm: SSMSpec) -> SSMSpec:
    """Absorb translations into one appended coordinate pinned at 1.

    Generators become [[A(x), b(x)], [0, 0]]; the commutator of two such
    blocks carries A(x)b(y) - A(y)b(x) in its top-right corner, which is all
    that distinguishes an affine system from its homogeneous part.
    """
    k, n = ssm.alphabet_size, ssm.n
    big = np.zeros((k, n + 1, n + 1))
    big[:, :n, :n] = ssm.A
    big[:, :n, n] = ssm.b
    return SSMSpec(
        A=big,
        b=np.zeros((k, n + 1)),
        h0=np.concatenate([ssm.h0, [1.0]]),
        alphabet=ssm.alphabet,
    )


def simulate_state(ssm: SSMSpec, path: PiecewisePath, h0=None) -> np.ndarray:
    """Exact endpoint state: homogenize, multiply segment exponentials."""
    hom = homogenize(ssm)
    state = hom.h0.copy()
    if h0 is not None:
        h0 = np.asarray(h0, dtype=float)
        if h0.shape != (ssm.n,):
            raise ValidationError(f"h0 override must have shape ({ssm.n},)")
        state[: ssm.n] = h0
    for sym, dur in path.segments:
        if sym >= hom.alphabet_size:
            raise ValidationError(f"symbol {sym} outside alphabet of size {hom.alphabet_size}")
        state = expm(hom.A[sym] * dur) @ state
    return state[: ssm.n]


def is_restricted(ssm: SSMSpec, tol: float = 1e-9) -> bool:
    """True when the generator family is abelian (translations are free)."""
    k = ssm.alphabet_size
    for i in range(k):
        for j in range(i):
            comm = ssm.A[i] @ ssm.A[j] - ssm.A[j] @ ssm.A[i]
            scale = max(1.0, np.linalg.norm(ssm.A[i]) * np.linalg.norm(ssm.A[j]))
            if np.linalg.norm(comm) > tol * scale:
                return False
    return True


def lift(ssm: SSMSpec) -> SSMSpec:
    """Track the whole transition matrix instead of one state.

    The n*n-dimensional system has generators kron(I_n, A(x)) acting on the
    column-major flattening of Phi, with initial state vec(I_n). Projecting a
    lifted state with ``project_lifted`` recovers the original state Phi h0.
    """
    if not ssm.is_homogeneous:
        raise ValidationError("lift expects a homogeneous system; homogenize first")
    n = ssm.n
    eye = np.eye(n)
    A_lift = np.stack([np.kron(eye, a) for a in ssm.A])
    return SSMSpec(
        A=A_lift,
        b=np.zeros((ssm.alphabet_size, n * n)),
        h0=eye.flatten(order="F"),
        alphabet=ssm.alphabet,
    )


def project_lifted(lifted_state: np.ndarray, n: int, h0) -> np.ndarray:
    """Apply the flow packed in a lifted state to an initial state."""
    phi = np.asarray(lifted_state, dtype=float).reshape((n, n), order="F")
    return phi @ np.asarray(h0, dtype=float)


@dataclass(frozen=True)
class DeepSSMSpec:
    """Layer stack where layer i's input coefficients are a linear map of
    all lower-layer states plus the one-hot external symbol.

    ``couplings[0]`` must be the identity on the external one-hot (or None,
    meaning exactly that); ``couplings[i]`` has shape
    (alphabet_size_i, n_{i-1} + ... + n_0 + external_alphabet_size).
    """

    layers: tuple
    couplings: tuple

    def __post_init__(self):
        layers = tuple(self.layers)
        couplings = list(self.couplings)
        if not layers:
            raise ValidationError("a deep SSM needs at least one layer")
        if len(couplings) != len(layers):
            raise ValidationError("need exactly one coupling per layer")
        ext = layers[0].alphabet_size
        if couplings[0] is None:
            couplings[0] = np.eye(ext)
        couplings[0] = np.asarray(couplings[0], dtype=float)
        if couplings[0].shape != (ext, ext) or not np.allclose(couplings[0], np.eye(ext)):
            raise ValidationError("layer 0 coupling must be the identity on the external input")
        state_dims = 0
        for i in range(1, len(layers)):
            state_dims += layers[i - 1].n
            expected = (layers[i].alphabet_size, state_dims + ext)
            couplings[i] = np.asarray(couplings[i], dtype=float)
            if couplings[i].shape != expected:
                raise ValidationError(
                    f"coupling {i} must have shape {expected}, got {couplings[i].shape}"
                )
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "couplings", tuple(couplings))


def deep_simulate(deep: DeepSSMSpec, path: PiecewisePath, step: float) -> list[np.ndarray]:
    """Integrate the stack with fixed-step classical RK4; returns final states.

    Lower layers never see higher ones, so the joint vector field is
    evaluated bottom-up at every RK4 stage. ``step`` must not exceed the
    shortest segment.
    """
    if step <= 0.0:
        raise ValidationError("step must be positive")
    if step > min(d for _, d in path.segments):
        raise ValidationError("step must not exceed the shortest segment duration")
    layers = deep.layers
    ext = layers[0].alphabet_size

    def field(states: list[np.ndarray], onehot: np.ndarray) -> list[np.ndarray]:
        derivs = []
        lower: list[np.ndarray] = []
        for i, layer in enumerate(layers):
            if i == 0:
                coeff = onehot
            else:
                # coupling input order: h_{i-1}, ..., h_0, external one-hot
                stacked = np.concatenate(list(reversed(lower)) + [onehot])
                coeff = deep.couplings[i] @ stacked
            a_eff = np.einsum("c,cij->ij", coeff, layer.A)
            b_eff = coeff @ layer.b
            derivs.append(a_eff @ states[i] + b_eff)
            lower.append(states[i])
        return derivs

    states = [layer.h0.copy() for layer in layers]
    for sym, dur in path.segments:
        if sym >= ext:
            raise ValidationError(f"symbol {sym} outside alphabet of size {ext}")
        onehot = np.zeros(ext)
        onehot[sym] = 1.0
        substeps = max(1, int(np.ceil(dur / step - 1e-12)))
        h = dur / substeps
        for _ in range(substeps):
            k1 = field(states, onehot)
            k2 = field([y + 0.5 * h * k for y, k in zip(states, k1)], onehot)
            k3 = field([y + 0.5 * h * k for y, k in zip(states, k2)], onehot)
            k4 = field([y + h * k for y, k in zip(states, k3)], onehot)
            states = [
                y + (h / 6.0) * (a + 2.0 * b + 2.0 * c + d)
                for y, a, b, c, d in zip(states, k1, k2, k3, k4)
            ]
    return states


def sample_path(
    alphabet_size: int,
    horizon: float,
    seed: int,
    index: int,
    segments: int = 8,
    mass_bound: float | None = None,
    generators: np.ndarray | None = None,
) -> PiecewisePath:
    """Draw one admissible random path; stream (seed, index) is splittable.

    Symbols are uniform; durations come from a fixed ten-point grid and are
    rescaled so the path fills [0, horizon] exactly. When ``mass_bound`` is
    given the draw repeats inside the same stream until the generator mass
    stays below it.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))
    grid = np.linspace(0.05, 0.5, 10)
    for _ in range(1000):
        symbols = rng.integers(0, alphabet_size, size=segments)
        raw = rng.choice(grid, size=segments)
        durations = raw / raw.sum() * horizon
        path = PiecewisePath(tuple(zip(symbols.tolist(), durations.tolist())))
        if mass_bound is None or generators is None:
            return path
        if generator_mass(generators, path) < mass_bound:
            return path
    raise GuardError("path sampler failed to satisfy the mass bound in 1000 draws")


@dataclass(frozen=True)
class SimErrorReport:
    """Sampled estimate of the best-linear-readout endpoint mismatch."""

    delta_hat: float
    P: np.ndarray
    horizon: float
    samples: int
    seed: int
    residuals: np.ndarray = field(repr=False, default=None)

    def to_dict(self) -> dict:
        return {
            "delta_hat": self.delta_hat,
            "P": self.P.tolist(),
            "horizon": self.horizon,
            "samples": self.samples,
            "seed": self.seed,
        }


def estimate_sim_error(
    target: SSMSpec,
    approximant: SSMSpec,
    horizon: float,
    samples: int,
    seed: int,
    segments: int = 8,
    mass_bound: float | None = None,
) -> SimErrorReport:
    """Estimate how well a linear read-out of the approximant tracks the target.

    Draws seeded random paths, simulates both systems to the horizon, fits P
    by least squares mapping approximant endpoints to target endpoints, and
    reports the maximum residual over the sample set. This inner-approximates
    the inf-sup error (fitted inf over a sampled sup) and is reported as an
    estimate, never as a bound.
    """
    if target.alphabet_size != approximant.alphabet_size:
        raise ValidationError("target and approximant must share an alphabet")
    if samples < max(target.n, approximant.n):
        raise ValidationError("need at least as many samples as state dimensions")
    endpoints_t = np.empty((samples, target.n))
    endpoints_a = np.empty((samples, approximant.n))
    for i in range(samples):
        path = sample_path(
            target.alphabet_size,
            horizon,
            seed,
            i,
            segments=segments,
            mass_bound=mass_bound,
            generators=target.A,
        )
        endpoints_t[i] = simulate_state(target, path)
        endpoints_a[i] = simulate_state(approximant, path)
    # Frobenius-optimal P for P @ h_approx ~ h_target.
    solution, _, rank, _ = np.linalg.lstsq(endpoints_a, endpoints_t, rcond=None)
    if rank < approximant.n:
        raise GuardError(
            f"degenerate least-squares fit: approximant endpoints have rank {rank} < {approximant.n}"
        )
    P = solution.T
    residuals = np.linalg.norm(endpoints_a @ solution - endpoints_t, axis=1)
    return SimErrorReport(
        delta_hat=float(residuals.max()),
        P=P,
        horizon=float(horizon),
        samples=samples,
        seed=seed,
        residuals=residuals,
    )


@dataclass(frozen=True)
class FourPathReport:
    """Residual bookkeeping for the two-prefix / reversed-suffix probe."""

    residual: float
    diff_of_differences: np.ndarray
    suffix_flow_gap: np.ndarray  # Phi over suffix minus Phi over reversed suffix
    prefix_state_gap: np.ndarray

    @property
    def diff_norm(self) -> float:
        return float(np.linalg.norm(self.diff_of_differences))

    @property
    def suffix_gap_norm(self) -> float:
        return float(spectral_norm(self.suffix_flow_gap))


def four_path_probe(
    ssm: SSMSpec,
    prefix1: PiecewisePath,
    prefix2: PiecewisePath,
    xy: PiecewisePath,
) -> FourPathReport:
    """Simulate prefix_i + xy and prefix_i + reverse(xy) and difference them.

    Translations cancel in the difference of differences, leaving
    M (h1 - h2) with M the homogeneous flow gap between the suffix and its
    reversal; the returned residual measures that identity. For a restricted
    system both sides vanish.
    """
    if len(xy.segments) < 2:
        raise ValidationError("the probe suffix needs at least two segments")
    if abs(prefix1.total_duration - prefix2.total_duration) > 1e-12 * max(
        1.0, prefix1.total_duration
    ):
        raise ValidationError("prefixes must end at the same time coordinate")
    yx = reverse_path(xy)

    def cat(a: PiecewisePath, b: PiecewisePath) -> PiecewisePath:
        return PiecewisePath(a.segments + b.segments)

    h1 = simulate_state(ssm, cat(prefix1, xy))
    h1r = simulate_state(ssm, cat(prefix1, yx))
    h2 = simulate_state(ssm, cat(prefix2, xy))
    h2r = simulate_state(ssm, cat(prefix2, yx))
    h1_mid = simulate_state(ssm, prefix1)
    h2_mid = simulate_state(ssm, prefix2)

    suffix_gap = transition_matrix(ssm, xy) - transition_matrix(ssm, yx)
    lhs = (h1 - h1r) - (h2 - h2r)
    state_gap = h1_mid - h2_mid
    residual = float(np.linalg.norm(lhs - suffix_gap @ state_gap))
    return FourPathReport(
        residual=residual,
        diff_of_differences=lhs,
        suffix_flow_gap=suffix_gap,
        prefix_state_gap=state_gap,
    )


def generator_closure(ssm: SSMSpec, tol: float = 1e-9):
    """Lie closure of the generator family (convenience for classification)."""
    return lie_closure(list(ssm.A), tol=tol)
