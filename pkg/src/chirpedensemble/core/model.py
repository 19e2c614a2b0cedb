import itertools
import logging
from dataclasses import dataclass
from typing import Callable, Optional, Protocol, Sequence, Tuple, Union

import numpy as np
import numpy.typing as npt

from chirpedensemble.exceptions import ArgumentError, DomainError, ModelError

logger = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]
ComplexArray = npt.NDArray[np.complex128]

# Membership tolerance for alpha against the box edges
BOX_ATOL = 1e-12


def _readonly(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ParamBox:
    """Closed box D of the uncertain parameter alpha, one interval per component."""

    intervals: FloatArray

    def __post_init__(self):
        arr = np.array(self.intervals, dtype=float)
        if arr.ndim == 1 and arr.size == 2:
            arr = arr.reshape(1, 2)
        if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < 1:
            raise ModelError(
                f"ParamBox needs m >= 1 intervals of shape (m, 2), got shape {arr.shape}."
            )
        bad = np.flatnonzero(arr[:, 0] > arr[:, 1])
        if bad.size:
            raise ModelError(
                f"ParamBox interval {int(bad[0]) + 1} has lower > upper: {arr[bad[0]].tolist()}."
            )
        arr.setflags(write=False)
        object.__setattr__(self, "intervals", arr)

    @classmethod
    def point(cls, alpha: Union[float, Sequence[float]]) -> "ParamBox":
        """Zero-width box at a single alpha."""
        values = np.atleast_1d(np.asarray(alpha, dtype=float))
        return cls(np.column_stack([values, values]))

    @property
    def dim(self) -> int:
        return self.intervals.shape[0]

    @property
    def lower(self) -> FloatArray:
        return self.intervals[:, 0]

    @property
    def upper(self) -> FloatArray:
        return self.intervals[:, 1]

    def vertices(self) -> FloatArray:
        """All 2^m corners, shape (2^m, m). Zero-width axes give repeated corners."""
        return np.array(list(itertools.product(*self.intervals)), dtype=float)

    def grid(self, points_per_axis: int = 101) -> FloatArray:
        """Tensor grid including the vertices, shape (points_per_axis^m, m)."""
        if points_per_axis < 2:
            raise ArgumentError(f"points_per_axis must be >= 2, got {points_per_axis}.")
        axes = [np.linspace(lo, hi, points_per_axis) for lo, hi in self.intervals]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.column_stack([m.ravel() for m in mesh])

    def contains(self, alpha: Union[float, Sequence[float]]) -> bool:
        values = np.atleast_1d(np.asarray(alpha, dtype=float))
        if values.shape != (self.dim,):
            return False
        return bool(
            np.all(values >= self.lower - BOX_ATOL) and np.all(values <= self.upper + BOX_ATOL)
        )


class Drift(Protocol):
    """Maps alpha to the n drift eigenvalues lambda_j(alpha)."""

    n: int
    is_affine: bool

    def __call__(self, alpha: FloatArray) -> FloatArray: ...

    def evaluate_many(self, alphas: FloatArray) -> FloatArray: ...


@dataclass(frozen=True, eq=False)
class AffineDrift:
    """lambda_j(alpha) = a_j + b_j . alpha; gap extrema sit on the box vertices."""

    offsets: FloatArray
    coefficients: FloatArray
    is_affine: bool = True

    def __post_init__(self):
        offsets = _readonly(self.offsets)
        coefficients = np.array(self.coefficients, dtype=float)
        if coefficients.ndim == 1:
            coefficients = coefficients.reshape(-1, 1)
        if offsets.ndim != 1 or coefficients.shape[0] != offsets.shape[0]:
            raise ModelError(
                f"Drift offsets {offsets.shape} and coefficients {coefficients.shape} disagree on n."
            )
        coefficients.setflags(write=False)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def n(self) -> int:
        return self.offsets.shape[0]

    @property
    def dim(self) -> int:
        return self.coefficients.shape[1]

    def __call__(self, alpha: FloatArray) -> FloatArray:
        return self.offsets + self.coefficients @ np.atleast_1d(alpha)

    def evaluate_many(self, alphas: FloatArray) -> FloatArray:
        return self.offsets[None, :] + np.atleast_2d(alphas) @ self.coefficients.T


@dataclass(frozen=True, eq=False)
class FunctionDrift:
    """Arbitrary continuous drift; condition checks must fall back to a grid."""

    fn: Callable[[FloatArray], Sequence[float]]
    n: int
    is_affine: bool = False

    def __call__(self, alpha: FloatArray) -> FloatArray:
        values = np.asarray(self.fn(np.atleast_1d(alpha)), dtype=float)
        if values.shape != (self.n,):
            raise ModelError(f"Drift function returned shape {values.shape}, expected ({self.n},).")
        return values

    def evaluate_many(self, alphas: FloatArray) -> FloatArray:
        return np.array([self(alpha) for alpha in np.atleast_2d(alphas)])


def pair_gaps(lambdas: FloatArray) -> FloatArray:
    """gaps[..., j, k] = lambda_k - lambda_j for any leading batch shape."""
    lambdas = np.asarray(lambdas, dtype=float)
    return lambdas[..., None, :] - lambdas[..., :, None]


@dataclass(frozen=True, eq=False)
class EnsembleSystem:
    """Dispersed family H(alpha) = diag(lambda(alpha)), H_c(delta) with delta_jk in I_jk."""

    drift: Drift
    coupling_lower: FloatArray
    coupling_upper: FloatArray
    box: ParamBox

    def __post_init__(self):
        n = self.drift.n
        if n < 2:
            raise ModelError(f"An ensemble needs n >= 2 levels, got {n}.")
        lower = _readonly(self.coupling_lower)
        upper = _readonly(self.coupling_upper)
        for name, arr in (("lower", lower), ("upper", upper)):
            if arr.shape != (n, n):
                raise ModelError(f"Coupling {name} bounds have shape {arr.shape}, expected ({n}, {n}).")
            if not np.array_equal(arr, arr.T):
                raise ModelError(f"Coupling {name} bounds are not symmetric.")
        if np.any(lower > upper):
            j, k = np.argwhere(lower > upper)[0]
            raise ModelError(
                f"Coupling interval I_{j + 1}{k + 1} has lower > upper.", pair=(int(j) + 1, int(k) + 1)
            )
        if isinstance(self.drift, AffineDrift) and self.drift.dim != self.box.dim:
            raise ModelError(
                f"Drift uses {self.drift.dim} parameters but the box has {self.box.dim}."
            )
        object.__setattr__(self, "coupling_lower", lower)
        object.__setattr__(self, "coupling_upper", upper)

        # Vertex positivity certifies the whole box for affine drifts
        lambdas = self.drift.evaluate_many(self.box.vertices())
        steps = np.diff(lambdas, axis=1)
        if np.any(steps <= 0):
            vertex, j = np.argwhere(steps <= 0)[0]
            raise ModelError(
                f"Gap lambda_{j + 2} - lambda_{j + 1} = {steps[vertex, j]:.6g} is not positive "
                f"at alpha = {self.box.vertices()[vertex].tolist()}.",
                pair=(int(j) + 1, int(j) + 2),
            )

    @classmethod
    def affine(
        cls,
        offsets: Sequence[float],
        coefficients: Sequence,
        coupling: Sequence,
        box: Union[ParamBox, Sequence],
        coupling_upper: Optional[Sequence] = None,
    ) -> "EnsembleSystem":
        """Builds an affine ensemble; `coupling_upper=None` means exactly known couplings."""
        if not isinstance(box, ParamBox):
            box = ParamBox(box)
        upper = coupling if coupling_upper is None else coupling_upper
        return cls(AffineDrift(offsets, coefficients), np.asarray(coupling), np.asarray(upper), box)

    @property
    def n(self) -> int:
        return self.drift.n

    def lambdas(self, alpha: Union[float, Sequence[float]]) -> FloatArray:
        return self.drift(np.atleast_1d(np.asarray(alpha, dtype=float)))

    def gap_table(self, alphas: FloatArray) -> FloatArray:
        """Pairwise gaps for a batch of alphas, shape (N, n, n)."""
        return pair_gaps(self.drift.evaluate_many(alphas))


@dataclass(frozen=True, eq=False)
class SampledSystem:
    """One realization (lambda, delta) of the ensemble."""

    lambdas: FloatArray
    coupling: FloatArray

    def __post_init__(self):
        lambdas = _readonly(self.lambdas)
        coupling = _readonly(self.coupling)
        n = lambdas.shape[0]
        if lambdas.ndim != 1 or n < 2:
            raise ModelError(f"Need a vector of n >= 2 eigenvalues, got shape {lambdas.shape}.")
        if coupling.shape != (n, n):
            raise ModelError(f"Coupling has shape {coupling.shape}, expected ({n}, {n}).")
        if not np.array_equal(coupling, coupling.T):
            raise ModelError("Coupling matrix is not symmetric.")
        steps = np.diff(lambdas)
        if np.any(steps <= 0):
            j = int(np.flatnonzero(steps <= 0)[0])
            raise ModelError(
                f"Eigenvalues must be strictly increasing: lambda_{j + 2} - lambda_{j + 1} = {steps[j]:.6g}.",
                pair=(j + 1, j + 2),
            )
        object.__setattr__(self, "lambdas", lambdas)
        object.__setattr__(self, "coupling", coupling)

    @property
    def n(self) -> int:
        return self.lambdas.shape[0]

    def gap(self, j: int, k: int) -> float:
        """lambda_k - lambda_j with 1-based levels."""
        return float(self.lambdas[k - 1] - self.lambdas[j - 1])


def check_level_pair(n: int, p: int, q: int) -> Tuple[int, int]:
    """Validates 1 <= p < q <= n and returns 0-based indices."""
    if not (1 <= p <= n and 1 <= q <= n):
        raise ArgumentError(f"Levels ({p}, {q}) out of range for an {n}-level system.")
    if p >= q:
        raise ArgumentError(f"Target pair needs p < q, got ({p}, {q}).")
    return p - 1, q - 1


def sample_system(
    ens: EnsembleSystem,
    alpha: Union[float, Sequence[float]],
    delta_choice: Union[float, Sequence] = 0.0,
) -> SampledSystem:
    """Realizes the ensemble at alpha with couplings picked affinely inside each I_jk.

    Args:
        ens: The ensemble.
        alpha: Parameter vector inside the box.
        delta_choice: Scalar or n x n selection in [0, 1]; only the upper triangle
            (diagonal included) is read so the coupling stays exactly symmetric.

    Returns:
        The sampled system.
    """
    alpha_vec = np.atleast_1d(np.asarray(alpha, dtype=float))
    if alpha_vec.shape != (ens.box.dim,):
        raise ArgumentError(f"alpha has shape {alpha_vec.shape}, expected ({ens.box.dim},).")
    if not ens.box.contains(alpha_vec):
        raise DomainError(
            f"alpha = {alpha_vec.tolist()} lies outside the parameter box {ens.box.intervals.tolist()}."
        )

    n = ens.n
    choice = np.broadcast_to(np.asarray(delta_choice, dtype=float), (n, n))
    if np.any(choice < 0.0) or np.any(choice > 1.0):
        raise DomainError("delta_choice entries must lie in [0, 1].")
    upper_part = np.triu(choice)
    choice = upper_part + np.triu(choice, 1).T
    coupling = ens.coupling_lower + choice * (ens.coupling_upper - ens.coupling_lower)

    lambdas = ens.lambdas(alpha_vec)
    steps = np.diff(lambdas)
    if np.any(steps <= 0):
        j = int(np.flatnonzero(steps <= 0)[0])
        raise ModelError(
            f"Sampled gap lambda_{j + 2} - lambda_{j + 1} = {steps[j]:.6g} is not positive "
            f"at alpha = {alpha_vec.tolist()}.",
            pair=(j + 1, j + 2),
        )
    return SampledSystem(lambdas, coupling)


def recenter(sys: SampledSystem, p: int, q: int) -> SampledSystem:
    """Shifts the spectrum so that lambda_p = -lambda_q = -Delta/2."""
    ip, iq = check_level_pair(sys.n, p, q)
    midpoint = 0.5 * (sys.lambdas[ip] + sys.lambdas[iq])
    return SampledSystem(sys.lambdas - midpoint, sys.coupling)


def hamiltonian_at(sys: SampledSystem, omega_value: float) -> ComplexArray:
    """diag(lambda) + omega * H_c."""
    return np.diag(sys.lambdas).astype(complex) + omega_value * sys.coupling
