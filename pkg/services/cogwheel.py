"""
N-state cogwheel: the cyclic permutation matrix, its Hamiltonian in the
diagonal and standard bases, and the Fourier basis relating the two.

Convention: the shift maps standard basis state k to k+1, U[k+1, k] = exp(i phi_k),
and the Hamiltonian is fixed by exp(-i H T) = U.
"""

import logging
from typing import Literal, Optional, Tuple

import numpy as np
import scipy.linalg
from pydantic import BaseModel, ConfigDict, Field, ValidationInfo, field_validator

from config import Config
from errors import UnsupportedConfigurationError

logger = logging.getLogger(__name__)

BasisTag = Literal["diagonal", "standard"]


class CogwheelSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_states: int
    timestep: float = 1.0
    phases: Tuple[float, ...] = Field(default=(), validate_default=True)

    @field_validator("n_states")
    @classmethod
    def _check_n_states(cls, value: int) -> int:
        if value < 2:
            raise ValueError(f"a cogwheel needs at least 2 states, got {value}")
        return value

    @field_validator("timestep")
    @classmethod
    def _check_timestep(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("timestep must be positive")
        return value

    @field_validator("phases")
    @classmethod
    def _fill_phases(cls, value: Tuple[float, ...], info: ValidationInfo) -> Tuple[float, ...]:
        n_states = info.data.get("n_states")
        if n_states is None:
            return value
        if not value:
            return (0.0,) * n_states
        if len(value) != n_states:
            raise ValueError(f"expected {n_states} phases, got {len(value)}")
        return tuple(value)

    @property
    def phase_sum(self) -> float:
        return float(sum(self.phases))

    @property
    def has_phases(self) -> bool:
        return any(self.phases)


class CogwheelHamiltonian(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    matrix: np.ndarray
    basis_tag: BasisTag
    timestep: float

    @property
    def n_states(self) -> int:
        return self.matrix.shape[0]

    def hermiticity_defect(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def eigenvalues(self) -> np.ndarray:
        return scipy.linalg.eigvalsh(self.matrix)


class GeneratorReport(BaseModel):
    """Outcome of checking exp(-i H T) against the shift matrix."""

    n_states: int
    timestep: float
    diagonal_deviation: float
    standard_deviation: Optional[float] = None
    closed_form_deviation: Optional[float] = None
    eigenbasis_residual: float
    max_deviation: float
    passed: bool


def shift_matrix(spec: CogwheelSpec) -> np.ndarray:
    """Unitary N x N matrix with exp(i phi_k) carrying state k to state k+1 (cyclically)."""
    n = spec.n_states
    matrix = np.zeros((n, n), dtype=complex)
    for k, phi in enumerate(spec.phases):
        matrix[(k + 1) % n, k] = np.exp(1j * phi) if phi else 1.0
    return matrix


def diagonal_energies(spec: CogwheelSpec) -> np.ndarray:
    """(2 pi (n-1) - sum phi) / (N T) for n = 1..N."""
    n = spec.n_states
    return (2 * np.pi * np.arange(n) - spec.phase_sum) / (n * spec.timestep)


def fourier_basis(spec: CogwheelSpec) -> np.ndarray:
    """
    Unitary W whose column m is an eigenvector of the shift matrix with
    eigenvalue exp(-i E_m T), E_m the m-th diagonal energy.

    For zero phases W is the conjugated unitary DFT matrix; phases are absorbed
    by a diagonal gauge transformation.
    """
    n = spec.n_states
    fourier = scipy.linalg.dft(n, scale="sqrtn").conj()
    if not spec.has_phases:
        return fourier
    mean_phase = spec.phase_sum / n
    cumulative = np.concatenate(([0.0], np.cumsum(spec.phases[:-1])))
    gauge = np.exp(1j * (cumulative - np.arange(n) * mean_phase))
    return gauge[:, None] * fourier


def spectral_expm(eigenvalues: np.ndarray, eigenvectors: np.ndarray, time: float) -> np.ndarray:
    """exp(-i H t) for H = V diag(eigenvalues) V^dagger."""
    phases = np.exp(-1j * np.asarray(eigenvalues) * time)
    return (eigenvectors * phases) @ eigenvectors.conj().T


def hermitian_expm(matrix: np.ndarray, time: float) -> np.ndarray:
    eigenvalues, eigenvectors = scipy.linalg.eigh(matrix)
    return spectral_expm(eigenvalues, eigenvectors, time)


def hamiltonian_diagonal(spec: CogwheelSpec) -> CogwheelHamiltonian:
    return CogwheelHamiltonian(
        matrix=np.diag(diagonal_energies(spec)).astype(complex),
        basis_tag="diagonal",
        timestep=spec.timestep,
    )


def hamiltonian_standard(spec: CogwheelSpec) -> CogwheelHamiltonian:
    """
    Hamiltonian in the standard basis, assembled spectrally as
    sum_m E_m w_m w_m^dagger over the Fourier eigenvectors.

    Raises:
        UnsupportedConfigurationError: if any phase is nonzero
    """
    if spec.has_phases:
        raise UnsupportedConfigurationError("standard-basis Hamiltonian requires zero phases")
    basis = fourier_basis(spec)
    matrix = (basis * diagonal_energies(spec)) @ basis.conj().T
    matrix = (matrix + matrix.conj().T) / 2
    return CogwheelHamiltonian(matrix=matrix, basis_tag="standard", timestep=spec.timestep)


def closed_form_hamiltonian(n_states: int, timestep: float = 1.0,
                            orientation: Literal["forward", "backward"] = "forward") -> np.ndarray:
    """
    Standard-basis Hamiltonian written out element by element:
    pi (N-1) / (N T) on the diagonal and (pi / N T)(-1 -/+ i cot(pi (n-m) / N)) off it.

    "forward" generates the shift matrix; "backward" flips the sign of the cot
    term, which is the transpose of the forward matrix and generates its inverse.
    """
    sign = -1.0 if orientation == "forward" else 1.0
    scale = np.pi / (n_states * timestep)
    rows, cols = np.indices((n_states, n_states))
    offset = rows - cols
    matrix = np.full((n_states, n_states), scale * (n_states - 1), dtype=complex)
    off = offset != 0
    matrix[off] = scale * (-1 + sign * 1j / np.tan(np.pi * offset[off] / n_states))
    return matrix


def power_identity_deviation(spec: CogwheelSpec) -> float:
    """max |U^N - exp(i sum phi) 1|."""
    power = np.linalg.matrix_power(shift_matrix(spec), spec.n_states)
    target = np.exp(1j * spec.phase_sum) * np.eye(spec.n_states)
    return float(np.max(np.abs(power - target)))


def verify_generator(spec: CogwheelSpec, tolerance: float = Config.VERIFY_TOLERANCE,
                     perturbation: float = 0.0) -> GeneratorReport:
    """
    Check exp(-i H T) = U for the diagonal form (mapped back through the
    Fourier basis) and, for zero phases, the standard and closed forms.

    Args:
        spec: cogwheel to check
        tolerance: pass threshold on the largest elementwise deviation
        perturbation: added to the (0, 0) entry of every Hamiltonian; nonzero
            values exercise the failure path

    Returns:
        GeneratorReport; failure is reported, never raised
    """
    target = shift_matrix(spec)
    basis = fourier_basis(spec)
    time = spec.timestep
    fault = np.zeros((spec.n_states, spec.n_states), dtype=complex)
    fault[0, 0] = perturbation

    residual = float(np.max(np.abs(
        target @ basis - basis * np.exp(-1j * diagonal_energies(spec) * time)
    )))

    diagonal = hamiltonian_diagonal(spec).matrix + fault
    evolved = basis @ hermitian_expm(diagonal, time) @ basis.conj().T
    diagonal_deviation = float(np.max(np.abs(evolved - target)))
    deviations = [diagonal_deviation, residual]

    standard_deviation = closed_deviation = None
    if not spec.has_phases:
        standard = hamiltonian_standard(spec).matrix + fault
        standard_deviation = float(np.max(np.abs(hermitian_expm(standard, time) - target)))
        closed = closed_form_hamiltonian(spec.n_states, time) + fault
        closed_deviation = float(np.max(np.abs(hermitian_expm(closed, time) - target)))
        deviations += [standard_deviation, closed_deviation]

    worst = max(deviations)
    report = GeneratorReport(
        n_states=spec.n_states,
        timestep=time,
        diagonal_deviation=diagonal_deviation,
        standard_deviation=standard_deviation,
        closed_form_deviation=closed_deviation,
        eigenbasis_residual=residual,
        max_deviation=worst,
        passed=worst < tolerance,
    )
    logger.debug("cogwheel N=%d: max deviation %.3e", spec.n_states, worst)
    return report
