"""
Hamiltonian of the spin chain as a polynomial in the update operator U,
orbit-wise spectral exponentials, and the leading-order approximation that
turns ontological states into superpositions.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from config import Config
from data_structures.sparse_state import (
    QState,
    SparseVector,
    apply_chain_update,
    apply_inverse_chain_update,
)
from data_structures.spin_chain import (
    ChainConfig,
    OntState,
    Orbit,
    enumerate_orbits,
    orbit_of,
    update_index,
)
from errors import ConfigMismatchError, DegenerateSizeError, SystemSizeError
from services.cogwheel import CogwheelSpec, fourier_basis, hamiltonian_standard, shift_matrix
from utils.pauli import permutation_matrix

logger = logging.getLogger(__name__)

HamiltonianForm = Literal["exact", "cotangent", "leading_order", "perturbed"]


class ChainHamiltonian(BaseModel):
    """H = sum_n c_n U^(n-1), n = 1..S."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    config: ChainConfig
    coefficients: Tuple[complex, ...]
    form: HamiltonianForm

    def symbol(self, eigenvalue: complex) -> complex:
        """Value of H on an eigenvector of U with the given eigenvalue."""
        return sum(c * eigenvalue ** n for n, c in enumerate(self.coefficients))

    def orbit_spectrum(self, length: int) -> np.ndarray:
        """Eigenvalues of H on an orbit of the given length, in Fourier-mode order."""
        roots = np.exp(-2j * np.pi * np.arange(length) / length)
        return np.array([self.symbol(root) for root in roots])


class OrbitCheck(BaseModel):
    orbit_min_index: int
    orbit_length: int
    max_deviation: float
    form_deviation: float
    circulant_residual: float
    spectrum_deviation: float
    passed: bool


class BchReport(BaseModel):
    num_spins: int
    timestep: float
    mode: Literal["exhaustive", "sampled"]
    orbit_count: int
    failures: int
    max_deviation: float
    census: Dict[int, int]
    rows: List[OrbitCheck]
    passed: bool


class BellDemoResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    even_site: int
    odd_site: int
    initial: OntState
    forward_branch: OntState
    backward_branch: OntState
    difference: SparseVector
    image: SparseVector
    matches: bool


class PerturbationRow(BaseModel):
    epsilon: float
    fidelity: float
    support_size: int
    norm: float


def _check_config(h: ChainHamiltonian, q: SparseVector) -> None:
    if q.num_spins != h.config.num_spins:
        raise ConfigMismatchError(
            f"state has {q.num_spins} spins, Hamiltonian acts on {h.config.num_spins}"
        )


def build_hamiltonian(config: ChainConfig, form: HamiltonianForm = "exact") -> ChainHamiltonian:
    """
    Coefficients of the chain Hamiltonian in powers of U.

    Args:
        config: chain size and timestep
        form: "exact" takes the first column of the S-state cogwheel Hamiltonian;
            "cotangent" is the self-adjoint cot form, equal to "exact" away from
            the U = 1 eigenspace and pi/T on it; "leading_order" keeps
            pi/T (1 + (i/pi)(U - U^dagger)), which matches the leading cot
            terms with U and U^dagger exchanged

    Raises:
        DegenerateSizeError: for S = 1
    """
    half, period = config.half, config.timestep
    if half < 2:
        raise DegenerateSizeError("the chain Hamiltonian needs S >= 2")
    if form == "exact":
        column = hamiltonian_standard(CogwheelSpec(n_states=half, timestep=period)).matrix[:, 0]
        coefficients = [complex(c) for c in column]
    elif form == "cotangent":
        coefficients = [complex(np.pi / period)]
        for k in range(1, half):
            coefficients.append(-1j * np.pi / (half * period) / np.tan(np.pi * k / half))
    elif form == "leading_order":
        coefficients = [0j] * half
        coefficients[0] = complex(np.pi / period)
        coefficients[1] += 1j / period
        coefficients[half - 1] -= 1j / period
    else:
        raise ValueError("perturbed Hamiltonians come from perturb_hamiltonian")
    return ChainHamiltonian(config=config, coefficients=tuple(coefficients), form=form)


def perturb_hamiltonian(h: ChainHamiltonian, epsilon: float,
                        seed: Optional[int] = None) -> ChainHamiltonian:
    """
    Slightly detuned Hamiltonian.

    Without a seed every coefficient is scaled by (1 + epsilon); with a seed a
    random jitter of size epsilon is added, paired so that H stays self-adjoint
    (c_1 real, c_(S-k+1) = conj(c_(k+1))).
    """
    coefficients = np.array(h.coefficients, dtype=complex)
    if seed is None:
        coefficients *= 1 + epsilon
    else:
        half = len(coefficients)
        rng = np.random.default_rng(seed)
        jitter = np.zeros(half, dtype=complex)
        jitter[0] = rng.standard_normal()
        for k in range(1, half // 2 + 1):
            value = rng.standard_normal() + 1j * rng.standard_normal()
            if k == half - k:
                value = value.real
            jitter[k] = value
            jitter[half - k] = np.conj(value)
        coefficients += epsilon * jitter
    return ChainHamiltonian(config=h.config, coefficients=tuple(complex(c) for c in coefficients),
                            form="perturbed")


def apply_hamiltonian(h: ChainHamiltonian, q: SparseVector) -> SparseVector:
    """sum_n c_n U^(n-1)|q>, built from repeated permutations of q."""
    _check_config(h, q)
    accumulated: Dict[int, complex] = {}
    current = q
    for n, coefficient in enumerate(h.coefficients):
        if n:
            current = apply_chain_update(current, h.config)
        if coefficient == 0:
            continue
        for index, amplitude in current.items():
            accumulated[index] = accumulated.get(index, 0j) + coefficient * amplitude
    return SparseVector(accumulated, q.num_spins)


def approx_hamiltonian_apply(q: SparseVector, config: ChainConfig) -> SparseVector:
    """(pi/T)(1 + (i/pi)(U - U^dagger))|q>."""
    if q.num_spins != config.num_spins:
        raise ConfigMismatchError(f"state has {q.num_spins} spins, chain has {config.num_spins}")
    period = config.timestep
    forward = apply_chain_update(q, config)
    backward = apply_inverse_chain_update(q, config)
    return SparseVector({i: a * np.pi / period for i, a in q.items()}, q.num_spins) \
        + (forward - backward).scaled(1j / period)


def _orbit_fourier(length: int) -> np.ndarray:
    if length == 1:
        return np.ones((1, 1), dtype=complex)
    return fourier_basis(CogwheelSpec(n_states=length))


def _orbit_block(h: ChainHamiltonian, orbit: Orbit) -> Optional[np.ndarray]:
    """Matrix of H in the basis [psi, U psi, ...] of the orbit; None if H leaves the orbit."""
    position = {index: k for k, index in enumerate(orbit.states)}
    block = np.zeros((orbit.length, orbit.length), dtype=complex)
    for column, index in enumerate(orbit.states):
        image = apply_hamiltonian(h, SparseVector({index: 1.0}, orbit.num_spins))
        for row_index, amplitude in image.items():
            if row_index not in position:
                return None
            block[position[row_index], column] = amplitude
    return block


def check_orbit(orbit: Orbit, exact: ChainHamiltonian, cotangent: ChainHamiltonian,
                tolerance: float = Config.VERIFY_TOLERANCE) -> OrbitCheck:
    """
    Verify exp(-i H T) = U on one orbit block, the spectrum of H, and that the
    cot form differs from the exact form only by pi/T on the uniform superposition.
    """
    orbit = orbit.canonical()
    length, period = orbit.length, exact.config.timestep
    block = _orbit_block(exact, orbit)
    cot_block = _orbit_block(cotangent, orbit)
    if block is None or cot_block is None:
        logger.warning("Hamiltonian leaves orbit starting at %d", orbit.min_index)
        return OrbitCheck(orbit_min_index=orbit.min_index, orbit_length=length,
                          max_deviation=np.inf, form_deviation=np.inf,
                          circulant_residual=np.inf, spectrum_deviation=np.inf, passed=False)

    fourier = _orbit_fourier(length)
    rotated = fourier.conj().T @ block @ fourier
    energies = np.diag(rotated).copy()
    residual = float(np.max(np.abs(rotated - np.diag(energies))))
    evolved = (fourier * np.exp(-1j * energies * period)) @ fourier.conj().T
    target = np.ones((1, 1)) if length == 1 else shift_matrix(CogwheelSpec(n_states=length))
    deviation = float(np.max(np.abs(evolved - target)))

    allowed = 2 * np.pi * np.arange(exact.config.half) / (exact.config.half * period)
    spectrum_deviation = float(max(np.min(np.abs(e - allowed)) for e in energies))

    uniform = np.full((length, 1), 1 / np.sqrt(length))
    expected_gap = (np.pi / period) * (uniform @ uniform.T)
    form_deviation = float(np.max(np.abs(cot_block - block - expected_gap)))

    worst = max(deviation, residual)
    passed = worst < tolerance and form_deviation < tolerance and spectrum_deviation < tolerance
    return OrbitCheck(orbit_min_index=orbit.min_index, orbit_length=length,
                      max_deviation=deviation, form_deviation=form_deviation,
                      circulant_residual=residual, spectrum_deviation=spectrum_deviation,
                      passed=passed)


def sample_orbits(config: ChainConfig, samples: int, seed: int = 0) -> List[Orbit]:
    """Orbits of randomly drawn basis states, deduplicated and sorted by smallest index."""
    rng = np.random.default_rng(seed)
    draws = rng.integers(0, config.dimension, size=samples, dtype=np.int64)
    orbits: Dict[int, Orbit] = {}
    for index in draws:
        orbit = orbit_of(OntState(index=int(index), num_spins=config.num_spins), config).canonical()
        orbits.setdefault(orbit.min_index, orbit)
    return [orbits[key] for key in sorted(orbits)]


def verify_bch(config: ChainConfig, tolerance: float = Config.VERIFY_TOLERANCE,
               mode: Literal["auto", "exhaustive", "sampled"] = "auto",
               samples: int = Config.SAMPLED_ORBITS, seed: int = 0,
               workers: int = 1) -> BchReport:
    """
    Orbit-by-orbit check that the exact Hamiltonian generates the chain update.

    Args:
        config: chain to verify
        tolerance: pass threshold for every deviation
        mode: "exhaustive" walks the whole basis (2S <= 16), "sampled" checks the
            orbits of `samples` random states; "auto" picks by size
        seed: random seed for sampled mode
        workers: thread count for the per-orbit checks

    Returns:
        BchReport with one row per orbit, ordered by smallest basis index
    """
    if mode == "auto":
        mode = "exhaustive" if config.num_spins <= Config.EXHAUSTIVE_BCH_MAX_SPINS else "sampled"
    if mode == "exhaustive":
        if config.num_spins > Config.EXHAUSTIVE_BCH_MAX_SPINS:
            raise SystemSizeError(
                f"exhaustive verification limited to 2S <= {Config.EXHAUSTIVE_BCH_MAX_SPINS}"
            )
        orbits = list(enumerate_orbits(config))
    else:
        orbits = sample_orbits(config, samples, seed)

    exact = build_hamiltonian(config, "exact")
    cotangent = build_hamiltonian(config, "cotangent")
    logger.info("verifying %d orbits of the 2S=%d chain (%s)", len(orbits), config.num_spins, mode)

    def run(orbit: Orbit) -> OrbitCheck:
        return check_orbit(orbit, exact, cotangent, tolerance)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run, orbits))
    else:
        rows = [run(orbit) for orbit in orbits]

    census: Dict[int, int] = {}
    for row in rows:
        census[row.orbit_length] = census.get(row.orbit_length, 0) + 1
    failures = sum(not row.passed for row in rows)
    worst = max((row.max_deviation for row in rows), default=0.0)
    return BchReport(num_spins=config.num_spins, timestep=config.timestep, mode=mode,
                     orbit_count=len(rows), failures=failures, max_deviation=worst,
                     census=dict(sorted(census.items())), rows=rows, passed=failures == 0)


def evolve(h: ChainHamiltonian, q: SparseVector, time: float) -> SparseVector:
    """
    exp(-i H t)|q> for H a polynomial in U, computed per orbit: the orbit
    component is rotated into Fourier modes, phased by exp(-i f(lambda) t), and
    rotated back.
    """
    _check_config(h, q)
    n = q.num_spins
    by_orbit: Dict[int, Orbit] = {}
    seen: Dict[int, int] = {}
    for index, _ in q.items():
        if index in seen:
            continue
        orbit = orbit_of(OntState(index=index, num_spins=n), h.config).canonical()
        by_orbit[orbit.min_index] = orbit
        for member in orbit.states:
            seen[member] = orbit.min_index

    result: Dict[int, complex] = {}
    for key in sorted(by_orbit):
        orbit = by_orbit[key]
        fourier = _orbit_fourier(orbit.length)
        local = np.array([q.amplitude(index) for index in orbit.states])
        modes = fourier.conj().T @ local
        phases = np.exp(-1j * h.orbit_spectrum(orbit.length) * time)
        evolved = fourier @ (phases * modes)
        result.update(zip(orbit.states, evolved))
    if isinstance(q, QState):
        return QState(result, n)
    return SparseVector(result, n)


def perturbation_scan(config: ChainConfig, epsilons: Sequence[float],
                      state: Optional[OntState] = None, seed: Optional[int] = None) -> List[PerturbationRow]:
    """
    Evolve a basis state for one period with detuned Hamiltonians and measure
    how far it drifts from the ontological image U|psi>.
    """
    state = state or bell_pair_state(config)
    exact = build_hamiltonian(config, "exact")
    initial = QState.basis(state)
    target = update_index(state.index, config.num_spins)
    rows = []
    for epsilon in epsilons:
        detuned = perturb_hamiltonian(exact, epsilon, seed) if epsilon else exact
        evolved = evolve(detuned, initial, config.timestep)
        rows.append(PerturbationRow(
            epsilon=float(epsilon),
            fidelity=abs(evolved.amplitude(target)) ** 2,
            support_size=sum(1 for _, a in evolved.items() if abs(a) > Config.SCHMIDT_THRESHOLD),
            norm=evolved.norm(),
        ))
    return rows


def bell_pair_state(config: ChainConfig, even_site: Optional[int] = None) -> OntState:
    """All spins up except two down spins on a neighbouring even/odd site pair."""
    if config.num_spins < 8:
        raise DegenerateSizeError("the down-spin pair needs a chain of at least 8 spins")
    even_site = even_site if even_site is not None else 2 * (config.half // 2)
    if even_site % 2 or not 1 <= even_site <= config.num_spins:
        raise ValueError(f"even_site must be an even site of the chain, got {even_site}")
    odd_site = config.wrap(even_site + 1)
    index = (config.dimension - 1) & ~(1 << (even_site - 1)) & ~(1 << (odd_site - 1))
    return OntState(index=index, num_spins=config.num_spins)


def _down_pair(config: ChainConfig, sites: Iterable[int]) -> OntState:
    index = config.dimension - 1
    for site in sites:
        index &= ~(1 << (config.wrap(site) - 1))
    return OntState(index=index, num_spins=config.num_spins)


def bell_demo(config: ChainConfig, even_site: Optional[int] = None) -> BellDemoResult:
    """
    Apply U - U^dagger and the leading-order Hamiltonian to the down-spin pair.

    The down spin on the even site e moves right under U and left under U^dagger;
    the one on the odd site e+1 does the opposite. The expected branches are
    therefore down pairs at (e-1, e+2) with amplitude +1 and at (e-2, e+3) with -1.
    """
    initial = bell_pair_state(config, even_site)
    even = even_site if even_site is not None else 2 * (config.half // 2)
    psi = QState.basis(initial)
    difference = apply_chain_update(psi, config) - apply_inverse_chain_update(psi, config)
    forward_branch = _down_pair(config, (even - 1, even + 2))
    backward_branch = _down_pair(config, (even - 2, even + 3))
    expected = SparseVector({forward_branch.index: 1.0, backward_branch.index: -1.0},
                            config.num_spins)
    return BellDemoResult(
        even_site=even, odd_site=config.wrap(even + 1), initial=initial,
        forward_branch=forward_branch, backward_branch=backward_branch,
        difference=difference, image=approx_hamiltonian_apply(psi, config),
        matches=difference == expected,
    )


def dense_matrix(h: ChainHamiltonian) -> np.ndarray:
    """Full 2^2S matrix of H, for small chains only."""
    n = h.config.num_spins
    if n > Config.DENSE_MAX_SPINS:
        raise SystemSizeError(f"dense Hamiltonian limited to 2S <= {Config.DENSE_MAX_SPINS}")
    step = permutation_matrix(lambda x: update_index(x, n), n, as_sparse=True).astype(complex)
    power = permutation_matrix(lambda x: x, n, as_sparse=True).astype(complex)
    total = power * h.coefficients[0]
    for coefficient in h.coefficients[1:]:
        power = step @ power
        total = total + coefficient * power
    return total.toarray()
