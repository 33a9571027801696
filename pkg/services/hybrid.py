"""
Two-chain hybrid experiments: a quantum chain in a superposition of
ontological states meets a classical chain through a momentum conserving
swap of four spins, and the composite is classified by its Schmidt rank.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from itertools import combinations
from typing import Dict, List, Literal, Mapping, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from config import Config
from data_structures.sparse_state import QState, SparseVector, split_index, tensor
from data_structures.spin_chain import ChainConfig, OntState, power_index, transpose_index
from errors import ConfigMismatchError, NormalizationError, SiteRangeError

logger = logging.getLogger(__name__)

Classification = Literal["product_hybrid_intact", "hybrid_swapped", "product_superposed", "entangled"]
Schedule = Tuple[int, int]
Sites = Tuple[int, int]


class ClassicalState(BaseModel):
    """Probability distribution over ontological states of one chain."""

    model_config = ConfigDict(frozen=True)

    distribution: Tuple[Tuple[float, OntState], ...]

    @field_validator("distribution")
    @classmethod
    def _check_distribution(cls, value):
        if not value:
            raise ValueError("a classical state needs at least one member")
        if any(p < 0 for p, _ in value):
            raise ValueError("probabilities must be non-negative")
        total = sum(p for p, _ in value)
        if abs(total - 1.0) > Config.NORM_TOLERANCE:
            raise ValueError(f"probabilities sum to {total!r}, expected 1")
        if len({state.num_spins for _, state in value}) != 1:
            raise ValueError("all members must live on the same chain")
        return value

    @classmethod
    def sharp(cls, state: OntState) -> "ClassicalState":
        return cls(distribution=((1.0, state),))

    @property
    def is_sharp(self) -> bool:
        return len(self.distribution) == 1 and self.distribution[0][0] == 1.0

    @property
    def num_spins(self) -> int:
        return self.distribution[0][1].num_spins


class HybridVerdict(BaseModel):
    schmidt_coefficients: Tuple[float, ...]
    schmidt_rank: int
    entropy_bits: float
    classification: Classification


class MemberVerdict(BaseModel):
    member_index: int
    probability: float
    classical_state: str
    verdict: HybridVerdict
    predicted: Optional[Classification] = None

    @property
    def as_expected(self) -> bool:
        return self.predicted is None or self.predicted == self.verdict.classification


class HybridReport(BaseModel):
    num_spins: Tuple[int, int]
    schedule: Schedule
    sites: Sites
    interact: bool
    members: List[MemberVerdict]
    mean_entropy_bits: float
    classification_counts: Dict[str, int]
    consistent: bool


class ScanSummary(BaseModel):
    num_spins: int
    schedule: Schedule
    sites: Sites
    interact: bool
    experiments: int
    counts: Dict[str, int]
    mismatches: int
    examples: List[Tuple[str, str, str, str]]
    passed: bool


def _check_sites(sites: Sites, n1: int, n2: int) -> None:
    i, j = sites
    limit = min(n1, n2)
    for site in sites:
        if not 1 <= site <= limit:
            raise SiteRangeError(f"interaction site {site} outside 1..{limit}")
    if i == j:
        raise SiteRangeError("interaction sites must differ")


def interaction_index(joint_index: int, sites: Sites, num_spins_second: int) -> int:
    """
    Swap chain-1 site i with chain-2 site j and chain-2 site i with chain-1 site j.
    Chain-2 site k is bit k-1 of the joint index, chain-1 site k is bit n2+k-1.
    """
    i, j = sites
    shift = num_spins_second
    joint_index = transpose_index(joint_index, shift + i, j)
    return transpose_index(joint_index, i, shift + j)


def interaction(joint: SparseVector, num_spins_second: int,
                sites: Sites = Config.DEFAULT_SITES) -> SparseVector:
    """
    The four-spin exchange between the chains, extended linearly.

    Raises:
        SiteRangeError: if a site is not valid on both chains or i == j
    """
    _check_sites(sites, joint.num_spins - num_spins_second, num_spins_second)
    return joint.remapped(lambda x: interaction_index(x, sites, num_spins_second))


def joint_update_index(joint_index: int, num_spins_first: int, num_spins_second: int,
                       steps: int = 1) -> int:
    first, second = split_index(joint_index, num_spins_second)
    first = power_index(first, num_spins_first, steps)
    second = power_index(second, num_spins_second, steps)
    return (first << num_spins_second) | second


def apply_joint_update(joint: SparseVector, num_spins_second: int, steps: int = 1) -> SparseVector:
    """Both chains advance by `steps` updates independently."""
    n1 = joint.num_spins - num_spins_second
    return joint.remapped(lambda x: joint_update_index(x, n1, num_spins_second, steps))


def _schmidt(amplitudes: Mapping[int, complex], num_spins_second: int) -> HybridVerdict:
    rows: Dict[int, int] = {}
    cols: Dict[int, int] = {}
    entries = []
    for index, amplitude in amplitudes.items():
        first, second = split_index(index, num_spins_second)
        entries.append((rows.setdefault(first, len(rows)), cols.setdefault(second, len(cols)), amplitude))
    matrix = np.zeros((len(rows), len(cols)), dtype=complex)
    for r, c, amplitude in entries:
        matrix[r, c] += amplitude
    values = np.linalg.svd(matrix, compute_uv=False) if entries else np.zeros(0)
    kept = [float(s) for s in values if s > Config.SCHMIDT_THRESHOLD]
    weights = [s * s for s in kept]
    entropy = -sum(w * math.log2(w) for w in weights if w > 0)
    rank = len(kept)
    if rank >= 2:
        classification = "entangled"
    elif len(rows) == 1 and len(cols) > 1:
        classification = "hybrid_swapped"
    elif len(cols) > 1:
        classification = "product_superposed"
    else:
        classification = "product_hybrid_intact"
    return HybridVerdict(schmidt_coefficients=tuple(kept), schmidt_rank=rank,
                         entropy_bits=max(entropy, 0.0) + 0.0, classification=classification)


def schmidt_decompose(joint: SparseVector, num_spins_second: int) -> HybridVerdict:
    """
    Schmidt coefficients across the chain-1 | chain-2 cut.

    The coefficient matrix is restricted to the chain-1 and chain-2 patterns
    that occur in the support, so its size is bounded by the number of branches.
    A rank-one state is hybrid_swapped when chain 1 is left in a single basis
    state and chain 2 carries the superposition, product_superposed when both
    factors are superpositions.
    """
    if not 1 <= num_spins_second < joint.num_spins:
        raise ConfigMismatchError(f"cannot split {joint.num_spins} spins after {num_spins_second}")
    return _schmidt(joint.amplitudes, num_spins_second)


def predict_classification(quantum: SparseVector, sites: Sites, updates_before: int = 0,
                           interact: bool = True) -> Optional[Classification]:
    """
    Expected outcome for at most two branches against a sharp classical state.

    The chain-1 factors of two branches differ iff the branches differ outside
    the swapped sites, the chain-2 factors iff they differ inside them; both
    are judged when the interaction acts.
    """
    support = quantum.support
    if len(support) == 1 or not interact:
        return "product_hybrid_intact"
    if len(support) != 2:
        return None
    n = quantum.num_spins
    a, b = (power_index(index, n, updates_before) for index in support)
    mask = (1 << (sites[0] - 1)) | (1 << (sites[1] - 1))
    diff = a ^ b
    inside, outside = bool(diff & mask), bool(diff & ~mask)
    if inside and outside:
        return "entangled"
    return "hybrid_swapped" if inside else "product_hybrid_intact"


class HybridState:
    """Ensemble of joint states, one per member of the classical distribution."""

    def __init__(self, members: List[Tuple[float, SparseVector]], num_spins: Tuple[int, int]):
        for probability, joint in members:
            if joint.num_spins != sum(num_spins):
                raise ConfigMismatchError("member does not match the chain sizes")
            if abs(joint.norm() - 1.0) > Config.NORM_TOLERANCE:
                raise NormalizationError(f"member norm drifted to {joint.norm()!r}")
        self.members = members
        self.num_spins = num_spins

    @classmethod
    def prepare(cls, quantum: QState, classical: ClassicalState) -> "HybridState":
        members = [(p, tensor(quantum, QState.basis(state))) for p, state in classical.distribution]
        return cls(members, (quantum.num_spins, classical.num_spins))

    def evolved(self, steps: int) -> "HybridState":
        if not steps:
            return self
        n2 = self.num_spins[1]
        return HybridState([(p, apply_joint_update(j, n2, steps)) for p, j in self.members],
                           self.num_spins)

    def interacted(self, sites: Sites) -> "HybridState":
        n2 = self.num_spins[1]
        return HybridState([(p, interaction(j, n2, sites)) for p, j in self.members],
                           self.num_spins)

    def verdicts(self, workers: int = 1) -> List[HybridVerdict]:
        n2 = self.num_spins[1]
        joints = [joint for _, joint in self.members]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                return list(pool.map(lambda joint: schmidt_decompose(joint, n2), joints))
        return [schmidt_decompose(joint, n2) for joint in joints]


def run_hybrid_experiment(quantum: QState, classical: ClassicalState,
                          schedule: Schedule = Config.DEFAULT_SCHEDULE,
                          sites: Sites = Config.DEFAULT_SITES,
                          interact: bool = True, workers: int = 1,
                          config: Optional[ChainConfig] = None) -> HybridReport:
    """
    Evolve both chains for schedule[0] updates, let them interact once, evolve
    schedule[1] more updates and classify every ensemble member.

    Args:
        quantum: normalized superposition on chain 1
        classical: ensemble of ontological states on chain 2
        schedule: (updates_before, updates_after)
        sites: interaction pair (i, j)
        interact: when False the interaction step is skipped
        workers: threads for the per-member Schmidt analysis
        config: when given, chain 1 must match its size

    Raises:
        ConfigMismatchError: size mismatch between quantum state and config
        SiteRangeError: interaction sites invalid on either chain
    """
    if config is not None and config.num_spins != quantum.num_spins:
        raise ConfigMismatchError(
            f"quantum state has {quantum.num_spins} spins, chain has {config.num_spins}"
        )
    if any(steps < 0 for steps in schedule):
        raise ValueError("schedule entries must be non-negative")
    n1, n2 = quantum.num_spins, classical.num_spins
    if n1 % 2 or n2 % 2 or min(n1, n2) < 4:
        raise ConfigMismatchError(f"chain sizes ({n1}, {n2}) must be even and at least 4")
    if interact:
        _check_sites(sites, n1, n2)

    before, after = schedule
    state = HybridState.prepare(quantum, classical).evolved(before)
    if interact:
        state = state.interacted(sites)
    state = state.evolved(after)
    verdicts = state.verdicts(workers)

    predicted = predict_classification(quantum, sites, before, interact)
    members = []
    for k, ((probability, member), verdict) in enumerate(zip(classical.distribution, verdicts)):
        members.append(MemberVerdict(member_index=k, probability=probability,
                                     classical_state=member.label, verdict=verdict,
                                     predicted=predicted))
        logger.debug("member %d (%s): %s", k, member.label, verdict.classification)

    counts: Dict[str, int] = {}
    for row in members:
        counts[row.verdict.classification] = counts.get(row.verdict.classification, 0) + 1
    return HybridReport(
        num_spins=(n1, n2), schedule=(before, after), sites=tuple(sites), interact=interact,
        members=members,
        mean_entropy_bits=sum(m.probability * m.verdict.entropy_bits for m in members),
        classification_counts=dict(sorted(counts.items())),
        consistent=all(m.as_expected for m in members),
    )


def _two_branch_verdict(a: int, b: int, c: int, n: int, sites: Sites,
                        schedule: Schedule, interact: bool) -> HybridVerdict:
    before, after = schedule
    amplitude = 1 / math.sqrt(2)
    joint = {}
    for branch in (a, b):
        index = joint_update_index((branch << n) | c, n, n, before)
        if interact:
            index = interaction_index(index, sites, n)
        joint[joint_update_index(index, n, n, after)] = amplitude
    return _schmidt(joint, n)


def scan_two_branch(config: ChainConfig, sites: Sites = Config.DEFAULT_SITES,
                    schedule: Schedule = Config.DEFAULT_SCHEDULE,
                    interact: bool = True) -> ScanSummary:
    """
    Every equal-weight superposition of two distinct basis states of chain 1
    against every sharp classical state of an identical chain 2, compared
    with predict_classification.
    """
    n = config.num_spins
    _check_sites(sites, n, n)
    counts: Dict[str, int] = {}
    examples = []
    mismatches = experiments = 0
    for a, b in combinations(range(config.dimension), 2):
        quantum = SparseVector({a: 1.0, b: 1.0}, n)
        expected = predict_classification(quantum, sites, schedule[0], interact)
        for c in range(config.dimension):
            verdict = _two_branch_verdict(a, b, c, n, sites, schedule, interact)
            experiments += 1
            counts[verdict.classification] = counts.get(verdict.classification, 0) + 1
            if verdict.classification != expected:
                mismatches += 1
                if len(examples) < 10:
                    labels = [OntState(index=x, num_spins=n).label for x in (a, b, c)]
                    examples.append((*labels, verdict.classification))
    logger.info("two-branch scan on 2S=%d: %d experiments, %d mismatches", n, experiments, mismatches)
    return ScanSummary(num_spins=n, schedule=tuple(schedule), sites=tuple(sites),
                       interact=interact, experiments=experiments,
                       counts=dict(sorted(counts.items())), mismatches=mismatches,
                       examples=examples, passed=mismatches == 0)
