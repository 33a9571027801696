"""
Sparse complex amplitude maps over the ontological basis.

Permutation dynamics only relabels basis indices, so a state keeps its support
size under evolution; storing {index: amplitude} keeps few-branch states cheap
for long chains.
"""

import math
from typing import Callable, Dict, Iterable, Iterator, List, Mapping, Sequence, Tuple, Union

from config import Config
from data_structures.spin_chain import (
    ChainConfig,
    OntState,
    inverse_update_index,
    update_index,
)
from errors import ConfigMismatchError, NormalizationError, SystemSizeError

BranchSpec = Tuple[Union[OntState, str], complex]


class SparseVector:
    """
    Vector over the 2^n basis of n spins, stored as index -> amplitude.

    Amplitudes with magnitude below `prune` are dropped; iteration is in
    ascending index order so every reduction is reproducible.
    """

    def __init__(self, amplitudes: Mapping[int, complex], num_spins: int,
                 prune: float = Config.PRUNE_THRESHOLD):
        if not 1 <= num_spins <= Config.MAX_INDEX_BITS:
            raise SystemSizeError(f"unsupported number of spins: {num_spins}")
        limit = 1 << num_spins
        cleaned: Dict[int, complex] = {}
        for index in sorted(amplitudes):
            if not 0 <= index < limit:
                raise ConfigMismatchError(f"basis index {index} out of range for {num_spins} spins")
            value = complex(amplitudes[index])
            if abs(value) >= prune:
                cleaned[index] = value
        self._amplitudes = cleaned
        self.num_spins = num_spins
        self.prune = prune

    @property
    def amplitudes(self) -> Dict[int, complex]:
        return dict(self._amplitudes)

    @property
    def support(self) -> List[int]:
        return list(self._amplitudes)

    def items(self) -> Iterator[Tuple[int, complex]]:
        return iter(self._amplitudes.items())

    def amplitude(self, index: int) -> complex:
        return self._amplitudes.get(index, 0j)

    def __len__(self) -> int:
        return len(self._amplitudes)

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self._amplitudes.values()))

    def inner(self, other: "SparseVector") -> complex:
        """<self|other>."""
        self._check_compatible(other)
        return sum((a.conjugate() * other.amplitude(i) for i, a in self.items()), 0j)

    def scaled(self, factor: complex) -> "SparseVector":
        return SparseVector({i: factor * a for i, a in self.items()}, self.num_spins, self.prune)

    def __add__(self, other: "SparseVector") -> "SparseVector":
        self._check_compatible(other)
        merged = dict(self._amplitudes)
        for index, value in other.items():
            merged[index] = merged.get(index, 0j) + value
        return SparseVector(merged, self.num_spins, self.prune)

    def __sub__(self, other: "SparseVector") -> "SparseVector":
        return self + other.scaled(-1)

    def distance(self, other: "SparseVector") -> float:
        """Largest absolute amplitude difference."""
        diff = self - other
        return max((abs(a) for _, a in diff.items()), default=0.0)

    def remapped(self, mapping: Callable[[int], int]) -> "SparseVector":
        """Relabel basis indices through a permutation; amplitudes are untouched."""
        moved = {mapping(i): a for i, a in self.items()}
        if len(moved) != len(self):
            raise ValueError("index mapping is not injective on the support")
        return self._with_amplitudes(moved)

    def normalized(self) -> "QState":
        norm = self.norm()
        if norm == 0:
            raise NormalizationError("cannot normalize the zero vector")
        return QState({i: a / norm for i, a in self.items()}, self.num_spins, self.prune)

    def to_triples(self) -> List[Tuple[int, float, float]]:
        """(index, real, imaginary) triples sorted by index."""
        return [(i, a.real, a.imag) for i, a in self.items()]

    def labelled(self) -> List[Tuple[str, complex]]:
        return [(OntState(index=i, num_spins=self.num_spins).label, a) for i, a in self.items()]

    def _with_amplitudes(self, amplitudes: Mapping[int, complex]) -> "SparseVector":
        return SparseVector(amplitudes, self.num_spins, self.prune)

    def _check_compatible(self, other: "SparseVector") -> None:
        if other.num_spins != self.num_spins:
            raise ConfigMismatchError(
                f"vectors over {self.num_spins} and {other.num_spins} spins are incompatible"
            )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return self.num_spins == other.num_spins and self._amplitudes == other._amplitudes

    def __repr__(self) -> str:
        terms = " + ".join(f"({a:.6g})|{label}>" for label, a in self.labelled()[:8])
        more = " + ..." if len(self) > 8 else ""
        return f"{type(self).__name__}({terms or '0'}{more})"


class QState(SparseVector):
    """Normalized superposition of ontological states."""

    def __init__(self, amplitudes: Mapping[int, complex], num_spins: int,
                 prune: float = Config.PRUNE_THRESHOLD):
        super().__init__(amplitudes, num_spins, prune)
        norm = self.norm()
        if abs(norm - 1.0) > Config.NORM_TOLERANCE:
            raise NormalizationError(f"state norm is {norm!r}, expected 1")

    @classmethod
    def basis(cls, state: OntState) -> "QState":
        return cls({state.index: 1.0}, state.num_spins)

    @classmethod
    def from_branches(cls, branches: Sequence[BranchSpec], normalize: bool = False) -> "QState":
        """
        Build a superposition from (state, amplitude) pairs.

        Args:
            branches: basis states (OntState or 'u'/'d' literal) with amplitudes
            normalize: rescale to unit norm instead of requiring it

        Raises:
            ConfigMismatchError: if the branches disagree on the chain size
            NormalizationError: if not normalized and normalize is False
        """
        if not branches:
            raise ValueError("at least one branch is required")
        amplitudes: Dict[int, complex] = {}
        num_spins = None
        for state, amplitude in branches:
            if isinstance(state, str):
                state = OntState.from_label(state)
            if num_spins is None:
                num_spins = state.num_spins
            elif state.num_spins != num_spins:
                raise ConfigMismatchError("branches have different chain sizes")
            amplitudes[state.index] = amplitudes.get(state.index, 0j) + complex(amplitude)
        vector = SparseVector(amplitudes, num_spins)
        return vector.normalized() if normalize else cls(amplitudes, num_spins)

    @classmethod
    def from_triples(cls, triples: Iterable[Sequence[float]], num_spins: int) -> "QState":
        return cls({int(i): complex(re, im) for i, re, im in triples}, num_spins)

    def _with_amplitudes(self, amplitudes: Mapping[int, complex]) -> "QState":
        return QState(amplitudes, self.num_spins, self.prune)


def _check_config(vector: SparseVector, config: ChainConfig) -> None:
    if vector.num_spins != config.num_spins:
        raise ConfigMismatchError(
            f"state has {vector.num_spins} spins, chain has {config.num_spins}"
        )


def apply_chain_update(q: SparseVector, config: ChainConfig) -> SparseVector:
    """U|q>: every basis index is moved by the chain update, amplitudes carried along."""
    _check_config(q, config)
    n = config.num_spins
    return q.remapped(lambda index: update_index(index, n))


def apply_inverse_chain_update(q: SparseVector, config: ChainConfig) -> SparseVector:
    _check_config(q, config)
    n = config.num_spins
    return q.remapped(lambda index: inverse_update_index(index, n))


def apply_chain_power(q: SparseVector, config: ChainConfig, power: int) -> SparseVector:
    """U^power|q>, reduced modulo S."""
    _check_config(q, config)
    for _ in range(power % config.half):
        q = apply_chain_update(q, config)
    return q


def tensor(q1: SparseVector, q2: SparseVector) -> SparseVector:
    """
    q1 (x) q2 with joint index index1 * 2^n2 + index2.
    Two QStates give a QState.

    Raises:
        SystemSizeError: if the joint index would exceed the supported width
    """
    joint_spins = q1.num_spins + q2.num_spins
    if joint_spins > Config.MAX_INDEX_BITS:
        raise SystemSizeError(
            f"joint system of {joint_spins} spins exceeds {Config.MAX_INDEX_BITS} index bits"
        )
    shift = q2.num_spins
    amplitudes = {
        (i1 << shift) | i2: a1 * a2 for i1, a1 in q1.items() for i2, a2 in q2.items()
    }
    if isinstance(q1, QState) and isinstance(q2, QState):
        return QState(amplitudes, joint_spins)
    return SparseVector(amplitudes, joint_spins)


def split_index(joint_index: int, num_spins_second: int) -> Tuple[int, int]:
    """Inverse of the tensor index map."""
    return joint_index >> num_spins_second, joint_index & ((1 << num_spins_second) - 1)
