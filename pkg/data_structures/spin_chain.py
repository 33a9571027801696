"""
Ontological states of a periodic Ising spin chain and their permutation dynamics.

Site k (1-based) is stored in bit k-1 of an unsigned integer; spin up is bit 1.
The integer doubles as the index of the state in the preferred basis.
"""

import logging
import math
from functools import lru_cache
from typing import Dict, Iterator, List, Sequence, Tuple

from bitarray import bitarray
from bitarray.util import ba2int, int2ba
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from config import Config
from errors import ConfigMismatchError, SiteRangeError

logger = logging.getLogger(__name__)

UP, DOWN = 1, 0
_LABELS = {"u": UP, "d": DOWN}


class ChainConfig(BaseModel):
    """Size and update period of a chain of 2S independent spins."""

    model_config = ConfigDict(frozen=True)

    num_spins: int
    timestep: float = 1.0

    @field_validator("num_spins")
    @classmethod
    def _check_num_spins(cls, value: int) -> int:
        if value < 4 or value % 2:
            raise ValueError(f"num_spins must be even and >= 4, got {value}")
        if value > Config.MAX_INDEX_BITS:
            raise ValueError(f"num_spins above {Config.MAX_INDEX_BITS} is not supported")
        return value

    @field_validator("timestep")
    @classmethod
    def _check_timestep(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("timestep must be positive")
        return value

    @property
    def half(self) -> int:
        """S, the number of updates after which every state recurs."""
        return self.num_spins // 2

    @property
    def dimension(self) -> int:
        return 1 << self.num_spins

    def wrap(self, site: int) -> int:
        """Reduce a site modulo 2S into 1..2S."""
        return (site - 1) % self.num_spins + 1


class OntState(BaseModel):
    """One ontological basis state: a definite configuration of all spins."""

    model_config = ConfigDict(frozen=True)

    index: int
    num_spins: int

    @model_validator(mode="after")
    def _check_range(self) -> "OntState":
        if not 1 <= self.num_spins <= Config.MAX_INDEX_BITS:
            raise ValueError(f"num_spins must lie in 1..{Config.MAX_INDEX_BITS}")
        if not 0 <= self.index < (1 << self.num_spins):
            raise ValueError(f"index {self.index} out of range for {self.num_spins} spins")
        return self

    @classmethod
    def from_spins(cls, spins: Sequence[int]) -> "OntState":
        """Build a state from spin values +1/-1 listed for sites 1..2S."""
        bits = bitarray(endian="little")
        for value in spins:
            if value not in (1, -1):
                raise ValueError(f"spin values must be +1 or -1, got {value}")
            bits.append(value == 1)
        return cls(index=ba2int(bits, signed=False), num_spins=len(bits))

    @classmethod
    def from_label(cls, label: str) -> "OntState":
        """Parse a 'u'/'d' literal read left to right as sites 1..2S."""
        bits = bitarray(endian="little")
        for char in label.strip().lower():
            if char not in _LABELS:
                raise ValueError(f"invalid spin literal {char!r} in {label!r}")
            bits.append(_LABELS[char])
        if not len(bits):
            raise ValueError("empty spin literal")
        return cls(index=ba2int(bits, signed=False), num_spins=len(bits))

    @property
    def bits(self) -> bitarray:
        """Spin bits with position k-1 holding site k."""
        return int2ba(self.index, length=self.num_spins, endian="little")

    @property
    def spins(self) -> List[int]:
        return [1 if bit else -1 for bit in self.bits]

    @property
    def label(self) -> str:
        return "".join("u" if bit else "d" for bit in self.bits)

    def spin(self, site: int) -> int:
        _check_site(site, self.num_spins)
        return 1 if (self.index >> (site - 1)) & 1 else -1

    def __str__(self) -> str:
        return f"|{self.label}>"


class Orbit(BaseModel):
    """Cycle [psi, U psi, U^2 psi, ...] of basis indices under the chain update."""

    model_config = ConfigDict(frozen=True)

    states: Tuple[int, ...]
    num_spins: int

    @property
    def length(self) -> int:
        return len(self.states)

    @property
    def min_index(self) -> int:
        return min(self.states)

    def canonical(self) -> "Orbit":
        """Same cycle, rotated to start at its smallest index."""
        start = self.states.index(self.min_index)
        return Orbit(states=self.states[start:] + self.states[:start], num_spins=self.num_spins)


def _check_site(site: int, num_spins: int) -> None:
    if not 1 <= site <= num_spins:
        raise SiteRangeError(f"site {site} outside 1..{num_spins}")


def _check_state(state: OntState, config: ChainConfig) -> None:
    if state.num_spins != config.num_spins:
        raise ConfigMismatchError(
            f"state has {state.num_spins} spins, chain has {config.num_spins}"
        )


@lru_cache(maxsize=None)
def _sublattice_masks(num_spins: int) -> Tuple[int, int]:
    """Masks of the odd sites (even bit positions) and of the even sites."""
    odd = sum(1 << (2 * k) for k in range(num_spins // 2))
    return odd, odd << 1


# Integer kernels. These work on raw basis indices and are used by the sparse
# state code for speed; the OntState functions below wrap them.

def transpose_index(index: int, i: int, j: int) -> int:
    a, b = i - 1, j - 1
    if ((index >> a) ^ (index >> b)) & 1:
        index ^= (1 << a) | (1 << b)
    return index


def update_index(index: int, num_spins: int) -> int:
    """Closed-form mover rule: odd-site spins jump two sites left, even-site spins two right."""
    odd_mask, even_mask = _sublattice_masks(num_spins)
    odd_bits = index & odd_mask
    even_bits = index & even_mask
    odd_out = (odd_bits >> 2) | ((odd_bits & 1) << (num_spins - 2))
    even_out = ((even_bits << 2) & even_mask) | ((even_bits >> (num_spins - 1)) << 1)
    return odd_out | even_out


def inverse_update_index(index: int, num_spins: int) -> int:
    odd_mask, even_mask = _sublattice_masks(num_spins)
    odd_bits = index & odd_mask
    even_bits = index & even_mask
    odd_out = ((odd_bits << 2) & odd_mask) | ((odd_bits >> (num_spins - 2)) & 1)
    even_out = (even_bits >> 2) | (((even_bits >> 1) & 1) << (num_spins - 1))
    return odd_out | even_out


def update_index_by_transpositions(index: int, num_spins: int) -> int:
    """
    Chain update as the product of pair exchanges: all even pairs (2l, 2l+1)
    first, then all odd pairs (2k-1, 2k). Site 2S+1 is site 1.
    """
    half = num_spins // 2
    for l in range(1, half + 1):
        index = transpose_index(index, 2 * l, (2 * l) % num_spins + 1)
    for k in range(1, half + 1):
        index = transpose_index(index, 2 * k - 1, 2 * k)
    return index


def power_index(index: int, num_spins: int, power: int) -> int:
    """Apply the update `power` times; negative powers use the inverse."""
    power %= num_spins // 2
    for _ in range(power):
        index = update_index(index, num_spins)
    return index


def transpose(state: OntState, i: int, j: int) -> OntState:
    """
    Exchange the spins at sites i and j.

    Raises:
        SiteRangeError: if either site is outside 1..2S
    """
    _check_site(i, state.num_spins)
    _check_site(j, state.num_spins)
    return OntState(index=transpose_index(state.index, i, j), num_spins=state.num_spins)


def chain_update(state: OntState, config: ChainConfig) -> OntState:
    _check_state(state, config)
    return OntState(index=update_index(state.index, config.num_spins), num_spins=config.num_spins)


def chain_update_by_transpositions(state: OntState, config: ChainConfig) -> OntState:
    _check_state(state, config)
    return OntState(
        index=update_index_by_transpositions(state.index, config.num_spins),
        num_spins=config.num_spins,
    )


def chain_update_inverse(state: OntState, config: ChainConfig) -> OntState:
    _check_state(state, config)
    return OntState(
        index=inverse_update_index(state.index, config.num_spins), num_spins=config.num_spins
    )


def orbit_of(state: OntState, config: ChainConfig) -> Orbit:
    """
    Follow the state under repeated updates until it recurs.

    Returns:
        Orbit starting at `state`; its length divides S.
    """
    _check_state(state, config)
    cycle = [state.index]
    current = update_index(state.index, config.num_spins)
    while current != state.index:
        cycle.append(current)
        current = update_index(current, config.num_spins)
    return Orbit(states=tuple(cycle), num_spins=config.num_spins)


def is_zero_mode(state: OntState, config: ChainConfig) -> bool:
    _check_state(state, config)
    return update_index(state.index, config.num_spins) == state.index


def zero_modes(config: ChainConfig) -> List[OntState]:
    """The four fixed points: odd sites all equal, even sites all equal."""
    odd_mask, even_mask = _sublattice_masks(config.num_spins)
    indices = sorted({0, odd_mask, even_mask, odd_mask | even_mask})
    return [OntState(index=i, num_spins=config.num_spins) for i in indices]


def trajectory(state: OntState, config: ChainConfig, steps: int) -> List[OntState]:
    """States after 0, 1, ..., steps updates."""
    _check_state(state, config)
    path = [state]
    index = state.index
    for _ in range(steps):
        index = update_index(index, config.num_spins)
        path.append(OntState(index=index, num_spins=config.num_spins))
    return path


def enumerate_orbits(config: ChainConfig) -> Iterator[Orbit]:
    """
    Brute-force orbit decomposition of the whole basis.
    Orbits come out ordered by their smallest index and start there.
    """
    n = config.num_spins
    seen = bytearray(config.dimension)
    for start in range(config.dimension):
        if seen[start]:
            continue
        cycle = [start]
        seen[start] = 1
        current = update_index(start, n)
        while current != start:
            cycle.append(current)
            seen[current] = 1
            current = update_index(current, n)
        yield Orbit(states=tuple(cycle), num_spins=n)


def _divisors(n: int) -> List[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def _mobius(n: int) -> int:
    result, p = 1, 2
    while p * p <= n:
        if n % p == 0:
            n //= p
            if n % p == 0:
                return 0
            result = -result
        p += 1
    return -result if n > 1 else result


def _strings_with_period(length: int) -> Dict[int, int]:
    """Number of binary strings of the given length per exact rotation period."""
    counts = {}
    for d in _divisors(length):
        counts[d] = sum(_mobius(d // e) * 2 ** e for e in _divisors(d))
    return counts


def orbit_census(config: ChainConfig) -> Dict[int, int]:
    """
    Histogram {orbit length: number of orbits} over the full basis.

    The odd and the even sublattice each rotate as an S-site necklace, so a
    state's orbit length is the lcm of the two primitive periods.
    """
    periods = _strings_with_period(config.half)
    states_per_length: Dict[int, int] = {}
    for d_odd, n_odd in periods.items():
        for d_even, n_even in periods.items():
            length = d_odd * d_even // math.gcd(d_odd, d_even)
            states_per_length[length] = states_per_length.get(length, 0) + n_odd * n_even
    census = {length: count // length for length, count in sorted(states_per_length.items())}
    logger.debug("orbit census for 2S=%d: %s", config.num_spins, census)
    return census


def brute_force_census(config: ChainConfig) -> Dict[int, int]:
    census: Dict[int, int] = {}
    for orbit in enumerate_orbits(config):
        census[orbit.length] = census.get(orbit.length, 0) + 1
    return dict(sorted(census.items()))
