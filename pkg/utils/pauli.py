"""
Dense matrix representations for small chains, used by the verification paths.
"""

from functools import reduce
from typing import Callable

import numpy as np
from scipy import sparse

from config import Config
from data_structures.spin_chain import transpose_index
from errors import SiteRangeError, SystemSizeError

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _check_dense_size(num_spins: int, limit: int) -> None:
    if not 1 <= num_spins <= limit:
        raise SystemSizeError(f"dense construction limited to {limit} spins, got {num_spins}")


def site_operator(op: np.ndarray, site: int, num_spins: int) -> np.ndarray:
    """
    Embed a single-spin operator at `site`.
    Site k sits at Kronecker position n-k so that it acts on bit k-1 of the basis index.
    """
    factors = [IDENTITY] * num_spins
    factors[num_spins - site] = op
    return reduce(np.kron, factors)


def pauli_transposition_matrix(i: int, j: int, num_spins: int) -> np.ndarray:
    """
    Spin exchange built from Pauli matrices: (sigma_i . sigma_j + 1) / 2.

    Args:
        i, j: distinct sites in 1..num_spins
        num_spins: chain size, at most Config.PAULI_MAX_SPINS

    Returns:
        2^n x 2^n complex matrix with exactly 0/1 entries
    """
    _check_dense_size(num_spins, Config.PAULI_MAX_SPINS)
    for site in (i, j):
        if not 1 <= site <= num_spins:
            raise SiteRangeError(f"site {site} outside 1..{num_spins}")
    if i == j:
        raise SiteRangeError("spin exchange needs two distinct sites")
    dot = sum(
        site_operator(sigma, i, num_spins) @ site_operator(sigma, j, num_spins)
        for sigma in (SIGMA_X, SIGMA_Y, SIGMA_Z)
    )
    return (dot + np.eye(1 << num_spins, dtype=complex)) / 2


def permutation_matrix(mapping: Callable[[int], int], num_spins: int,
                       as_sparse: bool = False):
    """Matrix M with M[mapping(x), x] = 1 over the 2^n basis."""
    _check_dense_size(num_spins, max(Config.DENSE_MAX_SPINS, Config.PAULI_MAX_SPINS))
    dim = 1 << num_spins
    columns = np.arange(dim)
    rows = np.fromiter((mapping(x) for x in range(dim)), dtype=np.int64, count=dim)
    matrix = sparse.csr_matrix((np.ones(dim, dtype=np.int64), (rows, columns)), shape=(dim, dim))
    return matrix if as_sparse else matrix.toarray()


def transposition_matrix(i: int, j: int, num_spins: int) -> np.ndarray:
    return permutation_matrix(lambda x: transpose_index(x, i, j), num_spins)


def chain_update_from_pauli(num_spins: int) -> np.ndarray:
    """Product of odd-pair exchanges times even-pair exchanges; the even pairs act first."""
    half = num_spins // 2
    even_pairs = [pauli_transposition_matrix(2 * l, (2 * l) % num_spins + 1, num_spins)
                  for l in range(1, half + 1)]
    odd_pairs = [pauli_transposition_matrix(2 * k - 1, 2 * k, num_spins)
                 for k in range(1, half + 1)]
    return reduce(np.matmul, odd_pairs + even_pairs)


def commutator_norm(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(a @ b - b @ a))
