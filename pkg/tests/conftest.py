"""Shared fixtures and independent brute-force oracles.

The oracles here deliberately avoid the package's matrix machinery: explicit
loops over index tuples, naive pairwise clustering, first-principles gain
formulas.  Tests compare the fast implementations against them.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
import pytest

from qfuca.geometry import DimensionSpec, LayoutType, PairRelation, _tag_for_witness
from qfuca.geometry import radii_from_witnesses


@pytest.fixture
def ref_params():
    from qfuca.channel import ChannelParams
    return ChannelParams.from_frequency(5.8e9, beta=1.0, distance=100.0)


def free_spec(cells, radii=None, r_total=4.0) -> DimensionSpec:
    """Multi-level spec with no sharing claims (arbitrary ring stack)."""
    cells = tuple(cells)
    if radii is None:
        radii = tuple(r_total / len(cells) for _ in cells)
    pairs = tuple(PairRelation(LayoutType.FREE) for _ in range(len(cells) - 1))
    return DimensionSpec(cells=cells, radii=tuple(radii), pairs=pairs)


def chain_spec(cells, witnesses, r_total=4.0) -> DimensionSpec:
    """Sharing layout from its witness chain."""
    cells = tuple(cells)
    witnesses = tuple(witnesses)
    pairs = tuple(
        PairRelation(_tag_for_witness(cells[n], cells[n + 1], witnesses[n]),
                     witnesses[n])
        for n in range(len(cells) - 1))
    return DimensionSpec(cells=cells,
                         radii=radii_from_witnesses(cells, witnesses, r_total),
                         pairs=pairs)


# ---------------------------------------------------------------------------
# oracles
# ---------------------------------------------------------------------------

def index_tuples(dims):
    """(k_N, ..., k_1) tuples in flat order, outermost slowest."""
    return list(itertools.product(*[range(k) for k in reversed(tuple(dims))]))


def position_oracle(cells, radii, idx):
    """Hand vector sum; idx = (k_N, ..., k_1)."""
    n = len(cells)
    z = 0 + 0j
    for j, k in enumerate(idx):
        lev = n - 1 - j
        z += radii[lev] * np.exp(2j * np.pi * k / cells[lev])
    return np.array([z.real, z.imag])


def cluster_oracle(points, tol):
    """Naive O(n^2) single-linkage clustering; returns cluster count."""
    n = len(points)
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in range(n):
        for j in range(i + 1, n):
            if math.hypot(points[i][0] - points[j][0],
                          points[i][1] - points[j][1]) <= tol:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    return len({find(i) for i in range(n)})


def modulate_oracle(dims, s):
    """Element excitation by direct nested summation over all mode tuples."""
    dims = tuple(dims)
    tuples = index_tuples(dims)
    norm = math.sqrt(math.prod(dims))
    n = len(dims)
    x = np.zeros(len(tuples), dtype=complex)
    for a, kt in enumerate(tuples):
        acc = 0j
        for b, lt in enumerate(tuples):
            phase = 1 + 0j
            for j in range(n):
                kdim = dims[n - 1 - j]
                phase *= np.exp(2j * np.pi * lt[j] * kt[j] / kdim)
            acc += s[b] * phase
        x[a] = acc / norm
    return x


def received_oracle(dims, s, h):
    """Received signal per element: direct double sum over transmit elements
    and mode tuples."""
    x = modulate_oracle(dims, s)
    m = len(x)
    r = np.zeros(m, dtype=complex)
    for v in range(m):
        acc = 0j
        for k in range(m):
            acc += x[k] * h[v, k]
        r[v] = acc
    return r


def dft_combination_oracle(first_block_row, q):
    """Diagonal block q of a block-circulant matrix after the block DFT:
    sum_m B_m exp(2j*pi*m*q/K)."""
    k = len(first_block_row)
    acc = np.zeros_like(first_block_row[0])
    for m_idx, b in enumerate(first_block_row):
        acc = acc + b * np.exp(2j * np.pi * m_idx * q / k)
    return acc


def ordered_factorizations(max_product, min_part=2):
    """All dim tuples (K_1..K_N) with every part >= min_part and product
    <= max_product, plus all single-level sizes."""
    out = [(k,) for k in range(1, max_product + 1)]

    def rec(prefix, prod):
        for k in range(min_part, max_product // prod + 1):
            tup = prefix + (k,)
            if len(tup) >= 2:
                out.append(tup)
            rec(tup, prod * k)

    rec((), 1)
    return out
