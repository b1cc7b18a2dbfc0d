"""Nested DFT modulation matrices.

Mode-domain signals are mapped to element-domain excitations by a chain of
per-level inverse DFTs: the unitary K x K matrix F with entries
exp(2j*pi*k*l/K)/sqrt(K) applied along every level of the index nesting.
With identity precoding the composed operator is the Kronecker chain
F_{K_N} (x) ... (x) F_{K_1} (outermost level slowest, matching the flat
logical ordering used throughout the package).  A unitary precoder may be
inserted between the top-level DFT and the level below it, one per top-level
block; everything stays unitary, so modulation preserves signal energy and
the demodulator is the conjugate transpose.

Dense matrices are the reference representation.  `apply_modulation` also
offers a structured path applying the small per-level DFTs along tensor axes,
which must match the dense product to tight tolerance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

__all__ = [
    "idft_matrix",
    "block_idft",
    "kronecker_chain",
    "NestedModulation",
    "nested_modulation",
    "apply_modulation",
]

PrecoderArg = Union[None, np.ndarray, Sequence[np.ndarray]]


_IDFT_CACHE: dict[int, np.ndarray] = {}


def _idft_cached(order: int) -> np.ndarray:
    mat = _IDFT_CACHE.get(order)
    if mat is None:
        k = np.arange(order)
        mat = np.exp(2j * np.pi * np.outer(k, k) / order) / math.sqrt(order)
        mat.setflags(write=False)
        _IDFT_CACHE[order] = mat
    return mat


def idft_matrix(order: int) -> np.ndarray:
    """Unitary inverse-DFT matrix of the given order.

    Entry (k, l) is exp(2j*pi*l*k/K)/sqrt(K); the matrix is symmetric and
    its conjugate transpose is its inverse.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    return _idft_cached(order).copy()


def _kron2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, faster than np.kron for small dense factors."""
    ra, ca = a.shape
    rb, cb = b.shape
    return (a[:, None, :, None] * b[None, :, None, :]).reshape(ra * rb, ca * cb)


def block_idft(level: int, dims: Sequence[int]) -> np.ndarray:
    """DFT acting on level `level` (1-based) only: F_{K_n} (x) I.

    Operates on vectors indexed by the levels 1..n nested flat order and has
    order prod(dims[:n]).
    """
    dims = tuple(int(k) for k in dims)
    if not 1 <= level <= len(dims):
        raise ValueError(f"level must be in [1, {len(dims)}]")
    if any(k < 1 for k in dims):
        raise ValueError("dims must be positive")
    inner = math.prod(dims[:level - 1])
    return _kron2(_idft_cached(dims[level - 1]), np.eye(inner))


def kronecker_chain(dims: Sequence[int]) -> np.ndarray:
    """F_{K_N} (x) F_{K_{N-1}} (x) ... (x) F_{K_1}."""
    out: Optional[np.ndarray] = None
    for k in reversed(tuple(dims)):
        f = _idft_cached(k)
        out = f.copy() if out is None else _kron2(out, f)
    if out is None:
        raise ValueError("dims must be non-empty")
    return out


@dataclass(frozen=True)
class NestedModulation:
    """Composed nested modulation operator for one dimension tuple.

    `dims` lists K_1..K_N innermost-first.  `precoders` holds one unitary
    matrix of order prod(dims[:-1]) per top-level block (None = identity
    everywhere).  `matrix` is the dense composed operator, built by actual
    block matrix products rather than Kronecker shortcuts so it can serve as
    the reference the structured path is checked against.
    """

    dims: tuple[int, ...]
    precoders: Optional[tuple[np.ndarray, ...]]
    matrix: np.ndarray

    @property
    def n_modes(self) -> int:
        return math.prod(self.dims)

    @property
    def block_size(self) -> int:
        return math.prod(self.dims[:-1]) if len(self.dims) > 1 else self.n_modes

    def demodulation_matrix(self) -> np.ndarray:
        return self.matrix.conj().T

    def precoder(self, block: int) -> Optional[np.ndarray]:
        if self.precoders is None:
            return None
        return self.precoders[block]


def _normalize_precoders(dims: Sequence[int], q: PrecoderArg) -> Optional[tuple[np.ndarray, ...]]:
    if q is None:
        return None
    m = math.prod(dims[:-1])
    k_top = dims[-1]
    mats = [np.asarray(q)] * k_top if isinstance(q, np.ndarray) else [np.asarray(x) for x in q]
    if len(mats) != k_top:
        raise ValueError(f"need one precoder per top-level block ({k_top})")
    for mat in mats:
        if mat.shape != (m, m):
            raise ValueError(f"precoder must have order {m}")
        if not np.allclose(mat.conj().T @ mat, np.eye(m), atol=1e-10):
            raise ValueError("precoder must be unitary")
    return tuple(mats)


def _scaled_block_product(f: np.ndarray, blocks: Sequence[np.ndarray]) -> np.ndarray:
    """(F (x) I) @ blkdiag(blocks): block (p, b) of the product is F[p, b]
    times block b.  Equivalent to the dense product, skipping its exact-zero
    terms."""
    k = f.shape[0]
    m = blocks[0].shape[0]
    if all(b is blocks[0] for b in blocks):
        scaled = f[:, :, None, None] * blocks[0][None, None, :, :]
    else:
        scaled = f[:, :, None, None] * np.stack(blocks)[None, :, :, :]
    return scaled.transpose(0, 2, 1, 3).reshape(k * m, k * m)


def _lower_nested(dims: Sequence[int]) -> np.ndarray:
    """Nested modulation without precoding: per-level DFT times the block
    diagonal of the level below."""
    w = idft_matrix(dims[0])
    for n in range(1, len(dims)):
        w = _scaled_block_product(_idft_cached(dims[n]), [w] * dims[n])
    return w


def nested_modulation(dims: Sequence[int], q: PrecoderArg = None) -> NestedModulation:
    """Build the composed modulation operator.

    For a single level the operator is the plain inverse DFT and no precoder
    is accepted.  For N >= 2 the composition is the top-level DFT times the
    block diagonal of per-block (level-(N-1) DFT @ precoder @ lower nesting).
    """
    dims = tuple(int(k) for k in dims)
    if any(k < 1 for k in dims):
        raise ValueError("dims must be positive")
    if len(dims) == 1:
        if q is not None:
            raise ValueError("single-level modulation takes no precoder")
        return NestedModulation(dims=dims, precoders=None, matrix=idft_matrix(dims[0]))

    precoders = _normalize_precoders(dims, q)
    m = math.prod(dims[:-1])
    k_top = dims[-1]
    if len(dims) == 2:
        lam_low = np.eye(m, dtype=complex)
    else:
        lam_low = np.kron(np.eye(dims[-2]), _lower_nested(dims[:-2]))
    w_sub = block_idft(len(dims) - 1, dims[:-1])
    if precoders is None:
        blocks = [w_sub @ lam_low] * k_top
    else:
        blocks = [w_sub @ precoders[b] @ lam_low for b in range(k_top)]
    composed = _scaled_block_product(_idft_cached(k_top), blocks)
    return NestedModulation(dims=dims, precoders=precoders, matrix=composed)


def _apply_axis(tensor: np.ndarray, f: np.ndarray, axis: int) -> np.ndarray:
    moved = np.moveaxis(tensor, axis, 0)
    out = np.tensordot(f, moved, axes=(1, 0))
    return np.moveaxis(out, 0, axis)


def apply_modulation(nm: NestedModulation, s: np.ndarray,
                     structured: bool = False) -> np.ndarray:
    """Element-domain excitation for the mode-domain vector `s`.

    The structured path applies the per-level DFTs along tensor axes (and the
    per-block precoders densely); it agrees with the dense product to within
    floating-point error.
    """
    s = np.asarray(s, dtype=complex)
    if s.shape != (nm.n_modes,):
        raise ValueError(f"signal must have length {nm.n_modes}")
    if not structured:
        return nm.matrix @ s

    dims = nm.dims
    n = len(dims)
    if n == 1:
        return nm.matrix @ s
    shape = tuple(reversed(dims))             # (K_N, ..., K_1); level j on axis n-j
    t = s.reshape(shape)
    for lev in range(1, n - 1):               # lower nesting, levels 1..N-2
        t = _apply_axis(t, idft_matrix(dims[lev - 1]), n - lev)
    if nm.precoders is not None:
        flat = t.reshape(dims[-1], -1)
        flat = np.stack([nm.precoders[b] @ flat[b] for b in range(dims[-1])])
        t = flat.reshape(shape)
    t = _apply_axis(t, idft_matrix(dims[-2]), 1)   # level N-1
    t = _apply_axis(t, idft_matrix(dims[-1]), 0)   # level N
    return t.reshape(-1)
