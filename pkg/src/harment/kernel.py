"""Circulant functional calculus for V**(1/2) and V**(-1/2).

Because the potential matrix is circulant, any function of it is circulant
with the same eigenvectors, so its first row is the inverse DFT of the
function applied to the eigenvalues. This is exact at finite N (no continuum
quadrature error) and the partition blocks are read off the rows by lag.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from itertools import product

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import BadPartition, IntegrityError, TooLarge
from .lattice import CouplingSpec, dense_potential


@dataclass(frozen=True)
class CirculantKernel:
    """First rows of V**(1/2) and V**(-1/2) plus the eigenvalue grid.

    Rows and eigenvalues are arrays of shape ``spec.extents``; entries are
    addressed by lag with periodic wrap.
    """

    spec: CouplingSpec
    eigenvalues: np.ndarray
    sqrt_row: np.ndarray
    inv_sqrt_row: np.ndarray

    @property
    def n_sites(self) -> int:
        return self.spec.n_sites

    @property
    def extents(self) -> tuple[int, ...]:
        return self.spec.extents


@dataclass(frozen=True)
class PartitionBlocks:
    """Sub-matrices of V**(-1/2) (A, B, C) and V**(1/2) (D, E, F).

    A, D are the inner blocks of a contiguous partition (first n1 sites of a
    chain, or a corner hyperrectangle for d > 1); C, F the outer blocks.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    E: np.ndarray
    F: np.ndarray
    block: tuple[int, ...]

    @property
    def n_inner(self) -> int:
        return self.A.shape[0]

    @property
    def n_outer(self) -> int:
        return self.C.shape[0]


def build_kernel(spec: CouplingSpec, *, tol: Tolerances = DEFAULT) -> CirculantKernel:
    """Compute both kernel rows from the discrete spectrum."""
    lam = spec.eigenvalues
    sqrt_row = _real_ifft(np.sqrt(lam), tol)
    inv_sqrt_row = _real_ifft(1.0 / np.sqrt(lam), tol)
    for row in (sqrt_row, inv_sqrt_row):
        row.setflags(write=False)
    return CirculantKernel(spec=spec, eigenvalues=lam, sqrt_row=sqrt_row, inv_sqrt_row=inv_sqrt_row)


def _real_ifft(values: np.ndarray, tol: Tolerances) -> np.ndarray:
    out = np.fft.ifftn(values)
    residue = np.abs(out.imag).max()
    scale = max(np.abs(out.real).max(), 1e-300)
    if residue > tol.kernel_imag_residue * scale:
        raise IntegrityError(f"kernel row has imaginary residue {residue:.2e}")
    return out.real.copy()


def kernel_row_decay(kernel: CirculantKernel) -> tuple[np.ndarray, np.ndarray]:
    """(lags, |inv_sqrt_row|) for lags 1..(N-1)//2 of a 1D kernel.

    Beyond half the period the periodic images dominate, so the scan stops
    there.
    """
    if kernel.spec.dimension != 1:
        raise ValueError("row decay scan is defined for 1D kernels only")
    n = kernel.n_sites
    lags = np.arange(1, (n - 1) // 2 + 1)
    return lags, np.abs(kernel.inv_sqrt_row[lags])


def _block_extents(kernel: CirculantKernel, block) -> tuple[int, ...]:
    extents = kernel.extents
    if isinstance(block, (int, np.integer)):
        if len(extents) != 1:
            raise BadPartition("d-dimensional partitions need one extent per axis")
        block = (int(block),)
    block = tuple(int(b) for b in block)
    if len(block) != len(extents):
        raise BadPartition(f"partition {block} has wrong dimension for extents {extents}")
    if any(b < 1 for b in block):
        raise BadPartition(f"partition {block} is empty along some axis")
    if any(b > n for b, n in zip(block, extents)):
        raise BadPartition(f"partition {block} exceeds extents {extents}")
    if all(b == n for b, n in zip(block, extents)):
        raise BadPartition("partition covers the whole lattice")
    return block


def _inner_sites(extents, block) -> np.ndarray:
    return np.array(list(product(*(range(b) for b in block))), dtype=int)


def _outer_sites(extents, block) -> np.ndarray:
    inner_flat = set(
        np.ravel_multi_index(tuple(_inner_sites(extents, block).T), extents).tolist()
    )
    all_flat = np.arange(int(np.prod(extents)))
    outer_flat = np.array([i for i in all_flat if i not in inner_flat], dtype=int)
    return np.stack(np.unravel_index(outer_flat, extents), axis=1)


def _lag_block(row: np.ndarray, sites_a: np.ndarray, sites_b: np.ndarray, extents) -> np.ndarray:
    ext = np.asarray(extents)
    lag = (sites_a[:, None, :] - sites_b[None, :, :]) % ext
    return row[tuple(np.moveaxis(lag, -1, 0))]


def inner_blocks(kernel: CirculantKernel, block, *, tol: Tolerances = DEFAULT):
    """(A, D) only; the cheap path used by the entropy computation."""
    block = _block_extents(kernel, block)
    sites = _inner_sites(kernel.extents, block)
    a = _lag_block(kernel.inv_sqrt_row, sites, sites, kernel.extents)
    d = _lag_block(kernel.sqrt_row, sites, sites, kernel.extents)
    return a, d


def extract_blocks(kernel: CirculantKernel, block, *, tol: Tolerances = DEFAULT) -> PartitionBlocks:
    """All six partition blocks for a contiguous block of the lattice."""
    block = _block_extents(kernel, block)
    extents = kernel.extents
    inner = _inner_sites(extents, block)
    outer = _outer_sites(extents, block)
    return PartitionBlocks(
        A=_lag_block(kernel.inv_sqrt_row, inner, inner, extents),
        B=_lag_block(kernel.inv_sqrt_row, inner, outer, extents),
        C=_lag_block(kernel.inv_sqrt_row, outer, outer, extents),
        D=_lag_block(kernel.sqrt_row, inner, inner, extents),
        E=_lag_block(kernel.sqrt_row, inner, outer, extents),
        F=_lag_block(kernel.sqrt_row, outer, outer, extents),
        block=block,
    )


def dense_matrix_functions(spec: CouplingSpec, *, tol: Tolerances = DEFAULT):
    """(V**(1/2), V**(-1/2)) by dense symmetric eigendecomposition.

    Independent oracle for the circulant rows; capped at ``tol.dense_cap``
    sites like ``dense_potential``.
    """
    if spec.n_sites > tol.dense_cap:
        raise TooLarge(f"{spec.n_sites} sites exceeds dense cap {tol.dense_cap}")
    w, u = np.linalg.eigh(dense_potential(spec, tol=tol))
    sqrt_m = (u * np.sqrt(w)) @ u.T
    inv_sqrt_m = (u / np.sqrt(w)) @ u.T
    return sqrt_m, inv_sqrt_m


def rows_to_csv(kernel: CirculantKernel) -> str:
    """CSV of (lag, sqrt_value, inv_sqrt_value) for lags 0..N//2 (1D).

    Both rows are symmetric under lag negation, so one half period carries
    all the information.
    """
    if kernel.spec.dimension != 1:
        raise ValueError("CSV row export is defined for 1D kernels only")
    buf = io.StringIO()
    buf.write("lag,sqrt_value,inv_sqrt_value\n")
    for lag in range(kernel.n_sites // 2 + 1):
        buf.write(f"{lag},{kernel.sqrt_row[lag]!r},{kernel.inv_sqrt_row[lag]!r}\n")
    return buf.getvalue()
