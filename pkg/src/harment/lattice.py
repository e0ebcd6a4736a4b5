"""Coupling specifications for translation-invariant harmonic lattices.

A coupling spec holds the finite-range coefficients V_k of the quadratic
potential on a periodic chain (d=1) or torus (d>1), together with the lattice
extents. The potential matrix is circulant (block-circulant for d>1), so its
eigenvalues are samples of the spectral function

    lambda(theta) = sum_k V_k exp(i k . theta)

on the discrete momentum grid. Positivity of all eigenvalues is checked at
construction; everything downstream assumes it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import NotPositive, NotSymmetric, TooLarge

Lag = tuple[int, ...]


@dataclass(frozen=True)
class CouplingSpec:
    """Validated finite-range coupling on a periodic lattice.

    Immutable after construction: coefficients are stored symmetry-complete
    in canonical lags (|k_i| <= (N_i - 1)/2) and the circulant eigenvalues,
    all strictly positive, are precomputed with shape ``extents``.
    """

    dimension: int
    extents: tuple[int, ...]
    coefficients: Mapping[Lag, float]
    coupling_range: int
    eigenvalues: np.ndarray

    @property
    def n_sites(self) -> int:
        return int(np.prod(self.extents))

    def coefficient(self, lag) -> float:
        return self.coefficients.get(_canonical_lag(lag, self.extents), 0.0)

    def lag_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """All stored (lag, value) pairs as arrays, shapes (m, d) and (m,)."""
        lags = np.array(sorted(self.coefficients), dtype=int).reshape(-1, self.dimension)
        vals = np.array([self.coefficients[tuple(k)] for k in lags])
        return lags, vals


@dataclass(frozen=True)
class EtaChainParams:
    """Parameters of the chain with stencil (-2*eta q_i + q_{i+1} + q_{i-1})."""

    eta: float
    n_sites: int


def _canonical_lag(lag, extents) -> Lag:
    if isinstance(lag, (int, np.integer)):
        lag = (int(lag),)
    if len(lag) != len(extents):
        raise ValueError(f"lag {lag!r} has wrong dimension for extents {extents}")
    out = []
    for k, n in zip(lag, extents):
        k = int(k) % n
        if k > n // 2 or (k == n // 2 and n % 2 == 0 and k > 0):
            k -= n
        out.append(k)
    return tuple(out)


def _negate(lag: Lag) -> Lag:
    return tuple(-k for k in lag)


def build_coupling(
    dimension: int,
    extents,
    coefficients: Mapping,
    *,
    tol: Tolerances = DEFAULT,
) -> CouplingSpec:
    """Validate and construct a coupling spec.

    ``coefficients`` maps lag (int for d=1, tuple otherwise) to V_k. Missing
    mirror lags are completed from V_k = V_{-k}; explicitly given conflicting
    pairs raise NotSymmetric. All circulant eigenvalues are computed here and
    must exceed ``tol.positivity_rel`` times the largest one.
    """
    extents = tuple(int(n) for n in (extents if np.iterable(extents) else [extents]))
    if dimension != len(extents) or dimension < 1:
        raise ValueError(f"dimension {dimension} inconsistent with extents {extents}")
    if any(n < 1 for n in extents):
        raise ValueError(f"extents must be positive, got {extents}")

    canon: dict[Lag, float] = {}
    for lag, value in coefficients.items():
        k = _canonical_lag(lag, extents)
        value = float(value)
        if k in canon and not math.isclose(canon[k], value, rel_tol=1e-12, abs_tol=1e-300):
            raise NotSymmetric(f"conflicting values for lag {k}: {canon[k]} vs {value}")
        canon[k] = value
    for k, value in list(canon.items()):
        mk = _negate(k)
        if mk in canon:
            if not math.isclose(canon[mk], value, rel_tol=1e-12, abs_tol=1e-300):
                raise NotSymmetric(f"V at lag {k} and {mk} differ: {value} vs {canon[mk]}")
        else:
            canon[mk] = value

    nonzero = [k for k, v in canon.items() if v != 0.0]
    coupling_range = 1 + max((max(abs(c) for c in k) for k in nonzero), default=0)
    if 2 * coupling_range - 1 > min(extents):
        raise ValueError(
            f"coupling range {coupling_range} needs at least {2 * coupling_range - 1} "
            f"sites per axis, extents are {extents}"
        )

    eig = _circulant_eigenvalues(canon, extents)
    _check_positive(eig, tol)
    eig.setflags(write=False)
    return CouplingSpec(
        dimension=dimension,
        extents=extents,
        coefficients=dict(sorted(canon.items())),
        coupling_range=coupling_range,
        eigenvalues=eig,
    )


def _symbol_row(coefficients: Mapping[Lag, float], extents) -> np.ndarray:
    row = np.zeros(extents)
    for lag, value in coefficients.items():
        row[tuple(k % n for k, n in zip(lag, extents))] = value
    return row


def _circulant_eigenvalues(coefficients, extents) -> np.ndarray:
    spectrum = np.fft.fftn(_symbol_row(coefficients, extents))
    imag_scale = np.abs(spectrum.imag).max()
    real_scale = max(np.abs(spectrum.real).max(), 1e-300)
    if imag_scale > 1e-10 * real_scale:
        raise NotSymmetric(
            f"eigenvalues are not real (residue {imag_scale:.2e}); "
            "coefficients are not an even function of the lag"
        )
    return spectrum.real


def _check_positive(eigenvalues: np.ndarray, tol: Tolerances) -> None:
    flat = eigenvalues.reshape(-1)
    j = int(np.argmin(flat))
    if flat[j] <= tol.positivity_rel * flat.max():
        raise NotPositive(
            f"eigenvalue {flat[j]:.6e} at mode {j} is not positive "
            "(no normalizable ground state at this size)",
            offending_index=j,
            eigenvalue=float(flat[j]),
        )


def build_eta_chain(params: EtaChainParams, *, tol: Tolerances = DEFAULT) -> CouplingSpec:
    """Chain with potential (1/2) sum_i (-2*eta q_i + q_{i+1} + q_{i-1})^2.

    Expanding the square gives V_0 = 4*eta**2 + 2, V_1 = -4*eta, V_2 = 1; the
    spectral function is (2*eta - 2*cos(theta))**2. Sizes where a grid angle
    satisfies cos(theta_j) = eta raise NotPositive and should be perturbed.
    """
    eta, n = float(params.eta), int(params.n_sites)
    if eta < 0:
        raise ValueError(f"eta must be nonnegative, got {eta}")
    if n < 5:
        raise ValueError(f"need at least 5 sites for range-3 couplings, got {n}")
    coeffs = {0: 4.0 * eta * eta + 2.0, 1: -4.0 * eta, 2: 1.0}
    return build_coupling(1, (n,), coeffs, tol=tol)


def dense_potential(spec: CouplingSpec, *, tol: Tolerances = DEFAULT) -> np.ndarray:
    """Full symmetric circulant matrix V with V[i, j] = V_{(i - j) mod extents}.

    Oracle support only; refuses above ``tol.dense_cap`` sites.
    """
    n = spec.n_sites
    if n > tol.dense_cap:
        raise TooLarge(f"{n} sites exceeds dense cap {tol.dense_cap}")
    row = _symbol_row(spec.coefficients, spec.extents)
    idx = np.indices(spec.extents).reshape(spec.dimension, -1)
    ext = np.array(spec.extents)[:, None, None]
    lag = (idx[:, :, None] - idx[:, None, :]) % ext
    return row[tuple(lag)]


def tensor_coupling(a: CouplingSpec, b: CouplingSpec, *, tol: Tolerances = DEFAULT) -> CouplingSpec:
    """Separable product coupling; spectral function factorizes per axis."""
    coeffs = {
        ka + kb: va * vb
        for ka, va in a.coefficients.items()
        for kb, vb in b.coefficients.items()
    }
    return build_coupling(a.dimension + b.dimension, a.extents + b.extents, coeffs, tol=tol)


def coupling_to_json(spec: CouplingSpec) -> str:
    doc = {
        "dimension": spec.dimension,
        "extents": list(spec.extents),
        "coefficients": [
            {"lag": list(k), "value": v} for k, v in spec.coefficients.items()
        ],
    }
    return json.dumps(doc, sort_keys=True)


def coupling_from_json(text: str, *, tol: Tolerances = DEFAULT) -> CouplingSpec:
    """Load a spec from its JSON document; symmetry completion is applied."""
    doc = json.loads(text)
    coeffs = {tuple(entry["lag"]): float(entry["value"]) for entry in doc["coefficients"]}
    return build_coupling(int(doc["dimension"]), doc["extents"], coeffs, tol=tol)
