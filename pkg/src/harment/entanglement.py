"""Entanglement entropy, mutual information, bounds, correlation length.

The bipartite ground-state entropy of a block is S = sum_i f(sqrt(mu_i))
with f(x) = ((x+1)/2) ln((x+1)/2) - ((x-1)/2) ln((x-1)/2), where mu_i are the
eigenvalues of A.D (A from V**(-1/2), D from V**(1/2) partition blocks) and
satisfy mu_i >= 1. Shannon's mutual information between the position
variables of the two blocks is I = (1/2) ln(det A det C / det V**(-1/2)),
which equals (1/2) ln det(A.D) and lower-bounds S; the negativity bound
4 sqrt(lambda_max) sum |V**(-1/2)_{io}| upper-bounds it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Tolerances
from .errors import IntegrityError, InsufficientDecayData, SpectrumBelowOne
from .kernel import (
    CirculantKernel,
    _block_extents,
    _inner_sites,
    _lag_block,
    _outer_sites,
    extract_blocks,
    inner_blocks,
    kernel_row_decay,
)
from .spectral import SpectralClassification, classify, szego_coefficients, szego_lower_bound

log = logging.getLogger(__name__)

EXPONENTIAL = "Exponential"
POWER_LAW = "PowerLaw"
ZERO = "Zero"


@dataclass(frozen=True)
class CorrelationEstimate:
    """Decay classification of the position-position correlations.

    ``xi`` is the correlation length in sites: finite for exponential decay,
    +inf for power-law decay (critical), and 0.0 when all magnitudes in the
    fit window sit below the noise floor.
    """

    xi: float
    decay_class: str
    fit_window: tuple[int, int]
    fit_residual: float


@dataclass(frozen=True)
class EntanglementReport:
    """Everything computed for one (spec, partition) pair. Entropies in nats."""

    n_sites: int
    block: tuple[int, ...]
    mu_spectrum: np.ndarray
    entropy: float
    mutual_information: float
    det_lower_bound: float
    negativity_upper_bound: float
    szego_lower_bound: float | None
    correlation: CorrelationEstimate | None

    @property
    def n1(self) -> int:
        return int(np.prod(self.block))

    def to_json_dict(self) -> dict:
        return {
            "n_sites": self.n_sites,
            "block": list(self.block),
            "mu_spectrum": [float(m) for m in self.mu_spectrum],
            "entropy": self.entropy,
            "mutual_information": self.mutual_information,
            "det_lower_bound": self.det_lower_bound,
            "negativity_upper_bound": self.negativity_upper_bound,
            "szego_lower_bound": self.szego_lower_bound,
            "xi": None if self.correlation is None else self.correlation.xi,
            "decay_class": None if self.correlation is None else self.correlation.decay_class,
        }

    @staticmethod
    def csv_header() -> str:
        return "N,N1,S,I,lower,upper,xi,decay_class"

    def csv_row(self) -> str:
        xi = "" if self.correlation is None else repr(self.correlation.xi)
        decay = "" if self.correlation is None else self.correlation.decay_class
        return (
            f"{self.n_sites},{self.n1},{self.entropy!r},{self.mutual_information!r},"
            f"{self.det_lower_bound!r},{self.negativity_upper_bound!r},{xi},{decay}"
        )


def _entropy_of_x(x: np.ndarray) -> np.ndarray:
    """f(x) above, evaluated stably; f(1) = 0 by continuity."""
    out = np.zeros_like(x)
    big = x > 1.0 + 1e-8
    xb = x[big]
    out[big] = np.log((xb + 1.0) / 2.0) + (xb - 1.0) / 2.0 * np.log((xb + 1.0) / (xb - 1.0))
    eps = x[~big] - 1.0
    pos = eps > 0
    e = eps[pos]
    small = np.zeros_like(eps)
    small[pos] = -(e / 2.0) * np.log(e / 2.0) + e / 2.0 + e * e / 8.0
    out[~big] = small
    return out


def entropy(kernel: CirculantKernel, block, *, tol: Tolerances = DEFAULT):
    """(mu_spectrum, S) for a contiguous block.

    mu comes from the symmetric matrix L^T D L with A = L L^T, which is
    similar to A.D but keeps the spectrum real by construction. Values in
    [1 - tol.mu_slack, 1) are clamped to 1; anything lower means the kernel
    is broken and raises SpectrumBelowOne.
    """
    a, d = inner_blocks(kernel, block, tol=tol)
    try:
        chol = np.linalg.cholesky(a)
    except np.linalg.LinAlgError as exc:
        raise IntegrityError(f"inner block of V**(-1/2) is not positive definite: {exc}") from exc
    mu = np.linalg.eigvalsh(chol.T @ d @ chol)
    low = float(mu.min())
    if low < 1.0 - tol.mu_slack:
        raise SpectrumBelowOne(
            f"mu eigenvalue {low} is below 1; kernel or partition is inconsistent"
        )
    mu = np.maximum(mu, 1.0)
    s = float(np.sum(_entropy_of_x(np.sqrt(mu))))
    return mu, s


def _chol_logdet(matrix: np.ndarray, label: str) -> float:
    try:
        chol = np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError as exc:
        raise IntegrityError(f"{label} block is not positive definite: {exc}") from exc
    return 2.0 * float(np.sum(np.log(np.diag(chol))))


def mutual_information(kernel: CirculantKernel, block, *, tol: Tolerances = DEFAULT) -> float:
    """Shannon mutual information of the two position blocks, in nats.

    Computed in log-space from triangular factorizations as
    (1/2) ln(det A det C / det V**(-1/2)); the dual form from D, F and
    det V**(1/2) is evaluated as well and must agree to ``tol.dual_form_abs``.
    """
    blocks = extract_blocks(kernel, block, tol=tol)
    log_lam = np.log(kernel.eigenvalues.reshape(-1))
    ld_v_inv_sqrt = -0.5 * float(np.sum(log_lam))
    ld_v_sqrt = 0.5 * float(np.sum(log_lam))
    primal = 0.5 * (_chol_logdet(blocks.A, "A") + _chol_logdet(blocks.C, "C") - ld_v_inv_sqrt)
    dual = 0.5 * (_chol_logdet(blocks.F, "F") + _chol_logdet(blocks.D, "D") - ld_v_sqrt)
    if abs(primal - dual) > tol.dual_form_abs:
        raise IntegrityError(
            f"mutual information computed two ways disagrees: {primal} vs {dual}"
        )
    return primal


def det_lower_bound(kernel: CirculantKernel, block, *, tol: Tolerances = DEFAULT) -> float:
    """(1/2) ln det(A.D); identical to the mutual information."""
    a, d = inner_blocks(kernel, block, tol=tol)
    return 0.5 * (_chol_logdet(a, "A") + _chol_logdet(d, "D"))


def negativity_upper_bound(kernel: CirculantKernel, block, *, tol: Tolerances = DEFAULT) -> float:
    """4 sqrt(max eigenvalue) times the inner-outer mass of V**(-1/2)."""
    block = _block_extents(kernel, block)
    inner = _inner_sites(kernel.extents, block)
    outer = _outer_sites(kernel.extents, block)
    lam_max = float(kernel.eigenvalues.max())
    mass = 0.0
    step = max(1, 10_000_000 // max(1, outer.shape[0]))
    for start in range(0, inner.shape[0], step):
        part = _lag_block(kernel.inv_sqrt_row, inner[start : start + step], outer, kernel.extents)
        mass += float(np.abs(part).sum())
    return 4.0 * math.sqrt(lam_max) * mass


def correlation_length(kernel: CirculantKernel, *, tol: Tolerances = DEFAULT) -> CorrelationEstimate:
    """Classify the decay of |V**(-1/2)_l| over the window [N/16, N/4].

    Exponential wins when the straight-line fit of ln|row| against l has at
    most half the squared residual of the fit against ln(l) (and a negative
    slope); then xi = -1/slope. Otherwise the decay is PowerLaw, or Zero when
    the whole window sits below the noise floor. The residual-ratio rule is a
    convention of this artifact, not a theorem.
    """
    if kernel.spec.dimension != 1:
        raise ValueError("correlation length is defined for 1D kernels only")
    n = kernel.n_sites
    if n < 64:
        raise ValueError(f"need at least 64 sites for a stable decay fit, got {n}")
    lags, mags = kernel_row_decay(kernel)
    lo, hi = max(1, n // 16), n // 4
    in_window = (lags >= lo) & (lags <= hi)
    window_mags = mags[in_window]
    if np.all(window_mags < tol.noise_floor):
        return CorrelationEstimate(xi=0.0, decay_class=ZERO, fit_window=(lo, hi), fit_residual=0.0)
    usable = in_window & (mags >= tol.noise_floor)
    if int(usable.sum()) < 8:
        raise InsufficientDecayData(
            f"only {int(usable.sum())} usable lags in window [{lo}, {hi}]"
        )
    xs = lags[usable].astype(float)
    ys = np.log(mags[usable])
    lin = np.polyfit(xs, ys, 1)
    ssr_lin = float(np.sum((ys - np.polyval(lin, xs)) ** 2))
    loglog = np.polyfit(np.log(xs), ys, 1)
    ssr_log = float(np.sum((ys - np.polyval(loglog, np.log(xs))) ** 2))
    window = (int(xs[0]), int(xs[-1]))
    if ssr_lin <= 0.5 * ssr_log and lin[0] < 0:
        return CorrelationEstimate(
            xi=-1.0 / float(lin[0]),
            decay_class=EXPONENTIAL,
            fit_window=window,
            fit_residual=math.sqrt(ssr_lin / len(xs)),
        )
    return CorrelationEstimate(
        xi=math.inf,
        decay_class=POWER_LAW,
        fit_window=window,
        fit_residual=math.sqrt(ssr_log / len(xs)),
    )


def full_report(
    kernel: CirculantKernel,
    block,
    *,
    classification: SpectralClassification | None = None,
    correlation: CorrelationEstimate | None = None,
    szego_order: int = 200,
    tol: Tolerances = DEFAULT,
) -> EntanglementReport:
    """Assemble the complete report for one partition.

    ``classification`` and ``correlation`` may be passed in to avoid
    recomputation across a sweep; both are derived from the kernel when
    omitted (1D only; they stay None for d > 1 or chains below 64 sites).
    """
    spec = kernel.spec
    mu, s = entropy(kernel, block, tol=tol)
    mi = mutual_information(kernel, block, tol=tol)
    lower = det_lower_bound(kernel, block, tol=tol)
    upper = negativity_upper_bound(kernel, block, tol=tol)

    szego_bound = None
    if spec.dimension == 1:
        if classification is None:
            classification = classify(spec, tol=tol)
        if classification.is_regular:
            coeffs = szego_coefficients(spec, szego_order, tol=tol)
            szego_bound = szego_lower_bound(coeffs)
        if correlation is None and spec.n_sites >= 64:
            try:
                correlation = correlation_length(kernel, tol=tol)
            except InsufficientDecayData as exc:
                log.info("correlation estimate unavailable: %s", exc)
    mu.setflags(write=False)
    return EntanglementReport(
        n_sites=spec.n_sites,
        block=_block_extents(kernel, block),
        mu_spectrum=mu,
        entropy=s,
        mutual_information=mi,
        det_lower_bound=lower,
        negativity_upper_bound=upper,
        szego_lower_bound=szego_bound,
        correlation=correlation,
    )
