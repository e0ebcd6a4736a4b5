"""Size sweeps and the asymptotic checks that tie entropy to the symbol.

All sweep points are independent; ``entropy_sweep`` optionally fans out over
a thread pool (numpy releases the GIL in the heavy eigenroutines) capped by
the HARM_ENT_THREADS environment variable, and always yields results in
deterministic size order.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

import numpy as np
from scipy.stats import linregress

from .config import DEFAULT, Tolerances
from .entanglement import EntanglementReport, entropy, full_report, mutual_information
from .errors import NotPositive
from .kernel import build_kernel, inner_blocks
from .lattice import CouplingSpec, build_coupling
from .spectral import (
    SpectralClassification,
    classify,
    regular_part_eval,
    szego_coefficients,
    szego_lower_bound,
)
from .entanglement import correlation_length
from .errors import InsufficientDecayData

log = logging.getLogger(__name__)

LOG_GROWTH = "log_growth"
SATURATION = "saturation"
LINEAR = "linear"

HALF_HALF = "half_half"
FIXED_N_VARY_BLOCK = "fixed_n_vary_block"

# near-resonant sizes put a grid angle close to a symbol zero; the discrete
# determinant term then swings wildly and such sizes are excluded from fits
MIN_ROOT_PHASE_DISTANCE = 0.1


@dataclass(frozen=True)
class ScalingFit:
    model: str
    parameters: dict
    r_squared: float
    max_residual: float
    x_range: tuple[float, float]
    slope_stderr: float | None = None

    def to_json_dict(self) -> dict:
        return {
            "model": self.model,
            "parameters": self.parameters,
            "r_squared": self.r_squared,
            "max_residual": self.max_residual,
            "x_range": list(self.x_range),
            "slope_stderr": self.slope_stderr,
        }


def max_workers() -> int:
    value = os.environ.get("HARM_ENT_THREADS", "1")
    try:
        return max(1, int(value))
    except ValueError:
        log.warning("ignoring malformed HARM_ENT_THREADS=%r", value)
        return 1


def _ordered_map(fn: Callable, items: list) -> Iterator:
    workers = max_workers()
    if workers == 1 or len(items) <= 1:
        yield from map(fn, items)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(fn, items)


def fit_log_growth(xs, ys) -> ScalingFit:
    """Least squares of y = a ln(x) + b."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    fit = linregress(np.log(xs), ys)
    predicted = fit.slope * np.log(xs) + fit.intercept
    resid = ys - predicted
    r2 = float(fit.rvalue**2)
    return ScalingFit(
        model=LOG_GROWTH,
        parameters={"slope": float(fit.slope), "intercept": float(fit.intercept)},
        r_squared=r2,
        max_residual=float(np.abs(resid).max()),
        x_range=(float(xs.min()), float(xs.max())),
        slope_stderr=float(fit.stderr),
    )


def fit_entropy_log_growth(n_sites: int, blocks, entropies) -> ScalingFit:
    """Log fit of S against block size on a periodic chain.

    The effective block length on a ring of N sites is the chord
    (N/pi) sin(pi N1 / N); it reduces to N1 for N1 << N and removes the
    bend as the block approaches half the system.
    """
    blocks = np.asarray(blocks, dtype=float)
    chord = (n_sites / np.pi) * np.sin(np.pi * blocks / n_sites)
    fit = fit_log_growth(chord, entropies)
    params = dict(fit.parameters, block_range=[float(blocks.min()), float(blocks.max())])
    return ScalingFit(
        model=fit.model,
        parameters=params,
        r_squared=fit.r_squared,
        max_residual=fit.max_residual,
        x_range=fit.x_range,
        slope_stderr=fit.slope_stderr,
    )


def half_half_block(n_sites: int) -> int:
    """(N-1)/2 for odd N (the split the singular-case asymptotics need);
    N/2 for even N where the restriction is irrelevant."""
    return (n_sites - 1) // 2 if n_sites % 2 else n_sites // 2


def entropy_sweep(
    spec_builder: Callable[[int], CouplingSpec],
    sizes: Iterable[int],
    partition_rule: str,
    *,
    fixed_n: int | None = None,
    szego_order: int = 200,
    tol: Tolerances = DEFAULT,
) -> Iterator[EntanglementReport]:
    """Yield one report per size, in order.

    ``half_half``: sizes are system sizes N, each with block half_half_block(N).
    ``fixed_n_vary_block``: sizes are block sizes on a single lattice of
    ``fixed_n`` sites. Sizes whose spec fails the positivity check are
    skipped with a log entry.
    """
    sizes = list(sizes)
    if sorted(sizes) != sizes:
        raise ValueError("sizes must be ascending")
    if partition_rule == HALF_HALF:
        points = []
        classification = None
        for n in sizes:
            try:
                spec = spec_builder(n)
            except NotPositive as exc:
                log.warning("skipping resonant size N=%d: %s", n, exc)
                continue
            if classification is None and spec.dimension == 1:
                classification = classify(spec, tol=tol)
            points.append((build_kernel(spec, tol=tol), half_half_block(n)))
        yield from _ordered_map(
            lambda p: full_report(
                p[0], p[1], classification=classification, szego_order=szego_order, tol=tol
            ),
            points,
        )
    elif partition_rule == FIXED_N_VARY_BLOCK:
        if fixed_n is None:
            raise ValueError("fixed_n_vary_block needs fixed_n")
        spec = spec_builder(fixed_n)
        kernel = build_kernel(spec, tol=tol)
        classification = classify(spec, tol=tol) if spec.dimension == 1 else None
        correlation = None
        if spec.dimension == 1 and spec.n_sites >= 64:
            try:
                correlation = correlation_length(kernel, tol=tol)
            except InsufficientDecayData:
                correlation = None
        yield from _ordered_map(
            lambda n1: full_report(
                kernel,
                n1,
                classification=classification,
                correlation=correlation,
                szego_order=szego_order,
                tol=tol,
            ),
            sizes,
        )
    else:
        raise ValueError(f"unknown partition rule {partition_rule!r}")


def _respec(spec: CouplingSpec, n_sites: int, *, tol: Tolerances) -> CouplingSpec:
    return build_coupling(spec.dimension, (n_sites,), spec.coefficients, tol=tol)


def _root_phase_distance(classification: SpectralClassification, n_sites: int) -> float:
    if classification.is_regular:
        return math.inf
    dists = []
    for root in classification.roots:
        v = n_sites * root.angle / (2.0 * math.pi)
        dists.append(abs(v - round(v)))
    return min(dists)


def _discrete_root_log_term(classification: SpectralClassification, n_sites: int) -> float:
    """sum_r m_r ln(2 - 2cos(N a_r)): the exact contribution of the symbol
    zeros to ln det V**(1/2) on the discrete grid (product over the roots of
    unity of |z - e^{ia}|**2 telescopes to |e^{iNa} - 1|**2)."""
    return sum(
        r.multiplicity * math.log(2.0 - 2.0 * math.cos(n_sites * r.angle))
        for r in classification.roots
    )


def widom_slope(
    spec_builder: Callable[[int], CouplingSpec],
    n_list: Iterable[int],
    *,
    min_phase_distance: float = MIN_ROOT_PHASE_DISTANCE,
    tol: Tolerances = DEFAULT,
) -> ScalingFit:
    """Fit of half/half mutual information against ln N.

    For a singular symbol the slope approaches the Widom coefficient
    sum_r m_r**2 / 4. The finite ring adds the exactly known term
    -(1/4) sum_r m_r ln(2 - 2cos(N a_r)) through det V**(1/2); it is
    subtracted before fitting, and sizes that put a grid angle within
    ``min_phase_distance`` (in grid units) of a symbol zero are skipped,
    since there the remaining finite-size corrections blow up as well.
    """
    n_list = sorted(set(int(n) for n in n_list))
    if len(n_list) < 6:
        raise ValueError("need at least 6 sizes")
    if n_list[-1] < 8 * n_list[0]:
        raise ValueError("sizes must span at least a factor of 8")
    if any(n % 2 == 0 for n in n_list):
        raise ValueError("half/half slope needs odd sizes (N1 = (N-1)/2)")

    classification = None
    xs, ys = [], []
    skipped = []
    for n in n_list:
        try:
            spec = spec_builder(n)
        except NotPositive as exc:
            skipped.append(n)
            log.warning("skipping resonant size N=%d: %s", n, exc)
            continue
        if classification is None:
            classification = classify(spec, tol=tol)
        if _root_phase_distance(classification, n) < min_phase_distance:
            skipped.append(n)
            log.info("skipping near-resonant size N=%d", n)
            continue
        kernel = build_kernel(spec, tol=tol)
        value = mutual_information(kernel, half_half_block(n), tol=tol)
        if not classification.is_regular:
            value += 0.25 * _discrete_root_log_term(classification, n)
        xs.append(n)
        ys.append(value)
    if len(xs) < 6:
        raise ValueError(f"only {len(xs)} usable sizes after skipping {skipped}")
    fit = fit_log_growth(xs, ys)
    params = dict(
        fit.parameters,
        reference_slope=classification.widom_coefficient,
        skipped_sizes=skipped,
        used_sizes=xs,
    )
    return ScalingFit(fit.model, params, fit.r_squared, fit.max_residual, fit.x_range, fit.slope_stderr)


def szego_det_check(
    spec: CouplingSpec,
    n1_list: Iterable[int],
    *,
    n_sites: int | None = None,
    szego_order: int = 256,
    tol: Tolerances = DEFAULT,
) -> ScalingFit:
    """Check ln det D(N1) - c0 N1 saturating at sum_{k>=1} k c_k**2.

    Requires a regular symbol (strong Szego regime). D blocks are cut from a
    chain large enough that periodic wrap is negligible.
    """
    if spec.dimension != 1:
        raise ValueError("determinant checks are 1D only")
    classification = classify(spec, tol=tol)
    if not classification.is_regular:
        raise ValueError("strong Szego check requires a regular spectral function")
    n1_list = sorted(set(int(n) for n in n1_list))
    coeffs = szego_coefficients(spec, szego_order, tol=tol)
    c0 = float(coeffs.values[0])
    reference = szego_lower_bound(coeffs)

    big_n = n_sites or max(8 * n1_list[-1], 1024)
    kernel = build_kernel(_respec(spec, big_n, tol=tol), tol=tol)
    excess = []
    for n1 in n1_list:
        _, d = inner_blocks(kernel, n1, tol=tol)
        ld = 2.0 * float(np.sum(np.log(np.diag(np.linalg.cholesky(d)))))
        excess.append(ld - c0 * n1)
    excess = np.asarray(excess)
    tail = excess[np.asarray(n1_list) >= 64]
    tail = tail if tail.size else excess[-1:]
    resid = tail - reference
    denom = float(np.var(excess)) or 1.0
    return ScalingFit(
        model=SATURATION,
        parameters={
            "saturation_value": float(excess[-1]),
            "reference_value": reference,
            "relative_gap": float(abs(excess[-1] - reference) / max(abs(reference), 1e-300)),
            "block_sizes": n1_list,
            "excess": [float(v) for v in excess],
            "c0": c0,
        },
        r_squared=float(np.clip(1.0 - np.var(resid) / denom, 0.0, 1.0)),
        max_residual=float(np.abs(resid).max()),
        x_range=(float(n1_list[0]), float(n1_list[-1])),
    )


def _regular_part_mean_log(spec: CouplingSpec, classification, *, tol: Tolerances) -> float:
    """c0 = mean of (1/2) ln lambda0; the singular factors average to zero
    exactly, so going through the regular part keeps spectral accuracy even
    for singular symbols."""
    grid = 2.0 * np.pi * np.arange(4096) / 4096
    lam0 = regular_part_eval(spec, classification, grid)
    return 0.5 * float(np.mean(np.log(lam0)))


def widom_det_check(
    spec: CouplingSpec,
    n1_list: Iterable[int],
    *,
    n_sites: int | None = None,
    tol: Tolerances = DEFAULT,
) -> ScalingFit:
    """Fit ln det D(N1) - c0 N1 against ln N1; slope tracks the Widom
    coefficient sum_r m_r**2 / 4 for singular symbols (and 0 for regular).

    Blocks below 8 sites are excluded from the fit: asymptotics have not set
    in there. The chain must satisfy N >= 8 max(N1) so wrap effects stay
    negligible; resonant sizes are stepped over automatically.
    """
    if spec.dimension != 1:
        raise ValueError("determinant checks are 1D only")
    classification = classify(spec, tol=tol)
    n1_list = sorted(set(int(n) for n in n1_list))
    fit_n1 = [n for n in n1_list if n >= 8]
    if len(fit_n1) < 3:
        raise ValueError("need at least 3 block sizes >= 8")
    c0 = _regular_part_mean_log(spec, classification, tol=tol)

    big_n = n_sites or 8 * n1_list[-1]
    kernel = None
    for bump in range(0, 32, 2):
        try:
            kernel = build_kernel(_respec(spec, big_n + bump, tol=tol), tol=tol)
            break
        except NotPositive:
            log.info("resonant chain size %d, trying %d", big_n + bump, big_n + bump + 2)
    if kernel is None:
        raise NotPositive(f"no valid chain size near {big_n}")

    excess = []
    for n1 in fit_n1:
        _, d = inner_blocks(kernel, n1, tol=tol)
        ld = 2.0 * float(np.sum(np.log(np.diag(np.linalg.cholesky(d)))))
        excess.append(ld - c0 * n1)
    fit = fit_log_growth(fit_n1, excess)
    params = dict(
        fit.parameters,
        reference_slope=classification.widom_coefficient,
        c0=c0,
        chain_sites=kernel.n_sites,
        block_sizes=fit_n1,
        excess=[float(v) for v in excess],
    )
    return ScalingFit(fit.model, params, fit.r_squared, fit.max_residual, fit.x_range, fit.slope_stderr)


def area_law_2d(
    spec2d: CouplingSpec,
    n_list: Iterable[int],
    *,
    tol: Tolerances = DEFAULT,
) -> list[tuple[int, float, float]]:
    """Entropy of n x n corner blocks on a 2D torus: rows (n, S, S/(4n)).

    The boundary of an n x n block has 4n sites, so S/(4n) levelling off is
    the area law. Requires extents at least 4x the largest block so the
    block is far from its periodic images.
    """
    if spec2d.dimension != 2:
        raise ValueError("area_law_2d needs a 2D spec")
    n_list = sorted(set(int(n) for n in n_list))
    if min(spec2d.extents) < 4 * n_list[-1]:
        raise ValueError(
            f"extents {spec2d.extents} too small for block {n_list[-1]} (need >= 4x)"
        )
    kernel = build_kernel(spec2d, tol=tol)
    rows = []
    for n in n_list:
        _, s = entropy(kernel, (n, n), tol=tol)
        rows.append((n, s, s / (4.0 * n)))
    return rows
