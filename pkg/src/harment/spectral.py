"""Spectral function analysis: unit-circle zeros, regular part, Szego data.

For a 1D spec the spectral function is the real trigonometric polynomial
lambda(theta) = sum_k V_k exp(i k theta) of degree R-1. Multiplying by
z**(R-1) with z = exp(i theta) turns it into an ordinary polynomial of degree
2(R-1) whose unit-circle roots are the zeros of lambda. Nonnegativity forces
even orders of vanishing; we record half the order of vanishing of lambda as
the multiplicity m_r, i.e. the order of the zero of lambda**(1/2).

The Fourier coefficients c_k used by the Szego bound are those of
ln lambda**(1/2). (Texts sometimes write ln lambda**(-1/2); the two differ
only by an overall sign, which k * c_k**2 does not see. We follow the
+1/2 convention throughout.)
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.stats import linregress

from .config import DEFAULT, Tolerances
from .errors import IllConditionedRoots
from .lattice import CouplingSpec

REGULAR = "Regular"
SINGULAR = "Singular"

# pre-filter for candidate roots; final acceptance re-checks on the circle.
# companion roots of an order-2m circle zero scatter ~eps**(1/2m) off it, so
# the loose band admits multiplicities up to 3; the tight band is where
# simple and double roots land and is used for the consistency count
_LOOSE_CIRCLE = 5e-3
_TIGHT_CIRCLE = 1e-3
_CLUSTER_GAP = 1e-2
_MIN_ROOT_SEPARATION = 1e-4


@dataclass(frozen=True)
class SpectralRoot:
    angle: float
    multiplicity: int


@dataclass(frozen=True)
class SpectralClassification:
    kind: str
    roots: tuple[SpectralRoot, ...]
    widom_coefficient: float

    @property
    def is_regular(self) -> bool:
        return self.kind == REGULAR

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "roots": [{"angle": r.angle, "multiplicity": r.multiplicity} for r in self.roots],
            "widom_coefficient": self.widom_coefficient,
        }


@dataclass(frozen=True)
class SzegoCoefficients:
    """Fourier coefficients of ln lambda**(1/2) up to order K.

    ``tail_estimate`` bounds the mass sum_{k>K} k c_k**2 using a geometric
    extrapolation of the coefficient decay; it is infinite when no decay can
    be established (singular symbol). ``from_singular_symbol`` flags specs
    whose spectral function has unit-circle zeros, where the coefficients
    decay only polynomially and the quadrature is less accurate.
    """

    values: np.ndarray
    order: int
    tail_estimate: float
    from_singular_symbol: bool
    decay_rate: float
    decay_fit_r2: float


def spectral_eval(spec: CouplingSpec, theta):
    """Evaluate lambda(theta) = sum_k V_k cos(k . theta).

    For d=1, ``theta`` is a scalar or array of angles; for d>1 the last axis
    must hold the d angle components.
    """
    lags, vals = spec.lag_arrays()
    th = np.asarray(theta, dtype=float)
    if spec.dimension == 1:
        phases = th[..., None] * lags[:, 0]
    else:
        if th.shape[-1] != spec.dimension:
            raise ValueError(f"theta last axis must have length {spec.dimension}")
        phases = th @ lags.T
    return np.cos(phases) @ vals


def _require_1d(spec: CouplingSpec, what: str) -> None:
    if spec.dimension != 1:
        raise ValueError(f"{what} is defined for 1D specs only (got d={spec.dimension})")


def _laurent_coefficients(spec: CouplingSpec) -> np.ndarray:
    """Ascending coefficients of P(z) = z**(R-1) * lambda(z)."""
    deg = spec.coupling_range - 1
    coeffs = np.zeros(2 * deg + 1)
    for (k,), v in spec.coefficients.items():
        coeffs[k + deg] = v
    return coeffs


def _eval_derivative(spec: CouplingSpec, theta: float, order: int) -> float:
    """Exact n-th derivative of the trigonometric polynomial at theta."""
    lags, vals = spec.lag_arrays()
    k = lags[:, 0].astype(float)
    return float(np.real(np.sum(vals * (1j * k) ** order * np.exp(1j * k * theta))))


def _derivative_scale(spec: CouplingSpec, order: int) -> float:
    lags, vals = spec.lag_arrays()
    return float(np.sum(np.abs(vals) * np.abs(lags[:, 0].astype(float)) ** order))


def _order_of_vanishing(spec: CouplingSpec, angle: float) -> int:
    for n in range(1, 2 * spec.coupling_range - 1):
        scale = max(_derivative_scale(spec, n), 1e-300)
        if abs(_eval_derivative(spec, angle, n)) > 1e-7 * scale:
            return n
    return 2 * (spec.coupling_range - 1)


def _refine_derivative_zero(spec: CouplingSpec, order: int, lo: float, hi: float) -> float | None:
    """Zero of the order-th derivative in [lo, hi].

    Around a minimum of lambda every odd-order derivative passes from
    negative to positive, so a sign change is required in that orientation.
    """
    dlo = _eval_derivative(spec, lo, order)
    dhi = _eval_derivative(spec, hi, order)
    for _ in range(8):
        if dlo < 0 < dhi:
            break
        width = hi - lo
        lo -= 0.25 * width
        hi += 0.25 * width
        dlo = _eval_derivative(spec, lo, order)
        dhi = _eval_derivative(spec, hi, order)
    else:
        return None
    return brentq(lambda t: _eval_derivative(spec, t, order), lo, hi, xtol=1e-14)


def _locate_root(spec: CouplingSpec, lo: float, hi: float, value_tol: float):
    """(angle, multiplicity) of a zero of lambda near [lo, hi], or None.

    A zero of order 2m makes lambda' vanish to order 2m - 1, so the first
    sign-change refinement localizes the angle only to roughly eps**(1/(2m-1)).
    Whenever the measured order of vanishing comes out odd (the signature of
    an off-center angle), the angle is re-refined as the zero of that odd
    derivative, which is simple at the true root and machine accurate.
    """
    alpha = _refine_derivative_zero(spec, 1, lo, hi)
    if alpha is None:
        raise IllConditionedRoots(
            f"could not isolate a minimum of the spectral function in "
            f"[{lo:.6f}, {hi:.6f}]"
        )
    for _ in range(2 * spec.coupling_range):
        if spectral_eval(spec, alpha) >= value_tol:
            return None  # shallow positive minimum, not a zero
        order = _order_of_vanishing(spec, alpha)
        if order % 2 == 0:
            return float(alpha), order // 2
        better = _refine_derivative_zero(spec, order, alpha - 2e-3, alpha + 2e-3)
        if better is None or abs(better - alpha) > 1e-2:
            raise IllConditionedRoots(
                f"odd order of vanishing {order} at angle {alpha:.6f} could "
                "not be resolved into an even-order zero"
            )
        alpha = better
    raise IllConditionedRoots(f"multiplicity detection did not settle near angle {alpha:.6f}")


def classify(spec: CouplingSpec, *, tol: Tolerances = DEFAULT) -> SpectralClassification:
    """Find the zeros of lambda on the unit circle with multiplicities.

    Root candidates come from the companion-matrix roots of the Laurent
    polynomial; each candidate cluster is refined to the nearby minimum of
    lambda and accepted only if lambda there is below ``tol.root_value_rel``
    times the maximum. Multiplicities come from the order of vanishing
    measured with exact derivatives, not from cluster sizes.
    """
    _require_1d(spec, "classification")
    coeffs = _laurent_coefficients(spec)
    if len(coeffs) == 1:
        return SpectralClassification(REGULAR, (), 0.0)

    grid = np.linspace(0.0, 2.0 * np.pi, 2048, endpoint=False)
    lam_grid = spectral_eval(spec, grid)
    lam_max = float(np.max(lam_grid))

    roots = np.roots(coeffs[::-1])
    near = roots[np.abs(np.abs(roots) - 1.0) < max(_LOOSE_CIRCLE, tol.root_circle)]
    tight_angles = np.angle(
        roots[np.abs(np.abs(roots) - 1.0) < max(_TIGHT_CIRCLE, tol.root_circle)]
    ) % (2.0 * np.pi)
    candidates = list(np.angle(near) % (2.0 * np.pi))
    # grid minima of lambda serve as a second candidate source in case the
    # companion roots of a very degenerate zero scatter out of the loose band
    shallow = (lam_grid < 1e-4 * lam_max)
    local_min = shallow & (lam_grid <= np.roll(lam_grid, 1)) & (lam_grid <= np.roll(lam_grid, -1))
    candidates.extend(grid[local_min])
    if not candidates:
        return SpectralClassification(REGULAR, (), 0.0)

    angles = np.sort(np.asarray(candidates))
    clusters: list[list[float]] = [[angles[0]]]
    for a in angles[1:]:
        if a - clusters[-1][-1] < _CLUSTER_GAP:
            clusters[-1].append(a)
        else:
            clusters.append([a])
    # wraparound: first and last clusters may be the same root near angle 0
    if len(clusters) > 1 and (clusters[0][0] + 2.0 * np.pi) - clusters[-1][-1] < _CLUSTER_GAP:
        clusters[0] = [a - 2.0 * np.pi for a in clusters.pop()] + clusters[0]

    found: list[SpectralRoot] = []
    for cluster in clusters:
        lo, hi = min(cluster) - 2e-3, max(cluster) + 2e-3
        located = _locate_root(spec, lo, hi, tol.root_value_rel * lam_max)
        if located is None:
            continue  # off-circle candidate, not a true zero
        alpha, multiplicity = located
        found.append(SpectralRoot(angle=alpha % (2.0 * np.pi), multiplicity=multiplicity))

    found.sort(key=lambda r: r.angle)
    deduped: list[SpectralRoot] = []
    for root in found:
        if deduped and abs(root.angle - deduped[-1].angle) < 1e-9:
            if root.multiplicity != deduped[-1].multiplicity:
                raise IllConditionedRoots(
                    f"inconsistent multiplicities at angle {root.angle:.8f}"
                )
            continue  # two candidate clusters converged to the same root
        deduped.append(root)
    found = deduped
    for a, b in zip(found, found[1:]):
        if b.angle - a.angle < _MIN_ROOT_SEPARATION:
            raise IllConditionedRoots(
                f"roots at angles {a.angle:.8f} and {b.angle:.8f} are too close to separate"
            )

    if not found:
        return SpectralClassification(REGULAR, (), 0.0)
    widom = sum(r.multiplicity**2 for r in found) / 4.0
    return SpectralClassification(SINGULAR, tuple(found), widom)


def _deflated_polynomial(spec: CouplingSpec, classification: SpectralClassification) -> np.ndarray:
    """Divide all unit-circle root factors out of the Laurent polynomial."""
    coeffs = _laurent_coefficients(spec)[::-1]  # descending for numpy poly ops
    divisor = np.array([1.0 + 0.0j])
    for root in classification.roots:
        factor = np.array([1.0, -np.exp(1j * root.angle)])
        for _ in range(2 * root.multiplicity):
            divisor = np.convolve(divisor, factor)
    quotient, remainder = np.polydiv(coeffs.astype(complex), divisor)
    scale = np.abs(coeffs).max()
    if remainder.size and np.abs(remainder).max() > 1e-6 * scale:
        raise IllConditionedRoots(
            f"deflation remainder {np.abs(remainder).max():.2e} is too large; "
            "root angles or multiplicities are inconsistent"
        )
    return quotient


def regular_part_eval(spec: CouplingSpec, classification: SpectralClassification, theta):
    """Evaluate the regular part lambda_0(theta).

    lambda_0 is lambda with every unit-circle factor (2 - 2cos(theta - a_r))
    raised to m_r divided out. Evaluation goes through the deflated
    polynomial, so it stays finite and smooth at the root angles themselves.
    """
    _require_1d(spec, "the regular part")
    th = np.asarray(theta, dtype=float)
    if not classification.roots:
        return spectral_eval(spec, th)
    quotient = _deflated_polynomial(spec, classification)
    z = np.exp(1j * th)
    values = np.polyval(quotient, z)
    # (z - e^{ia})^{2m} = (2 - 2cos(theta - a))^m * (-1)^m * e^{im(theta + a)}
    phase = np.exp(-1j * (spec.coupling_range - 1) * th).astype(complex)
    for root in classification.roots:
        phase = phase * (-1.0) ** root.multiplicity * np.exp(
            1j * root.multiplicity * (th + root.angle)
        )
    out = np.real(values * phase)
    return out if out.shape else float(out)


def szego_coefficients(spec: CouplingSpec, order: int, *, tol: Tolerances = DEFAULT) -> SzegoCoefficients:
    """Fourier coefficients c_k of ln lambda**(1/2), k = 0..order.

    Uniform trapezoid quadrature on max(4096, 32*order) points, which is
    spectrally accurate for the analytic integrand of a regular symbol. For
    singular symbols the result carries ``from_singular_symbol=True`` and an
    infinite tail estimate.
    """
    _require_1d(spec, "Szego coefficients")
    if order < 1:
        raise ValueError("order must be >= 1")
    classification = classify(spec, tol=tol)
    m = max(4096, 32 * order)
    grid = 2.0 * np.pi * np.arange(m) / m
    lam = np.maximum(spectral_eval(spec, grid), 1e-300)
    g = 0.5 * np.log(lam)
    spectrum = np.fft.rfft(g) / m
    values = spectrum[: order + 1].real.copy()

    rho, r2, tail = _geometric_tail(values, order)
    if not classification.is_regular:
        tail = math.inf
    values.setflags(write=False)
    return SzegoCoefficients(
        values=values,
        order=order,
        tail_estimate=tail,
        from_singular_symbol=not classification.is_regular,
        decay_rate=rho,
        decay_fit_r2=r2,
    )


def _geometric_tail(values: np.ndarray, order: int) -> tuple[float, float, float]:
    floor = 1e-15 * max(1.0, abs(float(values[0])))
    ks = np.arange(1, order + 1)
    usable = ks[np.abs(values[1:]) > floor]
    if usable.size == 0:
        return 0.0, 1.0, 0.0
    window = usable[usable >= usable[-1] // 2]
    if window.size < 4:
        return 0.0, 1.0, 0.0
    fit = linregress(window.astype(float), np.log(np.abs(values[window])))
    rho = math.exp(fit.slope)
    r2 = float(fit.rvalue**2)
    if rho >= 1.0:
        return rho, r2, math.inf
    # sum_{k>K} k C^2 rho^{2k} with C from the fit intercept
    c2, x = math.exp(2.0 * fit.intercept), rho * rho
    tail = c2 * x ** (order + 1) * ((order + 1) - order * x) / (1.0 - x) ** 2
    return rho, r2, tail


def szego_lower_bound(coefficients: SzegoCoefficients) -> float:
    """Partial sum sum_{k=1..K} k c_k**2; a true lower bound of the limit.

    The omitted remainder is bounded by ``coefficients.tail_estimate``.
    """
    ks = np.arange(1, coefficients.order + 1)
    return float(np.sum(ks * coefficients.values[1:] ** 2))
