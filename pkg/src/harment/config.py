"""Numerical tolerances and caps, overridable from the CLI."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    # reject spec if min eigenvalue <= positivity_rel * max eigenvalue
    positivity_rel: float = 1e-12
    # a polynomial root counts as "on the unit circle" if | |z|-1 | < root_circle
    # and the spectral function at its angle is < root_value_rel * max
    root_circle: float = 1e-8
    root_value_rel: float = 1e-8
    # largest tolerated imaginary residue when kernel rows must come out real
    kernel_imag_residue: float = 1e-10
    # mu eigenvalues in [1 - mu_slack, 1) are clamped to 1; below is an error
    mu_slack: float = 1e-9
    # decay magnitudes below this are treated as numerical zero
    noise_floor: float = 1e-13
    # primal and dual mutual-information forms must agree to this
    dual_form_abs: float = 1e-6
    # dense oracle / dense potential site cap
    dense_cap: int = 4096

    def replace(self, **overrides) -> "Tolerances":
        return dataclasses.replace(self, **overrides)


DEFAULT = Tolerances()

TOLERANCE_NAMES = tuple(f.name for f in dataclasses.fields(Tolerances))
