"""Model parameters, domain geometry, initial data, and the regime taxonomy.

The evolving quantity is a cell density u coupled to an attracting signal v
and a repelling signal w on a rectangle with zero-flux boundaries:

    u_t = Lap(u) - chi div(u grad v) + xi div(u grad w)
    0   = Lap(v) + alpha u^rho - beta v
    0   = Lap(w) + gamma u - delta w

The production and decay coefficients (alpha, beta, gamma, delta) are
strictly positive and the production exponent rho lies in (0, 1]; rho = 1 is
admitted only so regime experiments can probe the linear-production
dichotomy.  The sensitivities chi and xi may be zero, which switches the
corresponding drift term off entirely; chi = xi = 0 reduces the density
equation to the heat equation and is the basis of a validation check.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    NegativeAmplitude,
    NonPositiveCoefficient,
    RhoOutOfRange,
    ZeroField,
)

_POSITIVE_COEFFICIENTS = ("alpha", "beta", "gamma", "delta")
_NONNEGATIVE_COEFFICIENTS = ("chi", "xi")

# Relative tolerance on |m * (chi*alpha - xi*gamma) - 4*pi| for the knife-edge
# critical-mass classification.
CRITICAL_MASS_RTOL = 1e-9


@dataclass(frozen=True)
class ModelParams:
    """Coefficients of the coupled system; `dim` is the space dimension n.

    Simulation supports dim == 2 only; the analytic-bounds arithmetic accepts
    any dim >= 2.
    """

    alpha: float
    beta: float
    gamma: float
    delta: float
    chi: float
    xi: float
    rho: float
    dim: int = 2


def validate_params(params: ModelParams) -> None:
    """Raise if any coefficient is out of its admissible range."""
    for name in _POSITIVE_COEFFICIENTS:
        value = float(getattr(params, name))
        if not math.isfinite(value) or value <= 0.0:
            raise NonPositiveCoefficient(name, value)
    for name in _NONNEGATIVE_COEFFICIENTS:
        value = float(getattr(params, name))
        if not math.isfinite(value) or value < 0.0:
            raise NonPositiveCoefficient(name, value, requirement="nonnegative")
    rho = float(params.rho)
    if not math.isfinite(rho) or rho <= 0.0 or rho > 1.0:
        raise RhoOutOfRange(rho)
    if int(params.dim) < 2:
        raise NonPositiveCoefficient("dim", params.dim)


@dataclass(frozen=True)
class DomainSpec:
    """Axis-aligned rectangle [0, Lx] x [0, Ly] split into square cells.

    The cell size h = lengths[axis] / cells[axis] must be identical on both
    axes; zero-flux boundary handling and the cosine-transform solver both
    rely on that.
    """

    lengths: tuple[float, float]
    cells: tuple[int, int]

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(float(v) for v in self.lengths))
        object.__setattr__(self, "cells", tuple(int(v) for v in self.cells))
        if len(self.lengths) != 2 or len(self.cells) != 2:
            raise ValueError("domain is two dimensional: need two lengths and two cell counts")
        if any(not math.isfinite(v) or v <= 0 for v in self.lengths):
            raise ValueError(f"domain lengths must be positive, got {self.lengths}")
        if any(c < 1 for c in self.cells):
            raise ValueError(f"cell counts must be >= 1, got {self.cells}")
        hx = self.lengths[0] / self.cells[0]
        hy = self.lengths[1] / self.cells[1]
        if abs(hx - hy) > 1e-12 * max(hx, hy):
            raise ValueError(f"cells must be square: hx = {hx}, hy = {hy}")

    @property
    def h(self) -> float:
        return self.lengths[0] / self.cells[0]

    @property
    def volume(self) -> float:
        return self.lengths[0] * self.lengths[1]

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """1D coordinate arrays of the cell centers along x and y."""
        h = self.h
        x = (np.arange(self.cells[0]) + 0.5) * h
        y = (np.arange(self.cells[1]) + 0.5) * h
        return x, y


@dataclass(frozen=True)
class BumpSpec:
    center: tuple[float, float]
    width: float
    amplitude: float


@dataclass(frozen=True)
class InitialData:
    """Builder tag plus shape parameters for the initial density.

    kind is one of "uniform", "gaussian-bump", "multi-bump", "from-file".
    When `mass` is set the built field is rescaled so its discrete integral
    equals that target.
    """

    kind: str
    amplitude: float = 1.0
    center: tuple[float, float] | None = None
    width: float = 0.1
    bumps: tuple[BumpSpec, ...] = ()
    path: str | None = None
    mass: float | None = None


def _gaussian(dom: DomainSpec, center, width: float, amplitude: float) -> np.ndarray:
    if amplitude < 0:
        raise NegativeAmplitude(f"bump amplitude must be >= 0, got {amplitude}")
    if width <= 0:
        raise ValueError(f"bump width must be positive, got {width}")
    x, y = dom.cell_centers()
    cx, cy = center
    r2 = (x[:, None] - cx) ** 2 + (y[None, :] - cy) ** 2
    return amplitude * np.exp(-r2 / (2.0 * width**2))


def build_initial_data(spec: InitialData, dom: DomainSpec):
    """Build the initial density field; returns (field, mass).

    Values are midpoint samples at cell centers, which is the second-order
    cell average. The reported mass is the discrete integral of the result.
    """
    from .grid import Field, integrate, read_field_csv

    if spec.kind == "uniform":
        if spec.amplitude < 0:
            raise NegativeAmplitude(f"uniform level must be >= 0, got {spec.amplitude}")
        values = np.full(dom.cells, float(spec.amplitude))
    elif spec.kind == "gaussian-bump":
        center = spec.center if spec.center is not None else (dom.lengths[0] / 2, dom.lengths[1] / 2)
        values = _gaussian(dom, center, spec.width, spec.amplitude)
    elif spec.kind == "multi-bump":
        if not spec.bumps:
            raise ZeroField("multi-bump initial data needs at least one bump")
        values = np.zeros(dom.cells)
        for bump in spec.bumps:
            values += _gaussian(dom, bump.center, bump.width, bump.amplitude)
    elif spec.kind == "from-file":
        if spec.path is None:
            raise ValueError("from-file initial data needs a path")
        field = read_field_csv(spec.path, dom)
        if field.values.min() < 0:
            raise NegativeAmplitude(f"file {spec.path!r} holds negative density values")
        values = np.array(field.values)
    else:
        raise ValueError(f"unknown initial data kind {spec.kind!r}")

    field = Field(values, dom)
    mass = integrate(field)
    if mass <= 0.0:
        raise ZeroField("initial data integrates to zero")
    if spec.mass is not None:
        if spec.mass <= 0:
            raise ZeroField(f"target mass must be positive, got {spec.mass}")
        field = Field(values * (float(spec.mass) / mass), dom)
        mass = integrate(field)
    return field, mass


class Regime(enum.Enum):
    """Qualitative behaviour predicted by the coefficient/mass taxonomy."""

    SUBLINEAR_GLOBAL = "SublinearGlobal"
    REPULSION_DOMINANT = "RepulsionDominant"
    SUBCRITICAL_MASS = "SubcriticalMass"
    SUPERCRITICAL_MASS = "SupercriticalMass"
    CRITICAL_MASS = "CriticalMass"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class RegimeResult:
    regime: Regime
    critical_mass: float | None
    # True when the sublinear global-boundedness guarantee covers the point;
    # rho = 1 points fall outside it regardless of regime.
    theorem_applies: bool


def classify_regime(params: ModelParams, mass: float) -> RegimeResult:
    """Classify (params, mass) into exactly one regime.

    Invariant under jointly rescaling (chi, alpha) and (xi, gamma) while the
    products chi*alpha and xi*gamma are preserved, since only those products
    enter.
    """
    validate_params(params)
    mass = float(mass)
    if not math.isfinite(mass) or mass <= 0:
        raise ZeroField(f"regime classification needs positive mass, got {mass}")

    if params.rho < 1.0:
        return RegimeResult(Regime.SUBLINEAR_GLOBAL, None, True)

    balance = params.chi * params.alpha - params.xi * params.gamma
    if balance < 0.0:
        return RegimeResult(Regime.REPULSION_DOMINANT, None, False)
    if balance == 0.0:
        # Exactly balanced attraction and repulsion sits outside the taxonomy.
        return RegimeResult(Regime.INDETERMINATE, None, False)
    if params.dim != 2:
        return RegimeResult(Regime.INDETERMINATE, None, False)

    four_pi = 4.0 * math.pi
    crit = four_pi / balance
    if abs(mass * balance - four_pi) <= CRITICAL_MASS_RTOL * four_pi:
        return RegimeResult(Regime.CRITICAL_MASS, crit, False)
    if mass * balance < four_pi:
        return RegimeResult(Regime.SUBCRITICAL_MASS, crit, False)
    return RegimeResult(Regime.SUPERCRITICAL_MASS, crit, False)
