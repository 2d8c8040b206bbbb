"""Scalar time-series diagnostics and bound-consistency checks.

A sample captures mass, density extrema, the energies E_p = integral(u^p),
their gradient terms integral(|grad u^{p/2}|^2), and the signal maxima. Rate
estimates (dE/dt) are forward differences between consecutive samples, filled
in after a run. The two check_* functions compare a sampled series against
the analytic energy inequality and the absorptive bound; they are
consistency reports for discrete trajectories, not proofs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

import numpy as np

from .errors import InsufficientSamples, MismatchedP
from .grid import Field, grad_energy, integrate, lp_norm_p

if TYPE_CHECKING:
    from .bounds import BoundsReport
    from .stepper import SimState


@dataclass(frozen=True)
class DiagnosticsConfig:
    ps: tuple[float, ...] = (2.0,)
    every: int = 10
    bounds: "BoundsReport | None" = None

    def __post_init__(self):
        object.__setattr__(self, "ps", tuple(float(p) for p in self.ps))
        if not self.ps:
            raise ValueError("need at least one exponent p")
        if any(p <= 1.0 for p in self.ps):
            raise ValueError(f"every exponent must satisfy p > 1, got {self.ps}")
        if self.every < 1:
            raise ValueError(f"sample interval must be >= 1, got {self.every}")
        if self.bounds is not None and self.bounds.p not in self.ps:
            raise MismatchedP(
                f"bounds are for p = {self.bounds.p}, sampled exponents are {self.ps}"
            )


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    mass: float
    u_min: float
    u_max: float
    energies: dict
    grad_energies: dict
    v_max: float
    w_max: float
    dedt_estimate: float
    rhs_bound: float


def sample(state: "SimState", ps, bounds: "BoundsReport | None" = None) -> DiagnosticsRecord:
    """Pure snapshot of the state; identical states give identical records.

    Rounding-level negative dips in u are clamped to zero inside the
    fractional powers only; u_min reports the true minimum.
    """
    ps = tuple(float(p) for p in ps)
    uv = state.u.values
    u_min = float(uv.min())
    u_max = float(uv.max())
    clamped = Field(np.maximum(uv, 0.0), state.u.domain) if u_min < 0.0 else state.u

    energies = {}
    grads = {}
    for p in ps:
        energies[p] = lp_norm_p(clamped, p)
        root = Field(np.power(clamped.values, p / 2.0), state.u.domain)
        grads[p] = grad_energy(root)

    rhs_bound = math.nan
    if bounds is not None:
        if bounds.p not in ps:
            raise MismatchedP(f"bounds are for p = {bounds.p}, sampled exponents are {ps}")
        p = bounds.p
        rhs_bound = -(4.0 * (p - 1.0) / p) * grads[p] + bounds.cbar

    return DiagnosticsRecord(
        t=float(state.t),
        mass=integrate(state.u),
        u_min=u_min,
        u_max=u_max,
        energies=energies,
        grad_energies=grads,
        v_max=float(state.v.values.max()),
        w_max=float(state.w.values.max()),
        dedt_estimate=math.nan,
        rhs_bound=rhs_bound,
    )


def backfill_rate_estimates(records: list, p: float) -> list:
    """Forward-difference dE_p/dt onto each record; the last keeps NaN."""
    p = float(p)
    out = list(records)
    for i in range(len(out) - 1):
        a, b = out[i], out[i + 1]
        dt = b.t - a.t
        if dt > 0.0 and p in a.energies and p in b.energies:
            out[i] = replace(a, dedt_estimate=(b.energies[p] - a.energies[p]) / dt)
    return out


def detect_blowup(state: "SimState", threshold: float) -> bool:
    return float(state.u.values.max()) > threshold


@dataclass(frozen=True)
class InequalityReport:
    n_pairs: int
    n_ok: int

    @property
    def fraction_ok(self) -> float:
        return self.n_ok / self.n_pairs if self.n_pairs else math.nan


def check_energy_inequality(records: list, p: float, cbar: float) -> InequalityReport:
    """Fraction of consecutive sample pairs satisfying the discrete energy
    inequality

        (E2 - E1)/(t2 - t1) <= -(4(p-1)/p) * G_mid + cbar + tol

    with G_mid the mean of the two gradient terms and slack
    tol = 0.05 (|rhs| + cbar) for discretization error.
    """
    p = float(p)
    if len(records) < 2:
        raise InsufficientSamples(f"need at least two samples, got {len(records)}")
    for rec in records:
        if p not in rec.energies or p not in rec.grad_energies:
            raise MismatchedP(f"records do not carry exponent p = {p}")
    n_pairs = 0
    n_ok = 0
    for a, b in zip(records[:-1], records[1:]):
        dt = b.t - a.t
        if dt <= 0.0:
            continue
        lhs = (b.energies[p] - a.energies[p]) / dt
        g_mid = 0.5 * (a.grad_energies[p] + b.grad_energies[p])
        rhs = -(4.0 * (p - 1.0) / p) * g_mid + cbar
        tol = 0.05 * (abs(rhs) + cbar)
        n_pairs += 1
        if lhs <= rhs + tol:
            n_ok += 1
    if n_pairs == 0:
        raise InsufficientSamples("no sample pair with positive time separation")
    return InequalityReport(n_pairs=n_pairs, n_ok=n_ok)


@dataclass(frozen=True)
class AbsorptiveReport:
    max_energy: float
    bound: float

    @property
    def max_ratio(self) -> float:
        return self.max_energy / self.bound


def check_absorptive_bound(records: list, p: float, e0: float, c_star_total: float) -> AbsorptiveReport:
    """max_t E_p(t) against max(E_p(0), c_star_total).

    With exact constants the ratio must stay below 1 + 1e-6; with estimated
    constants it is reported for judgment rather than asserted.
    """
    p = float(p)
    if not records:
        raise InsufficientSamples("need at least one sample")
    for rec in records:
        if p not in rec.energies:
            raise MismatchedP(f"records do not carry exponent p = {p}")
    max_energy = max(rec.energies[p] for rec in records)
    return AbsorptiveReport(max_energy=max_energy, bound=max(float(e0), float(c_star_total)))


def _fmt_p(p: float) -> str:
    return format(p, "g")


def diagnostics_header(ps) -> str:
    ps = tuple(float(p) for p in ps)
    cols = ["t", "mass", "u_min", "u_max"]
    cols += [f"E_{_fmt_p(p)}" for p in ps]
    cols += [f"gradE_{_fmt_p(p)}" for p in ps]
    cols += ["v_max", "w_max", "dEdt", "rhs_bound"]
    return ",".join(cols)


def write_diagnostics_csv(records: list, ps, path) -> None:
    """One row per sample, 17 significant digits, header always present."""
    ps = tuple(float(p) for p in ps)
    lines = [diagnostics_header(ps)]
    for rec in records:
        row = [rec.t, rec.mass, rec.u_min, rec.u_max]
        row += [rec.energies[p] for p in ps]
        row += [rec.grad_energies[p] for p in ps]
        row += [rec.v_max, rec.w_max, rec.dedt_estimate, rec.rhs_bound]
        lines.append(",".join(format(v, ".17g") for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
