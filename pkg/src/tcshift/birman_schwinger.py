"""Spectral solver for the sandwiched thermal operator sqrt(V) chi sqrt(V).

The operator is discretized as a similarity-weighted Nystrom matrix whose
eigenvalues approximate the operator spectrum in the s-wave sector; the
critical inverse temperature is the bisection root of lambda_max(beta) = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AssumptionViolation, NoBracket, NonMonotone
from .grids import (
    MomentumGrid,
    RadialFunction,
    RadialGrid,
    chi_multiplier_values,
    spherical_j0,
)

__all__ = [
    "BsOperator",
    "SpectralTop",
    "CriticalTemperature",
    "PairState",
    "BsSolver",
    "assemble",
    "top_eigenvalues",
    "lambda_of_beta",
    "solve_beta_c",
    "extract_pair_state",
    "sup_spec_zero_temperature",
]

BETA_MAX = 1e6
BETA_MIN = 1e-6


@dataclass(frozen=True)
class BsOperator:
    """Symmetric Nystrom matrix of the sandwiched operator at one temperature."""

    beta: float  # math.inf selects the zero-temperature multiplier
    matrix: np.ndarray
    rgrid: RadialGrid

    def __post_init__(self):
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("non-finite operator matrix")
        if np.max(np.abs(self.matrix - self.matrix.T)) > 1e-13 * max(
            1.0, float(np.max(np.abs(self.matrix)))
        ):
            raise ValueError("operator matrix lost symmetry")


@dataclass
class SpectralTop:
    lambda1: float
    lambda2: float
    vector1: RadialFunction
    eigenvalues: np.ndarray

    @property
    def gap(self) -> float:
        return self.lambda1 - self.lambda2


@dataclass(frozen=True)
class CriticalTemperature:
    beta_c: float
    bracket: tuple
    tolerance: float

    @property
    def T_c(self) -> float:
        return 1.0 / self.beta_c


@dataclass
class PairState:
    """Leading eigenfunction at the critical temperature, real and radial."""

    phi_star: RadialFunction
    v_half_phi: RadialFunction


def _measure_weights(rgrid: RadialGrid) -> np.ndarray:
    """s_i = r_i sqrt(4 pi w_i): maps function samples to unit-norm coordinates."""
    return rgrid.nodes * np.sqrt(4.0 * math.pi * rgrid.weights)


class BsSolver:
    """Holds the beta-independent factor of the Nystrom matrix plus a beta cache.

    The matrix at inverse temperature beta is G diag(chi(p^2-mu)) G^T where
    G[i, a] = sqrt(V(r_i)) r_i sqrt(w_i) j0(p_a r_i) sqrt((2/pi) w_a p_a^2),
    so each beta costs one diagonal scaling and one rank-n_p product.
    """

    def __init__(self, model, rgrid: RadialGrid, pgrid: MomentumGrid):
        self.model = model
        self.rgrid = rgrid
        self.pgrid = pgrid
        r, wr = rgrid.nodes, rgrid.weights
        p, wp = pgrid.nodes, pgrid.weights
        d = np.sqrt(model.V(r)) * r * np.sqrt(wr)
        J = spherical_j0(np.outer(r, p))
        self._G = d[:, None] * J * np.sqrt((2.0 / math.pi) * wp * p * p)[None, :]
        self._lambda_cache: dict[float, float] = {}

    def matrix(self, beta_or_inf: float) -> np.ndarray:
        c = chi_multiplier_values(beta_or_inf, self.model.mu, self.pgrid)
        scaled = self._G * np.sqrt(c)
        M = scaled @ scaled.T
        return 0.5 * (M + M.T)

    def operator(self, beta_or_inf: float) -> BsOperator:
        return BsOperator(beta=beta_or_inf, matrix=self.matrix(beta_or_inf), rgrid=self.rgrid)

    def top(self, beta_or_inf: float, m: int = 2) -> SpectralTop:
        return top_eigenvalues(self.operator(beta_or_inf), m)

    def lambda_of(self, beta_or_inf: float) -> float:
        lam = self._lambda_cache.get(beta_or_inf)
        if lam is None:
            M = self.matrix(beta_or_inf)
            lam = float(np.linalg.eigvalsh(M)[-1])
            self._lambda_cache[beta_or_inf] = lam
        return lam

    def solve_beta_c(
        self,
        bracket_hint: tuple = (0.1, 100.0),
        rel_tol: float = 1e-8,
    ) -> CriticalTemperature:
        """Bisect lambda(beta) = 1 with a certified bracket.

        The hint is expanded geometrically (factor 4, up to [1e-6, 1e6])
        until lambda(lo) < 1 < lambda(hi); monotonicity of the evaluated
        lambda values is checked as they accumulate.
        """
        lo, hi = float(bracket_hint[0]), float(bracket_hint[1])
        evaluated: list[tuple[float, float]] = []

        def lam(b: float) -> float:
            val = self.lambda_of(b)
            evaluated.append((b, val))
            return val

        while lam(hi) <= 1.0:
            if hi >= BETA_MAX:
                raise NoBracket(
                    f"lambda({hi:g}) = {self.lambda_of(hi):.6g} <= 1: "
                    "coupling criterion fails at this discretization"
                )
            hi = min(hi * 4.0, BETA_MAX)
        while lam(lo) >= 1.0:
            if lo <= BETA_MIN:
                raise NoBracket(f"lambda({lo:g}) >= 1 already; beta_c below {BETA_MIN:g}")
            lo = max(lo / 4.0, BETA_MIN)

        while hi - lo > rel_tol * 0.5 * (hi + lo):
            mid = 0.5 * (lo + hi)
            if lam(mid) < 1.0:
                lo = mid
            else:
                hi = mid

        evaluated.sort()
        lams = np.array([v for _, v in evaluated])
        drops = np.diff(lams) < -1e-10 * np.maximum(1.0, lams[:-1])
        if np.any(drops):
            raise NonMonotone(
                "lambda(beta) decreased across bisection points; refine the grids"
            )
        return CriticalTemperature(beta_c=0.5 * (lo + hi), bracket=(lo, hi), tolerance=rel_tol)

    def extract_pair_state(
        self, tc: CriticalTemperature, gap_tol: float = 1e-6
    ) -> tuple[PairState, SpectralTop]:
        top = self.top(tc.beta_c, m=2)
        if top.gap < gap_tol:
            raise AssumptionViolation(
                f"leading eigenvalue nearly degenerate (gap {top.gap:.3e} < {gap_tol:g}); "
                "simplicity of the pair state cannot be certified"
            )
        phi = top.vector1
        v_half = RadialFunction(
            grid=phi.grid, values=np.sqrt(self.model.V(phi.grid.nodes)) * phi.values
        )
        return PairState(phi_star=phi, v_half_phi=v_half), top


def assemble(model, beta_or_inf: float, rgrid: RadialGrid, pgrid: MomentumGrid) -> BsOperator:
    return BsSolver(model, rgrid, pgrid).operator(beta_or_inf)


def top_eigenvalues(op: BsOperator, m: int = 2) -> SpectralTop:
    """Top eigenvalues and the leading eigenvector, de-weighted to function samples.

    The eigenvector sign is fixed so that 4 pi int phi r^2 dr >= 0.
    """
    if m < 2:
        raise ValueError("m must be >= 2")
    vals, vecs = np.linalg.eigh(op.matrix)
    top_vals = vals[::-1][:m].copy()
    u = vecs[:, -1]
    s = _measure_weights(op.rgrid)
    phi = u / s
    r, w = op.rgrid.nodes, op.rgrid.weights
    if 4.0 * math.pi * np.sum(w * r * r * phi) < 0.0:
        phi = -phi
    norm = math.sqrt(4.0 * math.pi * np.sum(w * r * r * phi * phi))
    vector1 = RadialFunction(grid=op.rgrid, values=phi / norm)
    return SpectralTop(
        lambda1=float(top_vals[0]),
        lambda2=float(top_vals[1]),
        vector1=vector1,
        eigenvalues=top_vals,
    )


def lambda_of_beta(model, beta_or_inf: float, rgrid: RadialGrid, pgrid: MomentumGrid) -> float:
    return BsSolver(model, rgrid, pgrid).lambda_of(beta_or_inf)


def solve_beta_c(
    model,
    rgrid: RadialGrid,
    pgrid: MomentumGrid,
    bracket_hint: tuple = (0.1, 100.0),
    rel_tol: float = 1e-8,
) -> CriticalTemperature:
    return BsSolver(model, rgrid, pgrid).solve_beta_c(bracket_hint, rel_tol)


def extract_pair_state(
    model,
    tc: CriticalTemperature,
    rgrid: RadialGrid,
    pgrid: MomentumGrid,
    gap_tol: float = 1e-6,
) -> tuple[PairState, SpectralTop]:
    return BsSolver(model, rgrid, pgrid).extract_pair_state(tc, gap_tol)


def sup_spec_zero_temperature(model, numerics) -> tuple[float, float]:
    """Top eigenvalue of the zero-temperature operator on a guarded grid.

    Returns (value at the configured resolution, absolute change from half
    resolution).  For mu > 0 the underlying quadratic form is unbounded, so
    the value keeps growing slowly as the guard shrinks; the refinement
    delta quantifies how trustworthy the reported number is.
    """
    import dataclasses

    rgrid, _ = numerics.build_grids(model)
    guarded = numerics.build_guarded_momentum_grid(model)
    lam_fine = BsSolver(model, rgrid, guarded).lambda_of(math.inf)
    half = dataclasses.replace(
        numerics, n_r=max(64, numerics.n_r // 2), n_p=max(64, numerics.n_p // 2)
    )
    rgrid_h, _ = half.build_grids(model)
    guarded_h = half.build_guarded_momentum_grid(model)
    lam_half = BsSolver(model, rgrid_h, guarded_h).lambda_of(math.inf)
    return lam_fine, abs(lam_fine - lam_half)
