"""Bath spectral densities and their tridiagonal chain representations.

A continuum of harmonic modes coupled linearly to a two-level system is
characterised by a coupling density J(omega).  Orthogonalising the family
of polynomials with respect to the measure J(omega) d(omega) turns the
star-shaped system-bath coupling into a half-infinite nearest-neighbour
chain: the three-term recurrence coefficients of those polynomials are the
chain's on-site frequencies and hopping amplitudes, and the zeroth moment
fixes the coupling of the first chain site to the system.

Two densities are provided:

* :class:`SpectralDensity` -- a power law with exponential cutoff,
  ``J(w) = 2 * alpha * omega_c**(1-s) * w**s * exp(-w/omega_c)``.
* :class:`ThermalizedDensity` -- the temperature-extended density on the
  full real axis whose *vacuum* chain dynamics reproduces the thermal
  reduced dynamics of the original bath.

Coefficients are produced by a discretised Stieltjes procedure: the
measure is replaced by a composite Gauss-Legendre quadrature rule (with
panels graded geometrically towards omega = 0, where sub-Ohmic and
thermally extended densities are non-smooth or integrably divergent), and
the Jacobi matrix is obtained by Lanczos iteration with full
reorthogonalisation on the resulting discrete measure.  The node count is
doubled until every coefficient is stable to a relative tolerance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigError, ConvergenceError

__all__ = [
    "SpectralDensity",
    "ThermalizedDensity",
    "QuadratureConfig",
    "ChainCoefficients",
    "chain_coefficients",
]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class SpectralDensity:
    """Power-law coupling density with exponential cutoff (zero temperature).

    ``J(w) = 2 * alpha * omega_c**(1 - s) * w**s * exp(-w / omega_c)`` for
    ``w >= 0``.  ``s = 1`` is Ohmic, ``s < 1`` sub-Ohmic, ``s > 1``
    super-Ohmic.
    """

    alpha: float
    s: float
    omega_c: float

    def __post_init__(self) -> None:
        if not (self.alpha > 0 and self.s > 0 and self.omega_c > 0):
            raise ConfigError(
                f"spectral density requires alpha, s, omega_c > 0; got "
                f"alpha={self.alpha}, s={self.s}, omega_c={self.omega_c}"
            )

    def __call__(self, omega: Union[float, NDArray]) -> Union[float, NDArray]:
        w = np.asarray(omega, dtype=float)
        if np.any(w < 0):
            raise ValueError("density is defined for omega >= 0")
        out = 2.0 * self.alpha * self.omega_c ** (1.0 - self.s) * w**self.s * np.exp(
            -w / self.omega_c
        )
        return float(out) if np.isscalar(omega) else out

    def total_weight(self) -> float:
        """Zeroth moment of the density: ``2 alpha omega_c^2 Gamma(1+s)``."""
        return 2.0 * self.alpha * self.omega_c**2 * math.gamma(1.0 + self.s)

    def support(self, factor: float = 40.0) -> tuple[float, float]:
        """Effective integration support ``[0, factor * omega_c]``."""
        return (0.0, factor * self.omega_c)

    def to_dict(self) -> dict:
        return {
            "kind": "power_law_exp_cutoff",
            "alpha": self.alpha,
            "s": self.s,
            "omega_c": self.omega_c,
        }


@dataclass(frozen=True)
class ThermalizedDensity:
    """Temperature-extended density on the symmetric interval.

    ``J_T(w) = sign(w) * J(|w|) / 2 * (1 + coth(w / (2 theta)))`` for
    ``|w| < omega_max``; positive everywhere inside the support and
    satisfying the detailed-balance relation
    ``J_T(-w) = exp(-w/theta) * J_T(w)``.

    A chain built from this density and initialised in its vacuum
    reproduces the reduced dynamics of the zero-temperature-mapped bath at
    temperature ``theta`` (in energy units, k_B = hbar = 1).
    """

    base: SpectralDensity
    theta: float

    def __post_init__(self) -> None:
        if not self.theta > 0:
            raise ConfigError(f"theta must be > 0, got {self.theta}")

    def __call__(self, omega: Union[float, NDArray]) -> Union[float, NDArray]:
        w = np.asarray(omega, dtype=float)
        aw = np.abs(w)
        base = self.base(aw)
        # sign(w)/2 * (1 + coth(w / 2 theta)) == sign(w) / (1 - exp(-w/theta)),
        # written via expm1 so the exponentially small negative-frequency
        # branch does not cancel to roundoff noise.
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = np.sign(w) * base / (-np.expm1(-w / self.theta))
        # w == 0: J ~ |w|^s and 1 + coth ~ 2 theta / w, so the limit is
        # 2 alpha theta omega_c^(1-s) |w|^(s-1): zero for s > 1, finite for
        # s == 1, +inf (integrably) for s < 1.
        if np.any(w == 0):
            b = self.base
            if b.s > 1:
                limit = 0.0
            elif b.s == 1:
                limit = 2.0 * b.alpha * self.theta
            else:
                limit = np.inf
            out = np.where(w == 0, limit, out)
        return float(out) if np.isscalar(omega) else out

    def support(self, factor: float = 40.0) -> tuple[float, float]:
        hi = factor * self.base.omega_c
        return (-hi, hi)

    def to_dict(self) -> dict:
        d = self.base.to_dict()
        d["kind"] = "thermal_extension"
        d["theta"] = self.theta
        return d


Density = Union[SpectralDensity, ThermalizedDensity]


@dataclass(frozen=True)
class QuadratureConfig:
    """Controls for the composite Gauss-Legendre discretisation.

    ``nodes_per_panel = None`` picks a budget of roughly ``50 * L`` nodes
    for zero-temperature densities and ``100 * L`` for thermal ones.
    ``grading_ratio`` sets the geometric grading of panels towards
    omega = 0; ``support_factor`` truncates the exponential tail at
    ``support_factor * omega_c``.  When left ``None`` the truncation
    adapts to the chain length: the Gauss nodes of an L-point rule for an
    exponentially cut-off measure reach out to roughly ``4 L omega_c``,
    and cutting inside that range biases the late coefficients, so the
    default is ``max(40, 4 L + 10 sqrt(L) + 50)``.  Refinement doubles
    the node count per panel until all chain coefficients change by less
    than ``rel_tol``.
    """

    nodes_per_panel: int | None = None
    grading_ratio: float = 3.0
    support_factor: float | None = None
    rel_tol: float = 1e-10
    max_refinements: int = 6

    def __post_init__(self) -> None:
        if self.nodes_per_panel is not None and self.nodes_per_panel < 2:
            raise ConfigError("nodes_per_panel must be >= 2")
        if self.grading_ratio <= 1.0:
            raise ConfigError("grading_ratio must be > 1")
        if self.rel_tol <= 0:
            raise ConfigError("rel_tol must be > 0")


@dataclass(frozen=True)
class ChainCoefficients:
    """Jacobi data of the mapped chain.

    ``omegas[n]`` are the on-site frequencies, ``hops[n]`` the
    nearest-neighbour hopping amplitudes (length ``L - 1``) and ``g`` the
    system coupling to chain site 0, ``g = sqrt(mu0 / pi)`` with ``mu0``
    the zeroth moment of the density.
    """

    omegas: NDArray[np.float64]
    hops: NDArray[np.float64]
    g: float
    total_weight: float
    density: dict = field(default_factory=dict)
    quadrature: dict = field(default_factory=dict)

    @property
    def length(self) -> int:
        return len(self.omegas)

    def to_json(self) -> str:
        return json.dumps(
            {
                "schema_version": SCHEMA_VERSION,
                "L": self.length,
                "g": self.g,
                "omegas": [float(x) for x in self.omegas],
                "hops": [float(x) for x in self.hops],
                "density": self.density,
                "quadrature": self.quadrature,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "ChainCoefficients":
        data = json.loads(text)
        try:
            omegas = np.asarray(data["omegas"], dtype=float)
            hops = np.asarray(data["hops"], dtype=float)
            g = float(data["g"])
            length = int(data["L"])
        except KeyError as exc:
            raise ConfigError(f"chain coefficient file missing key: {exc}") from exc
        if len(omegas) != length or len(hops) != length - 1:
            raise ConfigError(
                f"inconsistent chain coefficient file: L={length}, "
                f"len(omegas)={len(omegas)}, len(hops)={len(hops)}"
            )
        quad = data.get("quadrature", {})
        mu0 = float(quad.get("total_weight", math.pi * g**2))
        return cls(
            omegas=omegas,
            hops=hops,
            g=g,
            total_weight=mu0,
            density=data.get("density", {}),
            quadrature=quad,
        )


@lru_cache(maxsize=32)
def _leggauss(n: int) -> tuple[NDArray, NDArray]:
    return np.polynomial.legendre.leggauss(n)


def _support_factor(config: QuadratureConfig, length: int) -> float:
    if config.support_factor is not None:
        return config.support_factor
    return max(40.0, 4.0 * length + 10.0 * math.sqrt(length) + 50.0)


def _panel_edges(
    density: Density, config: QuadratureConfig, length: int
) -> NDArray[np.float64]:
    """Panel boundaries, graded geometrically towards omega = 0.

    The grading depth is chosen so the mass of the innermost panel
    ``[0, eps]`` is negligible relative to the total: the density behaves
    as ``w**p`` near zero with ``p = s`` (zero temperature) or ``p = s - 1``
    (thermal), so the mass below ``eps`` scales as ``eps**(p+1)``.
    """
    if isinstance(density, ThermalizedDensity):
        base, thermal = density.base, True
    else:
        base, thermal = density, False
    wc = base.omega_c
    p_plus_1 = base.s if thermal else base.s + 1.0
    ratio = config.grading_ratio
    depth = int(math.ceil(16.0 / (p_plus_1 * math.log10(ratio)))) + 1
    depth = min(depth, 400)
    inner = wc * ratio ** (-np.arange(depth, -1, -1, dtype=float))
    hi = _support_factor(config, length) * wc
    n_outer = max(1, int(math.ceil(math.log(hi / wc) / math.log(1.25))))
    outer = wc * (hi / wc) ** (np.arange(1, n_outer + 1) / n_outer)
    pos = np.concatenate(([0.0], inner, outer))
    if not thermal:
        return pos
    return np.concatenate((-pos[::-1], pos[1:]))


def _discretize(
    density: Density, edges: NDArray, nodes_per_panel: int
) -> tuple[NDArray, NDArray]:
    """Composite Gauss-Legendre nodes and density-weighted weights."""
    x0, w0 = _leggauss(nodes_per_panel)
    a = edges[:-1][:, None]
    b = edges[1:][:, None]
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    nodes = (mid + half * x0[None, :]).ravel()
    weights = (half * w0[None, :]).ravel() * density(nodes)
    return nodes, weights


def _lanczos_jacobi(
    nodes: NDArray, weights: NDArray, n: int
) -> tuple[NDArray, NDArray, float]:
    """Jacobi coefficients of the discrete measure sum_i weights_i delta(x - nodes_i).

    Lanczos iteration on ``diag(nodes)`` started from ``sqrt(weights)``,
    with full reorthogonalisation for stability at large ``n``.  Returns
    (diagonal, off-diagonal, zeroth moment); the off-diagonal entries are
    the square roots of the monic recurrence's beta coefficients.
    """
    if n > nodes.size:
        raise ConvergenceError(
            f"need at least {n} quadrature nodes for {n} chain sites, have {nodes.size}"
        )
    mu0 = float(weights.sum())
    if not mu0 > 0:
        raise ConvergenceError("discretised measure has non-positive total weight")
    v = np.sqrt(weights / mu0)
    basis = np.empty((n, nodes.size))
    basis[0] = v
    alphas = np.empty(n)
    offdiag = np.empty(max(n - 1, 0))
    for k in range(n):
        u = nodes * basis[k]
        alphas[k] = float(basis[k] @ u)
        if k == n - 1:
            break
        u -= alphas[k] * basis[k]
        if k > 0:
            u -= offdiag[k - 1] * basis[k - 1]
        # Full reorthogonalisation, twice for good measure.
        for _ in range(2):
            u -= basis[: k + 1].T @ (basis[: k + 1] @ u)
        b = float(np.linalg.norm(u))
        if b <= 0:
            raise ConvergenceError(
                f"Lanczos breakdown at chain site {k + 1}: measure supports "
                f"only {k + 1} orthogonal polynomials"
            )
        offdiag[k] = b
        basis[k + 1] = u / b
    return alphas, offdiag, mu0


def chain_coefficients(
    density: Density, length: int, config: QuadratureConfig | None = None
) -> ChainCoefficients:
    """Map a coupling density onto ``length`` chain sites.

    Discretises the measure, runs the Stieltjes/Lanczos recurrence and
    refines the quadrature (doubling nodes per panel) until every
    frequency, hopping and the system coupling are stable to
    ``config.rel_tol`` in relative terms.  Raises
    :class:`ConvergenceError` with the best achieved change if the
    refinement budget is exhausted.
    """
    if length < 1:
        raise ConfigError(f"chain length must be >= 1, got {length}")
    config = config or QuadratureConfig()
    edges = _panel_edges(density, config, length)
    n_panels = len(edges) - 1
    if config.nodes_per_panel is not None:
        npp = config.nodes_per_panel
    else:
        budget = (100 if isinstance(density, ThermalizedDensity) else 50) * length
        npp = max(16, int(math.ceil(budget / n_panels)))

    prev: tuple[NDArray, NDArray, float] | None = None
    rel_change = math.inf
    for refinement in range(config.max_refinements + 1):
        nodes, weights = _discretize(density, edges, npp)
        alphas, offdiag, mu0 = _lanczos_jacobi(nodes, weights, length)
        if prev is not None:
            pa, po, pm = prev
            scale = max(float(np.max(np.abs(alphas))), 1e-300)
            num = max(
                float(np.max(np.abs(alphas - pa))),
                float(np.max(np.abs(offdiag - po))) if offdiag.size else 0.0,
                abs(mu0 - pm),
            )
            rel_change = num / scale
            if rel_change < config.rel_tol:
                return ChainCoefficients(
                    omegas=alphas,
                    hops=offdiag,
                    g=math.sqrt(mu0 / math.pi),
                    total_weight=mu0,
                    density=density.to_dict(),
                    quadrature={
                        "nodes": int(nodes.size),
                        "nodes_per_panel": npp,
                        "panels": n_panels,
                        "support_factor": _support_factor(config, length),
                        "refinements": refinement,
                        "rel_change": rel_change,
                        "converged": True,
                        "total_weight": mu0,
                    },
                )
        prev = (alphas, offdiag, mu0)
        npp *= 2
    raise ConvergenceError(
        f"chain coefficients not converged after {config.max_refinements} "
        f"refinements (last relative change {rel_change:.3e}, tol {config.rel_tol:.1e})",
        achieved=rel_change,
    )
