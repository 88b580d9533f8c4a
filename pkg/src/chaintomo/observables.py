"""Qubit metrics, chain occupations, and the leading collective-mode orbital.

The reduced two-level state is parameterized by its Bloch vector r; purity
and entropy follow from |r| alone:

    purity  = (1 + |r|^2) / 2
    entropy = -sum_pm p_pm ln p_pm,   p_pm = (1 pm |r|) / 2   [nats]

The leading natural orbital is the top eigenvector of the chain one-body
matrix ⟨c_j† c_k⟩, tracked continuously in time by phase alignment against
the previous orbital.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import DegenerateOrbitalError
from .mps import Mps, canonicalize
from .operators import SIGMA_X, SIGMA_Y, SIGMA_Z, number_op
from .spectral import ChainCoefficients

_TIE_TOL = 1e-12


@dataclass(frozen=True)
class QubitMetrics:
    bloch: NDArray
    coherence: float
    purity: float
    entropy: float


@dataclass(frozen=True)
class NaturalOrbital:
    """Unit-norm collective mode f with its occupation diagnostics.

    ``leading_fraction`` is the occupation fraction carried by this mode
    (eigenvalue over one-body trace); it is reported as 0 for the empty-chain
    substitute orbital.  ``participation_width`` is the inverse participation
    ratio 1/Σ|f_k|⁴ in units of sites.
    """

    f: NDArray
    eigenvalue: float
    leading_fraction: float
    participation_width: float


def reduced_qubit_density(state: Mps) -> NDArray:
    """Partial trace over all chain sites; 2×2 density matrix of site 0."""
    work = canonicalize(state, 0)
    a = work.tensors[0][0]  # (phys, right)
    rho = a @ a.conj().T
    return rho / np.trace(rho).real


def qubit_metrics(state: Mps) -> QubitMetrics:
    rho = reduced_qubit_density(state)
    r = np.array(
        [
            np.trace(rho @ SIGMA_X).real,
            np.trace(rho @ SIGMA_Y).real,
            np.trace(rho @ SIGMA_Z).real,
        ]
    )
    r_len = float(np.linalg.norm(r))
    purity = (1.0 + r_len**2) / 2.0
    entropy = 0.0
    for p in ((1.0 + r_len) / 2.0, (1.0 - r_len) / 2.0):
        if p > 0.0:
            entropy -= p * np.log(p)
    return QubitMetrics(
        bloch=r, coherence=float(r[0]), purity=float(purity), entropy=float(entropy)
    )


def chain_occupations(state: Mps, first_site: int = 1) -> NDArray:
    """⟨c_k† c_k⟩ for every chain site, one O(D³) pass."""
    n = len(state)
    work = canonicalize(state, n - 1)
    tensors = work.tensors
    right = np.ones((1, 1), dtype=complex)
    rights = [None] * (n + 1)
    rights[n] = right
    for k in range(n - 1, first_site - 1, -1):
        t = np.tensordot(tensors[k], rights[k + 1], axes=(2, 0))
        rights[k] = np.tensordot(t, tensors[k].conj(), axes=([1, 2], [1, 2]))
    occ = np.empty(n - first_site)
    for k in range(first_site, n):
        a = tensors[k]
        weighted = a * np.arange(a.shape[1])[None, :, None]
        t = np.tensordot(weighted, rights[k + 1], axes=(2, 0))
        occ[k - first_site] = np.tensordot(
            t, a.conj(), axes=([0, 1, 2], [0, 1, 2])
        ).real
    return occ


def occupation_front(occupations: NDArray, threshold: float = 1e-3) -> int:
    """Index of the farthest chain site whose occupation exceeds the
    threshold, or -1 when none does."""
    above = np.nonzero(np.asarray(occupations) > threshold)[0]
    return int(above[-1]) if len(above) else -1


def hopping_guide_velocity(coeffs: ChainCoefficients) -> float:
    """Light-cone guide speed 2·max|t_n| of the chain in site units."""
    if coeffs.length < 2:
        raise ValueError("guide velocity needs at least two chain sites")
    return 2.0 * float(np.max(np.abs(coeffs.hops)))


def leading_natural_orbital(
    one_body: NDArray, previous: NaturalOrbital | None = None
) -> NaturalOrbital:
    """Top eigenpair of the (symmetrized) one-body matrix with deterministic
    tie-breaking and phase continuity.

    Raises :class:`DegenerateOrbitalError` for an (effectively) zero matrix;
    callers handle t=0 by substituting the head-site unit vector.
    """
    m = np.asarray(one_body, dtype=complex)
    m = (m + m.conj().T) / 2.0
    trace = float(np.trace(m).real)
    if trace < 1e-14:
        raise DegenerateOrbitalError(
            "one-body matrix has (near) zero trace; orbital undefined"
        )
    evals, evecs = np.linalg.eigh(m)
    top = evals[-1]
    candidates = [k for k in range(len(evals)) if top - evals[k] <= _TIE_TOL]
    if len(candidates) > 1 and previous is not None:
        overlaps = [abs(np.vdot(previous.f, evecs[:, k])) for k in candidates]
        choice = candidates[int(np.argmax(overlaps))]
    else:
        if len(candidates) > 1:
            # no history: lowest site index of the largest-magnitude component
            candidates.sort(key=lambda k: (int(np.argmax(np.abs(evecs[:, k]))), k))
        choice = candidates[0]
    f = evecs[:, choice].copy()

    phase_ref = None
    if previous is not None:
        ov = np.vdot(previous.f, f)
        if abs(ov) > 1e-12:
            phase_ref = ov
    if phase_ref is None:
        phase_ref = f[int(np.argmax(np.abs(f)))]
    f = f * (phase_ref.conj() / abs(phase_ref))

    eigenvalue = float(evals[choice].real)
    return NaturalOrbital(
        f=f,
        eigenvalue=eigenvalue,
        leading_fraction=float(eigenvalue / trace),
        participation_width=float(1.0 / np.sum(np.abs(f) ** 4)),
    )


def initial_orbital(length: int) -> NaturalOrbital:
    """Empty-chain substitute: the mode directly coupled to the qubit."""
    f = np.zeros(length, dtype=complex)
    f[0] = 1.0
    return NaturalOrbital(
        f=f, eigenvalue=0.0, leading_fraction=0.0, participation_width=1.0
    )
