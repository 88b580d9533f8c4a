"""Postselected chain states and conditional observables.

Projecting the two-level system onto |+x⟩ (or |−x⟩) and renormalizing gives
the pure conditional chain state; the squared norm of the unnormalized
projection is the postselection probability.  The conditional state is kept
as an MPS over chain sites only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import NullBranchError
from .mps import Mpo, Mps, expectation, overlap
from .operators import MINUS_X, PLUS_X, annihilation, creation, number_op

_NULL_TOL = 1e-12


@dataclass(frozen=True)
class ConditionalBathState:
    """Normalized chain-only MPS plus the probability of its branch."""

    state: Mps
    probability: float


def _project_qubit(joint: Mps, qubit_bra: NDArray) -> ConditionalBathState:
    if joint.tensors[0].shape[1] != len(qubit_bra):
        raise ValueError("site 0 dimension does not match the projector")
    head = np.tensordot(np.conj(qubit_bra), joint.tensors[0][0], axes=(0, 0))  # (r,)
    tensors = [t.copy() for t in joint.tensors[1:]]
    tensors[0] = np.tensordot(head, tensors[0], axes=(0, 0))[None, :, :]
    projected = Mps(tensors, ortho_center=None)
    probability = overlap(projected, projected).real
    if probability < _NULL_TOL:
        raise NullBranchError(
            f"postselection probability {probability:.3e} below {_NULL_TOL:.0e}"
        )
    probability = min(max(probability, 0.0), 1.0)
    normalized = Mps(
        [tensors[0] / np.sqrt(probability)] + tensors[1:], ortho_center=None
    )
    return ConditionalBathState(state=normalized, probability=probability)


def postselect_plus_x(joint: Mps) -> ConditionalBathState:
    """Chain state conditioned on a +x qubit readout."""
    return _project_qubit(joint, PLUS_X)


def postselect_minus_x(joint: Mps) -> ConditionalBathState:
    return _project_qubit(joint, MINUS_X)


def mode_number_mpo(f: NDArray, dims: Sequence[int], head_dim: int | None = None) -> Mpo:
    """MPO for the collective-mode number operator c_f† c_f,
    c_f = Σ_k f_k c_k, over a chain with local dimensions ``dims``.

    With ``head_dim`` set, an identity site of that dimension is prepended so
    the operator can act on the joint system-chain state directly.
    """
    f = np.asarray(f, dtype=complex)
    if len(f) != len(dims):
        raise ValueError("orbital length does not match chain length")
    length = len(dims)
    tensors = []
    if head_dim is not None:
        w = np.zeros((1, 4, head_dim, head_dim), dtype=complex)
        w[0, 0] = np.eye(head_dim)
        tensors.append(w)
    for k in range(length):
        d = dims[k]
        a, adag, num = annihilation(d), creation(d), number_op(d)
        first = k == 0 and head_dim is None
        last = k == length - 1
        w = np.zeros((1 if first else 4, 1 if last else 4, d, d), dtype=complex)
        row = 0  # "nothing emitted yet" channel
        if last:
            w[row, 0] = np.abs(f[k]) ** 2 * num
            if not first:
                w[1, 0] = f[k] * a
                w[2, 0] = np.conj(f[k]) * adag
                w[3, 0] = np.eye(d)
        else:
            w[row, 0] = np.eye(d)
            w[row, 3] = np.abs(f[k]) ** 2 * num
            w[row, 1] = np.conj(f[k]) * adag
            w[row, 2] = f[k] * a
            if not first:
                w[1, 1] = np.eye(d)  # keep long-range channels open
                w[2, 2] = np.eye(d)
                w[1, 3] = f[k] * a
                w[2, 3] = np.conj(f[k]) * adag
                w[3, 3] = np.eye(d)
        tensors.append(w)
    return Mpo(tensors)


def mode_occupation(state: Mps, f: NDArray, joint: bool = False) -> float:
    """⟨c_f† c_f⟩ = Σ_{jk} f_j* f_k ⟨c_j† c_k⟩ on a chain-only state, or on
    a joint state when ``joint`` is set (site 0 skipped)."""
    dims = state.phys_dims[1:] if joint else state.phys_dims
    head = state.phys_dims[0] if joint else None
    mpo = mode_number_mpo(f, dims, head_dim=head)
    value = expectation(state, mpo).real
    return float(value)


def conditional_mode_occupation(cond: ConditionalBathState, f: NDArray) -> float:
    """Collective-mode occupation of the postselected chain state."""
    return mode_occupation(cond.state, f, joint=False)
