"""Matrix-product-state and matrix-product-operator primitives.

Conventions used throughout the package:

* site tensors are rank-3 ``A[left, phys, right]``; boundary bonds have
  dimension 1,
* MPO tensors are rank-4 ``W[left, right, out, in]``,
* site 0 carries the two-level system, sites ``1..L`` the mapped chain.

All operations either return new objects or mutate only the instance they
were handed; nothing here keeps global state.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Mapping, Optional, Sequence, Union

import numpy as np
from numpy.typing import NDArray

from .operators import annihilation, creation, number_op

_CHECKPOINT_MAGIC = b"CHAINMPS"
_CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class TruncationPolicy:
    """Bond truncation rule: cap the bond dimension and budget the discarded
    weight (sum of squared singular values dropped at a bond, normalized by
    the total at that bond)."""

    max_bond: Optional[int] = 100
    sv_cutoff: float = 1e-8

    def __post_init__(self) -> None:
        if self.max_bond is not None and self.max_bond < 1:
            raise ValueError(f"max_bond must be >= 1, got {self.max_bond}")
        if not 0.0 <= self.sv_cutoff < 1.0:
            raise ValueError(f"sv_cutoff must be in [0, 1), got {self.sv_cutoff}")


class Mps:
    """Matrix product state over an open chain."""

    __slots__ = ("tensors", "ortho_center")

    def __init__(self, tensors: Sequence[NDArray], ortho_center: Optional[int] = None):
        tensors = [np.asarray(t, dtype=complex) for t in tensors]
        if not tensors:
            raise ValueError("MPS needs at least one site")
        if tensors[0].shape[0] != 1 or tensors[-1].shape[2] != 1:
            raise ValueError("boundary bonds must have dimension 1")
        for k in range(len(tensors) - 1):
            if tensors[k].shape[2] != tensors[k + 1].shape[0]:
                raise ValueError(f"bond mismatch between sites {k} and {k + 1}")
        self.tensors = tensors
        self.ortho_center = ortho_center

    def __len__(self) -> int:
        return len(self.tensors)

    @property
    def phys_dims(self) -> list[int]:
        return [t.shape[1] for t in self.tensors]

    @property
    def bond_dims(self) -> list[int]:
        return [t.shape[0] for t in self.tensors] + [self.tensors[-1].shape[2]]

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims)

    def copy(self) -> "Mps":
        return Mps([t.copy() for t in self.tensors], self.ortho_center)

    def norm(self) -> float:
        if self.ortho_center is not None:
            return float(np.linalg.norm(self.tensors[self.ortho_center]))
        return float(np.sqrt(abs(overlap(self, self))))

    def normalize(self) -> "Mps":
        """Scale to unit norm in place (at the center when one is tracked)."""
        n = self.norm()
        if n == 0.0:
            raise ZeroDivisionError("cannot normalize a zero state")
        if self.ortho_center is not None:
            self.tensors[self.ortho_center] = self.tensors[self.ortho_center] / n
        else:
            self.tensors[0] = self.tensors[0] / n
        return self

    def to_dense(self) -> NDArray:
        """Contract to a full state vector. Exponential in L; tests only."""
        psi = self.tensors[0]
        for t in self.tensors[1:]:
            psi = np.tensordot(psi, t, axes=(psi.ndim - 1, 0))
        return psi.reshape(-1)


class Mpo:
    """Matrix product operator with tensors ``W[left, right, out, in]``."""

    __slots__ = ("tensors",)

    def __init__(self, tensors: Sequence[NDArray]):
        tensors = [np.asarray(t, dtype=complex) for t in tensors]
        if tensors[0].shape[0] != 1 or tensors[-1].shape[1] != 1:
            raise ValueError("boundary MPO bonds must have dimension 1")
        for k in range(len(tensors) - 1):
            if tensors[k].shape[1] != tensors[k + 1].shape[0]:
                raise ValueError(f"MPO bond mismatch between sites {k} and {k + 1}")
        self.tensors = tensors

    def __len__(self) -> int:
        return len(self.tensors)

    @property
    def phys_dims(self) -> list[int]:
        return [t.shape[2] for t in self.tensors]

    def to_dense(self) -> NDArray:
        """Dense matrix of the represented operator. Tests only."""
        op = self.tensors[0]  # (1, w, s', s)
        for t in self.tensors[1:]:
            # op[1, w, S', S], t[w, w2, s', s] -> (1, w2, S', s', S, s)
            op = np.tensordot(op, t, axes=(1, 0)).transpose(0, 3, 1, 4, 2, 5)
            d_out = op.shape[2] * op.shape[3]
            d_in = op.shape[4] * op.shape[5]
            op = op.reshape(op.shape[0], op.shape[1], d_out, d_in)
        return op[0, 0]


def product_state(local_states: Iterable[NDArray]) -> Mps:
    """Bond-dimension-1 MPS from one normalized vector per site."""
    tensors = []
    for k, vec in enumerate(local_states):
        v = np.asarray(vec, dtype=complex).reshape(-1)
        nrm = np.linalg.norm(v)
        if abs(nrm - 1.0) > 1e-8:
            raise ValueError(f"site {k} vector is not normalized (|v| = {nrm})")
        tensors.append(v.reshape(1, -1, 1))
    state = Mps(tensors, ortho_center=0)
    return state


def canonicalize(state: Mps, center: int) -> Mps:
    """Return a copy in mixed-canonical form around ``center``.

    Left of the center every tensor is a left isometry, right of it a right
    isometry; the represented state is unchanged.
    """
    n = len(state)
    if not 0 <= center < n:
        raise ValueError(f"center {center} out of range for {n} sites")
    tensors = [t.copy() for t in state.tensors]
    for k in range(center):
        dl, d, dr = tensors[k].shape
        q, r = np.linalg.qr(tensors[k].reshape(dl * d, dr))
        tensors[k] = q.reshape(dl, d, -1)
        tensors[k + 1] = np.tensordot(r, tensors[k + 1], axes=(1, 0))
    for k in range(n - 1, center, -1):
        dl, d, dr = tensors[k].shape
        q, r = np.linalg.qr(tensors[k].reshape(dl, d * dr).conj().T)
        tensors[k] = q.conj().T.reshape(-1, d, dr)
        tensors[k - 1] = np.tensordot(tensors[k - 1], r.conj().T, axes=(2, 0))
    return Mps(tensors, ortho_center=center)


def split_rank(singular_values: NDArray, policy: TruncationPolicy) -> tuple[int, float]:
    """Number of singular values to keep under ``policy`` and the discarded
    weight (normalized). Exact zeros are always dropped."""
    s2 = np.abs(singular_values) ** 2
    total = float(np.sum(s2))
    if total == 0.0:
        return 1, 0.0
    rank = max(int(np.count_nonzero(singular_values > 0.0)), 1)
    if policy.sv_cutoff > 0.0:
        tail = np.concatenate((np.cumsum(s2[::-1])[::-1], [0.0]))
        allowed = np.nonzero(tail <= policy.sv_cutoff * total)[0]
        rank = min(rank, max(int(allowed[0]), 1))
    if policy.max_bond is not None:
        rank = min(rank, policy.max_bond)
    discarded = float(np.sum(s2[rank:]) / total)
    return rank, discarded


def truncate(state: Mps, policy: TruncationPolicy) -> tuple[Mps, float]:
    """Sweep-truncate every bond; returns the unit-normalized result and the
    accumulated discarded weight."""
    work = canonicalize(state, 0)
    tensors = work.tensors
    discarded_total = 0.0
    for k in range(len(tensors) - 1):
        dl, d, dr = tensors[k].shape
        u, s, vh = np.linalg.svd(tensors[k].reshape(dl * d, dr), full_matrices=False)
        rank, discarded = split_rank(s, policy)
        discarded_total += discarded
        tensors[k] = u[:, :rank].reshape(dl, d, rank)
        carry = s[:rank, None] * vh[:rank]
        tensors[k + 1] = np.tensordot(carry, tensors[k + 1], axes=(1, 0))
    out = Mps(tensors, ortho_center=len(tensors) - 1)
    out.normalize()
    return out, discarded_total


def overlap(bra: Mps, ket: Mps) -> complex:
    """⟨bra|ket⟩."""
    if bra.phys_dims != ket.phys_dims:
        raise ValueError("physical dimensions differ")
    env = np.ones((1, 1), dtype=complex)
    for a, b in zip(bra.tensors, ket.tensors):
        t = np.tensordot(env, b, axes=(1, 0))  # (l_bra, s, r_ket)
        env = np.tensordot(a.conj(), t, axes=([0, 1], [0, 1]))  # (r_bra, r_ket)
    return complex(env[0, 0])


def _apply_local(tensor: NDArray, op: NDArray) -> NDArray:
    if op.shape != (tensor.shape[1], tensor.shape[1]):
        raise ValueError(
            f"operator shape {op.shape} does not match physical dimension {tensor.shape[1]}"
        )
    return np.tensordot(op, tensor, axes=(1, 1)).transpose(1, 0, 2)


def expectation(state: Mps, op: Union[Mpo, Mapping[int, NDArray]]) -> complex:
    """⟨ψ|O|ψ⟩ for an MPO or a {site: matrix} set of local operators."""
    if isinstance(op, Mpo):
        return _mpo_expectation(state, op)
    env = np.ones((1, 1), dtype=complex)
    for k, a in enumerate(state.tensors):
        b = _apply_local(a, np.asarray(op[k], dtype=complex)) if k in op else a
        t = np.tensordot(env, b, axes=(1, 0))
        env = np.tensordot(a.conj(), t, axes=([0, 1], [0, 1]))
    return complex(env[0, 0])


def _mpo_expectation(state: Mps, op: Mpo) -> complex:
    if len(op) != len(state):
        raise ValueError("MPO length does not match MPS length")
    env = np.ones((1, 1, 1), dtype=complex)  # (bra, mpo, ket)
    for a, w in zip(state.tensors, op.tensors):
        t = np.tensordot(env, a, axes=(2, 0))  # (bra, mpo, s_in, r_ket)
        t = np.tensordot(t, w, axes=([1, 2], [0, 3]))  # (bra, r_ket, w_r, s_out)
        # tensordot leaves (r_bra, r_ket, w_r); reorder to (bra, mpo, ket)
        env = np.tensordot(a.conj(), t, axes=([0, 1], [0, 3])).transpose(0, 2, 1)
    return complex(env[0, 0, 0])


def apply_site_operators(state: Mps, ops: Mapping[int, NDArray]) -> Mps:
    """Apply one matrix per listed site; no truncation, norm may change."""
    tensors = []
    for k, t in enumerate(state.tensors):
        if k in ops:
            tensors.append(_apply_local(t, np.asarray(ops[k], dtype=complex)))
        else:
            tensors.append(t.copy())
    return Mps(tensors, ortho_center=None)


def site_level_populations(state: Mps, site: int) -> NDArray:
    """Diagonal of the reduced density matrix at one site, normalized."""
    work = canonicalize(state, site)
    a = work.tensors[site]
    pops = np.einsum("lsr,lsr->s", a, a.conj()).real
    total = pops.sum()
    if total <= 0.0:
        raise ZeroDivisionError("state has zero norm")
    return pops / total


def one_body_matrix(state: Mps, first_site: int = 1) -> NDArray:
    """Chain one-body matrix M[j, k] = ⟨c_j† c_k⟩ over sites ≥ ``first_site``.

    Cost is O(L² D³ d): one charged left-to-right pass per row against
    precomputed right environments on the left-canonical gauge.
    """
    n = len(state)
    work = canonicalize(state, n - 1)
    tensors = work.tensors
    sites = list(range(first_site, n))
    m = len(sites)

    right = [None] * (n + 1)
    right[n] = np.ones((1, 1), dtype=complex)
    for k in range(n - 1, first_site - 1, -1):
        t = np.tensordot(tensors[k], right[k + 1], axes=(2, 0))  # (l_ket, s, l_bra')
        right[k] = np.tensordot(t, tensors[k].conj(), axes=([1, 2], [1, 2]))

    mat = np.zeros((m, m), dtype=complex)
    for a, j in enumerate(sites):
        d_j = tensors[j].shape[1]
        # diagonal: single number-operator transfer closed on the right
        occ_t = np.tensordot(_apply_local(tensors[j], number_op(d_j)), right[j + 1], axes=(2, 0))
        mat[a, a] = np.tensordot(occ_t, tensors[j].conj(), axes=([0, 1, 2], [0, 1, 2]))
        # off-diagonal: creation at j, identity transfers, annihilation at k
        charged = _apply_local(tensors[j], creation(d_j))
        env = np.tensordot(charged, tensors[j].conj(), axes=([0, 1], [0, 1]))  # (r_ket, r_bra)
        for b in range(a + 1, m):
            k = sites[b]
            d_k = tensors[k].shape[1]
            ann_t = np.tensordot(env, _apply_local(tensors[k], annihilation(d_k)), axes=(0, 0))
            ann_t = np.tensordot(ann_t, right[k + 1], axes=(2, 0))  # (l_bra, s, l_bra')
            mat[a, b] = np.tensordot(ann_t, tensors[k].conj(), axes=([0, 1, 2], [0, 1, 2]))
            if b < m - 1:
                t = np.tensordot(env, tensors[k], axes=(0, 0))  # (l_bra, s, r_ket)
                env = np.tensordot(t, tensors[k].conj(), axes=([0, 1], [0, 1]))
    mat = mat + np.triu(mat, 1).conj().T
    return mat


def mps_from_dense(
    psi: NDArray,
    phys_dims: Sequence[int],
    policy: Optional[TruncationPolicy] = None,
) -> Mps:
    """Exact (or policy-truncated) MPS factorization of a dense state vector."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    expected = int(np.prod(phys_dims))
    if psi.size != expected:
        raise ValueError(f"vector length {psi.size} != product of dims {expected}")
    if policy is None:
        policy = TruncationPolicy(max_bond=None, sv_cutoff=0.0)
    tensors = []
    rest = psi.reshape(1, -1)
    for d in phys_dims[:-1]:
        dl = rest.shape[0]
        u, s, vh = np.linalg.svd(rest.reshape(dl * d, -1), full_matrices=False)
        rank, _ = split_rank(s, policy)
        tensors.append(u[:, :rank].reshape(dl, d, rank))
        rest = s[:rank, None] * vh[:rank]
    tensors.append(rest.reshape(rest.shape[0], phys_dims[-1], 1))
    return Mps(tensors, ortho_center=len(phys_dims) - 1)


def save_mps(state: Mps, file: Union[str, BinaryIO]) -> None:
    """Binary checkpoint.

    Layout (little endian): 8-byte magic ``CHAINMPS``; uint32 version;
    uint32 L; int32 ortho_center (-1 for none); L × uint32 physical dims;
    (L+1) × uint32 bond dims; then per site the row-major complex128 tensor.
    """
    if isinstance(file, str):
        with open(file, "wb") as fh:
            save_mps(state, fh)
        return
    n = len(state)
    file.write(_CHECKPOINT_MAGIC)
    center = -1 if state.ortho_center is None else state.ortho_center
    file.write(struct.pack("<IIi", _CHECKPOINT_VERSION, n, center))
    file.write(np.asarray(state.phys_dims, dtype="<u4").tobytes())
    file.write(np.asarray(state.bond_dims, dtype="<u4").tobytes())
    for t in state.tensors:
        file.write(np.ascontiguousarray(t, dtype="<c16").tobytes())


def load_mps(file: Union[str, BinaryIO]) -> Mps:
    if isinstance(file, str):
        with open(file, "rb") as fh:
            return load_mps(fh)
    magic = file.read(8)
    if magic != _CHECKPOINT_MAGIC:
        raise ValueError("not an MPS checkpoint file")
    version, n, center = struct.unpack("<IIi", file.read(12))
    if version != _CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    phys = np.frombuffer(file.read(4 * n), dtype="<u4").astype(int)
    bonds = np.frombuffer(file.read(4 * (n + 1)), dtype="<u4").astype(int)
    tensors = []
    for k in range(n):
        count = bonds[k] * phys[k] * bonds[k + 1]
        raw = np.frombuffer(file.read(16 * count), dtype="<c16")
        tensors.append(raw.reshape(bonds[k], phys[k], bonds[k + 1]).astype(complex))
    return Mps(tensors, ortho_center=None if center < 0 else center)
