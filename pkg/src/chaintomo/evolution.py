"""Hamiltonian MPO construction and two-site TDVP time evolution.

The joint system is a two-level system at site 0 coupled to the head of a
nearest-neighbor bosonic chain (sites 1..L).  The Hamiltonian is

    H = delta * sigma_x
      + sum_n omega_n c_n^dag c_n
      + sum_n t_n (c_n^dag c_{n+1} + h.c.)
      + g * sigma_z (c_0^dag + c_0)

which fits in an MPO of bond dimension 4.  Evolution is symmetric
second-order two-site TDVP with Lanczos local exponentials: a left-to-right
half-sweep of dt/2 two-site updates interleaved with backward one-site
half-steps, then the mirror right-to-left half-sweep.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import eigh_tridiagonal

from .errors import ConfigError, KrylovError
from .mps import Mpo, Mps, TruncationPolicy, canonicalize, split_rank
from .operators import SIGMA_X, SIGMA_Z, annihilation, creation, number_op
from .spectral import ChainCoefficients

ObservationCallback = Callable[[float, Mps], Optional[Mapping[str, object]]]


@dataclass(frozen=True)
class ChainModel:
    """Two-level splitting plus the mapped-chain coefficients."""

    delta: float
    coeffs: ChainCoefficients


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float = 0.01
    t_max: float = 5.0
    krylov_dim: int = 30
    krylov_tol: float = 1e-12
    trunc: TruncationPolicy = field(default_factory=TruncationPolicy)
    observe_stride: int = 10

    def __post_init__(self) -> None:
        if self.dt <= 0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if self.t_max < self.dt:
            raise ConfigError("t_max must be at least one time step")
        if self.krylov_dim < 2:
            raise ConfigError(f"krylov_dim must be >= 2, got {self.krylov_dim}")
        if self.observe_stride < 1:
            raise ConfigError("observe_stride must be >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_max / self.dt))


def build_mpo(model: ChainModel, fock_dims: Union[int, Sequence[int]]) -> Mpo:
    """Bond-dimension-4 MPO for the qubit-chain Hamiltonian.

    ``fock_dims`` gives the local Fock truncation for each chain site
    (a scalar is broadcast).  Channel layout: 0 = nothing emitted yet,
    1/2 = open raising/lowering bond, 3 = done.
    """
    coeffs = model.coeffs
    length = coeffs.length
    if np.isscalar(fock_dims):
        dims = [int(fock_dims)] * length
    else:
        dims = [int(d) for d in fock_dims]
        if len(dims) != length:
            raise ConfigError(
                f"fock_dims has {len(dims)} entries for a chain of {length} sites"
            )

    g = coeffs.g
    head = np.zeros((1, 4, 2, 2), dtype=complex)
    head[0, 0] = np.eye(2)
    head[0, 1] = g * SIGMA_Z
    head[0, 2] = g * SIGMA_Z
    head[0, 3] = model.delta * SIGMA_X
    tensors = [head]

    for n in range(length):
        d = dims[n]
        a, adag, num = annihilation(d), creation(d), number_op(d)
        if n == length - 1:
            w = np.zeros((4, 1, d, d), dtype=complex)
            w[0, 0] = coeffs.omegas[n] * num
            w[1, 0] = a
            w[2, 0] = adag
            w[3, 0] = np.eye(d)
        else:
            w = np.zeros((4, 4, d, d), dtype=complex)
            w[0, 0] = np.eye(d)
            w[0, 1] = coeffs.hops[n] * adag
            w[0, 2] = coeffs.hops[n] * a
            w[0, 3] = coeffs.omegas[n] * num
            w[1, 3] = a
            w[2, 3] = adag
            w[3, 3] = np.eye(d)
        tensors.append(w)
    return Mpo(tensors)


def lanczos_expm_apply(
    matvec: Callable[[NDArray], NDArray],
    vec: NDArray,
    scale: complex,
    max_dim: int = 30,
    tol: float = 1e-12,
) -> NDArray:
    """``exp(scale * H) @ vec`` for Hermitian H given only ``matvec``.

    Builds a Krylov basis with full reorthogonalization; stops on the
    standard a-posteriori residual estimate or on happy breakdown.  Raises
    :class:`KrylovError` (with the achieved residual) when ``max_dim``
    vectors are not enough.
    """
    shape = vec.shape
    v = np.asarray(vec, dtype=complex).reshape(-1)
    beta0 = np.linalg.norm(v)
    if beta0 == 0.0:
        return vec.copy()
    basis = [v / beta0]
    alphas: list[float] = []
    betas: list[float] = []

    def _solve(k: int) -> tuple[NDArray, float]:
        evals, evecs = eigh_tridiagonal(np.array(alphas[:k]), np.array(betas[: k - 1]))
        y = evecs @ (np.exp(scale * evals) * evecs[0])
        return y, abs(y[-1])

    for j in range(max_dim):
        w = matvec(basis[j].reshape(shape)).reshape(-1)
        alpha = np.vdot(basis[j], w).real
        alphas.append(alpha)
        w = w - alpha * basis[j]
        if j > 0:
            w = w - betas[j - 1] * basis[j - 1]
        # full reorthogonalization; cheap at these subspace sizes
        for b in basis:
            w = w - np.vdot(b, w) * b
        beta = np.linalg.norm(w)
        y, _ = _solve(j + 1)
        residual = beta * abs(y[-1])
        if residual <= tol * beta0 or beta <= 1e-14 * beta0:
            return (beta0 * np.stack(basis, axis=1) @ y).reshape(shape)
        betas.append(float(beta))
        basis.append(w / beta)
    y, _ = _solve(max_dim)
    residual = betas[-1] * abs(y[-1]) if betas else 0.0
    raise KrylovError(
        f"local exponential did not converge within {max_dim} Krylov vectors",
        achieved=float(residual / beta0),
    )


def _transfer_left(env: NDArray, a: NDArray, w: NDArray) -> NDArray:
    t = np.tensordot(env, a, axes=(2, 0))
    t = np.tensordot(t, w, axes=([1, 2], [0, 3]))
    return np.tensordot(a.conj(), t, axes=([0, 1], [0, 3])).transpose(0, 2, 1)


def _transfer_right(env: NDArray, a: NDArray, w: NDArray) -> NDArray:
    t = np.tensordot(a, env, axes=(2, 2))
    t = np.tensordot(w, t, axes=([1, 3], [3, 1]))
    return np.tensordot(t, a.conj(), axes=([1, 3], [1, 2])).transpose(2, 0, 1)


class Tdvp2Engine:
    """Sweeping state for repeated TDVP steps on one (state, MPO) pair.

    Keeps the left/right MPO environments between sweeps so a full time step
    costs two half-sweeps and nothing more.  The engine owns its copy of the
    state; read it via :attr:`state`.
    """

    def __init__(
        self,
        state: Mps,
        mpo: Mpo,
        trunc: Optional[TruncationPolicy] = None,
        krylov_dim: int = 30,
        krylov_tol: float = 1e-12,
    ):
        if len(state) != len(mpo):
            raise ConfigError("state and MPO lengths differ")
        if state.phys_dims != mpo.phys_dims:
            raise ConfigError("state and MPO physical dimensions differ")
        if len(state) < 2:
            raise ConfigError("two-site TDVP needs at least two sites")
        self.state = canonicalize(state, 0)
        self.mpo = mpo
        self.trunc = trunc if trunc is not None else TruncationPolicy()
        self.krylov_dim = krylov_dim
        self.krylov_tol = krylov_tol
        n = len(state)
        self._lp: list[Optional[NDArray]] = [None] * n
        self._rp: list[Optional[NDArray]] = [None] * n
        self._lp[0] = np.ones((1, 1, 1), dtype=complex)
        self._rp[n - 1] = np.ones((1, 1, 1), dtype=complex)
        for k in range(n - 1, 0, -1):
            self._rp[k - 1] = _transfer_right(
                self._rp[k], self.state.tensors[k], self.mpo.tensors[k]
            )

    # -- local effective Hamiltonians -------------------------------------

    def _matvec_two(self, i: int) -> Callable[[NDArray], NDArray]:
        lp, rp = self._lp[i], self._rp[i + 1]
        w1, w2 = self.mpo.tensors[i], self.mpo.tensors[i + 1]

        def matvec(x: NDArray) -> NDArray:
            t = np.tensordot(lp, x, axes=(2, 0))
            t = np.tensordot(t, w1, axes=([1, 2], [0, 3]))
            t = np.tensordot(t, w2, axes=([3, 1], [0, 3]))
            return np.tensordot(t, rp, axes=([3, 1], [1, 2]))

        return matvec

    def _matvec_one(self, i: int) -> Callable[[NDArray], NDArray]:
        lp, rp = self._lp[i], self._rp[i]
        w = self.mpo.tensors[i]

        def matvec(x: NDArray) -> NDArray:
            t = np.tensordot(lp, x, axes=(2, 0))
            t = np.tensordot(t, w, axes=([1, 2], [0, 3]))
            return np.tensordot(t, rp, axes=([2, 1], [1, 2]))

        return matvec

    def _exp(self, matvec, x: NDArray, scale: complex) -> NDArray:
        return lanczos_expm_apply(
            matvec, x, scale, max_dim=self.krylov_dim, tol=self.krylov_tol
        )

    # -- sweeping ----------------------------------------------------------

    def _split(
        self, theta: NDArray, keep_left: bool
    ) -> tuple[NDArray, NDArray, float]:
        dl, d1, d2, dr = theta.shape
        u, s, vh = np.linalg.svd(
            theta.reshape(dl * d1, d2 * dr), full_matrices=False
        )
        rank, discarded = split_rank(s, self.trunc)
        u, s, vh = u[:, :rank], s[:rank], vh[:rank]
        s = s / np.linalg.norm(s)  # keep the state exactly normalized
        if keep_left:
            left = u.reshape(dl, d1, rank)
            right = (s[:, None] * vh).reshape(rank, d2, dr)
        else:
            left = (u * s).reshape(dl, d1, rank)
            right = vh.reshape(rank, d2, dr)
        return left, right, discarded

    def sweep(self, dt: float) -> float:
        """One symmetric second-order step; returns the max discarded weight."""
        tensors = self.state.tensors
        n = len(tensors)
        half = 0.5 * dt
        worst = 0.0

        for i in range(n - 1):
            theta = np.tensordot(tensors[i], tensors[i + 1], axes=(2, 0))
            theta = self._exp(self._matvec_two(i), theta, -1j * half)
            left, center, discarded = self._split(theta, keep_left=True)
            worst = max(worst, discarded)
            tensors[i] = left
            self._lp[i + 1] = _transfer_left(self._lp[i], left, self.mpo.tensors[i])
            if i < n - 2:
                center = self._exp(self._matvec_one(i + 1), center, +1j * half)
            tensors[i + 1] = center

        for i in range(n - 2, -1, -1):
            theta = np.tensordot(tensors[i], tensors[i + 1], axes=(2, 0))
            theta = self._exp(self._matvec_two(i), theta, -1j * half)
            center, right, discarded = self._split(theta, keep_left=False)
            worst = max(worst, discarded)
            tensors[i + 1] = right
            self._rp[i] = _transfer_right(
                self._rp[i + 1], right, self.mpo.tensors[i + 1]
            )
            if i > 0:
                center = self._exp(self._matvec_one(i), center, +1j * half)
            tensors[i] = center

        self.state.ortho_center = 0
        return worst


def tdvp2_sweep(
    state: Mps,
    mpo: Mpo,
    dt: float,
    trunc: Optional[TruncationPolicy] = None,
    krylov_dim: int = 30,
    krylov_tol: float = 1e-12,
) -> tuple[Mps, float]:
    """Single symmetric TDVP step; convenience wrapper around the engine."""
    engine = Tdvp2Engine(state, mpo, trunc, krylov_dim, krylov_tol)
    worst = engine.sweep(dt)
    return engine.state, worst


def evolve(
    state: Mps,
    model: ChainModel,
    config: EvolutionConfig,
    callbacks: Sequence[ObservationCallback] = (),
) -> list[dict]:
    """Evolve to ``t_max``, invoking callbacks every ``observe_stride`` steps.

    Each callback receives ``(time, state)`` and may return a mapping that is
    merged into that time's record.  Record times come from the step index,
    not from accumulated floating-point addition.  With no callbacks the
    state is still evolved but no records are produced (use
    :class:`Tdvp2Engine` directly if only the final state matters).
    """
    mpo = build_mpo(model, state.phys_dims[1:])
    engine = Tdvp2Engine(
        state, mpo, config.trunc, config.krylov_dim, config.krylov_tol
    )
    records: list[dict] = []
    worst_since_record = 0.0

    def observe(step: int) -> None:
        nonlocal worst_since_record
        if not callbacks:
            return
        t = step * config.dt
        record: dict = {"time": t, "max_discarded": worst_since_record}
        for cb in callbacks:
            out = cb(t, engine.state)
            if out:
                record.update(out)
        records.append(record)
        worst_since_record = 0.0

    for step in range(config.n_steps):
        if step % config.observe_stride == 0:
            observe(step)
        worst_since_record = max(worst_since_record, engine.sweep(config.dt))
    observe(config.n_steps)
    return records
