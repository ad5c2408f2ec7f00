"""Extended SSH spin chain: Hamiltonian, low-lying eigenstates and input perturbations."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from md_iqp.errors import ConfigError, ResourceLimitError, SpectrumError
from md_iqp.settings import settings
from md_iqp.simulation.simcore import apply_1q

logger = logging.getLogger(__name__)

PhaseLabel = Literal["trivial", "topological", "symmetry-broken"]
PHASE_LABELS: tuple[PhaseLabel, ...] = ("trivial", "topological", "symmetry-broken")

_PAULI = {
    "x": sp.csr_matrix(np.array([[0, 1], [1, 0]], dtype=np.complex128)),
    "y": sp.csr_matrix(np.array([[0, -1j], [1j, 0]], dtype=np.complex128)),
    "z": sp.csr_matrix(np.array([[1, 0], [0, -1]], dtype=np.complex128)),
}


class SshSpec(BaseModel):
    """Open dimerized chain ``sum_mu gamma_mu (J sum_even + J' sum_odd) s^mu_i s^mu_{i+1}``.

    Bonds ``(0,1), (2,3), ...`` carry ``J`` and bonds ``(1,2), (3,4), ...`` carry
    ``J'``; ``gamma_z = delta`` and ``gamma_x = gamma_y = 1``.
    """

    model_config = ConfigDict(frozen=True)

    n: int = Field(ge=2)
    j: float = 1.0
    j_prime: float = 0.2
    delta: float = 1.0

    @field_validator("n")
    @classmethod
    def _even(cls, v: int) -> int:
        if v % 2:
            raise ValueError(f"SSH chain length must be even, got {v}")
        return v

    def gamma(self, mu: str) -> float:
        return self.delta if mu == "z" else 1.0


class SshPhaseParams(BaseModel):
    """Representative ``(J, J', delta)`` for each phase."""

    trivial: tuple[float, float, float] = (1.0, 0.2, 1.0)
    topological: tuple[float, float, float] = (0.2, 1.0, 1.0)
    symmetry_broken: tuple[float, float, float] = (0.2, 1.0, 4.0)

    def spec(self, label: PhaseLabel, n: int) -> SshSpec:
        j, jp, delta = getattr(self, label.replace("-", "_"))
        return SshSpec(n=n, j=j, j_prime=jp, delta=delta)


def load_phase_params(path: str | Path) -> SshPhaseParams:
    """Read flat ``KEY=value`` phase parameters.

    Keys are ``<PHASE>_J``, ``<PHASE>_JP`` and ``<PHASE>_DELTA`` with ``PHASE`` one of
    ``TRIVIAL``, ``TOPOLOGICAL`` and ``SYMMETRY_BROKEN``.
    Missing keys keep their defaults.
    """
    if not Path(path).is_file():
        raise ConfigError(f"phase parameter file not found: {path}")
    raw = {k.upper(): v for k, v in dotenv_values(path).items() if v is not None}
    defaults = SshPhaseParams()
    values: dict[str, tuple[float, float, float]] = {}
    try:
        for label in PHASE_LABELS:
            key = label.replace("-", "_")
            prefix = key.upper()
            base = getattr(defaults, key)
            values[key] = (
                float(raw.get(f"{prefix}_J", base[0])),
                float(raw.get(f"{prefix}_JP", base[1])),
                float(raw.get(f"{prefix}_DELTA", base[2])),
            )
        return SshPhaseParams(**values)
    except (ValueError, ValidationError) as exc:
        raise ConfigError(f"invalid phase parameters in {path}: {exc}") from exc


def _two_site(n: int, i: int, op: sp.csr_matrix) -> sp.csr_matrix:
    left = sp.identity(2**i, format="csr", dtype=np.complex128)
    right = sp.identity(2 ** (n - i - 2), format="csr", dtype=np.complex128)
    return sp.kron(sp.kron(left, sp.kron(op, op, format="csr"), format="csr"), right, format="csr")


def ssh_hamiltonian(spec: SshSpec) -> sp.csr_matrix:
    """Sparse real-symmetric Hamiltonian; qubit 0 is the most significant tensor factor."""
    n = spec.n
    ham = sp.csr_matrix((2**n, 2**n), dtype=np.complex128)
    for mu, op in _PAULI.items():
        g = spec.gamma(mu)
        for i in range(n - 1):
            coupling = spec.j if i % 2 == 0 else spec.j_prime
            if coupling != 0 and g != 0:
                ham = ham + (g * coupling) * _two_site(n, i, op)
    return ham.real.tocsr()


@dataclass(frozen=True)
class Eigenstates:
    """Lowest eigenpairs; ``vectors`` holds orthonormal eigenvectors as columns."""

    energies: np.ndarray
    vectors: np.ndarray
    degenerate: bool


_DEGENERACY_TOL = 1e-9


def _start_vector(dim: int) -> np.ndarray:
    v0 = np.random.default_rng(dim).normal(size=dim)
    return v0 / np.linalg.norm(v0)


def canonical_basis(energies: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    """Fix the eigenbasis independently of solver start and internal ordering.

    Inside a degenerate cluster the basis is rebuilt from the cluster projector's
    pivoted columns; every vector then gets its largest-magnitude entry positive.
    """
    out = np.array(vectors, dtype=np.float64, copy=True)
    start = 0
    for stop in range(1, energies.size + 1):
        if stop < energies.size and energies[stop] - energies[stop - 1] < _DEGENERACY_TOL:
            continue
        if stop - start > 1:
            block = out[:, start:stop]
            # pivots on block.T depend only on the spanned subspace
            _, _, piv = sla.qr(block.T, mode="economic", pivoting=True)
            rows = np.sort(piv[: stop - start])
            q, _ = np.linalg.qr(block @ block[rows].T)
            out[:, start:stop] = q
        start = stop
    for col in range(out.shape[1]):
        lead = int(np.argmax(np.abs(out[:, col]) - 1e-12 * np.arange(out.shape[0])))
        if out[lead, col] < 0:
            out[:, col] *= -1.0
    return out


def lowest_eigenstates(spec: SshSpec, levels: int = 20, maxiter: int | None = None) -> Eigenstates:
    """Lowest ``levels`` eigenpairs by implicitly restarted Lanczos (dense for tiny chains).

    Raises:
        SpectrumError: If ARPACK does not converge.
    """
    if spec.n > settings.ssh_max_qubits:
        raise ResourceLimitError(f"SSH chain of {spec.n} exceeds the cap {settings.ssh_max_qubits}")
    ham = ssh_hamiltonian(spec)
    dim = ham.shape[0]
    if not 1 <= levels <= dim:
        raise ValueError(f"levels must lie in [1, {dim}], got {levels}")
    if levels >= dim - 1:
        energies, vectors = np.linalg.eigh(ham.toarray())
        energies, vectors = energies[:levels], vectors[:, :levels]
    else:
        try:
            energies, vectors = spla.eigsh(
                ham, k=levels, which="SA", v0=_start_vector(dim), maxiter=maxiter, tol=1e-12
            )
        except spla.ArpackNoConvergence as exc:
            raise SpectrumError(
                f"Lanczos did not converge for {levels} levels of n={spec.n}",
                iterations=maxiter,
                converged=len(exc.eigenvalues),
            ) from exc
        order = np.argsort(energies)
        energies, vectors = energies[order], vectors[:, order]
        vectors, _ = np.linalg.qr(vectors)
    vectors = canonical_basis(energies, vectors)
    degenerate = bool(np.any(np.diff(energies) < _DEGENERACY_TOL))
    if degenerate:
        logger.debug("degenerate levels among the lowest %d of n=%d", levels, spec.n)
    return Eigenstates(energies=energies, vectors=vectors, degenerate=degenerate)


def ssh_eigenstates(
    spec: SshSpec, levels: int = 20, samples: int = 1, seed: int | None = None
) -> np.ndarray:
    """Eigenvectors drawn uniformly among the lowest ``levels``, one per row."""
    eig = lowest_eigenstates(spec, levels)
    rng = np.random.default_rng(seed)
    picks = rng.integers(levels, size=samples)
    return eig.vectors[:, picks].T.astype(np.complex128)


def _rx(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)


def _rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)]).astype(np.complex128)


def perturb(
    state: np.ndarray,
    sigma: float = 0.03,
    seed: int | None = None,
    scale: Literal["variance", "std"] = "variance",
) -> np.ndarray:
    """Apply ``Rx(a) Rz(b)`` to every qubit with ``a, b ~ N(0, sigma)``.

    ``scale="variance"`` reads ``sigma`` as the variance of the angle distribution,
    ``"std"`` as its standard deviation.
    """
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    psi = np.asarray(state, dtype=np.complex128)
    n = int(round(math.log2(psi.size)))
    if sigma == 0:
        return psi.copy()
    std = math.sqrt(sigma) if scale == "variance" else sigma
    rng = np.random.default_rng(seed)
    angles = rng.normal(0.0, std, size=(n, 2))
    tensor = psi.reshape((2,) * n)
    for q in range(n):
        tensor = apply_1q(tensor, _rx(angles[q, 0]) @ _rz(angles[q, 1]), q)
    return np.ascontiguousarray(tensor).reshape(-1)
