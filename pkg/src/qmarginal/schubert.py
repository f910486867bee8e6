"""Flags, Schubert cells and empirical spectral-inequality testing.

A non-degenerate Hermitian operator orders its eigenvectors into a complete
flag; a binary sequence pi marks the positions where the intersection of a
subspace with the flag jumps dimension, which indexes a Schubert cell.  The
Hersch-Zwahlen variational principle writes any eigenvalue subset sum as the
minimum of Tr[P_V rho] over the corresponding open cell.  Candidate spectral
inequalities between a bipartite state and its marginal are tested by Monte
Carlo sampling; a clean verdict is evidence rather than proof, since the
cohomological intersection criterion that would decide validity exactly is
not implemented here.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

ORTHO_TOL = 1e-10
RANK_TOL_FACTOR = 1e-8
# singular values within a decade of the threshold are reported, not guessed
RANK_GUARD = 10.0


class DegenerateSpectrumError(ValueError):
    """The operation requires a non-degenerate spectrum."""


class IndeterminateRankError(ValueError):
    """A singular value sits too close to the rank threshold to decide."""


@dataclass(frozen=True)
class Flag:
    """Complete flag: F_i is the span of the first i columns of basis."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise ValueError("flag basis must be a square matrix")
        if np.max(np.abs(b.conj().T @ b - np.eye(b.shape[0]))) > ORTHO_TOL:
            raise ValueError("flag basis is not orthonormal within tolerance")

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def subspace(self, i: int) -> np.ndarray:
        """Orthonormal frame of F_i."""
        return self.basis[:, :i]


def standard_flag(d: int) -> Flag:
    return Flag(np.eye(d, dtype=complex))


def induced_flag(a: np.ndarray, gap_tol: float = 1e-10) -> Flag:
    """Flag of eigenvectors ordered by decreasing eigenvalue.

    Requires a non-degenerate spectrum (minimal gap above gap_tol); the
    ordering, hence the flag, is undefined otherwise.
    """
    a = np.asarray(a)
    if np.max(np.abs(a - a.conj().T)) > ORTHO_TOL:
        raise ValueError("expected a Hermitian matrix")
    lams, vecs = np.linalg.eigh(a)
    lams, vecs = lams[::-1], vecs[:, ::-1]
    gaps = -np.diff(lams)
    if gaps.size and np.min(gaps) <= gap_tol:
        raise DegenerateSpectrumError(
            f"spectral gap {np.min(gaps):.3e} at or below {gap_tol:.1e}")
    return Flag(vecs.astype(complex))


def _check_frame(frame: np.ndarray, d: int) -> np.ndarray:
    frame = np.asarray(frame, dtype=complex)
    if frame.ndim != 2 or frame.shape[0] != d:
        raise ValueError(f"expected a frame of {d}-vectors, got shape {frame.shape}")
    k = frame.shape[1]
    if k and np.max(np.abs(frame.conj().T @ frame - np.eye(k))) > ORTHO_TOL:
        raise ValueError("frame is not orthonormal within tolerance")
    return frame


def _rank(matrix: np.ndarray, rank_tol: float) -> int:
    if matrix.shape[1] == 0:
        return 0
    sing = np.linalg.svd(matrix, compute_uv=False)
    threshold = rank_tol * sing[0] if sing[0] > 0 else rank_tol
    near = (sing > threshold / RANK_GUARD) & (sing < threshold * RANK_GUARD)
    if np.any(near):
        raise IndeterminateRankError(
            "singular value within a decade of the rank threshold")
    return int(np.sum(sing > threshold))


def _validate_pi(pi: Sequence[int], d: int) -> tuple[int, ...]:
    pi = tuple(int(b) for b in pi)
    if len(pi) != d:
        raise ValueError(f"binary sequence length {len(pi)} does not match d={d}")
    if any(b not in (0, 1) for b in pi):
        raise ValueError("binary sequence entries must be 0 or 1")
    return pi


def schubert_membership(frame: np.ndarray, flag: Flag, pi: Sequence[int],
                        rank_tol: float = RANK_TOL_FACTOR) -> bool:
    """Whether span(frame) has the intersection-jump pattern pi against flag.

    dim(V intersect F_i) is computed as dim V + i - rank([frame | F_i]); rank
    decisions sit on a singular-value threshold, so borderline inputs raise
    IndeterminateRankError instead of guessing.
    """
    d = flag.dim
    pi = _validate_pi(pi, d)
    frame = _check_frame(frame, d)
    k = frame.shape[1]
    if sum(pi) != k:
        raise ValueError(f"weight of pi is {sum(pi)}, subspace dimension is {k}")
    previous = 0
    for i in range(1, d + 1):
        stacked = np.hstack([frame, flag.subspace(i)])
        dim_cap = k + i - _rank(stacked, rank_tol)
        if dim_cap - previous != pi[i - 1]:
            return False
        previous = dim_cap
    return True


def sample_schubert_cell(flag: Flag, pi: Sequence[int],
                         rng: np.random.Generator) -> np.ndarray:
    """Random member of the open cell, by its echelon parameterization.

    Relative to the flag basis, row r has a pivot 1 at the r-th position of a
    1 in pi, free complex Gaussian entries at earlier non-pivot positions and
    zeros elsewhere; the span always realizes the jump pattern pi.
    """
    d = flag.dim
    pi = _validate_pi(pi, d)
    pivots = [i for i, b in enumerate(pi) if b]
    k = len(pivots)
    coeff = np.zeros((d, k), dtype=complex)
    for r, piv in enumerate(pivots):
        coeff[piv, r] = 1.0
        for j in range(piv):
            if j not in pivots:
                coeff[j, r] = rng.standard_normal() + 1j * rng.standard_normal()
    frame = flag.basis @ coeff
    if k == 0:
        return frame
    q, _ = np.linalg.qr(frame)
    return q


@dataclass(frozen=True)
class HZReport:
    pi: tuple[int, ...]
    target: float            # sum of the pi-marked eigenvalues
    candidate_value: float   # Tr[P_V rho] at the eigenvector candidate
    candidate_in_cell: bool
    min_sampled: float       # smallest Tr[P_V rho] over the sampled cell members
    trials: int

    def passed(self, value_tol: float = 1e-10, sample_tol: float = 1e-9) -> bool:
        return (self.candidate_in_cell
                and abs(self.candidate_value - self.target) <= value_tol
                and self.min_sampled >= self.target - sample_tol)


def _projection_value(rho: np.ndarray, frame: np.ndarray) -> float:
    if frame.shape[1] == 0:
        return 0.0
    return float(np.real(np.trace(frame.conj().T @ rho @ frame)))


def hersch_zwahlen_check(rho: np.ndarray, pi: Sequence[int], trials: int = 200,
                         seed: int = 0, gap_tol: float = 1e-10) -> HZReport:
    """Verify the variational principle for one binary sequence.

    The span of the pi-marked eigenvectors must achieve the eigenvalue sum,
    and no sampled cell member may fall below it.  Sampling uses one child
    generator per trial so results are reproducible and order-independent.
    """
    rho = np.asarray(rho)
    flag = induced_flag(rho, gap_tol=gap_tol)
    pi = _validate_pi(pi, flag.dim)
    lams = np.sort(np.linalg.eigvalsh(rho))[::-1]
    target = float(np.dot(pi, lams))

    candidate = flag.basis[:, [i for i, b in enumerate(pi) if b]]
    in_cell = schubert_membership(candidate, flag, pi)
    candidate_value = _projection_value(rho, candidate)

    min_sampled = float("inf")
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        frame = sample_schubert_cell(flag, pi, rng)
        min_sampled = min(min_sampled, _projection_value(rho, frame))
    return HZReport(pi=pi, target=target, candidate_value=candidate_value,
                    candidate_in_cell=in_cell, min_sampled=min_sampled,
                    trials=trials)


def partial_trace(rho_ab: np.ndarray, d_a: int, d_b: int, keep: str = "A") -> np.ndarray:
    """Reduce a (d_a*d_b)-dimensional density matrix to one factor."""
    rho_ab = np.asarray(rho_ab)
    if rho_ab.shape != (d_a * d_b, d_a * d_b):
        raise ValueError(f"expected shape {(d_a * d_b,) * 2}, got {rho_ab.shape}")
    tensor = rho_ab.reshape(d_a, d_b, d_a, d_b)
    if keep == "A":
        return np.einsum("ibjb->ij", tensor)
    if keep == "B":
        return np.einsum("aiaj->ij", tensor)
    raise ValueError("keep must be 'A' or 'B'")


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via phase-fixed QR."""
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r)))


def random_pure_density(d: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    psi /= np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def random_mixed_density(d: int, rng: np.random.Generator,
                         rank: int | None = None) -> np.ndarray:
    """Wishart-type GG^dag / Tr, with configurable rank."""
    rank = rank or d
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return rho / np.real(np.trace(rho))


@dataclass(frozen=True)
class InequalityVerdict:
    pi: tuple[int, ...]
    sigma: tuple[int, ...]
    violated: bool
    samples_checked: int
    witness: dict | None  # trial index, state kind, both spectra, both sides


def check_spectral_inequality(pi: Sequence[int], sigma: Sequence[int],
                              d_a: int, d_b: int, samples: int = 1000,
                              seed: int = 0,
                              margin: float = 1e-10) -> InequalityVerdict:
    """Monte-Carlo falsifier for sum pi_j lam_j(A) <= sum sigma_i lam_i(AB).

    Alternates full-spectrum mixed states, random-rank mixed states and pure
    states.  Returns the first violating witness; a clean pass over all
    samples is evidence, not proof, that the pair satisfies the intersection
    property behind the inequality.
    """
    d_ab = d_a * d_b
    pi = _validate_pi(pi, d_a)
    sigma = _validate_pi(sigma, d_ab)
    for trial in range(samples):
        rng = np.random.default_rng([seed, trial])
        kind = ("mixed-full", "pure", "mixed-rank")[trial % 3]
        if kind == "pure":
            rho_ab = random_pure_density(d_ab, rng)
        elif kind == "mixed-rank":
            rho_ab = random_mixed_density(d_ab, rng, rank=int(rng.integers(1, d_ab + 1)))
        else:
            rho_ab = random_mixed_density(d_ab, rng)
        lam_ab = np.sort(np.linalg.eigvalsh(rho_ab))[::-1]
        lam_a = np.sort(np.linalg.eigvalsh(partial_trace(rho_ab, d_a, d_b, "A")))[::-1]
        lhs = float(np.dot(pi, lam_a))
        rhs = float(np.dot(sigma, lam_ab))
        if lhs > rhs + margin:
            witness = {"trial": trial, "kind": kind,
                       "lam_a": [float(v) for v in lam_a],
                       "lam_ab": [float(v) for v in lam_ab],
                       "lhs": lhs, "rhs": rhs}
            return InequalityVerdict(pi, sigma, True, trial + 1, witness)
    return InequalityVerdict(pi, sigma, False, samples, None)
