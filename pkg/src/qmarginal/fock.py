"""Finite fermionic Fock space over d orbitals.

Slater determinants are occupation bitmasks: orbital i (1-based, i <= d) is
stored at bit i-1.  The determinant |k1,...,kN> with k1 < ... < kN is the
state a_k1^dag ... a_kN^dag |vac>, which fixes every sign in this package:
an operator a_k / a_k^dag acting on a determinant picks up
(-1)^(number of occupied orbitals below k).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .linalg import jacobi_eigh

MAX_ORBITALS = 64
DEFAULT_BASIS_CAP = 10 ** 6
NORM_TOL = 1e-12
STATE_AMPLITUDE_CUTOFF = 1e-14


class CapacityError(ValueError):
    """Requested Slater basis exceeds the configured size cap."""


@dataclass(frozen=True)
class OrbitalSpace:
    """d-dimensional 1-particle space holding n fermions."""

    d: int
    n: int

    def __post_init__(self):
        if not (1 <= self.n <= self.d):
            raise ValueError(f"need 1 <= n <= d, got n={self.n}, d={self.d}")
        if self.d > MAX_ORBITALS:
            raise ValueError(f"d={self.d} exceeds the bitmask capacity {MAX_ORBITALS}")

    @property
    def basis_size(self) -> int:
        return math.comb(self.d, self.n)


@dataclass(frozen=True, order=True)
class SlaterDeterminant:
    """Occupation bitmask; orbital i sits at bit i-1."""

    mask: int

    @classmethod
    def from_orbitals(cls, orbitals: Iterable[int]) -> "SlaterDeterminant":
        mask = 0
        for k in orbitals:
            if k < 1 or k > MAX_ORBITALS:
                raise ValueError(f"orbital index {k} outside [1, {MAX_ORBITALS}]")
            bit = 1 << (k - 1)
            if mask & bit:
                raise ValueError(f"orbital {k} listed twice")
            mask |= bit
        return cls(mask)

    @property
    def orbitals(self) -> tuple[int, ...]:
        mask, out, k = self.mask, [], 1
        while mask:
            if mask & 1:
                out.append(k)
            mask >>= 1
            k += 1
        return tuple(out)

    @property
    def n_occupied(self) -> int:
        return self.mask.bit_count()

    def has(self, k: int) -> bool:
        return bool((self.mask >> (k - 1)) & 1)

    def __str__(self) -> str:
        return "|" + ",".join(str(k) for k in self.orbitals) + ">"


def enumerate_slaters(space: OrbitalSpace, cap: int = DEFAULT_BASIS_CAP) -> list[SlaterDeterminant]:
    """All n-fermion determinants, ascending by bitmask value (deterministic)."""
    size = space.basis_size
    if size > cap:
        raise CapacityError(f"basis size C({space.d},{space.n}) = {size} exceeds cap {cap}")
    out = []
    v = (1 << space.n) - 1
    limit = 1 << space.d
    while v < limit:
        out.append(SlaterDeterminant(v))
        c = v & -v
        r = v + c
        v = r | (((v ^ r) >> 2) // c)
    return out


def _sign_below(mask: int, k: int) -> int:
    return -1 if (mask & ((1 << (k - 1)) - 1)).bit_count() & 1 else 1


def apply_annihilator(det: SlaterDeterminant, k: int):
    """a_k |det>.  Returns (sign, new det) or None if orbital k is empty."""
    if k < 1 or k > MAX_ORBITALS:
        raise ValueError(f"orbital index {k} outside [1, {MAX_ORBITALS}]")
    bit = 1 << (k - 1)
    if not det.mask & bit:
        return None
    return _sign_below(det.mask, k), SlaterDeterminant(det.mask & ~bit)


def apply_creator(det: SlaterDeterminant, k: int):
    """a_k^dag |det>.  Returns (sign, new det) or None if orbital k is filled."""
    if k < 1 or k > MAX_ORBITALS:
        raise ValueError(f"orbital index {k} outside [1, {MAX_ORBITALS}]")
    bit = 1 << (k - 1)
    if det.mask & bit:
        return None
    return _sign_below(det.mask, k), SlaterDeterminant(det.mask | bit)


@dataclass(frozen=True)
class FermionState:
    """Normalized amplitudes over the n-fermion Slater basis.

    Treat instances as immutable; all operations return new states.
    """

    space: OrbitalSpace
    amplitudes: dict = field(repr=False)

    def __post_init__(self):
        limit = 1 << self.space.d
        for det in self.amplitudes:
            if det.mask >= limit:
                raise ValueError(f"{det} uses orbitals beyond d={self.space.d}")
            if det.n_occupied != self.space.n:
                raise ValueError(f"{det} does not hold n={self.space.n} fermions")
        if abs(self.norm_squared() - 1.0) > NORM_TOL:
            raise ValueError(f"state not normalized: |c|^2 = {self.norm_squared()!r}")

    @classmethod
    def from_amplitudes(cls, space: OrbitalSpace, amplitudes: Mapping,
                        normalize: bool = True) -> "FermionState":
        amps = {det: complex(c) for det, c in amplitudes.items() if c != 0}
        if normalize:
            norm = math.sqrt(sum(abs(c) ** 2 for c in amps.values()))
            if norm == 0.0:
                raise ValueError("cannot normalize the zero state")
            amps = {det: c / norm for det, c in amps.items()}
        return cls(space, amps)

    def norm_squared(self) -> float:
        return sum(abs(c) ** 2 for c in self.amplitudes.values())

    def amplitude(self, det: SlaterDeterminant) -> complex:
        return self.amplitudes.get(det, 0.0 + 0.0j)


def random_state(space: OrbitalSpace, rng: np.random.Generator) -> FermionState:
    """Haar-like random state: i.i.d. standard complex normal amplitudes, normalized."""
    basis = enumerate_slaters(space)
    c = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    c /= np.linalg.norm(c)
    return FermionState(space, dict(zip(basis, c)))


def one_rdm(state: FermionState, norm_tol: float = 1e-8) -> np.ndarray:
    """1-particle reduced density matrix, rho[j-1, k-1] = <a_k^dag a_j>.

    Hermitian, positive semidefinite, trace n.
    """
    if abs(state.norm_squared() - 1.0) > norm_tol:
        raise ValueError("state norm deviates from 1 beyond tolerance")
    d = state.space.d
    rho = np.zeros((d, d), dtype=complex)
    for det, c in state.amplitudes.items():
        for j in det.orbitals:
            s1, reduced = apply_annihilator(det, j)
            for k in range(1, d + 1):
                created = apply_creator(reduced, k)
                if created is None:
                    continue
                s2, target = created
                c_target = state.amplitudes.get(target)
                if c_target is not None:
                    rho[j - 1, k - 1] += s1 * s2 * np.conj(c_target) * c
    return rho


def natural_occupations(rdm: np.ndarray, herm_tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """Decreasing eigenvalues of a 1-RDM and the natural orbitals (columns).

    Within a degenerate block the orbital order is whatever the eigensolver
    produces; only the occupation values are contractual.
    """
    rdm = np.asarray(rdm)
    if np.max(np.abs(rdm - rdm.conj().T)) > herm_tol:
        raise ValueError("matrix is not Hermitian within tolerance")
    return jacobi_eigh(rdm)


def rotate_orbitals(state: FermionState, u: np.ndarray,
                    unitary_tol: float = 1e-10) -> FermionState:
    """Transform amplitudes under the 1-particle basis change u.

    The wedge-space action sends c_J to sum_I det(u[J, I]) c_I over the
    occupied row/column index sets.  Norm is preserved (checked)."""
    d = state.space.d
    n = state.space.n
    u = np.asarray(u, dtype=complex)
    if u.shape != (d, d):
        raise ValueError(f"expected a {d}x{d} matrix, got {u.shape}")
    if np.max(np.abs(u.conj().T @ u - np.eye(d))) > unitary_tol:
        raise ValueError("matrix is not unitary within tolerance")

    src = [(det, c) for det, c in state.amplitudes.items() if c != 0]
    cols = np.array([[k - 1 for k in det.orbitals] for det, _ in src])  # (nsrc, n)
    amps = np.array([c for _, c in src])
    out = {}
    for target in enumerate_slaters(state.space):
        rows = [k - 1 for k in target.orbitals]
        sub = u[rows, :]                        # (n, d)
        minors = sub[:, cols].transpose(1, 0, 2)  # (nsrc, n, n)
        value = np.linalg.det(minors) @ amps
        if value != 0:
            out[target] = complex(value)
    total = sum(abs(c) ** 2 for c in out.values())
    if abs(total - 1.0) > unitary_tol:
        raise ValueError(f"rotation failed to preserve the norm: |c|^2 = {total!r}")
    scale = 1.0 / math.sqrt(total)
    return FermionState(state.space, {det: c * scale for det, c in out.items()})


def restricted_ground_state(h: np.ndarray, allowed: list[SlaterDeterminant],
                            space: OrbitalSpace) -> tuple[float, FermionState]:
    """Lowest eigenpair of h restricted to span(allowed).

    h is indexed by enumerate_slaters(space) order.  The restricted energy is
    a variational upper bound that can only drop as `allowed` grows.
    """
    if not allowed:
        raise ValueError("allowed determinant list is empty")
    basis = enumerate_slaters(space)
    h = np.asarray(h)
    if h.shape != (len(basis), len(basis)):
        raise ValueError(f"expected h over the full basis, shape {(len(basis),) * 2}")
    if np.max(np.abs(h - h.conj().T)) > 1e-10:
        raise ValueError("hamiltonian matrix is not Hermitian within tolerance")
    position = {det: i for i, det in enumerate(basis)}
    idx = [position[det] for det in allowed]
    sub = h[np.ix_(idx, idx)]
    lams, vecs = np.linalg.eigh(sub)
    ground = vecs[:, 0]
    state = FermionState.from_amplitudes(
        space, {det: ground[i] for i, det in enumerate(allowed)})
    return float(lams[0]), state


def write_state_json(state: FermionState, fp, cutoff: float = STATE_AMPLITUDE_CUTOFF) -> None:
    """Serialize a state; amplitudes below `cutoff` in magnitude are dropped."""
    entries = []
    for det in sorted(state.amplitudes):
        c = state.amplitudes[det]
        if abs(c) > cutoff:
            entries.append({"orbitals": list(det.orbitals),
                            "re": float(np.real(c)), "im": float(np.imag(c))})
    doc = {"d": state.space.d, "n": state.space.n, "amplitudes": entries}
    if hasattr(fp, "write"):
        json.dump(doc, fp)
    else:
        with open(fp, "w", encoding="utf-8") as handle:
            json.dump(doc, handle)


def read_state_json(fp) -> FermionState:
    """Load, validate and renormalize a state file."""
    if hasattr(fp, "read"):
        doc = json.load(fp)
    else:
        with open(fp, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    try:
        space = OrbitalSpace(d=int(doc["d"]), n=int(doc["n"]))
        raw = doc["amplitudes"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"state file missing field: {exc}") from exc
    amps = {}
    for entry in raw:
        orbitals = entry["orbitals"]
        if sorted(orbitals) != list(orbitals):
            raise ValueError(f"orbital list {orbitals} is not strictly increasing")
        det = SlaterDeterminant.from_orbitals(orbitals)
        if det in amps:
            raise ValueError(f"duplicate determinant {det}")
        amps[det] = complex(float(entry["re"]), float(entry.get("im", 0.0)))
    return FermionState.from_amplitudes(space, amps, normalize=True)
