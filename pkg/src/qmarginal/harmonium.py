"""Harmonically interacting fermions in a harmonic trap, solved exactly.

Units are hbar = m = omega = 1 throughout; the only physical knob is the
dimensionless relative interaction strength kappa = N*K/(m*omega^2) of the
pair coupling (K/2) * sum_{i,j} (x_i - x_j)^2.  The center-of-mass mode keeps
frequency 1 while every relative normal mode is stiffened to
omega_rel = sqrt(1 + 2*kappa), and the exact N-fermion ground state is the
Vandermonde factor times the corresponding Gaussian.

The ground state is projected onto Slater determinants of frequency-1
oscillator eigenfunctions (so the non-interacting limit is a single
determinant) with Gauss-Hermite quadrature after rotating to the principal
axes of the combined Gaussian; node counts are chosen so the rule is exact
for the polynomial-times-Gaussian integrands.
"""
from __future__ import annotations

import itertools
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import roots_hermite

from .fock import FermionState, OrbitalSpace, SlaterDeterminant, one_rdm, natural_occupations
from .gpc import catalog, evaluate, truncate_spectrum

DEFAULT_BASIS_SIZE = 28
DEFICIT_TOL = 1e-6
_CHUNK = 1 << 17
# quadrature and Jacobi rotations resolve occupations to a few eps in
# absolute terms; facet values below ~100 eps are precision-limited
PRECISION_FLOOR = 100 * np.finfo(float).eps


class BasisDeficitError(ValueError):
    """Hermite basis too small for the requested state."""


@dataclass(frozen=True)
class HarmoniumParams:
    n: int
    kappa: float

    def __post_init__(self):
        if self.n not in (2, 3, 4):
            raise ValueError(f"particle number must be 2, 3 or 4, got {self.n}")
        if self.kappa < 0:
            raise ValueError("attractive regime kappa < 0 is not supported")

    @property
    def coupling(self) -> float:
        """Pair coupling K in trap units."""
        return self.kappa / self.n


@dataclass(frozen=True)
class GroundStateSpec:
    """Closed-form ground state c0 * prod_{i<j}(x_i-x_j) * exp(-c1*(sum x)^2 - c2*x.x)."""

    n: int
    kappa: float
    omega_rel: float
    c0: float
    c1: float
    c2: float


@dataclass(frozen=True)
class QuadratureSpec:
    basis_size: int = DEFAULT_BASIS_SIZE
    nodes: int | None = None  # per-axis Gauss-Hermite nodes; None = exactness minimum

    def __post_init__(self):
        if self.basis_size < 1:
            raise ValueError("basis_size must be positive")

    def node_count(self, n: int) -> int:
        if self.nodes is not None:
            return self.nodes
        degree = n * (self.basis_size - 1) + n * (n - 1) // 2
        return (degree + 2) // 2  # smallest G with 2G-1 >= degree


def _helmert(n: int) -> np.ndarray:
    """Orthogonal normal-mode matrix; column 0 is the center of mass."""
    q = np.zeros((n, n))
    q[:, 0] = 1.0 / math.sqrt(n)
    for a in range(1, n):
        q[:a, a] = 1.0 / math.sqrt(a * (a + 1))
        q[a, a] = -a / math.sqrt(a * (a + 1))
    return q


def _gh_nodes(g: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and Gaussian-free weights w*exp(t^2) of the g-point rule."""
    t, w = roots_hermite(g)
    return t, np.exp(np.log(w) + t * t)


def hermite_functions(count: int, x: np.ndarray) -> np.ndarray:
    """Frequency-1 oscillator eigenfunctions phi_0..phi_{count-1} at x."""
    x = np.asarray(x, dtype=float)
    out = np.empty((count, x.size))
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * x * x)
    if count > 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for k in range(1, count - 1):
        out[k + 1] = (math.sqrt(2.0 / (k + 1)) * x * out[k]
                      - math.sqrt(k / (k + 1.0)) * out[k - 1])
    return out


def _pair_list(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def _vandermonde(xs: np.ndarray) -> np.ndarray:
    v = np.ones(xs.shape[1])
    for i, j in _pair_list(xs.shape[0]):
        v = v * (xs[i] - xs[j])
    return v


def _mode_integral(spec_n: int, alphas: np.ndarray, g: int, func) -> float:
    """Integrate func(x) over the full product grid in normal-mode coordinates.

    alphas are the Gaussian exponents per mode of the *integrand*; func
    receives particle coordinates (n, m) and must include every Gaussian
    factor itself.
    """
    q = _helmert(spec_n)
    t, wfree = _gh_nodes(g)
    axes_y = [t / math.sqrt(a) for a in alphas]
    axes_w = [wfree / math.sqrt(a) for a in alphas]
    grids = np.meshgrid(*axes_y, indexing="ij")
    y = np.stack([grid.ravel() for grid in grids])
    weights = np.ones(y.shape[1])
    for wg in np.meshgrid(*axes_w, indexing="ij"):
        weights = weights * wg.ravel()
    return float(weights @ func(q @ y))


def ground_state_spec(params: HarmoniumParams) -> GroundStateSpec:
    """Exponents from the normal-mode split; c0 from numerical normalization."""
    n = params.n
    omega_rel = math.sqrt(1.0 + 2.0 * params.kappa)
    c1 = (1.0 - omega_rel) / (2.0 * n)
    c2 = omega_rel / 2.0

    def integrand(x):
        expo = -2.0 * c1 * x.sum(axis=0) ** 2 - 2.0 * c2 * (x ** 2).sum(axis=0)
        return _vandermonde(x) ** 2 * np.exp(expo)

    alphas = np.array([1.0] + [omega_rel] * (n - 1))  # exponents of |Psi|^2
    g = n * (n - 1) // 2 + 2
    norm_sq = _mode_integral(n, alphas, g, integrand)
    return GroundStateSpec(n=n, kappa=params.kappa, omega_rel=omega_rel,
                           c0=1.0 / math.sqrt(norm_sq), c1=c1, c2=c2)


def wavefunction(spec: GroundStateSpec, coords: np.ndarray) -> np.ndarray:
    """Ground-state values at coords of shape (..., n)."""
    coords = np.asarray(coords, dtype=float)
    x = np.atleast_2d(coords).reshape(-1, spec.n).T
    expo = -spec.c1 * x.sum(axis=0) ** 2 - spec.c2 * (x ** 2).sum(axis=0)
    values = spec.c0 * _vandermonde(x) * np.exp(expo)
    return values.reshape(coords.shape[:-1])


def apply_hamiltonian(spec: GroundStateSpec, coords: np.ndarray) -> np.ndarray:
    """(H Psi)(coords) evaluated from the explicit derivatives of Psi."""
    coords = np.asarray(coords, dtype=float)
    x = np.atleast_2d(coords).reshape(-1, spec.n).T
    n, m = x.shape
    pairs = _pair_list(n)
    f = [x[i] - x[j] for i, j in pairs]
    v = np.ones(m)
    for fp in f:
        v = v * fp

    total = x.sum(axis=0)
    expo = -spec.c1 * total ** 2 - spec.c2 * (x ** 2).sum(axis=0)
    gauss = spec.c0 * np.exp(expo)

    lap = np.zeros(m)  # laplacian of Psi divided by the Gaussian factor
    for i in range(n):
        s_i = -2.0 * spec.c1 * total - 2.0 * spec.c2 * x[i]
        s_ii = -2.0 * spec.c1 - 2.0 * spec.c2
        v_i = np.zeros(m)
        v_ii = np.zeros(m)
        mine = [p for p in range(len(pairs)) if i in pairs[p]]
        for p in mine:
            sign_p = 1.0 if pairs[p][0] == i else -1.0
            rest = np.ones(m)
            for q in range(len(pairs)):
                if q != p:
                    rest = rest * f[q]
            v_i += sign_p * rest
            for p2 in mine:
                if p2 == p:
                    continue
                sign_p2 = 1.0 if pairs[p2][0] == i else -1.0
                rest2 = np.ones(m)
                for q in range(len(pairs)):
                    if q != p and q != p2:
                        rest2 = rest2 * f[q]
                v_ii += sign_p * sign_p2 * rest2
        lap += v_ii + 2.0 * v_i * s_i + v * (s_ii + s_i ** 2)

    pair_sq = np.zeros(m)
    for fp in f:
        pair_sq += fp ** 2
    k_const = spec.kappa / n
    potential = 0.5 * (x ** 2).sum(axis=0) + k_const * pair_sq
    values = gauss * (-0.5 * lap + potential * v)
    return values.reshape(coords.shape[:-1])


def ground_state_residual(params: HarmoniumParams) -> tuple[float, float]:
    """Rayleigh quotient E and <(H-E)^2>/E^2 by exact quadrature.

    The eigenfunction test certifying the normal-mode exponents: residuals at
    rounding level confirm H Psi = E Psi.
    """
    spec = ground_state_spec(params)
    n = spec.n
    alphas = np.array([1.0] + [spec.omega_rel] * (n - 1))
    g = n * (n - 1) // 2 + 3  # degree of (H Psi)^2 over the |Psi|^2 Gaussian

    def quad(func):
        return _mode_integral(n, alphas, g, func)

    norm_sq = quad(lambda x: wavefunction(spec, x.T) ** 2)
    energy = quad(lambda x: wavefunction(spec, x.T) * apply_hamiltonian(spec, x.T)) / norm_sq

    def residual_sq(x):
        r = apply_hamiltonian(spec, x.T) - energy * wavefunction(spec, x.T)
        return r * r

    return float(energy), float(quad(residual_sq) / (energy ** 2 * norm_sq))


def expand_in_hermite_basis(params: HarmoniumParams,
                            quad: QuadratureSpec | None = None,
                            deficit_tol: float = DEFICIT_TOL) -> tuple[FermionState, float]:
    """Wedge amplitudes over frequency-1 Hermite determinants.

    Returns the normalized state and the norm deficit 1 - |c|^2 measuring the
    weight outside the truncated basis.  The quadrature is exact for the
    polynomial-times-Gaussian integrands, so the deficit is a pure basis
    truncation measurement.
    """
    quad = quad or QuadratureSpec()
    d_basis = quad.basis_size
    spec = ground_state_spec(params)
    n = spec.n
    if d_basis < n:
        raise ValueError(f"basis_size {d_basis} smaller than particle number {n}")
    g = quad.node_count(n)

    q = _helmert(n)
    t, wfree = _gh_nodes(g)
    # principal axes of the combined Gaussian: basis functions contribute 1/2,
    # the state contributes (c1, c2); CM exponent 1, relative (1+omega)/2
    alphas = np.array([1.0] + [(1.0 + spec.omega_rel) / 2.0] * (n - 1))
    axes_y = [t / math.sqrt(a) for a in alphas]
    axes_w = [wfree / math.sqrt(a) for a in alphas]

    tensor = np.zeros((d_basis,) * n)
    m_total = g ** n
    for start in range(0, m_total, _CHUNK):
        idx = np.arange(start, min(start + _CHUNK, m_total))
        y = np.empty((n, idx.size))
        wnode = np.ones(idx.size)
        rem = idx
        for a in range(n - 1, -1, -1):
            part = rem % g
            rem = rem // g
            y[a] = axes_y[a][part]
            wnode = wnode * axes_w[a][part]
        x = q @ y
        values = wnode * wavefunction(spec, x.T)
        phis = [hermite_functions(d_basis, x[i]) for i in range(n)]
        if n == 2:
            tensor += (phis[0] * values) @ phis[1].T
        else:
            for head in itertools.product(range(d_basis), repeat=n - 2):
                partial = values
                for axis, level in enumerate(head):
                    partial = partial * phis[axis][level]
                tensor[head] += (phis[n - 2] * partial) @ phis[n - 1].T

    scale = math.sqrt(math.factorial(n))
    amplitudes = {}
    weight = 0.0
    for levels in itertools.combinations(range(d_basis), n):
        c = scale * tensor[levels]
        weight += c * c
        amplitudes[SlaterDeterminant.from_orbitals([lv + 1 for lv in levels])] = c
    deficit = 1.0 - weight
    if deficit > deficit_tol:
        raise BasisDeficitError(
            f"norm deficit {deficit:.3e} exceeds {deficit_tol:.1e}; "
            f"increase basis_size beyond {d_basis}")
    renorm = 1.0 / math.sqrt(weight)
    state = FermionState(OrbitalSpace(d=d_basis, n=n),
                         {det: c * renorm for det, c in amplitudes.items()})
    return state, float(deficit)


@dataclass(frozen=True)
class NonCurvePoint:
    kappa: float
    occupations: np.ndarray  # full decreasing spectrum, length basis_size
    eps6: float              # weight dropped by truncating to 6 occupations
    norm_deficit: float


def non_curve(kappas: Sequence[float], n: int = 3,
              quad: QuadratureSpec | None = None) -> list[NonCurvePoint]:
    """Natural occupation spectra along an interaction-strength grid."""
    if len(kappas) == 0:
        raise ValueError("empty kappa grid")
    quad = quad or QuadratureSpec()
    points = []
    for kappa in kappas:
        state, deficit = expand_in_hermite_basis(HarmoniumParams(n=n, kappa=float(kappa)), quad)
        lams, _ = natural_occupations(one_rdm(state))
        _, eps6 = truncate_spectrum(lams, min(6, lams.size))
        points.append(NonCurvePoint(float(kappa), lams, eps6, deficit))
    return points


@dataclass(frozen=True)
class ScanPoint:
    kappa: float
    d_value: float       # Borland-Dennis facet value on the 6 largest occupations
    hf_distance: float   # l2 distance of the full spectrum to (1,1,1,0,...)
    eps6: float
    norm_deficit: float
    precision_floor: bool


@dataclass(frozen=True)
class ScanResult:
    points: tuple[ScanPoint, ...]
    d_slope: float
    hf_slope: float
    basis_size: int
    nodes: int
    floor: float


def _scan_point(kappa: float, quad: QuadratureSpec, bd) -> ScanPoint:
    state, deficit = expand_in_hermite_basis(HarmoniumParams(n=3, kappa=kappa), quad)
    lams, _ = natural_occupations(one_rdm(state))
    lam6, eps6 = truncate_spectrum(lams, 6)
    d_value = evaluate(bd, lam6)
    hf = lams.copy()
    hf[:3] -= 1.0
    return ScanPoint(kappa=kappa, d_value=float(d_value),
                     hf_distance=float(np.linalg.norm(hf)), eps6=eps6,
                     norm_deficit=deficit,
                     precision_floor=bool(abs(d_value) < PRECISION_FLOOR))


def quasipinning_scan(kappas: Sequence[float],
                      quad: QuadratureSpec | None = None,
                      threads: int | None = None) -> ScanResult:
    """Facet distance and Hartree-Fock distance along a kappa grid with
    log-log least-squares exponents."""
    kappas = [float(k) for k in kappas]
    if not kappas:
        raise ValueError("empty kappa grid")
    if min(kappas) < 0.01 or max(kappas) > 0.5:
        raise ValueError("scan grid must lie within [0.01, 0.5]")
    quad = quad or QuadratureSpec()
    bd = catalog(3, 6).by_label("bd-ineq")
    if threads is None:
        threads = int(os.environ.get("QMARG_THREADS", "1"))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(lambda k: _scan_point(k, quad, bd), kappas))
    else:
        points = [_scan_point(k, quad, bd) for k in kappas]
    order = np.argsort([p.kappa for p in points])
    points = [points[i] for i in order]

    usable = [p for p in points if p.d_value > 0]
    if len(usable) >= 2:
        d_slope = float(np.polyfit(np.log([p.kappa for p in usable]),
                                   np.log([p.d_value for p in usable]), 1)[0])
    else:
        d_slope = float("nan")
    hf_ok = [p for p in points if p.hf_distance > 0]
    if len(hf_ok) >= 2:
        hf_slope = float(np.polyfit(np.log([p.kappa for p in hf_ok]),
                                    np.log([p.hf_distance for p in hf_ok]), 1)[0])
    else:
        hf_slope = float("nan")
    return ScanResult(points=tuple(points), d_slope=d_slope, hf_slope=hf_slope,
                      basis_size=quad.basis_size, nodes=quad.node_count(3),
                      floor=PRECISION_FLOOR)
