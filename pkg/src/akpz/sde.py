"""The Gaussian limit of the particle system: hydrodynamic speed, drift
matrix, Fourier symbols, spectral geometry, and an Euler-Maruyama integrator
for the limiting system of linear SDEs on quotient labels.

Model parameters are the limiting gap sizes 0 < C < D (with B = D - C).
The fluctuation field xi solves

    d xi_p = sqrt(v) dW_p + sum_{p'} A_{p,p'} xi_{p'} dt

where A has the four-point stencil coded in DriftCoeffs and v is the speed.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .lattice import ParameterError, canonicalize


class ModelError(ValueError):
    """A structural property of the limit model failed numerically."""


@dataclass(frozen=True)
class ModelParams:
    """Limit parameters C < D (B = D - C), optionally tied to a microscopic
    origin (epsilon, ell, m, m2)."""

    C: float
    D: float
    epsilon: float = None
    ell: float = None
    m: int = None
    m2: int = None

    def __post_init__(self):
        if not 0 < self.C < self.D:
            raise ParameterError(f"need 0 < C < D, got C={self.C}, D={self.D}")

    @property
    def B(self):
        return self.D - self.C

    @property
    def v(self):
        return speed(self)

    @classmethod
    def from_torus(cls, torus):
        if torus.epsilon is None:
            raise ParameterError("torus carries no scaling parameters")
        D = torus.ell / torus.m1
        C = D * torus.m2 / torus.m1
        return cls(C=C, D=D, epsilon=torus.epsilon, ell=torus.ell,
                   m=torus.m1, m2=torus.m2)


def speed(params) -> float:
    """Deterministic particle speed (1-e^-B)(1-e^-D)/(1-e^-C)."""
    B, C, D = params.B, params.C, params.D
    return -math.expm1(-B) * -math.expm1(-D) / -math.expm1(-C)


def speed_from_slopes(g1: float, g2: float) -> float:
    """Speed as a function of the two slope arguments (g1, g2) = (D, C)."""
    if g2 <= 0 or g2 >= g1:
        raise ParameterError(f"slopes outside 0 < g2 < g1: ({g1}, {g2})")
    return (1 - math.exp(g2 - g1)) * -math.expm1(-g1) / -math.expm1(-g2)


@dataclass(frozen=True)
class DriftCoeffs:
    """Stencil of the drift matrix A:

    A[p, p]          = d1 - d2 - d3
    A[p, p + (1,-1)] = d2
    A[p, p - (1,0)]  = -d1
    A[p, p - (0,1)]  = d3
    """

    d1: float
    d2: float
    d3: float

    @property
    def diag(self):
        return self.d1 - self.d2 - self.d3

    @property
    def row_sum(self):
        return self.diag + self.d2 - self.d1 + self.d3

    @property
    def inf_norm(self):
        return abs(self.diag) + self.d1 + self.d2 + self.d3


def drift_coeffs(params) -> DriftCoeffs:
    B, C, D = params.B, params.C, params.D
    eB, eC, eD = math.exp(-B), math.exp(-C), math.exp(-D)
    one_c = -math.expm1(-C)
    return DriftCoeffs(
        d1=eD * -math.expm1(-B) / one_c,
        d2=eB * -math.expm1(-D) / one_c,
        d3=eC * -math.expm1(-B) * -math.expm1(-D) / one_c ** 2,
    )


def _split_k(k):
    k = np.asarray(k, dtype=float)
    return k[..., 0], k[..., 1]


def symbol_A(k, coeffs):
    """Fourier multiplier of the drift: acting on hat(xi)_k with
    hat(xi)_k = sum_p xi_p e^{-i p.k}/m.  Vanishes at k = 0."""
    k1, k2 = _split_k(k)
    return (coeffs.diag
            + coeffs.d2 * np.exp(1j * (k1 - k2))
            - coeffs.d1 * np.exp(-1j * k1)
            + coeffs.d3 * np.exp(-1j * k2))


def symbol_A_imag(k, coeffs):
    """Imaginary (odd) part of the multiplier, as a real array."""
    k1, k2 = _split_k(k)
    return (coeffs.d2 * np.sin(k1 - k2)
            + coeffs.d1 * np.sin(k1)
            - coeffs.d3 * np.sin(k2))


def symbol_R(k, coeffs):
    """Symmetrization A(k) + A(-k): real, non-positive, zero only at k = 0."""
    k1, k2 = _split_k(k)
    return 2.0 * (coeffs.diag
                  + coeffs.d2 * np.cos(k1 - k2)
                  - coeffs.d1 * np.cos(k1)
                  + coeffs.d3 * np.cos(k2))


def symbol_W(k, coeffs):
    """Quadratic form approximating symbol_R at small k."""
    k1, k2 = _split_k(k)
    return -coeffs.d2 * (k1 - k2) ** 2 + coeffs.d1 * k1 ** 2 - coeffs.d3 * k2 ** 2


def symbol_Q(k, params):
    """Quadratic-form symbol of the Gibbs weight of near-crystalline
    configurations; equals symbol_R / (2 v) identically."""
    k1, k2 = _split_k(k)
    f = lambda x: math.exp(-x) / -math.expm1(-x)
    return (f(params.D) * (1 - np.cos(k1))
            - f(params.B) * (1 - np.cos(k1 - k2))
            - f(params.C) * (1 - np.cos(k2)))


def hessian_matrix(coeffs):
    """symbol_W written as a symmetric 2x2 matrix."""
    d1, d2, d3 = coeffs.d1, coeffs.d2, coeffs.d3
    return np.array([[d1 - d2, d2], [d2, -(d2 + d3)]])


def det_hessian_closed_form(params) -> float:
    """Closed-form determinant of the Hessian form, e^-D(1-e^-D)(1-e^-B)^2/(1-e^-C)^2."""
    B, C, D = params.B, params.C, params.D
    return math.exp(-D) * -math.expm1(-D) * math.expm1(-B) ** 2 / math.expm1(-C) ** 2


@dataclass(frozen=True)
class SpectralData:
    """Geometry of the Gaussian limit: Hessian form Whess (negative
    definite), w = sqrt(det Whess), the normalizing matrix V with
    V Whess V^T = -I, and the characteristic direction U."""

    whess: np.ndarray
    w: float
    V: np.ndarray
    U: np.ndarray


def spectral_data(coeffs) -> SpectralData:
    whess = hessian_matrix(coeffs)
    lam, S = np.linalg.eigh(-whess)
    if lam.min() <= 0:
        raise ModelError(f"Hessian form is not negative definite: eigenvalues {-lam}")
    # descending eigenvalues, each eigenvector with positive leading entry
    lam = lam[::-1]
    S = S[:, ::-1]
    for j in range(2):
        lead = S[np.nonzero(S[:, j])[0][0], j]
        if lead < 0:
            S[:, j] = -S[:, j]
    V = np.diag(lam ** -0.5) @ S.T
    w = math.sqrt(float(np.linalg.det(whess)))
    U = np.array([coeffs.d1 + coeffs.d2, -(coeffs.d2 + coeffs.d3)])
    return SpectralData(whess=whess, w=w, V=V, U=U)


def appendix_delta(params) -> float:
    """Discriminant whose negativity excludes nontrivial stationary points
    of the symmetrized symbol."""
    C, D = params.C, params.D
    eC, eD = math.exp(C), math.exp(D)
    num = (1 + eC) * (eC + eD) * (-3 * eC + eC ** 2 + eD + eC * eD)
    den = (1 - eC) ** 2 * (eC - eD) ** 2 * (1 - eD) ** 4
    return -num / den


@dataclass(frozen=True)
class PropertyCheck:
    name: str
    passed: bool
    worst: float
    tol: float


@dataclass(frozen=True)
class PropertyReport:
    checks: tuple

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    def lines(self):
        out = []
        for c in self.checks:
            tag = "PASS" if c.passed else "FAIL"
            out.append(f"{tag}  {c.name:34s} worst={c.worst:.3e}  tol={c.tol:.1e}")
        return out


def validate_symbol_properties(params, grid=512, k_samples=10000, seed=0) -> PropertyReport:
    """Numerical check of the structural properties of the drift symbol:
    zero mean, strict negativity of the symmetrization away from k = 0,
    negative definite Hessian with the stated determinant and speed ratio,
    the normalization of V, the stationary-point discriminant, and exact
    proportionality of the Gibbs symbol to symbol_R/(2v)."""
    coeffs = drift_coeffs(params)
    v = params.v
    checks = []

    def add(name, worst, tol):
        checks.append(PropertyCheck(name, bool(worst <= tol), float(worst), tol))

    add("symbol_A_vanishes_at_zero", abs(symbol_A(np.zeros(2), coeffs)), 1e-14)

    ax = -np.pi + 2 * np.pi * np.arange(grid) / grid
    kk = np.stack(np.meshgrid(ax, ax, indexing="ij"), axis=-1)
    rvals = symbol_R(kk, coeffs)
    origin = (grid // 2, grid // 2)  # ax[grid//2] == 0
    rvals[origin] = -np.inf
    add("symmetrized_symbol_negative", float(rvals.max()), -1e-15)

    lam = np.linalg.eigvalsh(hessian_matrix(coeffs))
    add("hessian_negative_definite", float(lam.max()), -1e-12)

    det = float(np.linalg.det(hessian_matrix(coeffs)))
    wsq = det_hessian_closed_form(params)
    add("hessian_det_closed_form", abs(det - wsq) / wsq, 1e-12)

    spectral = spectral_data(coeffs)
    add("speed_ratio_sqrt_expD_minus_1",
        abs(params.v / spectral.w - math.sqrt(math.expm1(params.D)))
        / math.sqrt(math.expm1(params.D)), 1e-12)
    add("V_normalizes_hessian",
        float(np.abs(spectral.V @ spectral.whess @ spectral.V.T + np.eye(2)).max()), 1e-12)

    add("stationary_point_discriminant", appendix_delta(params), -1e-15)

    rng = np.random.default_rng(seed)
    ks = rng.uniform(-np.pi, np.pi, size=(k_samples, 2))
    gibbs_gap = np.abs(symbol_Q(ks, params) - symbol_R(ks, coeffs) / (2 * v))
    add("gibbs_symbol_is_R_over_2v", float(gibbs_gap.max()), 1e-12)

    return PropertyReport(tuple(checks))


def grad_v_check(params, step=1e-5):
    """Central finite differences of the speed in its two slope arguments at
    (D, C), compared against the characteristic direction U.  Returns
    (U_fd, rel_err) with componentwise relative errors."""
    coeffs = drift_coeffs(params)
    U = np.array([coeffs.d1 + coeffs.d2, -(coeffs.d2 + coeffs.d3)])
    g1, g2 = params.D, params.C
    fd1 = (speed_from_slopes(g1 + step, g2) - speed_from_slopes(g1 - step, g2)) / (2 * step)
    fd2 = (speed_from_slopes(g1, g2 + step) - speed_from_slopes(g1, g2 - step)) / (2 * step)
    u_fd = np.array([fd1, fd2])
    rel = np.abs(u_fd - U) / np.abs(U)
    return u_fd, rel


@lru_cache(maxsize=64)
def _shift_index(m, m2, dp):
    """Index arrays (I1, I2) with xi[..., I1, I2][p] = xi at canonical(p + dp)."""
    i1 = np.empty((m, m), dtype=int)
    i2 = np.empty((m, m), dtype=int)
    for p1 in range(m):
        for p2 in range(m):
            q1, q2 = canonicalize((p1 + dp[0], p2 + dp[1]), m, m2)
            i1[p1, p2] = q1
            i2[p1, p2] = q2
    return i1, i2


def shift_field(xi, dp, m2):
    """Field of values xi[canonical(p + dp)], respecting the twisted vertical
    wrap of the quotient labels."""
    m = xi.shape[-1]
    i1, i2 = _shift_index(m, m2, tuple(dp))
    return xi[..., i1, i2]


def drift_apply(xi, coeffs, m2):
    """The drift stencil A applied to a field (or batch of fields)."""
    return (coeffs.diag * xi
            + coeffs.d2 * shift_field(xi, (1, -1), m2)
            - coeffs.d1 * shift_field(xi, (-1, 0), m2)
            + coeffs.d3 * shift_field(xi, (0, -1), m2))


@dataclass
class SdeState:
    """Fluctuation field indexed [p1, p2] plus the current time."""

    xi: np.ndarray
    t: float

    @classmethod
    def from_mapping(cls, mapping, m, m2, t=0.0):
        xi = np.zeros((m, m))
        for p, val in mapping.items():
            q1, q2 = canonicalize(p, m, m2)
            xi[q1, q2] = val
        return cls(xi=xi, t=t)


def euler_maruyama(initial, params, dt, T, seed, m2=None, record_every=None,
                   noise=True):
    """Explicit Euler-Maruyama trajectory of the linear SDE system.

    xi(t+dt) = xi(t) + A xi(t) dt + sqrt(v dt) * standard normals.  The step
    must satisfy dt * ||A||_inf < 0.1.  Deterministic for a given seed.
    Returns the list of recorded SdeStates (always including the final one).
    """
    m2 = m2 if m2 is not None else params.m2
    if m2 is None:
        raise ParameterError("quotient twist m2 is required (set it or use params.m2)")
    coeffs = drift_coeffs(params)
    if dt <= 0:
        raise ParameterError("dt must be positive")
    if dt * coeffs.inf_norm >= 0.1:
        raise ParameterError(
            f"stability guard: dt*||A|| = {dt * coeffs.inf_norm:.3g} must stay below 0.1")
    nsteps = int(round(T / dt))
    rng = np.random.default_rng(seed)
    xi = np.array(initial.xi, dtype=float, copy=True)
    m = xi.shape[-1]
    sig = math.sqrt(params.v * dt)
    record_stride = max(1, int(round(record_every / dt))) if record_every else None
    out = [SdeState(xi=xi.copy(), t=initial.t)]
    for step in range(1, nsteps + 1):
        xi = xi + drift_apply(xi, coeffs, m2) * dt
        if noise:
            xi = xi + sig * rng.standard_normal(size=xi.shape)
        if (record_stride and step % record_stride == 0) or step == nsteps:
            out.append(SdeState(xi=xi.copy(), t=initial.t + step * dt))
    return out


def euler_maruyama_ensemble(xi0, params, m2, dt, nsteps, seed, snapshot_steps,
                            replicas=None, noise=True):
    """Vectorized ensemble integrator.

    xi0 is either an (m, m) field shared by all replicas or an (R, m, m)
    batch.  Returns {step: (R, m, m) array} for each requested snapshot step
    (arrays are copies).  Deterministic for given (seed, replicas).
    """
    xi0 = np.asarray(xi0, dtype=float)
    if xi0.ndim == 2:
        if replicas is None:
            raise ParameterError("replicas required with a shared initial field")
        xi = np.broadcast_to(xi0, (replicas, *xi0.shape)).copy()
    else:
        xi = xi0.copy()
    coeffs = drift_coeffs(params)
    if dt * coeffs.inf_norm >= 0.1:
        raise ParameterError("stability guard: dt*||A|| must stay below 0.1")
    rng = np.random.default_rng(seed)
    sig = math.sqrt(params.v * dt)
    want = set(snapshot_steps)
    out = {}
    if 0 in want:
        out[0] = xi.copy()
    for step in range(1, max(want) + 1):
        xi += drift_apply(xi, coeffs, m2) * dt
        if noise:
            xi += sig * rng.standard_normal(size=xi.shape)
        if step in want:
            out[step] = xi.copy()
    return out
