"""Torus geometry for the interlaced particle system.

Particles live on the L x N discrete torus with m1 particles per row.
Particle labels are classes of Z^2 under

    (p1, p2) ~ (p1 + j1*m1 - j2*m2, p2 + j2*N),

where m2 is the conserved winding sector of the up-right loop through the
configuration.  A configuration assigns each label a horizontal position
modulo L, subject to the interlacing constraints between adjacent rows.
"""

import itertools
from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np

Label = tuple


class ParameterError(ValueError):
    """Torus or model parameters outside their admissible range."""


class ConfigError(ValueError):
    """A particle configuration violates a structural constraint."""


class StateSpaceError(ValueError):
    """Exhaustive enumeration requested on a torus that is too large."""


# label offsets of the six neighbors, clockwise from the right-hand one
P1, P2, P3, P4, P5, P6 = (1, 0), (1, -1), (0, -1), (-1, 0), (-1, 1), (0, 1)


def canonicalize(p, m, m2, n=None):
    """Canonical representative of label p: first coordinate in [0, m),
    second in [0, n).  n defaults to m (square quotient)."""
    if n is None:
        n = m
    if m < 2 or not 0 < m2 < n:
        raise ParameterError(f"need m >= 2 and 0 < m2 < n, got m={m}, m2={m2}, n={n}")
    p1, p2 = p
    j = p2 // n
    return ((p1 + j * m2) % m, p2 - j * n)


@dataclass(frozen=True)
class TorusParams:
    """Dimensions of the discrete torus and the particle sector.

    L, N are the horizontal and vertical periods, m1 the number of particles
    per row and m2 the winding sector.  epsilon and ell are optional scaling
    parameters tying the torus to its continuum limit via L = ell/epsilon
    with N = m1.
    """

    L: int
    N: int
    m1: int
    m2: int
    epsilon: float = None
    ell: float = None

    def __post_init__(self):
        if not 1 < self.m1 < self.L:
            raise ParameterError(f"need 1 < m1 < L, got m1={self.m1}, L={self.L}")
        if not 1 <= self.m2 < self.N:
            raise ParameterError(f"need 1 <= m2 < N, got m2={self.m2}, N={self.N}")
        if self.epsilon is not None:
            if self.epsilon <= 0:
                raise ParameterError("epsilon must be positive")
            if self.N != self.m1:
                raise ParameterError("scaling regime requires N == m1")
            if self.ell is None or abs(self.L * self.epsilon - self.ell) > 1e-9:
                raise ParameterError("scaling regime requires L = ell/epsilon")

    @classmethod
    def from_scaling(cls, epsilon, ell, m, m2):
        L = ell / epsilon
        if abs(L - round(L)) > 1e-9:
            raise ParameterError(f"ell/epsilon = {L} is not an integer")
        return cls(L=int(round(L)), N=m, m1=m, m2=m2, epsilon=epsilon, ell=ell)

    @property
    def sector_feasible(self):
        """Whether m1/L + m2/N < 1, i.e. the configuration space is nonempty."""
        return self.m1 / self.L + self.m2 / self.N < 1

    def canonical(self, p):
        return canonicalize(p, self.m1, self.m2, self.N)

    def labels(self):
        return [(j, i) for i in range(self.N) for j in range(self.m1)]

    @property
    def ideal_spacing_row(self):
        """Ideal same-row spacing L/m1 (the average of D_p + 1)."""
        return self.L / self.m1

    @property
    def ideal_spacing_up(self):
        """Ideal up-shift L*m2/(m1*N) (the average of C_p)."""
        return self.L * self.m2 / (self.m1 * self.N)


@dataclass(frozen=True)
class ParticleConfig:
    """Horizontal positions of all particles, keyed by canonical label."""

    torus: TorusParams
    positions: dict

    def x(self, p):
        return self.positions[self.torus.canonical(p)]

    def shifted(self, labels, step=1):
        """New configuration with the given labels moved right by step."""
        L = self.torus.L
        new = dict(self.positions)
        for p in labels:
            cp = self.torus.canonical(p)
            new[cp] = (new[cp] + step) % L
        return ParticleConfig(self.torus, new)

    def occupancy(self):
        """Label-free content of the configuration: frozenset of (row, x)."""
        return frozenset((p[1], x) for p, x in self.positions.items())


Gaps = namedtuple("Gaps", "a b c d e f")


def _gaps(torus, positions, p):
    L = torus.L
    can = torus.canonical
    x = positions[can(p)]
    p1, p2 = p
    xr = positions[can((p1 + 1, p2))]
    xl = positions[can((p1 - 1, p2))]
    xb_r = positions[can((p1 + 1, p2 - 1))]
    xb = positions[can((p1, p2 - 1))]
    xu_l = positions[can((p1 - 1, p2 + 1))]
    xu = positions[can((p1, p2 + 1))]
    return Gaps(
        a=(xr - x - 1) % L,
        b=(xb_r - x - 1) % L,
        c=(x - xb) % L,
        d=(x - xl - 1) % L,
        e=(x - xu_l - 1) % L,
        f=(xu - x) % L,
    )


def neighbor_distances(config, p):
    """Six non-negative gap counts around particle p.

    a, d count empty sites to the right/left neighbor on the same row,
    b, c locate the two interlacing partners in the row below, and
    e, f the two partners in the row above.
    """
    g = _gaps(config.torus, config.positions, p)
    if g.b > g.a or g.f > g.a or g.c > g.d or g.e > g.d:
        raise ConfigError(f"interlacing violated at label {config.torus.canonical(p)}")
    return g


@dataclass
class ValidationReport:
    ok: bool
    failures: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def validate(config):
    """Structured validity check: row counts, interlacing windows, sector."""
    torus = config.torus
    expected = set(torus.labels())
    got = set(config.positions)
    if got != expected:
        missing = sorted(expected - got)[:1]
        extra = sorted(got - expected)[:1]
        return ValidationReport(False, [f"label set mismatch (missing {missing}, extra {extra})"])
    for x in config.positions.values():
        if not isinstance(x, (int, np.integer)) or not 0 <= x < torus.L:
            return ValidationReport(False, [f"position {x} outside [0, {torus.L})"])
    for i in range(torus.N):
        row = [config.positions[(j, i)] for j in range(torus.m1)]
        if len(set(row)) != torus.m1:
            return ValidationReport(False, [f"row {i} has colliding particles"])
    for p in torus.labels():
        try:
            neighbor_distances(config, p)
        except ConfigError as err:
            return ValidationReport(False, [str(err)])
    try:
        sec = sector(config)
    except ConfigError as err:
        return ValidationReport(False, [f"sector walk failed: {err}"])
    if sec != torus.m2:
        return ValidationReport(False, [f"sector {sec} != m2 {torus.m2}"])
    return ValidationReport(True)


def _row_positions(config):
    torus = config.torus
    rows = []
    for i in range(torus.N):
        rows.append(sorted(config.positions[(j, i)] for j in range(torus.m1)))
    return rows


def _up_right(rows, L, x, row):
    """Position of the up-right partner of the particle at (x, row):
    the unique particle of row+1 inside [x, x_right - 1]."""
    m1 = len(rows[row])
    srow = rows[row]
    idx = srow.index(x)
    wa = (srow[(idx + 1) % m1] - x) % L
    if wa == 0:
        wa = L  # m1 == 1 cannot happen, but a full wrap means the whole row
    hits = [y for y in rows[(row + 1) % len(rows)] if (y - x) % L < wa]
    if len(hits) != 1:
        raise ConfigError(f"{len(hits)} up-right partners for particle at ({x}, row {row})")
    return hits[0]


def sector(config, start_label=(0, 0)):
    """Winding-number invariant m1*N_h/N_v of the up-right loop.

    Follows the geometric up-right partner from particle start_label until
    the loop closes; independent of the starting particle.
    """
    torus = config.torus
    rows = _row_positions(config)
    L, N = torus.L, torus.N
    x0 = config.positions[torus.canonical(start_label)]
    row0 = torus.canonical(start_label)[1]
    x, row = x0, row0
    steps = 0
    disp = 0
    limit = torus.m1 * N * N + 1
    while True:
        y = _up_right(rows, L, x, row)
        disp += (y - x) % L
        row = (row + 1) % N
        x = y
        steps += 1
        if (x, row) == (x0, row0):
            break
        if steps > limit:
            raise ConfigError("up-right walk does not close")
    if steps % N != 0 or disp % L != 0:
        raise ConfigError("up-right loop has fractional winding")
    n_v = steps // N
    n_h = disp // L
    if (torus.m1 * n_h) % n_v != 0:
        raise ConfigError(f"non-integer sector from windings N_h={n_h}, N_v={n_v}")
    return torus.m1 * n_h // n_v


def crystalline(torus):
    """Equi-spaced configuration with constant gaps; requires the ideal
    spacings L/m1 and L*m2/(m1*N) to be integers."""
    if not torus.sector_feasible:
        raise ParameterError("m1/L + m2/N >= 1: empty configuration space")
    dd = torus.ideal_spacing_row
    dc = torus.ideal_spacing_up
    if abs(dd - round(dd)) > 1e-9 or abs(dc - round(dc)) > 1e-9:
        raise ParameterError(
            f"ideal spacings ({dd}, {dc}) must be integers; adjust the parameter grid"
        )
    dd, dc = int(round(dd)), int(round(dc))
    positions = {
        (j, i): (j * dd + i * dc) % torus.L
        for i in range(torus.N)
        for j in range(torus.m1)
    }
    return ParticleConfig(torus, positions)


def _label_rows(torus, rows):
    """Build the canonical labeling of a geometrically valid set of rows:
    label (0,0) is the smallest position in row 0, (0,i) follows the up-right
    chain, and (j,i) walks right within the row."""
    L, N, m1 = torus.L, torus.N, torus.m1
    positions = {}
    anchor = min(rows[0])
    for i in range(N):
        srow = rows[i]
        idx = srow.index(anchor)
        for j in range(m1):
            positions[(j, i)] = srow[(idx + j) % m1]
        anchor_next = _up_right(rows, L, anchor, i)
        if i + 1 < N:
            anchor = anchor_next
        else:
            # wrap: up-right of (0, N-1) must carry label (m2 mod m1, 0)
            if anchor_next != positions[(torus.m2 % m1, 0)]:
                raise ConfigError("labeling wrap inconsistent with sector")
    return ParticleConfig(torus, positions)


def _rows_interlaced(L, below, row):
    """Each window (x, x_right] of `row` must contain exactly one particle
    of the row below it."""
    m1 = len(row)
    for idx, x in enumerate(row):
        wa = (row[(idx + 1) % m1] - x) % L
        if wa == 0:
            wa = L
        count = sum(1 for y in below if 1 <= (y - x) % L <= wa)
        if count != 1:
            return False
    return True


def enumerate_configs(torus):
    """Every configuration of the sector, by exhaustive row-by-row search.

    Guarded to small tori; rows are filled depth-first with interlacing
    pruning against the previous row, then the wrap row and the sector are
    checked.  Deterministic ordering.
    """
    if torus.L * torus.N > 24:
        raise StateSpaceError(f"torus with {torus.L * torus.N} sites is too large to enumerate")
    if not torus.sector_feasible:
        return []
    L, N, m1 = torus.L, torus.N, torus.m1
    row_choices = [list(c) for c in itertools.combinations(range(L), m1)]
    out = []

    def extend(rows):
        i = len(rows)
        if i == N:
            if not _rows_interlaced(L, rows[N - 1], rows[0]):
                return
            cfg_rows = [list(r) for r in rows]
            try:
                sec = _geometric_sector(torus, cfg_rows)
            except ConfigError:
                return
            if sec != torus.m2:
                return
            config = _label_rows(torus, cfg_rows)
            out.append(config)
            return
        for cand in row_choices:
            if i == 0 or _rows_interlaced(L, rows[i - 1], cand):
                extend(rows + [cand])

    extend([])
    return out


def _geometric_sector(torus, rows):
    L, N = torus.L, torus.N
    x0, row0 = rows[0][0], 0
    x, row = x0, row0
    steps = disp = 0
    limit = torus.m1 * N * N + 1
    while True:
        y = _up_right(rows, L, x, row)
        disp += (y - x) % L
        row = (row + 1) % N
        x = y
        steps += 1
        if (x, row) == (x0, row0):
            break
        if steps > limit:
            raise ConfigError("up-right walk does not close")
    n_v = steps // N
    n_h = disp // L
    if steps % N or disp % L or (torus.m1 * n_h) % n_v:
        raise ConfigError("fractional winding")
    return torus.m1 * n_h // n_v


@dataclass(frozen=True)
class FourierModeSet:
    """The m^2 momenta diagonalizing translation on the quotient label set.

    Mode (r1, r2) has k = (2 pi r1/m, (2 pi/m)(m2 r1/m + r2)) with integer
    r1, r2 in [-m/2, m/2); the functions f_k(p) = exp(-i p.k)/m form an
    orthonormal basis of fields on the labels.
    """

    m: int
    m2: int
    r1: np.ndarray
    r2: np.ndarray
    k: np.ndarray  # shape (m*m, 2)

    @property
    def zero_index(self):
        return int(np.nonzero((self.r1 == 0) & (self.r2 == 0))[0][0])

    def basis_matrix(self):
        """Matrix F[mode, site] = f_k(p) over canonical labels p in [0,m)^2,
        flattened with p2 fastest."""
        m = self.m
        p1, p2 = np.meshgrid(np.arange(m), np.arange(m), indexing="ij")
        phase = np.einsum("ki,i...->k...", self.k, np.array([p1, p2]))
        return np.exp(-1j * phase).reshape(len(self.k), m * m) / m

    def field_transform(self, xi):
        """hat(xi)_k = sum_p xi_p f_k(p) for a field xi indexed [p1, p2]."""
        m = self.m
        flat = np.asarray(xi, dtype=complex).reshape(*xi.shape[:-2], m * m)
        return flat @ self.basis_matrix().T

    def field_inverse(self, xi_hat):
        """xi_p = sum_k hat(xi)_k conj(f_k(p))."""
        m = self.m
        out = xi_hat @ np.conj(self.basis_matrix())
        return out.reshape(*xi_hat.shape[:-1], m, m)


def fourier_modes(m, m2):
    if m < 2 or not 0 < m2 < m:
        raise ParameterError(f"need m >= 2 and 0 < m2 < m, got m={m}, m2={m2}")
    rs = np.arange(-(m // 2), m - m // 2)
    r1, r2 = [a.ravel() for a in np.meshgrid(rs, rs, indexing="ij")]
    k1 = 2 * np.pi * r1 / m
    k2 = (2 * np.pi / m) * (m2 * r1 / m + r2)
    return FourierModeSet(m=m, m2=m2, r1=r1, r2=r2, k=np.column_stack([k1, k2]))


def config_to_text(config):
    """Plain-text serialization: header 'L N m1 m2', then 'p1 p2 x' lines."""
    torus = config.torus
    lines = [f"{torus.L} {torus.N} {torus.m1} {torus.m2}"]
    for p in sorted(config.positions):
        lines.append(f"{p[0]} {p[1]} {config.positions[p]}")
    return "\n".join(lines) + "\n"


def config_from_text(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParameterError("empty configuration text")
    try:
        L, N, m1, m2 = map(int, lines[0].split())
    except ValueError as err:
        raise ParameterError(f"bad header line: {lines[0]!r}") from err
    torus = TorusParams(L=L, N=N, m1=m1, m2=m2)
    positions = {}
    for ln in lines[1:]:
        try:
            p1, p2, x = map(int, ln.split())
        except ValueError as err:
            raise ParameterError(f"bad particle line: {ln!r}") from err
        positions[(p1, p2)] = x
    return ParticleConfig(torus, positions)
