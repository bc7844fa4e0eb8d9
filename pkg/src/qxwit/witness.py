"""The two-parameter witness family: bilinear action, Choi matrices, the
duality pairing, kernel product-vector families, dual-face states, see-saw
positivity checks and the motivating sum construction."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .qcore import ProductVector, check_hermitian, _square
from .xstate import XMatrix

#: Eighth root of unity used by every kernel family and dual state.
OMEGA = np.exp(1j * np.pi / 4.0)

ST_PRODUCT = 8.0
ST_TOL = 1e-9


@dataclass(frozen=True)
class WitnessFamily:
    """Parameters (s, t) of the witness; only pairs with s * t = 8 are valid."""

    s: float = 2.0 * math.sqrt(2.0)
    t: float = 2.0 * math.sqrt(2.0)

    def __post_init__(self):
        if self.s <= 0.0 or self.t <= 0.0:
            raise ValueError("witness parameters must be positive")
        if abs(self.s * self.t - ST_PRODUCT) >= ST_TOL:
            raise ValueError(
                f"witness parameters must satisfy s*t = 8, got s*t = {self.s * self.t!r}"
            )

    @property
    def u(self) -> float:
        """Derived ratio sqrt(s / t)."""
        return math.sqrt(self.s / self.t)

    @property
    def omega(self) -> complex:
        return OMEGA

    def choi(self) -> np.ndarray:
        return choi_explicit(self)


def phi_apply(w: WitnessFamily, x, y) -> np.ndarray:
    """Bilinear action of the witness map on a pair of 2x2 matrices."""
    x = _square(x, "first argument")
    y = _square(y, "second argument")
    if x.shape != (2, 2) or y.shape != (2, 2):
        raise ValueError("the map acts on pairs of 2x2 matrices")
    top_right = (
        x[0, 1] * y[0, 1] - x[0, 1] * y[1, 0] + x[1, 0] * y[0, 1] + x[1, 0] * y[1, 0]
    )
    bottom_left = (
        x[0, 1] * y[0, 1] + x[0, 1] * y[1, 0] - x[1, 0] * y[0, 1] + x[1, 0] * y[1, 0]
    )
    return np.array(
        [
            [w.s * x[1, 1] * y[0, 0], top_right],
            [bottom_left, w.t * x[0, 0] * y[1, 1]],
        ]
    )


def choi_generic(f: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> np.ndarray:
    """Assemble the 8x8 Choi matrix of a bilinear map from its values on the
    sixteen matrix-unit pairs."""
    c = np.zeros((8, 8), dtype=complex)
    for i1, j1, i2, j2 in itertools.product(range(2), repeat=4):
        e1 = np.zeros((2, 2), dtype=complex)
        e1[i1, j1] = 1.0
        e2 = np.zeros((2, 2), dtype=complex)
        e2[i2, j2] = 1.0
        block = np.asarray(f(e1, e2), dtype=complex)
        if block.shape != (2, 2):
            raise ValueError("the bilinear map must return 2x2 matrices")
        rows = 4 * i1 + 2 * i2
        cols = 4 * j1 + 2 * j2
        c[rows : rows + 2, cols : cols + 2] += block
    return c


def choi_explicit(w: WitnessFamily) -> np.ndarray:
    """Closed-form Choi matrix: diagonal t at 011 and s at 100, a symmetric 1
    linking them, and anti-diagonal entries (1, 1, -1) at (000,111), (001,110),
    (010,101)."""
    c = np.zeros((8, 8), dtype=complex)
    c[3, 3] = w.t
    c[4, 4] = w.s
    c[3, 4] = c[4, 3] = 1.0
    c[0, 7] = c[7, 0] = 1.0
    c[1, 6] = c[6, 1] = 1.0
    c[2, 5] = c[5, 2] = -1.0
    return c


def pairing(rho, c) -> float:
    """Duality pairing Tr(C rho^t) of two Hermitian matrices of equal size."""
    rho = check_hermitian(rho)
    c = check_hermitian(c)
    if rho.shape != c.shape:
        raise ValueError(f"shape mismatch: {rho.shape} vs {c.shape}")
    value = complex(np.sum(c * rho))
    if abs(value.imag) > 1e-10:
        raise ValueError(f"pairing has imaginary residue {value.imag:.3e}")
    return float(value.real)


def pairing_x(x: XMatrix, w: WitnessFamily) -> float:
    """Closed form of the pairing of an X matrix with the witness Choi matrix:
    t a4 + s b4 + 2 Re(c1 + c2 - c3 + c4)."""
    c = x.c
    return float(w.t * x.a[3] + w.s * x.b[3] + 2.0 * np.real(c[0] + c[1] - c[2] + c[3]))


# --- kernel product-vector families -----------------------------------------

_BASIS = (np.array([1.0, 0.0], dtype=complex), np.array([0.0, 1.0], dtype=complex))

#: Flat families: one free 2-vector factor, the other two pinned to basis kets.
_PV1_SLOTS = {
    "x01": (None, 0, 1),
    "x10": (None, 1, 0),
    "0y0": (0, None, 0),
    "1y1": (1, None, 1),
    "00z": (0, 0, None),
    "11z": (1, 1, None),
}

#: Phase exponents (powers of the eighth root of unity) of the curved families.
_PHASE_EIGHTHS = {
    "eta1": (3, 1, 7),
    "eta2": (3, 5, 3),
    "eta3": (7, 1, 3),
    "eta4": (7, 5, 7),
    "zeta1": (5, 7, 1),
    "zeta2": (5, 3, 5),
    "zeta3": (1, 7, 5),
    "zeta4": (1, 3, 1),
}

PV1_TAGS = tuple(_PV1_SLOTS)
ETA_TAGS = ("eta1", "eta2", "eta3", "eta4")
ZETA_TAGS = ("zeta1", "zeta2", "zeta3", "zeta4")
FAMILY_TAGS = PV1_TAGS + ETA_TAGS + ZETA_TAGS


def kernel_vector(w: WitnessFamily, tag: str, params) -> ProductVector:
    """Member of one of the fourteen kernel families.

    Flat families take a complex pair (the free factor); the eta and zeta
    families take two positive reals (a1, a2).  Every returned vector v pairs
    to zero with the Choi matrix: pairing(|v><v|, C) = 0.
    """
    if tag in _PV1_SLOTS:
        free = np.asarray(params, dtype=complex)
        if free.shape != (2,):
            raise ValueError(f"family {tag} takes a complex 2-vector parameter")
        factors = [free if s is None else _BASIS[s] for s in _PV1_SLOTS[tag]]
        return ProductVector(*factors)
    if tag in _PHASE_EIGHTHS:
        a1, a2 = params
        if a1 <= 0.0 or a2 <= 0.0:
            raise ValueError(f"family {tag} takes two positive parameters")
        u = w.u
        mods = (math.sqrt(u * a1), math.sqrt(a2 / u), math.sqrt(a1 / a2))
        ks = _PHASE_EIGHTHS[tag]
        return ProductVector(*(np.array([m, OMEGA**k]) for m, k in zip(mods, ks)))
    raise ValueError(f"unknown kernel family tag {tag!r}")


_PV4_BITS = ((0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 1), (1, 1, 0), (1, 1, 1))


def pv4_vectors() -> list:
    """The six basis product vectors contained in the flat kernel families."""
    return [ProductVector(_BASIS[i], _BASIS[j], _BASIS[k]) for i, j, k in _PV4_BITS]


def dual_state(w: WitnessFamily, kind: int, a1: float, a2: float) -> XMatrix:
    """Rank-four separable X states pairing to zero with the Choi matrix.

    Both kinds share the diagonal (a1, a2, u a1/a2, u) / (1/a1, 1/a2,
    a2/(u a1), 1/u); they differ in the anti-diagonal phase pattern.
    """
    if kind not in (1, 2):
        raise ValueError("kind must be 1 or 2")
    if a1 <= 0.0 or a2 <= 0.0:
        raise ValueError("dual state parameters must be positive")
    u = w.u
    a = np.array([a1, a2, u * a1 / a2, u])
    b = np.array([1.0 / a1, 1.0 / a2, a2 / (u * a1), 1.0 / u])
    if kind == 1:
        c = OMEGA ** np.array([-3, 3, -1, -3])
    else:
        c = OMEGA ** np.array([3, -3, 1, 3])
    return XMatrix(a, b, c)


@dataclass(frozen=True)
class KernelGrid:
    """Sampling grid over the kernel families and dual states.

    Flat families are sampled at ``phase_count`` unimodular phases plus the
    two basis endpoints; eta/zeta families and dual states run over the
    cartesian square of ``ab_values``.
    """

    phase_count: int = 5
    ab_values: tuple = (0.5, 1.0, 2.0)
    name: str = "default"

    @classmethod
    def small(cls) -> "KernelGrid":
        return cls(phase_count=3, ab_values=(0.5, 2.0), name="small")

    @classmethod
    def default(cls) -> "KernelGrid":
        return cls()

    @classmethod
    def fine(cls) -> "KernelGrid":
        return cls(
            phase_count=7,
            ab_values=(1.0 / 3.0, 0.5, 1.0, 2.0, 3.0),
            name="fine",
        )

    @classmethod
    def named(cls, name: str) -> "KernelGrid":
        presets = {"small": cls.small, "default": cls.default, "fine": cls.fine}
        if name not in presets:
            raise ValueError(f"unknown grid preset {name!r}")
        return presets[name]()

    def pv1_params(self) -> list:
        params = [np.array([1.0, 0.0], dtype=complex), np.array([0.0, 1.0], dtype=complex)]
        for k in range(self.phase_count):
            phase = np.exp(2j * np.pi * k / self.phase_count)
            params.append(np.array([1.0, phase]))
        return params

    def kernel_ids(self) -> list:
        ids = []
        for tag in PV1_TAGS:
            for p in self.pv1_params():
                ids.append((tag, p))
        for tag in ETA_TAGS + ZETA_TAGS:
            for a1 in self.ab_values:
                for a2 in self.ab_values:
                    ids.append((tag, (a1, a2)))
        return ids

    def dual_params(self) -> list:
        return [
            (kind, a1, a2)
            for kind in (1, 2)
            for a1 in self.ab_values
            for a2 in self.ab_values
        ]

    def describe(self) -> dict:
        return {
            "name": self.name,
            "phase_count": self.phase_count,
            "ab_values": list(self.ab_values),
        }


def kernel_vectors(w: WitnessFamily, grid: KernelGrid) -> list:
    """All kernel vectors of a grid, in the grid's enumeration order."""
    return [kernel_vector(w, tag, params) for tag, params in grid.kernel_ids()]


# --- see-saw minimization over product vectors -------------------------------


@dataclass(frozen=True)
class SeesawResult:
    min_value: float
    argmin: ProductVector
    restarts: int
    seed: int
    cycles: int


def _batched_min_eigvec(m: np.ndarray, current: np.ndarray) -> np.ndarray:
    """Unit minimal eigenvectors of a batch of 2x2 Hermitian matrices.

    Rows whose matrix is (numerically) a multiple of the identity keep the
    current vector, since any unit vector is then optimal.
    """
    a = m[:, 0, 0].real
    d = m[:, 1, 1].real
    od = m[:, 0, 1]
    half = 0.5 * (a - d)
    lam = 0.5 * (a + d) - np.sqrt(half * half + np.abs(od) ** 2)
    v1 = np.stack([lam - d, od.conj()], axis=1)
    v2 = np.stack([-od, a - lam], axis=1)
    n1 = np.linalg.norm(v1, axis=1)
    n2 = np.linalg.norm(v2, axis=1)
    use2 = n2 > n1
    vec = np.where(use2[:, None], v2, v1)
    nrm = np.where(use2, n2, n1)
    scale = np.abs(a) + np.abs(d) + 2.0 * np.abs(od) + 1e-300
    degenerate = nrm <= 1e-14 * scale
    safe = np.where(degenerate, 1.0, nrm)
    vec = np.where(degenerate[:, None], current, vec / safe[:, None])
    norms = np.linalg.norm(vec, axis=1)
    return vec / norms[:, None]


def _seesaw(c8: np.ndarray, restarts: int, seed: int, max_cycles: int, stall_tol: float):
    """Run all restarts of the cyclic see-saw simultaneously.

    Minimizes <eta| C |eta> over unit product vectors eta; one party at a time
    is replaced by the minimal eigenvector of its effective 2x2 matrix.
    Returns converged values and the three factor batches.
    """
    c6 = c8.reshape((2,) * 6)
    rng = np.random.default_rng(seed)

    def random_factors():
        v = rng.standard_normal((restarts, 2)) + 1j * rng.standard_normal((restarts, 2))
        return v / np.linalg.norm(v, axis=1)[:, None]

    fa, fb, fz = random_factors(), random_factors(), random_factors()
    values = np.full(restarts, np.inf)
    cycles = 0
    for cycles in range(1, max_cycles + 1):
        m = np.einsum("abcdef,nb,nc,ne,nf->nad", c6, fb.conj(), fz.conj(), fb, fz)
        fa = _batched_min_eigvec(m, fa)
        m = np.einsum("abcdef,na,nc,nd,nf->nbe", c6, fa.conj(), fz.conj(), fa, fz)
        fb = _batched_min_eigvec(m, fb)
        m = np.einsum("abcdef,na,nb,nd,ne->ncf", c6, fa.conj(), fb.conj(), fa, fb)
        fz = _batched_min_eigvec(m, fz)
        new = np.einsum("ni,nij,nj->n", fz.conj(), m, fz).real
        if cycles > 1 and float(np.max(np.abs(new - values))) < stall_tol:
            values = new
            break
        values = new
    return values, fa, fb, fz, cycles


def seesaw_minima(
    matrix,
    restarts: int = 200,
    seed: int = 0,
    max_cycles: int = 300,
    stall_tol: float = 1e-12,
):
    """Converged see-saw values and minimizing product vectors, one per restart.

    The returned vectors v satisfy pairing(|v><v|, matrix) = value.
    """
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    c8 = check_hermitian(matrix)
    if c8.shape != (8, 8):
        raise ValueError("see-saw needs an 8x8 Hermitian matrix")
    values, fa, fb, fz, _ = _seesaw(c8, restarts, seed, max_cycles, stall_tol)
    vectors = [
        ProductVector(fa[k].conj(), fb[k].conj(), fz[k].conj()) for k in range(restarts)
    ]
    return values, vectors


def min_product_value(
    matrix,
    restarts: int = 200,
    seed: int = 0,
    max_cycles: int = 300,
    stall_tol: float = 1e-12,
) -> SeesawResult:
    """Global see-saw minimum of the quadratic form over unit product vectors."""
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    c8 = check_hermitian(matrix)
    if c8.shape != (8, 8):
        raise ValueError("see-saw needs an 8x8 Hermitian matrix")
    values, fa, fb, fz, cycles = _seesaw(c8, restarts, seed, max_cycles, stall_tol)
    k = int(np.argmin(values))
    argmin = ProductVector(fa[k].conj(), fb[k].conj(), fz[k].conj())
    return SeesawResult(
        min_value=float(values[k]),
        argmin=argmin,
        restarts=restarts,
        seed=seed,
        cycles=cycles,
    )


def verify_positive(w: WitnessFamily, restarts: int = 200, seed: int = 0) -> SeesawResult:
    """See-saw check that the witness quadratic form is nonnegative on product
    vectors; the minimum is expected to sit at zero, on a kernel family."""
    return min_product_value(choi_explicit(w), restarts=restarts, seed=seed)


# --- motivating sum construction ---------------------------------------------


class MotivatingSum(NamedTuple):
    a: np.ndarray
    b: np.ndarray
    total: np.ndarray


def _transpose_second_factor(m4: np.ndarray) -> np.ndarray:
    return m4.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def motivating_sum(alpha) -> MotivatingSum:
    """Rank-one positive summands whose combination is linear in the input state.

    For the rank-one matrix P = [[1, conj(alpha)], [alpha, |alpha|^2]], builds
    the positive matrices A and B supported on the middle 2x2 block and returns
    (A, B, A + B^T) where B^T transposes the second tensor factor of M2 (x) M2.
    The total coincides with the linear map ``motivating_linear_map`` evaluated
    at P, while neither A nor B^T alone extends linearly.
    """
    alpha = complex(alpha)
    s = alpha.conjugate() + alpha
    d = alpha.conjugate() - alpha
    a = np.zeros((4, 4), dtype=complex)
    a[1, 1] = abs(s) ** 2
    a[1, 2] = s
    a[2, 1] = np.conj(s)
    a[2, 2] = 1.0
    b = np.zeros((4, 4), dtype=complex)
    b[1, 1] = abs(d) ** 2
    b[1, 2] = d
    b[2, 1] = np.conj(d)
    b[2, 2] = 1.0
    return MotivatingSum(a=a, b=b, total=a + _transpose_second_factor(b))


def motivating_linear_map(p) -> np.ndarray:
    """Linear extension of the motivating sum to arbitrary 2x2 inputs."""
    p = _square(p, "input")
    if p.shape != (2, 2):
        raise ValueError("the motivating map acts on 2x2 matrices")
    out = np.zeros((4, 4), dtype=complex)
    out[0, 3] = p[0, 1] - p[1, 0]
    out[3, 0] = p[1, 0] - p[0, 1]
    out[1, 1] = 4.0 * p[1, 1]
    out[1, 2] = p[0, 1] + p[1, 0]
    out[2, 1] = p[1, 0] + p[0, 1]
    out[2, 2] = 2.0 * p[0, 0]
    return out
