"""Desk-scale measure experiments on the (W, Z) quarter-plane.

A Young-measure stand-in is a finite atomic probability measure on
W = rho e^u >= 0, Z = rho e^{-u} >= 0 (vacuum = the coordinate axes).  The lab
provides the commutation functional for entropy pairs, its closed-form value
for measures of the form alpha * delta_P + (1 - alpha) * vacuum, the
mollifier-product limit lemmas with their one-sided coefficients B+-, C+-,
the antisymmetric pairing Y, the threshold function D(R), and the
support-reduction classifier driven by the region

    M* = ({W' < W*} and {Z' < 1/W*})  union  ({W' < 1/Z*} and {Z' < Z*}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DomainError
from .quadrature import simpson_uniform

__all__ = [
    "DiscreteMeasure",
    "PowerEntropyPair",
    "Mollifier",
    "MollifierPair",
    "Verdict",
    "MollifierLimitResult",
    "polynomial_bump",
    "commutation_residual",
    "dichotomy_check",
    "mollifier_limit_I",
    "mollifier_limit_J",
    "mollifier_limit_K",
    "compute_Y",
    "D_of_R",
    "support_reduction_classify",
    "EPS_SCHEDULE",
]

EPS_SCHEDULE = tuple(2.0**-k for k in range(3, 11))
WEIGHT_TOL = 1e-12


@dataclass
class DiscreteMeasure:
    """Weighted atoms (W, Z, weight) with weights summing to one."""

    atoms: np.ndarray  # shape (n, 3)
    box: tuple[float, float] | None = None  # (W2, Z2); default hull of atoms

    def __post_init__(self):
        self.atoms = np.atleast_2d(np.asarray(self.atoms, float))
        if self.atoms.shape[1] != 3:
            raise DomainError("atoms must be rows (W, Z, weight)")
        W, Z, w = self.atoms.T
        if np.any(W < 0) or np.any(Z < 0):
            raise DomainError("atoms must lie in the closed quarter-plane")
        if np.any(w < 0):
            raise DomainError("weights must be nonnegative")
        if abs(np.sum(w) - 1.0) > WEIGHT_TOL:
            raise DomainError(f"weights sum to {np.sum(w)!r}, not 1")
        if self.box is None:
            self.box = (float(np.max(W)), float(np.max(Z)))
        W2, Z2 = self.box
        if np.any(W > W2 + 1e-15) or np.any(Z > Z2 + 1e-15):
            raise DomainError("atoms exceed the declared support box")

    @property
    def W(self) -> np.ndarray:
        return self.atoms[:, 0]

    @property
    def Z(self) -> np.ndarray:
        return self.atoms[:, 1]

    @property
    def weights(self) -> np.ndarray:
        return self.atoms[:, 2]

    def expect(self, values: np.ndarray) -> float:
        return float(np.sum(self.weights * values))

    def off_vacuum_indices(self) -> np.ndarray:
        return np.nonzero(self.W * self.Z > 0.0)[0]

    @classmethod
    def dirac_plus_vacuum(
        cls, alpha: float, P: tuple[float, float], n_vacuum: int = 4
    ) -> "DiscreteMeasure":
        """alpha at P plus (1 - alpha) spread over atoms on the axes."""
        if not (0.0 <= alpha <= 1.0):
            raise DomainError("alpha must lie in [0, 1]")
        W0, Z0 = P
        rows = [(W0, Z0, alpha)]
        per = (1.0 - alpha) / n_vacuum
        for k in range(n_vacuum):
            if k % 2 == 0:
                rows.append((0.1 + 0.2 * k, 0.0, per))
            else:
                rows.append((0.0, 0.1 + 0.2 * k, per))
        return cls(np.array(rows))


@dataclass(frozen=True)
class PowerEntropyPair:
    """Closed forms eta = rho^B e^{A u}, q = -(A/(B-1)) rho^{B-1} e^{A u},
    A = sqrt(B (B-1)); extended by 0 on the vacuum (weak-pair convention).

    The flux is used verbatim in the commutation algebra; its residual against
    the pair-compatibility system is reported by compatibility_residual(), not
    asserted.
    """

    B: float

    def __post_init__(self):
        if not self.B > 1.0:
            raise DomainError("power entropy pairs need B > 1")

    @property
    def A(self) -> float:
        return math.sqrt(self.B * (self.B - 1.0))

    def eta_q(self, W, Z) -> tuple[np.ndarray, np.ndarray]:
        W = np.asarray(W, float)
        Z = np.asarray(Z, float)
        off = W * Z > 0.0
        eta = np.zeros(np.broadcast(W, Z).shape)
        q = np.zeros_like(eta)
        if np.any(off):
            A, B = self.A, self.B
            Wo, Zo = W[off], Z[off]
            rho = np.sqrt(Wo * Zo)
            u = 0.5 * np.log(Wo / Zo)
            eta[off] = rho**B * np.exp(A * u)
            q[off] = -(A / (B - 1.0)) * rho ** (B - 1.0) * np.exp(A * u)
        return eta, q

    def compatibility_residual(self, rho: float, u: float, d: float = 1e-6) -> float:
        """Reported (not asserted) centered-difference residual of the pair
        relations q_rho = u eta_rho + eta_u / rho, q_u = rho eta_rho + u eta_u."""
        def eta(r, uu):
            return r**self.B * math.exp(self.A * uu)

        def q(r, uu):
            return -(self.A / (self.B - 1.0)) * r ** (self.B - 1.0) * math.exp(self.A * uu)

        q_r = (q(rho + d, u) - q(rho - d, u)) / (2 * d)
        q_u = (q(rho, u + d) - q(rho, u - d)) / (2 * d)
        eta_r = (eta(rho + d, u) - eta(rho - d, u)) / (2 * d)
        eta_u = (eta(rho, u + d) - eta(rho, u - d)) / (2 * d)
        r1 = q_r - (u * eta_r + eta_u / rho)
        r2 = q_u - (rho * eta_r + u * eta_u)
        return max(abs(r1), abs(r2))


def commutation_residual(nu: DiscreteMeasure, pair1, pair2) -> float:
    """<eta1 q2 - eta2 q1> - (<eta1><q2> - <eta2><q1>), atom sums."""
    e1, q1 = pair1.eta_q(nu.W, nu.Z)
    e2, q2 = pair2.eta_q(nu.W, nu.Z)
    lhs = nu.expect(e1 * q2 - e2 * q1)
    rhs = nu.expect(e1) * nu.expect(q2) - nu.expect(e2) * nu.expect(q1)
    return lhs - rhs


def dichotomy_check(
    nu: DiscreteMeasure, B1: float, B2: float
) -> tuple[float, float]:
    """Measured commutation residual vs. the closed-form prediction

        alpha (1 - alpha) rho*^{B1+B2-1} e^{(A1+A2) u*}
            (sqrt(B1/(B1-1)) - sqrt(B2/(B2-1)))

    for a measure with a single off-vacuum atom of weight alpha at P = (W*, Z*).
    """
    if not (B1 > 1.0 and B2 > 1.0):
        raise DomainError("dichotomy check needs B1, B2 > 1")
    off = nu.off_vacuum_indices()
    if off.size > 1:
        raise DomainError("dichotomy check needs at most one off-vacuum atom")
    p1, p2 = PowerEntropyPair(B1), PowerEntropyPair(B2)
    residual = commutation_residual(nu, p1, p2)
    if off.size == 0:
        return residual, 0.0
    W0, Z0, alpha = nu.atoms[off[0]]
    rho = math.sqrt(W0 * Z0)
    u = 0.5 * math.log(W0 / Z0)
    predicted = (
        alpha
        * (1.0 - alpha)
        * rho ** (B1 + B2 - 1.0)
        * math.exp((p1.A + p2.A) * u)
        * (math.sqrt(B1 / (B1 - 1.0)) - math.sqrt(B2 / (B2 - 1.0)))
    )
    return residual, predicted


# --------------------------------------------------------------------------
# mollifiers and the product-limit lemmas
# --------------------------------------------------------------------------


def polynomial_bump(center: float = 0.0, width: float = 1.0):
    """Normalized C^2 bump (35/32)(1 - y^2)^3 rescaled to (center +- width)."""

    def phi(s):
        y = (np.asarray(s, float) - center) / width
        inside = np.abs(y) < 1.0
        return np.where(inside, (35.0 / 32.0) / width * (1.0 - y * y) ** 3, 0.0)

    return phi


@dataclass
class Mollifier:
    """Nonnegative unit-mass bump sampled on (-1, 1)."""

    samples: np.ndarray
    grid: np.ndarray = field(default=None)

    def __post_init__(self):
        self.samples = np.asarray(self.samples, float)
        if self.grid is None:
            self.grid = np.linspace(-1.0, 1.0, self.samples.size)
        self.grid = np.asarray(self.grid, float)
        if self.samples.shape != self.grid.shape or self.samples.size < 9:
            raise DomainError("mollifier needs matching sample/grid arrays")
        if np.any(self.samples < -1e-14):
            raise DomainError("mollifier must be nonnegative")
        if abs(self.samples[0]) > 1e-12 or abs(self.samples[-1]) > 1e-12:
            raise DomainError("mollifier support must lie inside (-1, 1)")
        self._spline = CubicSpline(self.grid, self.samples, bc_type="natural")
        self._anti = self._spline.antiderivative()
        mass = float(self._anti(1.0) - self._anti(-1.0))
        if abs(mass - 1.0) > 1e-10:
            raise DomainError(f"mollifier mass {mass!r} is not 1 within 1e-10")

    @classmethod
    def from_callable(cls, phi, n: int = 2049) -> "Mollifier":
        grid = np.linspace(-1.0, 1.0, n)
        return cls(samples=np.asarray(phi(grid), float), grid=grid)

    def __call__(self, y):
        y = np.asarray(y, float)
        inside = (y > -1.0) & (y < 1.0)
        vals = self._spline(np.clip(y, -1.0, 1.0))
        out = np.where(inside, np.maximum(vals, 0.0), 0.0)
        return out if out.shape else float(out)

    def cdf(self, y):
        y = np.asarray(y, float)
        vals = self._anti(np.clip(y, -1.0, 1.0)) - self._anti(-1.0)
        out = np.where(y <= -1.0, 0.0, np.where(y >= 1.0, 1.0, vals))
        return out if out.shape else float(out)

    def scaled(self, eps: float, center: float):
        """phi^eps(s - center) = phi((s - center)/eps)/eps."""

        def f(s):
            return self(np.asarray((np.asarray(s, float) - center) / eps)) / eps

        return f


@dataclass
class MollifierPair:
    """Ordered pair (outer, inner) with the one-sided mass splittings:

        B- = int_0^inf outer(y) CDF_inner(y) dy
        C- = int_{-inf}^0 outer(y) CDF_inner(y) dy
        B+ = int_0^inf outer(y) (1 - CDF_inner(y)) dy
        C+ = int_{-inf}^0 outer(y) (1 - CDF_inner(y)) dy
    """

    outer: Mollifier
    inner: Mollifier
    n_nodes: int = 4097

    def __post_init__(self):
        y_pos = np.linspace(0.0, 1.0, self.n_nodes)
        y_neg = np.linspace(-1.0, 0.0, self.n_nodes)
        h = 1.0 / (self.n_nodes - 1)
        cdf_pos = self.inner.cdf(y_pos)
        cdf_neg = self.inner.cdf(y_neg)
        out_pos = self.outer(y_pos)
        out_neg = self.outer(y_neg)
        self.B_minus = float(simpson_uniform(out_pos * cdf_pos, h))
        self.C_minus = float(simpson_uniform(out_neg * cdf_neg, h))
        self.B_plus = float(simpson_uniform(out_pos * (1.0 - cdf_pos), h))
        self.C_plus = float(simpson_uniform(out_neg * (1.0 - cdf_neg), h))

    @property
    def A_minus(self) -> float:
        return self.B_minus + self.C_minus

    @property
    def A_plus(self) -> float:
        return self.B_plus + self.C_plus

    def swapped(self) -> "MollifierPair":
        return MollifierPair(self.inner, self.outer, self.n_nodes)


def compute_Y(phi2: Mollifier, phi3: Mollifier) -> float:
    """Antisymmetric double integral over {s3 < s2} of
    phi2(s2) phi3(s3) - phi3(s2) phi2(s3)."""
    p23 = MollifierPair(phi2, phi3)
    p32 = MollifierPair(phi3, phi2)
    return p23.A_minus - p32.A_minus


@dataclass
class MollifierLimitResult:
    eps: np.ndarray
    values: np.ndarray
    limit: float

    def errors(self) -> np.ndarray:
        return np.abs(self.values - self.limit)


def _nudged_nodes(lo: float, hi: float, n: int) -> np.ndarray:
    """Simpson nodes with endpoints pulled inward by a relative hair, so
    integrands with jumps exactly at lo/hi are read one-sidedly."""
    x = np.linspace(lo, hi, n)
    pad = 1e-12 * (hi - lo)
    x[0] += pad
    x[-1] -= pad
    return x


def _nested(outer_fn, inner_fn, o_lo, o_hi, i_lo_fn, i_hi_fn, n1=257, n3=257):
    """int outer_fn(s1) * [int_{i_lo(s1)}^{i_hi(s1)} inner_fn(s1, s3) ds3] ds1."""
    if o_hi <= o_lo:
        return 0.0
    s1 = _nudged_nodes(o_lo, o_hi, n1)
    lows = i_lo_fn(s1)
    highs = np.maximum(i_hi_fn(s1), lows)
    tau = np.linspace(0.0, 1.0, n3)
    s3 = lows[:, None] + (highs - lows)[:, None] * tau
    inner_vals = inner_fn(s1[:, None], s3)
    inner = simpson_uniform(inner_vals, 1.0 / (n3 - 1), axis=-1) * (highs - lows)
    total = simpson_uniform(outer_fn(s1) * inner, (o_hi - o_lo) / (n1 - 1))
    return float(total)


def mollifier_limit_I(
    f, F, psi, a: float, b: float, a_lo: float, b_hi: float,
    phi2: Mollifier, phi3: Mollifier,
    eps_seq=EPS_SCHEDULE,
) -> MollifierLimitResult:
    """Regularized product centered at the lower inner endpoint a:

        I_eps = int_{a_lo}^{b_hi} psi f phi2_eps(s1 - a)
                    int_a^b F phi3_eps(s1 - s3) ds3 ds1

    converging to psi(a) F(a) [A- f(a) (a interior) | B- f(a_lo+) (a = a_lo)
    | C- f(b_hi-) (a = b_hi)], with the (2,3)-ordered coefficients."""
    if b <= a:
        raise DomainError("need a < b for the inner interval")
    pair = MollifierPair(phi2, phi3)
    vals = []
    for eps in eps_seq:
        val = _nested(
            lambda s1, e=eps: psi(s1) * f(s1) * phi2.scaled(e, a)(s1),
            lambda s1, s3, e=eps: F(s3) * phi3.scaled(e, 0.0)(s1 - s3),
            max(a_lo, a - eps), min(b_hi, a + eps),
            lambda s1, e=eps: np.maximum(a, s1 - e),
            lambda s1, e=eps: np.minimum(b, s1 + e),
        )
        vals.append(val)
    tol = 1e-9 * (b_hi - a_lo)
    if a_lo + tol < a < b_hi - tol:
        limit = psi(a) * F(a) * pair.A_minus * f(a)
    elif abs(a - a_lo) <= tol:
        limit = psi(a) * F(a) * pair.B_minus * f(a_lo + 1e-12)
    elif abs(a - b_hi) <= tol:
        limit = psi(a) * F(a) * pair.C_minus * f(b_hi - 1e-12)
    else:
        limit = 0.0
    return MollifierLimitResult(np.asarray(eps_seq), np.asarray(vals), float(limit))


def mollifier_limit_J(
    f, F, psi, a: float, b: float, a_lo: float, b_hi: float,
    phi2: Mollifier, phi3: Mollifier,
    eps_seq=EPS_SCHEDULE,
) -> MollifierLimitResult:
    """As the I-form but centered at the upper inner endpoint b; the limit
    carries the (2,3)-ordered B+/C+ coefficients and tests b's position."""
    if b <= a:
        raise DomainError("need a < b for the inner interval")
    pair = MollifierPair(phi2, phi3)
    vals = []
    for eps in eps_seq:
        val = _nested(
            lambda s1, e=eps: psi(s1) * f(s1) * phi2.scaled(e, b)(s1),
            lambda s1, s3, e=eps: F(s3) * phi3.scaled(e, 0.0)(s1 - s3),
            max(a_lo, b - eps), min(b_hi, b + eps),
            lambda s1, e=eps: np.maximum(a, s1 - e),
            lambda s1, e=eps: np.minimum(b, s1 + e),
        )
        vals.append(val)
    tol = 1e-9 * (b_hi - a_lo)
    if a_lo + tol < b < b_hi - tol:
        limit = psi(b) * F(b) * pair.A_plus * f(b)
    elif abs(b - a_lo) <= tol:
        limit = psi(b) * F(b) * pair.B_plus * f(a_lo + 1e-12)
    elif abs(b - b_hi) <= tol:
        limit = psi(b) * F(b) * pair.C_plus * f(b_hi - 1e-12)
    else:
        limit = 0.0
    return MollifierLimitResult(np.asarray(eps_seq), np.asarray(vals), float(limit))


def mollifier_limit_K(
    f, F, psi, a: float, b: float, alpha: float,
    phi2: Mollifier, phi3: Mollifier,
    eps_seq=EPS_SCHEDULE,
    f_sided: dict | None = None,
) -> MollifierLimitResult:
    """Product with the outer mollifier phi3 centered at alpha and f allowed
    to jump at a and b:

        K_eps = int psi f phi3_eps(s1 - alpha) int_a^b F phi2_eps(s1 - s3) ds3 ds1.

    The edge coefficients carry the swapped (3,2) ordering (outer mollifier is
    phi3), matching the change-of-variables computation:
    alpha = a:  C-_{3,2} f(a-) + B-_{3,2} f(a+);
    alpha = b:  C+_{3,2} f(b-) + B+_{3,2} f(b+).
    One-sided values default to f(x -+ 1e-9); override via f_sided.
    """
    if b <= a:
        raise DomainError("need a < b")
    pair32 = MollifierPair(phi3, phi2)
    vals = []
    for eps in eps_seq:
        o_lo, o_hi = alpha - eps, alpha + eps
        total = 0.0
        cuts = [o_lo] + [c for c in (a, b) if o_lo < c < o_hi] + [o_hi]
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            total += _nested(
                lambda s1, e=eps: psi(s1) * f(s1) * phi3.scaled(e, alpha)(s1),
                lambda s1, s3, e=eps: F(s3) * phi2.scaled(e, 0.0)(s1 - s3),
                lo, hi,
                lambda s1, e=eps: np.maximum(a, s1 - e),
                lambda s1, e=eps: np.minimum(b, s1 + e),
            )
        vals.append(total)
    sided = f_sided or {}
    d = 1e-9 * (b - a)
    if a < alpha < b:
        limit = psi(alpha) * F(alpha) * f(alpha)
    elif alpha == a:
        f_am = sided.get("a-", f(a - d))
        f_ap = sided.get("a+", f(a + d))
        limit = psi(a) * F(a) * (pair32.C_minus * f_am + pair32.B_minus * f_ap)
    elif alpha == b:
        f_bm = sided.get("b-", f(b - d))
        f_bp = sided.get("b+", f(b + d))
        limit = psi(b) * F(b) * (pair32.C_plus * f_bm + pair32.B_plus * f_bp)
    else:
        limit = 0.0
    return MollifierLimitResult(np.asarray(eps_seq), np.asarray(vals), float(limit))


# --------------------------------------------------------------------------
# threshold function and support reduction
# --------------------------------------------------------------------------


def D_of_R(R: float) -> float:
    """D(R) = (-1/2 + 15 |R| / 8) e^{R/2}; >= e^{R/2}/2 once |R| >= 8/15."""
    if not math.isfinite(R):
        raise DomainError("R must be finite")
    return (-0.5 + 15.0 * abs(R) / 8.0) * math.exp(R / 2.0)


@dataclass(frozen=True)
class Verdict:
    kind: str  # dirac_plus_vacuum | violates_reduction
    alpha: float | None = None
    point: tuple[float, float] | None = None
    violating_pair: tuple[int, int] | None = None
    mstar_mass: float = 0.0
    reason: str = ""


def _in_mstar(Ws: float, Zs: float, W: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """Strict membership in M* of (Ws, Zs); boundary atoms count as outside."""
    first = (W < Ws) & (Z < 1.0 / Ws)
    second = (W < 1.0 / Zs) & (Z < Zs)
    return first | second


def support_reduction_classify(nu: DiscreteMeasure) -> Verdict:
    """Dirac-plus-vacuum test: every off-vacuum atom's M* region must carry
    zero (W' Z')^{1/4}-mass and at most one off-vacuum atom may exist."""
    off = nu.off_vacuum_indices()
    W, Z, w = nu.W, nu.Z, nu.weights
    quarter = (W * Z) ** 0.25
    for i in off:
        inside = _in_mstar(W[i], Z[i], W, Z)
        inside[i] = False
        mass = float(np.sum(w[inside] * quarter[inside]))
        if mass > 0.0:
            j = int(np.nonzero(inside & (quarter > 0))[0][0])
            return Verdict(
                kind="violates_reduction",
                violating_pair=(int(i), j),
                mstar_mass=mass,
                reason="off-vacuum mass inside the exclusion region",
            )
    if off.size > 1:
        return Verdict(
            kind="violates_reduction",
            violating_pair=(int(off[0]), int(off[1])),
            reason="more than one off-vacuum atom",
        )
    if off.size == 0:
        return Verdict(kind="dirac_plus_vacuum", alpha=0.0, point=None)
    i = int(off[0])
    return Verdict(
        kind="dirac_plus_vacuum",
        alpha=float(w[i]),
        point=(float(W[i]), float(Z[i])),
    )
