"""Kernel branches, critical points and the eight-region classification.

Everything in this module is driven by the geometry of the set
D = {(x, y) : x > 0, y > 0, P(x, y) <= 1} where P is the interior jump
generating function.  In logarithmic coordinates P becomes a finite sum of
exponentials, hence strictly convex, so

* for fixed x in the x-range of D the equation P(x, y) = 1 has exactly two
  positive roots Y1(x) <= Y2(x) (equal only at the endpoints of the range),
* the same holds for X1(y) <= X2(y) at fixed y,
* every one-dimensional root search below operates on a convex function of a
  log coordinate, which makes brackets easy to certify.

On top of the branches the module computes

* the x- and y-ranges of D ("caps"),
* the ranges of the constrained sets D cap {phi1 <= 1} and D cap {phi2 <= 1}
  whose upper endpoints are the classification inputs,
* the eight-region classification of the model,
* the dominant singularities (x_d, y_d) of the axis Green generating
  functions,
* the outward-normal direction map on the upper-right boundary arc and the
  partition of interior directions used by the directional asymptotics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

from scipy.optimize import brentq

from .model import WalkModel

__all__ = [
    "BranchPoint",
    "NotOnBoundary",
    "UnsupportedRegion",
    "KernelGeometry",
    "RegionResult",
    "DominantSingularities",
    "DirectionPartition",
]

# Relative tolerance used by sign decisions on generating-function values.
SIGN_TOL = 1e-12
# Relative tolerance used by the region classification comparisons.
CLASS_TOL = 1e-9
# Angular tolerance (radians) used when comparing directions.
ANGLE_TOL = 1e-6

_BRENTQ_KWARGS = dict(xtol=1e-14, rtol=8.9e-16, maxiter=200)


class BranchPoint(RuntimeError):
    """A branch derivative was requested where the two branches meet."""


class NotOnBoundary(ValueError):
    """A point expected on the boundary of D is not on it."""


class UnsupportedRegion(RuntimeError):
    """The requested quantity is not defined for the model's region."""


@dataclass(frozen=True)
class RegionResult:
    """Outcome of the eight-region classification."""

    label: str  # "B0" .. "B7"
    x_crit: float  # upper endpoint of the x-range of D cap {phi1 <= 1}
    y_crit: float  # upper endpoint of the y-range of D cap {phi2 <= 1}
    x_range: tuple[float, float]  # x-range of D
    y_range: tuple[float, float]  # y-range of D
    X1_at_ycrit: float
    X2_at_ycrit: float
    Y1_at_xcrit: float
    Y2_at_xcrit: float
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class DominantSingularities:
    """Dominant singularities of the axis Green generating functions."""

    x_d: float
    y_d: float
    region: str


@dataclass(frozen=True)
class DirectionPartition:
    """Partition of the interior directions for the directional asymptotics.

    ``u_high`` bounds the horizontal-dominated cone W1 = {u > u_high} and
    ``u_low`` the vertical-dominated cone W2 = {u < u_low}; directions in
    between (B2 only) form the interior cone W0.  ``critical`` carries the
    single transition direction when one exists (B0 and B1).  ``missing``
    lists directions at which no asymptotic statement is available.
    Directions are unit vectors (u, v) with u, v >= 0.
    """

    region: str
    u_high: float | None
    u_low: float | None
    critical: tuple[float, float] | None
    missing: tuple[tuple[float, float], ...]
    special: tuple[tuple[float, float], ...] = ()

    def label(self, w: tuple[float, float], *, tol: float = ANGLE_TOL) -> str:
        """Classify a direction as W0 / W1 / W2 / critical / special / missing."""
        u, v = _normalize_direction(w)
        angle = math.atan2(v, u)
        for m in self.missing:
            if abs(angle - math.atan2(m[1], m[0])) <= tol:
                return "missing"
        for s in self.special:
            if abs(angle - math.atan2(s[1], s[0])) <= tol:
                return "special"
        if self.critical is not None:
            crit_angle = math.atan2(self.critical[1], self.critical[0])
            if abs(angle - crit_angle) <= tol:
                return "critical"
        if self.u_high is not None and u > self.u_high:
            return "W1"
        if self.u_low is not None and u < self.u_low:
            return "W2"
        if self.u_high is not None and self.u_low is not None:
            return "W0"
        if self.u_high is not None:
            return "W2"
        if self.u_low is not None:
            return "W1"
        # One-sided regions: the whole quadrant belongs to a single cone.
        return "W1" if self.region in ("B3", "B4") else "W2"


def _normalize_direction(w: tuple[float, float]) -> tuple[float, float]:
    u, v = float(w[0]), float(w[1])
    norm = math.hypot(u, v)
    if norm == 0.0:
        raise ValueError("direction must be a non-zero vector")
    if u < -1e-15 or v < -1e-15:
        raise ValueError(f"direction {w} must have non-negative components")
    return (max(u, 0.0) / norm, max(v, 0.0) / norm)


class KernelGeometry:
    """Geometry of the kernel of a quarter-plane walk model.

    The object caches the critical abscissas/ordinates of D and of the
    boundary-constrained sets, and exposes branch evaluations, the region
    classification, dominant singularities and the direction machinery.
    """

    def __init__(self, model: WalkModel):
        self.model = model

    # -- elementary convex tooling in log coordinates -------------------------

    def _log_P(self, alpha: float, beta: float) -> float:
        return self.model.P(math.exp(alpha), math.exp(beta))

    def _beta_argmin(self, alpha: float) -> float:
        """Minimizer over beta of P(e^alpha, e^beta) (strictly convex)."""
        x = math.exp(alpha)

        def slope(beta: float) -> float:
            y = math.exp(beta)
            return y * self.model.P(x, y, dy_order=1)

        lo, hi = -1.0, 1.0
        while slope(lo) > 0.0:
            lo *= 2.0
            if lo < -700.0:
                raise RuntimeError("no downward jumps: P has no interior minimum in y")
        while slope(hi) < 0.0:
            hi *= 2.0
            if hi > 700.0:
                raise RuntimeError("no upward jumps: P has no interior minimum in y")
        return brentq(slope, lo, hi, **_BRENTQ_KWARGS)

    def _alpha_argmin(self, beta: float) -> float:
        y = math.exp(beta)

        def slope(alpha: float) -> float:
            x = math.exp(alpha)
            return x * self.model.P(x, y, dx_order=1)

        lo, hi = -1.0, 1.0
        while slope(lo) > 0.0:
            lo *= 2.0
            if lo < -700.0:
                raise RuntimeError("no leftward jumps: P has no interior minimum in x")
        while slope(hi) < 0.0:
            hi *= 2.0
            if hi > 700.0:
                raise RuntimeError("no rightward jumps: P has no interior minimum in x")
        return brentq(slope, lo, hi, **_BRENTQ_KWARGS)

    # -- ranges of D ------------------------------------------------------------

    @cached_property
    def _alpha_range(self) -> tuple[float, float]:
        """Log x-range of D: roots of min_beta P(e^alpha, e^beta) = 1."""

        def depth(alpha: float) -> float:
            return self._log_P(alpha, self._beta_argmin(alpha)) - 1.0

        # alpha = 0 is inside D (P(1, 1) <= 1 for sub-probability measures).
        if depth(0.0) > SIGN_TOL:
            raise RuntimeError("the set {P <= 1} does not contain x = 1")
        lo = -0.5
        while depth(lo) < 0.0:
            lo *= 2.0
            if lo < -700.0:
                raise RuntimeError("the set {P <= 1} is unbounded to the left")
        hi = 0.5
        while depth(hi) < 0.0:
            hi *= 2.0
            if hi > 700.0:
                raise RuntimeError("the set {P <= 1} is unbounded to the right")
        a_lo = brentq(depth, lo, 0.0, **_BRENTQ_KWARGS)
        a_hi = brentq(depth, 0.0, hi, **_BRENTQ_KWARGS)
        return (a_lo, a_hi)

    @cached_property
    def _beta_range(self) -> tuple[float, float]:
        """Log y-range of D."""

        def depth(beta: float) -> float:
            return self._log_P(self._alpha_argmin(beta), beta) - 1.0

        if depth(0.0) > SIGN_TOL:
            raise RuntimeError("the set {P <= 1} does not contain y = 1")
        lo = -0.5
        while depth(lo) < 0.0:
            lo *= 2.0
            if lo < -700.0:
                raise RuntimeError("the set {P <= 1} is unbounded downward")
        hi = 0.5
        while depth(hi) < 0.0:
            hi *= 2.0
            if hi > 700.0:
                raise RuntimeError("the set {P <= 1} is unbounded upward")
        b_lo = brentq(depth, lo, 0.0, **_BRENTQ_KWARGS)
        b_hi = brentq(depth, 0.0, hi, **_BRENTQ_KWARGS)
        return (b_lo, b_hi)

    def d_x_range(self) -> tuple[float, float]:
        """The x-range [x_min, x_max] of the set D."""
        a_lo, a_hi = self._alpha_range
        return (math.exp(a_lo), math.exp(a_hi))

    def d_y_range(self) -> tuple[float, float]:
        """The y-range [y_min, y_max] of the set D."""
        b_lo, b_hi = self._beta_range
        return (math.exp(b_lo), math.exp(b_hi))

    # -- kernel branches ---------------------------------------------------------

    def _y_roots(self, x: float) -> tuple[float, float]:
        """The two positive roots of P(x, .) = 1 for x in the x-range of D."""
        if x <= 0.0:
            raise ValueError("branch evaluation needs x > 0")
        alpha = math.log(x)
        a_lo, a_hi = self._alpha_range
        slack = SIGN_TOL * max(1.0, abs(a_lo), abs(a_hi))
        if alpha < a_lo - slack or alpha > a_hi + slack:
            raise ValueError(
                f"x = {x!r} is outside the x-range of D "
                f"[{math.exp(a_lo)!r}, {math.exp(a_hi)!r}]"
            )
        beta0 = self._beta_argmin(alpha)
        depth = self._log_P(alpha, beta0) - 1.0
        if depth > -1e-13:
            # At (or numerically at) an endpoint the two roots coincide.
            y0 = math.exp(beta0)
            return (y0, y0)

        def f(beta: float) -> float:
            return self._log_P(alpha, beta) - 1.0

        step = 1.0
        lo = beta0 - step
        while f(lo) < 0.0:
            step *= 2.0
            lo = beta0 - step
            if lo < -700.0:
                raise RuntimeError("lower kernel branch not bracketed")
        b1 = brentq(f, lo, beta0, **_BRENTQ_KWARGS)
        step = 1.0
        hi = beta0 + step
        while f(hi) < 0.0:
            step *= 2.0
            hi = beta0 + step
            if hi > 700.0:
                raise RuntimeError("upper kernel branch not bracketed")
        b2 = brentq(f, beta0, hi, **_BRENTQ_KWARGS)
        return (math.exp(b1), math.exp(b2))

    def _x_roots(self, y: float) -> tuple[float, float]:
        if y <= 0.0:
            raise ValueError("branch evaluation needs y > 0")
        beta = math.log(y)
        b_lo, b_hi = self._beta_range
        slack = SIGN_TOL * max(1.0, abs(b_lo), abs(b_hi))
        if beta < b_lo - slack or beta > b_hi + slack:
            raise ValueError(
                f"y = {y!r} is outside the y-range of D "
                f"[{math.exp(b_lo)!r}, {math.exp(b_hi)!r}]"
            )
        alpha0 = self._alpha_argmin(beta)
        depth = self._log_P(alpha0, beta) - 1.0
        if depth > -1e-13:
            x0 = math.exp(alpha0)
            return (x0, x0)

        def f(alpha: float) -> float:
            return self._log_P(alpha, beta) - 1.0

        step = 1.0
        lo = alpha0 - step
        while f(lo) < 0.0:
            step *= 2.0
            lo = alpha0 - step
            if lo < -700.0:
                raise RuntimeError("left kernel branch not bracketed")
        a1 = brentq(f, lo, alpha0, **_BRENTQ_KWARGS)
        step = 1.0
        hi = alpha0 + step
        while f(hi) < 0.0:
            step *= 2.0
            hi = alpha0 + step
            if hi > 700.0:
                raise RuntimeError("right kernel branch not bracketed")
        a2 = brentq(f, alpha0, hi, **_BRENTQ_KWARGS)
        return (math.exp(a1), math.exp(a2))

    def Y1(self, x: float) -> float:
        """Lower kernel branch: the smaller root y of P(x, y) = 1."""
        return self._y_roots(x)[0]

    def Y2(self, x: float) -> float:
        """Upper kernel branch: the larger root y of P(x, y) = 1."""
        return self._y_roots(x)[1]

    def X1(self, y: float) -> float:
        """Left kernel branch: the smaller root x of P(x, y) = 1."""
        return self._x_roots(y)[0]

    def X2(self, y: float) -> float:
        """Right kernel branch: the larger root x of P(x, y) = 1."""
        return self._x_roots(y)[1]

    def kernel_section_y(self, x: float) -> tuple[float, float]:
        """The interval [Y1(x), Y2(x)] of y with P(x, y) <= 1."""
        return self._y_roots(x)

    def kernel_section_x(self, y: float) -> tuple[float, float]:
        """The interval [X1(y), X2(y)] of x with P(x, y) <= 1."""
        return self._x_roots(y)

    def branch_derivative_Y1(self, x: float) -> float:
        """dY1/dx by implicit differentiation; fails at the range endpoints."""
        y = self.Y1(x)
        return self._implicit_dy_dx(x, y)

    def branch_derivative_Y2(self, x: float) -> float:
        y = self.Y2(x)
        return self._implicit_dy_dx(x, y)

    def branch_derivative_X1(self, y: float) -> float:
        x = self.X1(y)
        return 1.0 / self._implicit_dy_dx(x, y)

    def branch_derivative_X2(self, y: float) -> float:
        x = self.X2(y)
        return 1.0 / self._implicit_dy_dx(x, y)

    def _implicit_dy_dx(self, x: float, y: float) -> float:
        px = self.model.P(x, y, dx_order=1)
        py = self.model.P(x, y, dy_order=1)
        scale = max(abs(px), 1.0 / max(y, 1e-300))
        if abs(py) <= SIGN_TOL * scale:
            raise BranchPoint(
                f"the kernel branches meet near (x, y) = ({x!r}, {y!r}); "
                "the branch derivative diverges there"
            )
        return -px / py

    # -- constrained ranges --------------------------------------------------------

    def phi1_on_lower_arc(self, x: float) -> float:
        """phi1 evaluated on the lower kernel branch: phi1(x, Y1(x))."""
        return self.model.phi1(x, self.Y1(x))

    def phi2_on_left_arc(self, y: float) -> float:
        """phi2 evaluated on the left kernel branch: phi2(X1(y), y)."""
        return self.model.phi2(self.X1(y), y)

    def d_phi1_on_lower_arc(self, x: float) -> float:
        """d/dx of phi1(x, Y1(x))."""
        y = self.Y1(x)
        dy = self._implicit_dy_dx(x, y)
        return self.model.phi1(x, y, dx_order=1) + self.model.phi1(
            x, y, dy_order=1
        ) * dy

    def d_phi2_on_left_arc(self, y: float) -> float:
        """d/dy of phi2(X1(y), y)."""
        x = self.X1(y)
        dx = 1.0 / self._implicit_dy_dx(x, y)
        return self.model.phi2(x, y, dy_order=1) + self.model.phi2(
            x, y, dx_order=1
        ) * dx

    @cached_property
    def _free_alpha(self) -> tuple[float, float]:
        """Log endpoints of the x-range of D cap {phi1 <= 1}."""
        a_lo, a_hi = self._alpha_range

        def excess(alpha: float) -> float:
            return self.phi1_on_lower_arc(math.exp(alpha)) - 1.0

        return self._constrained_interval(excess, a_lo, a_hi)

    @cached_property
    def _free_beta(self) -> tuple[float, float]:
        """Log endpoints of the y-range of D cap {phi2 <= 1}."""
        b_lo, b_hi = self._beta_range

        def excess(beta: float) -> float:
            return self.phi2_on_left_arc(math.exp(beta)) - 1.0

        return self._constrained_interval(excess, b_lo, b_hi)

    def _constrained_interval(self, excess, t_lo: float, t_hi: float) -> tuple[float, float]:
        """Endpoints of {t in [t_lo, t_hi] : excess(t) <= 0}, an interval with 0.

        ``excess`` is the boundary generating function minus one along the
        relevant kernel arc.  The sub-level set is a closed interval
        containing 0 (log of the point x = 1, which always lies in it); a
        value of ``excess(0)`` at the sign tolerance means the interval ends
        exactly at 1 on the side where the arc function increases, which is
        decided by a one-sided probe.
        """
        e0 = excess(0.0)
        if e0 > SIGN_TOL:
            raise RuntimeError(
                "inconsistent geometry: the constrained set does not contain 1"
            )

        def upper(from_t: float) -> float:
            if excess(t_hi) <= 0.0:
                return t_hi
            return brentq(excess, from_t, t_hi, **_BRENTQ_KWARGS)

        def lower(from_t: float) -> float:
            if excess(t_lo) <= 0.0:
                return t_lo
            return brentq(excess, t_lo, from_t, **_BRENTQ_KWARGS)

        if e0 < -SIGN_TOL:
            return (lower(0.0), upper(0.0))

        # The interval endpoint sits numerically at 1: find on which side the
        # interval continues.  A probe distance well above root noise but far
        # below any model scale keeps the decision stable.
        probe = 1e-7
        right = excess(min(probe, t_hi))
        left = excess(max(-probe, t_lo))
        if right < -SIGN_TOL:
            return (0.0, upper(probe))
        if left < -SIGN_TOL:
            return (lower(-probe), 0.0)
        return (0.0, 0.0)

    def free_endpoints(self) -> tuple[float, float, float, float]:
        """(x_lo, x_hi, y_lo, y_hi): ranges of D cap {phi1 <= 1} / {phi2 <= 1}.

        ``x_hi`` and ``y_hi`` are the classification inputs; ``x_lo``/``y_lo``
        matter for the geometric recurrence criteria.
        """
        a_lo, a_hi = self._free_alpha
        b_lo, b_hi = self._free_beta
        return (math.exp(a_lo), math.exp(a_hi), math.exp(b_lo), math.exp(b_hi))

    # -- boundary curve labels -------------------------------------------------------

    def curve_label(self, x: float, y: float, *, tol: float = CLASS_TOL) -> frozenset[str]:
        """Which closed boundary arcs S11/S12/S21/S22 contain (x, y).

        The arcs are defined by the signs of the partial derivatives of P on
        the boundary of D; at points where a partial vanishes the arcs
        overlap and several labels are returned.
        """
        p = self.model.P(x, y)
        if abs(p - 1.0) > 100 * tol:
            raise NotOnBoundary(
                f"({x!r}, {y!r}) is not on the boundary of D (P = {p!r})"
            )
        px = x * self.model.P(x, y, dx_order=1)
        py = y * self.model.P(x, y, dy_order=1)
        scale = max(abs(px), abs(py), 1.0)
        sx = 0 if abs(px) <= tol * scale else (1 if px > 0 else -1)
        sy = 0 if abs(py) <= tol * scale else (1 if py > 0 else -1)
        labels = set()
        if sx <= 0 and sy <= 0:
            labels.add("S11")
        if sx <= 0 and sy >= 0:
            labels.add("S12")
        if sx >= 0 and sy <= 0:
            labels.add("S21")
        if sx >= 0 and sy >= 0:
            labels.add("S22")
        return frozenset(labels)

    # -- classification ----------------------------------------------------------------

    def classify_region(self, *, tol: float = CLASS_TOL) -> RegionResult:
        """Classify the model into one of the eight regions B0..B7.

        The classification compares the upper constrained endpoints
        (x_hi, y_hi) against the kernel branches evaluated at each other;
        equality is decided inside a relative band of width ``tol``, and any
        comparison landing within ten times the band is reported as a
        warning because the label is then numerically fragile.
        """
        x_lo, x_hi, y_lo, y_hi = self.free_endpoints()
        X1c, X2c = self._x_roots(y_hi)
        Y1c, Y2c = self._y_roots(x_hi)
        warnings: list[str] = []

        def cmp(a: float, b: float, what: str) -> int:
            scale = max(abs(a), abs(b), 1.0)
            diff = a - b
            if abs(diff) <= tol * scale:
                return 0
            if abs(diff) <= 10.0 * tol * scale:
                warnings.append(
                    f"{what}: |{a!r} - {b!r}| is within ten classification "
                    "tolerances of equality; the label is fragile"
                )
            return 1 if diff > 0 else -1

        sx_lo = cmp(x_hi, X1c, "x_hi vs X1(y_hi)")
        sx_hi = cmp(x_hi, X2c, "x_hi vs X2(y_hi)")
        sy_lo = cmp(y_hi, Y1c, "y_hi vs Y1(x_hi)")
        sy_hi = cmp(y_hi, Y2c, "y_hi vs Y2(x_hi)")

        label: str | None = None
        if sx_lo > 0 and sx_hi < 0 and sy_lo > 0 and sy_hi < 0:
            label = "B0"
        elif sx_hi == 0 and sy_hi == 0 and sx_lo > 0 and sy_lo > 0:
            label = "B1"
        elif sx_hi > 0 and sy_hi > 0:
            label = "B2"
        elif sx_lo == 0 and sy_hi == 0 and sy_lo > 0:
            label = "B3"
        elif sx_lo < 0 and sy_hi > 0:
            label = "B4"
        elif sx_hi == 0 and sy_lo == 0 and sx_lo > 0:
            label = "B5"
        elif sx_hi > 0 and sy_lo < 0:
            label = "B6"
        elif sx_lo == 0 and sy_lo == 0:
            label = "B7"
        elif sx_lo < 0 and sy_lo < 0:
            raise RuntimeError(
                "impossible configuration: x_hi < X1(y_hi) and y_hi < Y1(x_hi)"
            )
        if label is None:
            raise RuntimeError(
                "classification sign pattern is inconsistent: "
                f"(x_hi vs X1, X2) = ({sx_lo}, {sx_hi}), "
                f"(y_hi vs Y1, Y2) = ({sy_lo}, {sy_hi}); the model sits too "
                "close to a region boundary for the requested tolerance"
            )

        self._verify_side_conditions(
            label, x_lo, x_hi, y_lo, y_hi, X1c, X2c, Y1c, Y2c, warnings
        )
        return RegionResult(
            label=label,
            x_crit=x_hi,
            y_crit=y_hi,
            x_range=self.d_x_range(),
            y_range=self.d_y_range(),
            X1_at_ycrit=X1c,
            X2_at_ycrit=X2c,
            Y1_at_xcrit=Y1c,
            Y2_at_xcrit=Y2c,
            warnings=tuple(warnings),
        )

    def _verify_side_conditions(
        self,
        label: str,
        x_lo: float,
        x_hi: float,
        y_lo: float,
        y_hi: float,
        X1c: float,
        X2c: float,
        Y1c: float,
        Y2c: float,
        warnings: list[str],
    ) -> None:
        """Check the auxiliary inequalities attached to each region label.

        Failures are reported as warnings: the primary sign pattern already
        determines the label, and the auxiliary conditions are consequences
        that can only fail through numerical noise.
        """
        x_cap = self.d_x_range()[1]
        y_cap = self.d_y_range()[1]

        def expect(cond: bool, text: str) -> None:
            if not cond:
                warnings.append(f"{label}: expected {text}")

        def on_curve(x: float, y: float, curve: str, text: str) -> None:
            try:
                labels = self.curve_label(x, y)
            except NotOnBoundary:
                warnings.append(f"{label}: {text} is not on the boundary of D")
                return
            if curve not in labels:
                warnings.append(f"{label}: expected {text} on {curve}, got {set(labels)}")

        if label == "B1":
            expect(x_hi < x_cap * (1.0 - CLASS_TOL), "x_hi < x-cap")
            expect(y_hi < y_cap * (1.0 - CLASS_TOL), "y_hi < y-cap")
            on_curve(x_hi, y_hi, "S22", "(x_hi, y_hi)")
        elif label == "B2":
            on_curve(x_hi, Y2c, "S22", "(x_hi, Y2(x_hi))")
            on_curve(X2c, y_hi, "S22", "(X2(y_hi), y_hi)")
        elif label == "B3":
            expect(x_hi < x_cap * (1.0 - CLASS_TOL), "x_hi < x-cap")
            expect(y_lo <= 1.0 + CLASS_TOL, "y_lo <= 1")
            expect(Y2c > 1.0 - CLASS_TOL, "Y2(x_hi) > 1")
            on_curve(x_hi, y_hi, "S12", "(x_hi, y_hi)")
        elif label == "B4":
            expect(X1c < x_cap * (1.0 - CLASS_TOL), "X1(y_hi) < x-cap")
            expect(y_lo <= 1.0 + CLASS_TOL, "y_lo <= 1")
            expect(Y2c > 1.0 - CLASS_TOL, "Y2(x_hi) > 1")
            on_curve(x_hi, Y2c, "S12", "(x_hi, Y2(x_hi))")
            on_curve(X1c, y_hi, "S12", "(X1(y_hi), y_hi)")
        elif label == "B5":
            expect(y_hi < y_cap * (1.0 - CLASS_TOL), "y_hi < y-cap")
            expect(x_lo <= 1.0 + CLASS_TOL, "x_lo <= 1")
            expect(X2c > 1.0 - CLASS_TOL, "X2(y_hi) > 1")
            on_curve(x_hi, y_hi, "S21", "(x_hi, y_hi)")
        elif label == "B6":
            expect(Y1c < y_cap * (1.0 - CLASS_TOL), "Y1(x_hi) < y-cap")
            expect(x_lo <= 1.0 + CLASS_TOL, "x_lo <= 1")
            expect(X2c > 1.0 - CLASS_TOL, "X2(y_hi) > 1")
            on_curve(X2c, y_hi, "S21", "(X2(y_hi), y_hi)")
            on_curve(x_hi, Y1c, "S21", "(x_hi, Y1(x_hi))")
        elif label == "B7":
            expect(abs(x_hi - 1.0) <= 10 * CLASS_TOL, "x_hi = 1")
            expect(abs(y_hi - 1.0) <= 10 * CLASS_TOL, "y_hi = 1")
            m1 = self.model.P(1.0, 1.0, dx_order=1)
            m2 = self.model.P(1.0, 1.0, dy_order=1)
            expect(m1 < 0.0, "x-derivative of P at (1, 1) negative")
            expect(m2 < 0.0, "y-derivative of P at (1, 1) negative")

    def dominant_singularities(
        self, region: RegionResult | None = None
    ) -> DominantSingularities:
        """Dominant singularities (x_d, y_d) of the axis generating functions.

        x_d is the radius of convergence of the horizontal-axis Green
        generating function H(x, 0) and y_d of the vertical one H(0, y).
        """
        if region is None:
            region = self.classify_region()
        label = region.label
        if label == "B7":
            raise UnsupportedRegion(
                "the dominant singularities are not defined in region B7"
            )
        if label in ("B0", "B1", "B2"):
            x_d, y_d = region.x_crit, region.y_crit
        elif label in ("B3", "B4"):
            x_d, y_d = region.x_crit, region.Y2_at_xcrit
        else:  # B5, B6
            x_d, y_d = region.X2_at_ycrit, region.y_crit
        return DominantSingularities(x_d=x_d, y_d=y_d, region=label)

    # -- directions -------------------------------------------------------------------

    def direction_of_point(self, x: float, y: float) -> tuple[float, float]:
        """Outward direction associated with a boundary point of D.

        For (x, y) on the boundary the associated direction is the scaled
        gradient (x dP/dx, y dP/dy) normalized to a unit vector.  On the
        upper-right arc S22 this is a bijection onto the open positive
        quadrant arc of directions.
        """
        p = self.model.P(x, y)
        if abs(p - 1.0) > 1e-7:
            raise NotOnBoundary(
                f"({x!r}, {y!r}) is not on the boundary of D (P = {p!r})"
            )
        u = x * self.model.P(x, y, dx_order=1)
        v = y * self.model.P(x, y, dy_order=1)
        norm = math.hypot(u, v)
        if norm == 0.0:
            raise NotOnBoundary(f"the gradient of P vanishes at ({x!r}, {y!r})")
        return (u / norm, v / norm)

    def point_of_direction(self, w: tuple[float, float]) -> tuple[float, float]:
        """The S22 boundary point whose outward direction is ``w``.

        Axis directions map to the extreme points of D (the rightmost point
        for (1, 0) and the topmost point for (0, 1)); interior directions are
        found by a bracketed root search along the upper arc, which is
        monotone in the direction parameter.
        """
        u, v = _normalize_direction(w)
        a_lo, a_hi = self._alpha_range
        x_right = math.exp(a_hi)
        b_lo, b_hi = self._beta_range
        y_top = math.exp(b_hi)
        if v <= ANGLE_TOL / 2.0:
            return (x_right, self._y_roots(x_right)[0])
        if u <= ANGLE_TOL / 2.0:
            return (self._x_roots(y_top)[0], y_top)
        x_top = self._x_roots(y_top)[0]
        alpha_top = math.log(x_top)

        def mismatch(alpha: float) -> float:
            x = math.exp(alpha)
            y = self._y_roots(x)[1]
            gx = x * self.model.P(x, y, dx_order=1)
            gy = y * self.model.P(x, y, dy_order=1)
            return v * gx - u * gy

        # mismatch < 0 at the top point (gx = 0 there) and > 0 at the right
        # point (gy = 0 there); it is strictly increasing along the arc.
        lo, hi = alpha_top, a_hi
        f_lo, f_hi = mismatch(lo), mismatch(hi)
        if f_lo >= 0.0:
            return (x_top, y_top)
        if f_hi <= 0.0:
            return (x_right, self._y_roots(x_right)[0])
        alpha = brentq(mismatch, lo, hi, **_BRENTQ_KWARGS)
        x = math.exp(alpha)
        return (x, self._y_roots(x)[1])

    def direction_partition(
        self, region: RegionResult | None = None
    ) -> DirectionPartition:
        """Partition of the interior directions for the model's region."""
        if region is None:
            region = self.classify_region()
        label = region.label
        if label == "B7":
            raise UnsupportedRegion(
                "directional asymptotics are not available in region B7"
            )
        sing = self.dominant_singularities(region)
        x_d, y_d = sing.x_d, sing.y_d

        if label == "B0":
            X2d = self._x_roots(y_d)[1]
            Y2d = self._y_roots(x_d)[1]
            wc = _normalize_direction(
                (math.log(Y2d) - math.log(y_d), math.log(X2d) - math.log(x_d))
            )
            return DirectionPartition(
                region=label,
                u_high=wc[0],
                u_low=wc[0],
                critical=wc,
                missing=(),
            )
        if label == "B1":
            wc = self.direction_of_point(x_d, self._y_roots(x_d)[1])
            return DirectionPartition(
                region=label,
                u_high=wc[0],
                u_low=wc[0],
                critical=wc,
                missing=(wc,),
            )
        if label == "B2":
            w_high = self.direction_of_point(x_d, self._y_roots(x_d)[1])
            w_low = self.direction_of_point(self._x_roots(y_d)[1], y_d)
            return DirectionPartition(
                region=label,
                u_high=w_high[0],
                u_low=w_low[0],
                critical=None,
                missing=(w_high, w_low),
            )
        if label in ("B3", "B5"):
            # One cone covers everything except one axis direction, where a
            # mixed two-term expansion applies unless the dominant point sits
            # at the very end of the kernel range (then nothing is known).
            y_cap = self.d_y_range()[1]
            x_cap = self.d_x_range()[1]
            if label == "B3":
                axis = (0.0, 1.0)
                tangent = abs(y_d - y_cap) <= CLASS_TOL * max(1.0, y_cap)
            else:
                axis = (1.0, 0.0)
                tangent = abs(x_d - x_cap) <= CLASS_TOL * max(1.0, x_cap)
            return DirectionPartition(
                region=label,
                u_high=None,
                u_low=None,
                critical=None,
                missing=(axis,) if tangent else (),
                special=() if tangent else (axis,),
            )
        # B4 and B6: a single cone covers every direction.
        return DirectionPartition(
            region=label,
            u_high=None,
            u_low=None,
            critical=None,
            missing=(),
        )
