"""Certified numerical oracles for the Green function of the killed walk.

This module computes truncated Green-function tables g(j, k) by iterating the
one-step distribution of the quarter-plane walk killed at the origin, together
with rigorous tail bounds.  The machinery has two ingredients:

* a two-point geometric weight

      f(k) = x1^{k1} y1^{k2} + x2^{k1} y2^{k2}

  whose defining points satisfy max(P, phi1)(x1, y1) < 1 and
  max(P, phi2)(x2, y2) < 1 with x2 < x1 and y1 < y2.  The one-step drift
  inequality E_l[f(Z(1))] <= theta f(l) then holds at every state far enough
  from the axes' low ends (past computable crossover levels), but typically
  fails on a finite set of near-axis states;

* an exact potential solve on the working box.  The function
  V = sum_n P^n f (P the killed, box-truncated kernel with out-of-box states
  capped by c f) is computed by a sparse LU factorization.  A rim
  consistency condition on c makes U = V inside the box, U = c f outside,
  a bona-fide global supersolution U >= f + P U, which certifies

      sum_{m > n} sum_l rho_m(l) f(l)  <=  sum_l rho_n(l) (V(l) - f(l)),

  a monotone stopping rule for the forward iteration and per-entry
  truncation bounds g(j,k) - table(k) <= tail / f(k).

The module also provides sparse resolvent fields (hitting probabilities and
H-potentials as functions of the starting point, used by harmonic-function
computations), probabilistic evaluations of the lower kernel branch that
never touch kernel root-finding, and a Monte Carlo visit-count estimator
with deterministic counter-based streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.sparse import csr_matrix
from scipy.sparse.linalg import splu

from .kernel_geometry import KernelGeometry
from .model import WalkModel


class OutsideDomain(ValueError):
    """An evaluation point lies outside the certified convergence domain."""


class NoCertificate(RuntimeError):
    """No admissible geometric weight could be constructed."""


# Fractions along the free log-interval at which weight points are tried, in
# preference order.  "balanced" favours points deep inside the domain: the
# gap between the weight rate and the Green-function decay rate is what makes
# boundary leakage and truncation errors die per unit of box margin, so
# deeper is better whenever feasible.  "sharp" favours points close to the
# free endpoints, for series evaluations near the convergence boundary.
_BALANCED_FRACTIONS = (0.25, 0.35, 0.45, 0.55, 0.64, 0.72, 0.80, 0.86, 0.90, 0.93)
_SHARP_FRACTIONS = (0.97, 0.95, 0.92, 0.88, 0.84, 0.78, 0.70, 0.60, 0.50, 0.40)
_OWN_GOALS = (0.985, 0.995, 0.9995, 1.0 - 1e-9)


@dataclass(frozen=True)
class DecayCertificate:
    """Two-point geometric weight adapted to the kernel and both boundaries.

    ``theta`` is a contraction factor valid for the one-step drift of
    f(k) = x1^{k1} y1^{k2} + x2^{k1} y2^{k2} at interior states and at axis
    states beyond the crossover levels returned by ``crossover_levels``.
    Near-axis states below the crossovers are handled exactly by the box
    potential solve, never through theta.
    """

    x1: float
    y1: float
    x2: float
    y2: float
    theta: float

    def weight(self, k1: int, k2: int) -> float:
        return self.x1**k1 * self.y1**k2 + self.x2**k1 * self.y2**k2

    def weight_grid(self, n1: int, n2: int) -> np.ndarray:
        """Array F with F[i, j] = f(i, j) for 0 <= i < n1, 0 <= j < n2."""
        i = np.arange(n1, dtype=float)
        j = np.arange(n2, dtype=float)
        part1 = np.outer(self.x1**i, self.y1**j)
        part2 = np.outer(self.x2**i, self.y2**j)
        return part1 + part2

    def crossover_levels(self, model: WalkModel) -> tuple[int, int]:
        """Levels (N1, N2) past which the axis drift inequalities hold.

        On the horizontal axis, E_{(k1,0)}[f] <= theta f(k1, 0) holds for all
        k1 >= N1: the x1-component contracts by phi1(x1, y1) < theta and its
        share of f grows like (x1/x2)^{k1}, so the inequality is monotone in
        k1 once the x1-term's slack covers the x2-term's excess.  N2 is the
        vertical mirror.
        """
        f1_good = model.phi1(self.x1, self.y1)
        f1_bad = model.phi1(self.x2, self.y2)
        n1 = 0
        if f1_bad > self.theta:
            ratio = (self.x2 * (f1_bad - self.theta)) / (self.x1 * (self.theta - f1_good))
            n1 = max(0, int(math.ceil(math.log(ratio) / math.log(self.x1 / self.x2))) + 1)
        f2_good = model.phi2(self.x2, self.y2)
        f2_bad = model.phi2(self.x1, self.y1)
        n2 = 0
        if f2_bad > self.theta:
            ratio = (self.y1 * (f2_bad - self.theta)) / (self.y2 * (self.theta - f2_good))
            n2 = max(0, int(math.ceil(math.log(ratio) / math.log(self.y2 / self.y1))) + 1)
        return n1, n2

    def hull_rates(self, x: float, y: float) -> tuple[float, float]:
        """Best geometric rates (x/X, y/Y) with X = x1^t x2^(1-t), Y likewise.

        For any t in [0, 1], f(k) >= (x1^t x2^(1-t))^{k1} (y1^t y2^(1-t))^{k2}
        by the weighted AM-GM inequality, so x^{k1} y^{k2} / f(k) is bounded
        by rx^{k1} ry^{k2} with the returned rates.  Raises OutsideDomain
        when no t gives both rates < 1.
        """
        best: tuple[float, float] | None = None
        best_score = math.inf
        for t in np.linspace(0.0, 1.0, 201):
            big_x = self.x1**t * self.x2 ** (1.0 - t)
            big_y = self.y1**t * self.y2 ** (1.0 - t)
            rx, ry = x / big_x, y / big_y
            if rx >= 1.0 - 1e-12 or ry >= 1.0 - 1e-12:
                continue
            score = max(rx, ry)  # the slower rate dominates the tail sums
            if score < best_score:
                best_score = score
                best = (rx, ry)
        if best is None:
            raise OutsideDomain(
                f"point ({x!r}, {y!r}) is outside the certified decay hull "
                f"of the weight ({self.x1!r}, {self.y1!r}), ({self.x2!r}, {self.y2!r})"
            )
        return best


@dataclass(frozen=True)
class BoxPotential:
    """Exact potential V = sum_n P^n f on a working box with out-of-box cap.

    ``values`` solves (I - P_box) V = f + cap * out_f, where out_f collects
    the f-weight of transitions leaving the box.  With the rim condition
    satisfied (checked at construction), U = V in the box and U = cap * f
    outside is a global supersolution U >= f + P U for the killed walk.
    """

    values: np.ndarray  # shape (wx+1, wy+1)
    cap: float
    certificate: DecayCertificate


@dataclass(frozen=True)
class GreenTable:
    """Truncated Green-function table with certified per-entry tail bounds.

    ``values[k1, k2]`` underestimates g(j, (k1, k2)) by at most
    ``tail_bound[k1, k2]`` when ``certified`` is true.  ``hit_prob`` likewise
    underestimates the probability of ever entering the origin, by at most
    ``hit_bound``.  ``cum_weight`` bounds sum_n E_j[f(Z(n))], so
    g(j, k) <= cum_weight / f(k) for every k, including beyond the table.
    """

    j: tuple[int, int]
    values: np.ndarray
    tail_bound: np.ndarray
    hit_prob: float
    hit_bound: float
    iterations: int
    cum_weight: float
    certificate: DecayCertificate | None
    certified: bool

    @property
    def box(self) -> tuple[int, int]:
        return (self.values.shape[0] - 1, self.values.shape[1] - 1)

    def value(self, k: tuple[int, int]) -> float:
        return float(self.values[k[0], k[1]])

    def bound(self, k: tuple[int, int]) -> float:
        return float(self.tail_bound[k[0], k[1]])

    def write_csv(self, stream, digits: int = 17) -> None:
        """Write rows ``k1,k2,value,tail_bound`` ordered by k2, then k1."""
        kx, ky = self.box
        stream.write("k1,k2,value,tail_bound\n")
        for k2 in range(ky + 1):
            for k1 in range(kx + 1):
                v = float(self.values[k1, k2])
                b = float(self.tail_bound[k1, k2])
                stream.write(f"{k1},{k2},{v:.{digits}g},{b:.{digits}g}\n")

    def axis_series_x(self, x: float, weight_power: int = 0) -> tuple[float, float | None]:
        """Evaluate sum_{k1 >= 1} k1^weight_power g(j,(k1,0)) x^{k1}.

        Returns (value, bound).  The bound covers in-table truncation error
        and the beyond-table tail when the weight can see past the table edge
        (x < x1); otherwise the bound is None and the value is a plain
        truncated sum.
        """
        kx = self.box[0]
        k1 = np.arange(1, kx + 1, dtype=float)
        powers = x**k1 * k1**weight_power
        value = float(np.dot(self.values[1:, 0], powers))
        if not self.certified or self.certificate is None:
            return value, None
        bound = float(np.dot(self.tail_bound[1:, 0], powers))
        cert = self.certificate
        if x < cert.x1 * (1.0 - 1e-12):
            r = x / cert.x1
            beyond = _geometric_tail(r, kx, weight_power)
            return value, bound + self.cum_weight * beyond
        return value, None

    def axis_series_y(self, y: float, weight_power: int = 0) -> tuple[float, float | None]:
        """Evaluate sum_{k2 >= 1} k2^weight_power g(j,(0,k2)) y^{k2}."""
        ky = self.box[1]
        k2 = np.arange(1, ky + 1, dtype=float)
        powers = y**k2 * k2**weight_power
        value = float(np.dot(self.values[0, 1:], powers))
        if not self.certified or self.certificate is None:
            return value, None
        bound = float(np.dot(self.tail_bound[0, 1:], powers))
        cert = self.certificate
        if y < cert.y2 * (1.0 - 1e-12):
            r = y / cert.y2
            beyond = _geometric_tail(r, ky, weight_power)
            return value, bound + self.cum_weight * beyond
        return value, None

    def full_series(self, x: float, y: float) -> tuple[float, float]:
        """Evaluate H_j(x, y) = sum_{k != 0} g(j, k) x^{k1} y^{k2} with bound.

        Requires (x, y) inside the certified decay hull of the weight;
        raises OutsideDomain otherwise.
        """
        if not self.certified or self.certificate is None:
            raise OutsideDomain("table carries no certificate")
        rx, ry = self.certificate.hull_rates(abs(x), abs(y))
        kx, ky = self.box
        k1 = np.arange(kx + 1, dtype=float)
        k2 = np.arange(ky + 1, dtype=float)
        wx = x**k1
        wy = y**k2
        grid = np.outer(np.abs(wx), np.abs(wy))
        inner = self.values * np.outer(wx, wy)
        inner[0, 0] = 0.0
        value = float(inner.sum())
        bound = float((self.tail_bound * grid).sum())
        # Beyond-table tail: columns k1 > kx (all k2), plus rows k2 > ky for
        # k1 <= kx, bounded through g(j, k) <= cum_weight / f(k).
        tail_right = rx ** (kx + 1) / (1.0 - rx) / (1.0 - ry)
        tail_top = ry ** (ky + 1) / (1.0 - ry) * (1.0 - rx ** (kx + 1)) / (1.0 - rx)
        bound += self.cum_weight * (tail_right + tail_top)
        return value, bound


def _geometric_tail(r: float, cutoff: int, weight_power: int) -> float:
    """sum_{k > cutoff} k^p r^k for p in {0, 1}, r in (0, 1)."""
    if weight_power == 0:
        return r ** (cutoff + 1) / (1.0 - r)
    if weight_power == 1:
        return r ** (cutoff + 1) * ((cutoff + 1) * (1.0 - r) + r) / (1.0 - r) ** 2
    raise ValueError("weight_power must be 0 or 1")


@dataclass(frozen=True)
class ResolventField:
    """Values u(j) = sum_n E_j[w(Z(n))] for all j in a box, with bounds."""

    values: np.ndarray
    bound: np.ndarray

    @property
    def box(self) -> tuple[int, int]:
        return (self.values.shape[0] - 1, self.values.shape[1] - 1)

    def value(self, j: tuple[int, int]) -> float:
        return float(self.values[j[0], j[1]])


def _role_blocks(model: WalkModel) -> list[tuple[str, tuple[tuple[int, int, float], ...]]]:
    return [
        ("interior", model.interior.entries),
        ("horizontal", model.horizontal.entries),
        ("vertical", model.vertical.entries),
        ("origin", model.origin.entries),
    ]


class GreenOracle:
    """Green-function computations for a quarter-plane walk killed at 0."""

    def __init__(self, model: WalkModel, geometry: KernelGeometry | None = None):
        self.model = model
        self.geometry = geometry if geometry is not None else KernelGeometry(model)
        self._certificates: dict[tuple, DecayCertificate] = {}
        self._tables: dict[tuple, GreenTable] = {}
        self._potentials: dict[tuple, tuple[BoxPotential, object, np.ndarray]] = {}

    # ------------------------------------------------------------------
    # Decay certificates
    # ------------------------------------------------------------------

    def certificate(
        self,
        kind: str = "balanced",
        x_floor: float | None = None,
        y_floor: float | None = None,
    ) -> DecayCertificate:
        """Construct a two-point geometric weight for this model.

        The first point keeps both the kernel and the horizontal generating
        function strictly below one; the second does the same for the
        vertical one.  ``x_floor`` requires x1 >= x_floor (needed when the
        weight must dominate a test function decaying like x_floor^{k1}
        along the horizontal axis); ``y_floor`` requires y2 >= y_floor.
        """
        key = (kind, x_floor, y_floor)
        cached = self._certificates.get(key)
        if cached is not None:
            return cached

        model = self.model
        geom = self.geometry
        x_lo, x_hi, y_lo, y_hi = geom.free_endpoints()
        fractions = _SHARP_FRACTIONS if kind == "sharp" else _BALANCED_FRACTIONS

        def point_on_x_side(s: float) -> tuple[float, float, float] | None:
            lo_eff = max(math.log(x_lo), math.log(x_hi) - 1.5)
            x1 = math.exp(lo_eff + s * (math.log(x_hi) - lo_eff))
            try:
                sect_lo, sect_hi = geom.kernel_section_y(x1)
            except ValueError:
                return None
            if not sect_hi > sect_lo:
                return None
            res = minimize_scalar(
                lambda b: max(model.P(x1, math.exp(b)), model.phi1(x1, math.exp(b))),
                bounds=(math.log(sect_lo), math.log(sect_hi)),
                method="bounded",
                options={"xatol": 1e-11},
            )
            y1 = math.exp(res.x)
            own = max(model.P(x1, y1), model.phi1(x1, y1))
            if own >= 1.0 - 1e-12:
                return None
            return x1, y1, own

        def point_on_y_side(s: float) -> tuple[float, float, float] | None:
            lo_eff = max(math.log(y_lo), math.log(y_hi) - 1.5)
            y2 = math.exp(lo_eff + s * (math.log(y_hi) - lo_eff))
            try:
                sect_lo, sect_hi = geom.kernel_section_x(y2)
            except ValueError:
                return None
            if not sect_hi > sect_lo:
                return None
            res = minimize_scalar(
                lambda a: max(model.P(math.exp(a), y2), model.phi2(math.exp(a), y2)),
                bounds=(math.log(sect_lo), math.log(sect_hi)),
                method="bounded",
                options={"xatol": 1e-11},
            )
            x2 = math.exp(res.x)
            own = max(model.P(x2, y2), model.phi2(x2, y2))
            if own >= 1.0 - 1e-12:
                return None
            return x2, y2, own

        candidates_x = []
        for s in fractions:
            pt = point_on_x_side(s)
            if pt is not None and (x_floor is None or pt[0] >= x_floor):
                candidates_x.append(pt)
        candidates_y = []
        for s in fractions:
            pt = point_on_y_side(s)
            if pt is not None and (y_floor is None or pt[1] >= y_floor):
                candidates_y.append(pt)

        for goal in _OWN_GOALS:
            for x1, y1, own_x in candidates_x:
                for x2, y2, own_y in candidates_y:
                    if not (x2 < x1 * (1.0 - 1e-9) and y1 < y2 * (1.0 - 1e-9)):
                        continue
                    own = max(own_x, own_y)
                    if own < goal:
                        # Place theta halfway between the attained values and
                        # one: larger theta shrinks the axis crossover levels,
                        # smaller theta shrinks the out-of-box cap.
                        theta = own + 0.5 * (1.0 - own)
                        cert = DecayCertificate(x1=x1, y1=y1, x2=x2, y2=y2, theta=theta)
                        self._certificates[key] = cert
                        return cert
        raise NoCertificate(
            "no geometric weight with both defining points strictly inside "
            "their constrained domains was found"
            + ("" if x_floor is None else f" (x_floor={x_floor!r})")
            + ("" if y_floor is None else f" (y_floor={y_floor!r})")
        )

    # ------------------------------------------------------------------
    # Sparse kernel on a box and the box potential
    # ------------------------------------------------------------------

    def _sparse_system(
        self, wx: int, wy: int, cert: DecayCertificate
    ) -> tuple[csr_matrix, np.ndarray]:
        """Build I - P on the box [0..wx] x [0..wy], killed at the origin.

        Transitions into (0, 0) are dropped (killing), transitions out of the
        box are dropped as well; the f-weight of the dropped out-of-box mass
        is returned row-wise so truncation errors can be bounded.
        """
        n1, n2 = wx + 1, wy + 1
        n = n1 * n2

        rows = [np.arange(n)]
        cols = [np.arange(n)]
        data = [np.ones(n)]
        out_f = np.zeros(n)

        ii, jj = np.meshgrid(np.arange(n1), np.arange(n2), indexing="ij")
        roles = {
            "interior": (ii >= 1) & (jj >= 1),
            "horizontal": (ii >= 1) & (jj == 0),
            "vertical": (ii == 0) & (jj >= 1),
            "origin": (ii == 0) & (jj == 0),
        }
        for role, entries in _role_blocks(self.model):
            mask = roles[role]
            src_i = ii[mask]
            src_j = jj[mask]
            src_flat = src_i * n2 + src_j
            for dx, dy, m in entries:
                ti = src_i + dx
                tj = src_j + dy
                inside = (ti >= 0) & (ti <= wx) & (tj >= 0) & (tj <= wy)
                killed = inside & (ti == 0) & (tj == 0)
                keep = inside & ~killed
                if keep.any():
                    rows.append(src_flat[keep])
                    cols.append(ti[keep] * n2 + tj[keep])
                    data.append(np.full(int(keep.sum()), -m))
                outside = ~inside
                if outside.any():
                    fo = (
                        cert.x1 ** ti[outside].astype(float)
                        * cert.y1 ** tj[outside].astype(float)
                        + cert.x2 ** ti[outside].astype(float)
                        * cert.y2 ** tj[outside].astype(float)
                    )
                    np.add.at(out_f, src_flat[outside], m * fo)
        matrix = csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n, n),
        )
        return matrix, out_f

    def box_potential(
        self, wx: int, wy: int, cert: DecayCertificate
    ) -> tuple[BoxPotential, object, np.ndarray]:
        """Solve the supersolution system on the box; also return the LU.

        The working box must reach past the axis crossover levels of the
        certificate, so that every out-of-box state satisfies the one-step
        drift inequality; a ValueError reports the required size otherwise.
        """
        key = (wx, wy, cert)
        cached = self._potentials.get(key)
        if cached is not None:
            return cached
        n1_cross, n2_cross = cert.crossover_levels(self.model)
        jump = self.model.max_jump
        if wx < n1_cross + jump or wy < n2_cross + jump:
            raise ValueError(
                f"working box {wx}x{wy} is smaller than the certificate's "
                f"axis crossover levels ({n1_cross}, {n2_cross}) plus the "
                f"maximal jump {jump}"
            )
        matrix, out_f = self._sparse_system(wx, wy, cert)
        lu = splu(matrix.tocsc())
        f_grid = cert.weight_grid(wx + 1, wy + 1)
        v0 = lu.solve(f_grid.reshape(-1))
        extra = lu.solve(out_f)
        # Rim zone: in-box states reachable in one jump from outside.  The
        # out-of-box cap c f is a supersolution as soon as
        # c >= 1 + theta * max(c, max over the rim of V/f), which the choice
        # c = max(kappa_rim, 1/(1-theta)) satisfies; V depends on c linearly
        # through the dropped-mass term, so iterate the closed form.
        f_flat = f_grid.reshape(-1)
        rim = np.zeros((wx + 1, wy + 1), dtype=bool)
        rim[max(0, wx + 1 - jump) :, :] = True
        rim[:, max(0, wy + 1 - jump) :] = True
        rim_flat = rim.reshape(-1)
        cap = 1.0 / (1.0 - cert.theta)
        for _ in range(64):
            v_flat = v0 + cap * extra
            kappa_rim = float(np.max(v_flat[rim_flat] / f_flat[rim_flat]))
            new_cap = max(kappa_rim, 1.0 / (1.0 - cert.theta))
            if new_cap <= cap * (1.0 + 1e-12):
                cap = max(cap, new_cap)
                break
            cap = new_cap * 1.0000001
        else:
            raise RuntimeError(
                "box potential cap iteration did not settle; enlarge the box"
            )
        v_flat = v0 + cap * extra
        if np.any(v_flat < f_flat * (1.0 - 1e-9)):
            raise RuntimeError("box potential fell below the weight; singular solve?")
        pot = BoxPotential(
            values=v_flat.reshape(wx + 1, wy + 1), cap=cap, certificate=cert
        )
        self._potentials[key] = (pot, lu, out_f)
        return pot, lu, out_f

    # ------------------------------------------------------------------
    # Green tables by certified forward iteration
    # ------------------------------------------------------------------

    def green_table(
        self,
        j: tuple[int, int],
        box: tuple[int, int],
        target_tol: float = 1e-12,
        margin: int | None = None,
        max_grow: int = 3,
        certificate: DecayCertificate | None = None,
    ) -> GreenTable:
        """Compute g(j, k) for 0 <= k1 <= box[0], 0 <= k2 <= box[1].

        ``target_tol`` is the absolute f-weighted stopping threshold; the
        per-entry bounds come out around (target_tol + cap * leak) / f(k).
        The working box grows (up to ``max_grow`` times) while the f-weight
        of leaked mass exceeds target_tol; if leakage still dominates after
        that, the table is returned with the honestly larger bounds rather
        than failing, since the values themselves are unaffected by how the
        leaked mass is accounted.
        """
        key = (j, box, target_tol, margin)
        cached = self._tables.get(key)
        if cached is not None:
            return cached
        cert = certificate if certificate is not None else self.certificate("balanced")
        jump = self.model.max_jump
        pad = max(1, jump)
        n1_cross, n2_cross = cert.crossover_levels(self.model)
        base_margin = margin if margin is not None else 2 * jump + 12
        base_margin = max(base_margin, n1_cross + jump + 1, n2_cross + jump + 1)
        for attempt in range(max_grow + 1):
            final = attempt == max_grow
            table = self._iterate(j, box, target_tol, base_margin, pad, cert, final)
            if table is not None:
                self._tables[key] = table
                return table
            base_margin = int(math.ceil(base_margin * 1.8)) + 4
        raise AssertionError("unreachable: final attempt always returns a table")

    def _iterate(
        self,
        j: tuple[int, int],
        box: tuple[int, int],
        target_tol: float,
        margin: int,
        pad: int,
        cert: DecayCertificate,
        final: bool = True,
    ) -> GreenTable | None:
        kx, ky = box
        wx, wy = kx + margin, ky + margin
        nx, ny = wx + 1 + pad, wy + 1 + pad
        if j[0] > wx or j[1] > wy:
            raise ValueError(f"start {j!r} outside the working box {wx}x{wy}")

        pot, _, _ = self.box_potential(wx, wy, cert)
        weight = cert.weight_grid(nx, ny)
        w_active = weight[: wx + 1, : wy + 1]
        excess = pot.values - w_active  # V - f >= 0
        cap = pot.cap

        rho = np.zeros((nx, ny))
        rho[j[0], j[1]] = 1.0
        values = np.zeros((nx, ny))
        values += rho

        hit = 0.0
        leak_f = 0.0
        w_now = float((rho[: wx + 1, : wy + 1] * w_active).sum())
        cum_w = w_now
        tail_now = float((rho[: wx + 1, : wy + 1] * excess).sum())

        blocks = _role_blocks(self.model)
        iterations = 0
        max_iters = 500_000
        while tail_now > target_tol:
            iterations += 1
            if iterations > max_iters:
                raise RuntimeError(
                    "green_table: certified stopping quantity did not reach "
                    "the threshold within the iteration cap"
                )
            new = np.zeros((nx, ny))
            for role, entries in blocks:
                if role == "interior":
                    src = rho[1 : wx + 1, 1 : wy + 1]
                    if not src.any():
                        continue
                    for dx, dy, m in entries:
                        new[1 + dx : wx + 1 + dx, 1 + dy : wy + 1 + dy] += m * src
                elif role == "horizontal":
                    src = rho[1 : wx + 1, 0]
                    if not src.any():
                        continue
                    for dx, dy, m in entries:
                        new[1 + dx : wx + 1 + dx, dy] += m * src
                elif role == "vertical":
                    src = rho[0, 1 : wy + 1]
                    if not src.any():
                        continue
                    for dx, dy, m in entries:
                        new[dx, 1 + dy : wy + 1 + dy] += m * src
                else:
                    mass = rho[0, 0]
                    if mass > 0.0:
                        for dx, dy, m in entries:
                            new[dx, dy] += m * mass
            hit += new[0, 0]
            new[0, 0] = 0.0
            # Mass stepping past the working box is removed; its future
            # f-weighted occupation is at most cap * (its f-weight).
            right = new[wx + 1 :, :]
            top = new[: wx + 1, wy + 1 :]
            leak_f += float((right * weight[wx + 1 :, :]).sum())
            leak_f += float((top * weight[: wx + 1, wy + 1 :]).sum())
            right[:] = 0.0
            top[:] = 0.0
            values += new
            rho = new
            active = rho[: wx + 1, : wy + 1]
            w_now = float((active * w_active).sum())
            cum_w += w_now
            tail_now = float((active * excess).sum())

        tail_weight = tail_now + cap * leak_f
        if leak_f > target_tol and not final and margin < 4096:
            return None  # grow the working box and retry
        cum_weight = cum_w + tail_weight
        # Future mass can only enter the origin from states one jump away;
        # each unit of mass there carries f-weight at least f_min0.
        f_min0 = min(cert.weight(1, 0), cert.weight(0, 1), cert.weight(1, 1))
        hit_bound = (w_now + tail_weight) / f_min0

        per_entry = tail_weight / w_active
        return GreenTable(
            j=j,
            values=values[: kx + 1, : ky + 1].copy(),
            tail_bound=per_entry[: kx + 1, : ky + 1].copy(),
            hit_prob=hit,
            hit_bound=hit_bound,
            iterations=iterations,
            cum_weight=cum_weight,
            certificate=cert,
            certified=True,
        )

    def green_table_horizon(
        self, j: tuple[int, int], box: tuple[int, int], horizon: int, margin: int | None = None
    ) -> GreenTable:
        """Uncertified fallback: iterate a fixed number of steps.

        Only the hitting-probability slack is rigorous (remaining mass); the
        per-entry bounds are reported as infinity.
        """
        kx, ky = box
        jump = self.model.max_jump
        pad = max(1, jump)
        m = margin if margin is not None else 2 * jump + 12
        wx, wy = kx + m, ky + m
        nx, ny = wx + 1 + pad, wy + 1 + pad
        rho = np.zeros((nx, ny))
        rho[j[0], j[1]] = 1.0
        values = rho.copy()
        hit = 0.0
        leak_raw = 0.0
        blocks = _role_blocks(self.model)
        for _ in range(horizon):
            new = np.zeros((nx, ny))
            for role, entries in blocks:
                if role == "interior":
                    src = rho[1 : wx + 1, 1 : wy + 1]
                    for dx, dy, mass in entries:
                        new[1 + dx : wx + 1 + dx, 1 + dy : wy + 1 + dy] += mass * src
                elif role == "horizontal":
                    src = rho[1 : wx + 1, 0]
                    for dx, dy, mass in entries:
                        new[1 + dx : wx + 1 + dx, dy] += mass * src
                elif role == "vertical":
                    src = rho[0, 1 : wy + 1]
                    for dx, dy, mass in entries:
                        new[dx, 1 + dy : wy + 1 + dy] += mass * src
                else:
                    pool = rho[0, 0]
                    if pool > 0.0:
                        for dx, dy, mass in entries:
                            new[dx, dy] += mass * pool
            hit += new[0, 0]
            new[0, 0] = 0.0
            leak_raw += float(new[wx + 1 :, :].sum() + new[: wx + 1, wy + 1 :].sum())
            new[wx + 1 :, :] = 0.0
            new[: wx + 1, wy + 1 :] = 0.0
            values += new
            rho = new
        remaining = float(rho.sum()) + leak_raw
        bounds = np.full((kx + 1, ky + 1), math.inf)
        return GreenTable(
            j=j,
            values=values[: kx + 1, : ky + 1].copy(),
            tail_bound=bounds,
            hit_prob=hit,
            hit_bound=remaining,
            iterations=horizon,
            cum_weight=math.inf,
            certificate=None,
            certified=False,
        )

    # ------------------------------------------------------------------
    # Resolvent fields: u(j) = sum_n E_j[w(Z(n))] for all j in a box
    # ------------------------------------------------------------------

    def resolvent_field(
        self,
        weight_fn: Callable[[np.ndarray, np.ndarray], np.ndarray],
        box: tuple[int, int],
        sup_ratio: float,
        margin: int | None = None,
        x_floor: float | None = None,
        y_floor: float | None = None,
    ) -> ResolventField:
        """Evaluate u(j) = sum_n E_j[w(Z(n))] for all j in the box at once.

        ``weight_fn(k1, k2)`` must evaluate the test function w on integer
        grids; ``sup_ratio`` must bound sup over ALL states of w(k)/f(k) for
        the certificate weight f (callers arrange this through the floor
        arguments, which force the weight to dominate w globally).  Then
        u_true <= sup_ratio * cap * f pointwise, which turns the dropped
        out-of-box transitions into a computable error field.

        The error field decays into the box at the gap between the weight
        rate and the Green-function decay rate, so the margin is generous by
        default; the sparse solve cost grows only linearly with its square.
        """
        cert = self.certificate("balanced", x_floor=x_floor, y_floor=y_floor)
        jump = self.model.max_jump
        n1_cross, n2_cross = cert.crossover_levels(self.model)
        m = margin if margin is not None else 192
        wx = box[0] + max(m, n1_cross + jump + 1)
        wy = box[1] + max(m, n2_cross + jump + 1)
        pot, lu, out_f = self.box_potential(wx, wy, cert)
        ii, jj = np.meshgrid(np.arange(wx + 1), np.arange(wy + 1), indexing="ij")
        w_grid = weight_fn(ii, jj).astype(float).reshape(-1)
        u = lu.solve(w_grid)
        # Truncation error: the dropped transitions lead to states where
        # u_true <= sup_ratio * cap * f, and the error field solves the same
        # box system with that inflow on the right-hand side.
        err = lu.solve(sup_ratio * pot.cap * out_f)
        values = u.reshape(wx + 1, wy + 1)[: box[0] + 1, : box[1] + 1].copy()
        bound = err.reshape(wx + 1, wy + 1)[: box[0] + 1, : box[1] + 1].copy()
        return ResolventField(values=values, bound=np.abs(bound))

    def hitting_field(self, box: tuple[int, int], margin: int | None = None) -> ResolventField:
        """P_j(the walk ever enters the origin) for all j in the box."""
        model = self.model

        def w(i: np.ndarray, j: np.ndarray) -> np.ndarray:
            out = np.zeros(i.shape, dtype=float)
            for role, entries in _role_blocks(model):
                for dx, dy, m in entries:
                    if role == "interior":
                        mask = (i >= 1) & (j >= 1) & (i + dx == 0) & (j + dy == 0)
                    elif role == "horizontal":
                        mask = (i >= 1) & (j == 0) & (i + dx == 0) & (j + dy == 0)
                    elif role == "vertical":
                        mask = (i == 0) & (j >= 1) & (i + dx == 0) & (j + dy == 0)
                    else:
                        mask = (i == 0) & (j == 0) & (dx == 0) & (dy == 0)
                    if mask.any():
                        out[mask] += m
            return out

        # The one-step mass into the origin is supported within one jump of
        # it, so the global supremum of w/f is attained on a small grid.
        cert = self.certificate("balanced")
        jump = self.model.max_jump
        sup = 0.0
        for i in range(jump + 2):
            for j2 in range(jump + 2):
                val = float(w(np.array([[i]]), np.array([[j2]]))[0, 0])
                if val > 0.0:
                    sup = max(sup, val / cert.weight(i, j2))
        return self.resolvent_field(w, box, sup_ratio=sup, margin=margin)

    def potential_field_vertical(
        self, y_c: float, box: tuple[int, int], derivative: bool = False, margin: int | None = None
    ) -> ResolventField:
        """H_j(0, y_c) (or its term-wise d/dy) for all j in the box.

        The test function w(k) = y_c^{k2} [resp. k2 y_c^{k2-1}] on the
        vertical axis requires y2 > y_c so that w/f is globally bounded and
        maximal at small k2.
        """
        if derivative:

            def w(i: np.ndarray, j: np.ndarray) -> np.ndarray:
                return np.where((i == 0) & (j >= 1), j * y_c ** np.maximum(j - 1, 0), 0.0)

        else:

            def w(i: np.ndarray, j: np.ndarray) -> np.ndarray:
                return np.where((i == 0) & (j >= 1), y_c ** j.astype(float), 0.0)

        cert = self.certificate("balanced", y_floor=y_c * (1.0 + 1e-9))
        ratios = [0.0]
        for k2 in range(1, 4000):
            f = cert.weight(0, k2)
            val = k2 * y_c ** (k2 - 1) if derivative else y_c**k2
            ratios.append(val / f)
            if k2 > 16 and ratios[-1] < 1e-4 * max(ratios):
                break
        sup = max(ratios)
        return self.resolvent_field(
            w, box, sup_ratio=sup, margin=margin, y_floor=y_c * (1.0 + 1e-9)
        )

    def potential_field_horizontal(
        self, x_c: float, box: tuple[int, int], derivative: bool = False, margin: int | None = None
    ) -> ResolventField:
        """H_j(x_c, 0) (or its term-wise d/dx) for all j in the box."""
        if derivative:

            def w(i: np.ndarray, j: np.ndarray) -> np.ndarray:
                return np.where((j == 0) & (i >= 1), i * x_c ** np.maximum(i - 1, 0), 0.0)

        else:

            def w(i: np.ndarray, j: np.ndarray) -> np.ndarray:
                return np.where((j == 0) & (i >= 1), x_c ** i.astype(float), 0.0)

        cert = self.certificate("balanced", x_floor=x_c * (1.0 + 1e-9))
        ratios = [0.0]
        for k1 in range(1, 4000):
            f = cert.weight(k1, 0)
            val = k1 * x_c ** (k1 - 1) if derivative else x_c**k1
            ratios.append(val / f)
            if k1 > 16 and ratios[-1] < 1e-4 * max(ratios):
                break
        sup = max(ratios)
        return self.resolvent_field(
            w, box, sup_ratio=sup, margin=margin, x_floor=x_c * (1.0 + 1e-9)
        )

    # ------------------------------------------------------------------
    # Functional-equation residual
    # ------------------------------------------------------------------

    def functional_equation_residual(
        self, table: GreenTable, x: float, y: float
    ) -> tuple[float, float]:
        """Residual of the kernel identity at (x, y) plus a certified bound.

        The identity: (1 - P(x,y)) (H_j(x,y) - H_j(x,0) - H_j(0,y)) equals
        L_j(x,y) + (phi1(x,y) - 1) H_j(x,0) + (phi2(x,y) - 1) H_j(0,y),
        where L_j involves the probability of ever entering the origin.
        Returns (|lhs - rhs|, bound).
        """
        model = self.model
        j = table.j
        h_full, b_full = table.full_series(x, y)
        h_x0, b_x0 = table.axis_series_x(x)
        h_0y, b_0y = table.axis_series_y(y)
        if b_x0 is None or b_0y is None:
            raise OutsideDomain("axis series tails are not certified at this point")
        hit = table.hit_prob
        hit_err = table.hit_bound
        p = model.P(x, y)
        f1 = model.phi1(x, y)
        f2 = model.phi2(x, y)
        lhs = (1.0 - p) * (h_full - h_x0 - h_0y)
        rhs = model.L(j, x, y, hit) + (f1 - 1.0) * h_x0 + (f2 - 1.0) * h_0y
        residual = abs(lhs - rhs)
        bound = (
            abs(1.0 - p) * (b_full + b_x0 + b_0y)
            + hit_err
            + abs(f1 - 1.0) * b_x0
            + abs(f2 - 1.0) * b_0y
        )
        return residual, bound

    # ------------------------------------------------------------------
    # Probabilistic branch evaluations (independent of kernel rooting)
    # ------------------------------------------------------------------

    def y1_probabilistic(self, x: float, horizon: int = 2000) -> float:
        """First-passage evaluation of the lower kernel branch at x.

        With A_d(x) = sum_{k1} mu(k1, d) x^{k1}, the expected x-weight W
        collected over one unit descent of the free interior walk satisfies
        W = sum_d A_d(x) W^{d+1} (the walk descends at most one level per
        step, so a descent of d+1 levels splits into d+1 independent unit
        descents).  Iterating from 0 increases to the smallest positive
        fixed point, which is the lower branch value.
        """
        levels: dict[int, list[tuple[int, float]]] = {}
        for dx, dy, m in self.model.interior.entries:
            levels.setdefault(dy, []).append((dx, m))
        coeff = {d: math.fsum(m * x**dx for dx, m in lst) for d, lst in levels.items()}
        w = 0.0
        for _ in range(horizon):
            w = math.fsum(a * w ** (d + 1) for d, a in coeff.items())
        return w

    def phi1_branch_probabilistic(self, x: float, horizon: int = 2000) -> float:
        """Horizontal generating function on the lower branch, by first passage.

        One boundary jump of rise d, followed by d unit descents of the free
        walk, produces the value of the horizontal generating function at
        (x, Y1(x)) without any root-finding.
        """
        w = self.y1_probabilistic(x, horizon)
        total = 0.0
        for dx, dy, m in self.model.horizontal.entries:
            total += m * x**dx * w**dy
        return total

    # ------------------------------------------------------------------
    # Monte Carlo estimator
    # ------------------------------------------------------------------

    def monte_carlo_green(
        self,
        j: tuple[int, int],
        targets: Sequence[tuple[int, int]],
        n_paths: int = 100_000,
        horizon: int = 4000,
        seed: int = 0,
        block: int = 8192,
    ) -> dict[tuple[int, int], tuple[float, float]]:
        """Estimate g(j, k) by simulation; returns {k: (mean, half_width95)}.

        Streams are keyed by (seed, block index) through a counter-based
        generator, so results do not depend on scheduling and are
        reproducible for a fixed seed and path count.
        """
        model = self.model
        roles = _role_blocks(model)
        jump_arrays = {}
        for role, entries in roles:
            offs = np.array([(dx, dy) for dx, dy, _ in entries], dtype=np.int64)
            probs = np.array([m for _, _, m in entries])
            cum = np.cumsum(probs)
            jump_arrays[role] = (offs, cum)

        tgt = np.array(list(targets), dtype=np.int64)
        n_targets = len(targets)
        sums = np.zeros(n_targets)
        sq_sums = np.zeros(n_targets)
        done = 0
        block_index = 0
        while done < n_paths:
            b = min(block, n_paths - done)
            rng = np.random.Generator(
                np.random.Philox(key=np.array([seed, block_index], dtype=np.uint64))
            )
            block_index += 1
            pos = np.tile(np.array(j, dtype=np.int64), (b, 1))
            alive = np.ones(b, dtype=bool)
            visits = np.zeros((b, n_targets))
            hits = (pos[:, None, :] == tgt[None, :, :]).all(axis=2)
            visits += hits
            for _ in range(horizon):
                if not alive.any():
                    break
                u = rng.random(b)
                step = np.zeros((b, 2), dtype=np.int64)
                moved = np.zeros(b, dtype=bool)
                on_origin = (pos[:, 0] == 0) & (pos[:, 1] == 0)
                on_h = (pos[:, 1] == 0) & (pos[:, 0] > 0)
                on_v = (pos[:, 0] == 0) & (pos[:, 1] > 0)
                on_int = (pos[:, 0] > 0) & (pos[:, 1] > 0)
                for role, mask in (
                    ("origin", on_origin),
                    ("horizontal", on_h),
                    ("vertical", on_v),
                    ("interior", on_int),
                ):
                    mask = mask & alive
                    if not mask.any():
                        continue
                    offs, cum = jump_arrays[role]
                    total = cum[-1]
                    idx = np.searchsorted(cum, u[mask], side="right")
                    idx = np.minimum(idx, len(cum) - 1)
                    # sub-stochastic rows: excess probability kills the path
                    dead_here = u[mask] >= total
                    sel = np.where(mask)[0]
                    step[sel] = offs[idx]
                    moved[sel] = ~dead_here
                    alive[sel[dead_here]] = False
                pos = pos + np.where(moved[:, None], step, 0)
                arrived_origin = (pos[:, 0] == 0) & (pos[:, 1] == 0) & moved
                alive = alive & ~arrived_origin
                if alive.any():
                    hits = (pos[alive, None, :] == tgt[None, :, :]).all(axis=2)
                    visits[alive] += hits
            sums += visits.sum(axis=0)
            sq_sums += (visits**2).sum(axis=0)
            done += b
        out: dict[tuple[int, int], tuple[float, float]] = {}
        for i, k in enumerate(targets):
            mean = sums[i] / n_paths
            var = max(sq_sums[i] / n_paths - mean**2, 0.0)
            half = 1.96 * math.sqrt(var / n_paths)
            out[tuple(k)] = (float(mean), float(half))
        return out
