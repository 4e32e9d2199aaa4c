"""Jump measures and walk models on the quarter plane.

A walk model is a Markov chain on Z_+^2 whose jump distribution depends only
on which part of the state space the walk currently occupies:

* ``interior``   -- jump measure used at states with both coordinates >= 1,
* ``horizontal`` -- jump measure used on the horizontal axis (k1 >= 1, k2 = 0),
* ``vertical``   -- jump measure used on the vertical axis (k1 = 0, k2 >= 1),
* ``origin``     -- jump measure used at (0, 0).

Measures are finitely supported and sub-probability (total mass <= 1); mass
deficit is interpreted as killing.  Support constraints keep the walk inside
the quarter plane: interior jumps are bounded below by -1 in each coordinate,
axis measures cannot jump through their axis, and origin jumps are
non-negative in both coordinates.

The module also provides the generating-function machinery shared by the
whole package: the interior jump generating function P(x, y), the boundary
generating functions phi0, phi1, phi2, the kernel polynomial
Q(x, y) = x*y*(1 - P(x, y)) in cleared form, the cleared boundary kernels
psi1(x, y) = x*(phi1(x, y) - 1) and psi2(x, y) = y*(phi2(x, y) - 1), and the
inhomogeneous term L used by the relation that ties the Green generating
functions of the walk together.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

__all__ = [
    "InvalidModel",
    "NonStochasticBoundary",
    "JumpMeasure",
    "WalkModel",
    "RecurrenceResult",
    "validate_model",
    "classify_recurrence",
    "parse_model",
    "load_model",
    "dump_model",
]


class InvalidModel(ValueError):
    """The supplied measures do not define a usable quarter-plane walk."""


class NonStochasticBoundary(InvalidModel):
    """Recurrence classification needs every measure to have total mass one."""


def _falling(k: int, order: int) -> int:
    """Falling factorial k * (k-1) * ... * (k-order+1)."""
    out = 1
    for i in range(order):
        out *= k - i
    return out


def _power(base: float, exponent: int) -> float:
    """base**exponent for integer exponents, demanding base > 0 when needed."""
    if exponent == 0:
        return 1.0
    if base == 0.0 and exponent < 0:
        raise ZeroDivisionError("negative exponent at zero base")
    return float(base) ** exponent


@dataclass(frozen=True)
class JumpMeasure:
    """A finitely supported non-negative measure on Z^2 jump offsets.

    Entries are stored sorted by offset so that every evaluation sums terms
    in a reproducible order.  Masses are strictly positive; zero-mass entries
    are dropped on construction.
    """

    entries: tuple[tuple[int, int, float], ...]

    @classmethod
    def from_dict(cls, masses: Mapping[tuple[int, int], float]) -> "JumpMeasure":
        items = []
        for (dx, dy), mass in masses.items():
            mass = float(mass)
            if mass < 0.0:
                raise InvalidModel(f"negative mass {mass!r} at offset ({dx}, {dy})")
            if mass == 0.0:
                continue
            items.append((int(dx), int(dy), mass))
        items.sort(key=lambda item: (item[0], item[1]))
        return cls(entries=tuple(items))

    def __iter__(self) -> Iterator[tuple[int, int, float]]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def as_dict(self) -> dict[tuple[int, int], float]:
        return {(dx, dy): m for dx, dy, m in self.entries}

    @property
    def total_mass(self) -> float:
        return math.fsum(m for _, _, m in self.entries)

    @property
    def support(self) -> tuple[tuple[int, int], ...]:
        return tuple((dx, dy) for dx, dy, _ in self.entries)

    @property
    def max_jump(self) -> int:
        """Largest coordinate magnitude appearing in the support."""
        if not self.entries:
            return 0
        return max(max(abs(dx), abs(dy)) for dx, dy, _ in self.entries)

    def gf(self, x: float, y: float, dx_order: int = 0, dy_order: int = 0) -> float:
        """Generating function sum m * x**k1 * y**k2, or a partial derivative.

        ``dx_order`` / ``dy_order`` request partial derivatives in x / y; the
        derivative of each term carries the falling-factorial coefficient.
        Evaluation points must be positive whenever a term would otherwise
        need a negative power of zero.
        """
        terms = []
        for k1, k2, m in self.entries:
            c = _falling(k1, dx_order) * _falling(k2, dy_order)
            if c == 0:
                continue
            terms.append(
                m * c * _power(x, k1 - dx_order) * _power(y, k2 - dy_order)
            )
        return math.fsum(terms)

    def tilted_moment(self, x: float, y: float, i: int = 0, j: int = 0) -> float:
        """Moment sum m * k1**i * k2**j * x**k1 * y**k2 of the tilted measure."""
        terms = []
        for k1, k2, m in self.entries:
            w = (k1 ** i if i else 1) * (k2 ** j if j else 1)
            if w == 0:
                continue
            terms.append(m * w * _power(x, k1) * _power(y, k2))
        return math.fsum(terms)

    def mean(self) -> tuple[float, float]:
        """Mean jump (first moments) of the measure."""
        return (
            math.fsum(m * k1 for k1, _, m in self.entries),
            math.fsum(m * k2 for _, k2, m in self.entries),
        )


_ROLE_BOUNDS = {
    # role: (min dx, min dy)
    "interior": (-1, -1),
    "horizontal": (-1, 0),
    "vertical": (0, -1),
    "origin": (0, 0),
}


@dataclass(frozen=True)
class WalkModel:
    """A partially homogeneous random walk on the quarter plane."""

    interior: JumpMeasure
    horizontal: JumpMeasure
    vertical: JumpMeasure
    origin: JumpMeasure

    # -- generating functions -------------------------------------------------

    def P(self, x: float, y: float, dx_order: int = 0, dy_order: int = 0) -> float:
        """Interior jump generating function (or a partial derivative)."""
        return self.interior.gf(x, y, dx_order, dy_order)

    def phi1(self, x: float, y: float, dx_order: int = 0, dy_order: int = 0) -> float:
        """Horizontal-axis jump generating function."""
        return self.horizontal.gf(x, y, dx_order, dy_order)

    def phi2(self, x: float, y: float, dx_order: int = 0, dy_order: int = 0) -> float:
        """Vertical-axis jump generating function."""
        return self.vertical.gf(x, y, dx_order, dy_order)

    def phi0(self, x: float, y: float, dx_order: int = 0, dy_order: int = 0) -> float:
        """Origin jump generating function."""
        return self.origin.gf(x, y, dx_order, dy_order)

    def Q(self, x: float, y: float) -> float:
        """Kernel polynomial x*y*(1 - P(x, y)) with cleared denominators.

        All exponents in the cleared form are non-negative, so the kernel is
        defined on the closed quadrant including the axes.
        """
        terms = [x * y]
        for k1, k2, m in self.interior.entries:
            terms.append(-m * _power(x, k1 + 1) * _power(y, k2 + 1))
        return math.fsum(terms)

    def psi1(self, x: float, y: float) -> float:
        """Cleared horizontal boundary kernel x*(phi1(x, y) - 1)."""
        terms = [-float(x)]
        for k1, k2, m in self.horizontal.entries:
            terms.append(m * _power(x, k1 + 1) * _power(y, k2))
        return math.fsum(terms)

    def psi2(self, x: float, y: float) -> float:
        """Cleared vertical boundary kernel y*(phi2(x, y) - 1)."""
        terms = [-float(y)]
        for k1, k2, m in self.vertical.entries:
            terms.append(m * _power(x, k1) * _power(y, k2 + 1))
        return math.fsum(terms)

    def L(self, j: tuple[int, int], x: float, y: float, hit_prob: float) -> float:
        """Inhomogeneous term of the Green generating-function relation.

        For a start j != (0, 0) this is x**j1 * y**j2 minus the probability
        that the walk started at j ever reaches the origin; for j = (0, 0) it
        is phi0(x, y) minus the return probability to the origin.
        """
        j1, j2 = j
        if (j1, j2) == (0, 0):
            return self.phi0(x, y) - hit_prob
        return _power(x, j1) * _power(y, j2) - hit_prob

    # -- drifts ---------------------------------------------------------------

    def interior_drift(self) -> tuple[float, float]:
        return self.interior.mean()

    def horizontal_drift(self) -> tuple[float, float]:
        return self.horizontal.mean()

    def vertical_drift(self) -> tuple[float, float]:
        return self.vertical.mean()

    def origin_drift(self) -> tuple[float, float]:
        return self.origin.mean()

    @property
    def max_jump(self) -> int:
        return max(
            self.interior.max_jump,
            self.horizontal.max_jump,
            self.vertical.max_jump,
            self.origin.max_jump,
        )

    def measure_at(self, state: tuple[int, int]) -> JumpMeasure:
        """Jump measure governing the walk at ``state``."""
        k1, k2 = state
        if k1 < 0 or k2 < 0:
            raise ValueError(f"state {state} is outside the quarter plane")
        if k1 == 0 and k2 == 0:
            return self.origin
        if k2 == 0:
            return self.horizontal
        if k1 == 0:
            return self.vertical
        return self.interior

    def swap_axes(self) -> "WalkModel":
        """The model with the two coordinates exchanged."""

        def flip(measure: JumpMeasure) -> JumpMeasure:
            return JumpMeasure.from_dict(
                {(dy, dx): m for dx, dy, m in measure.entries}
            )

        return WalkModel(
            interior=flip(self.interior),
            horizontal=flip(self.vertical),
            vertical=flip(self.horizontal),
            origin=flip(self.origin),
        )


# -- validation ----------------------------------------------------------------


def _check_support(role: str, measure: JumpMeasure) -> None:
    min_dx, min_dy = _ROLE_BOUNDS[role]
    for dx, dy, _ in measure.entries:
        if dx < min_dx or dy < min_dy:
            raise InvalidModel(
                f"{role} measure has a jump ({dx}, {dy}) leaving the quarter "
                f"plane (allowed: dx >= {min_dx}, dy >= {min_dy})"
            )


def _reachability_failure(model: WalkModel, radius: int) -> tuple[int, int] | None:
    """Return a state in the inner box that breaks irreducibility, if any.

    Runs a forward breadth-first search from the origin and a backward one
    (over reversed transitions) on the box [0, radius]^2 and requires every
    state of the inner half box to be reachable in both senses.  The box is
    large enough relative to the maximal jump that paths needing to leave it
    are irrelevant for communication between inner states.
    """
    inner = radius // 2

    def bfs(forward: bool) -> set[tuple[int, int]]:
        seen = {(0, 0)}
        queue = deque([(0, 0)])
        while queue:
            state = queue.popleft()
            if forward:
                moves = [
                    (state[0] + dx, state[1] + dy)
                    for dx, dy, _ in model.measure_at(state).entries
                ]
            else:
                moves = []
                for dx, dy in _incoming_offsets(model):
                    src = (state[0] - dx, state[1] - dy)
                    if src[0] < 0 or src[1] < 0:
                        continue
                    if src[0] > radius or src[1] > radius:
                        continue
                    if (dx, dy) in model.measure_at(src).as_dict():
                        moves.append(src)
            for nxt in moves:
                if nxt[0] < 0 or nxt[1] < 0 or nxt[0] > radius or nxt[1] > radius:
                    continue
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return seen

    reachable = bfs(forward=True)
    coreachable = bfs(forward=False)
    for k1 in range(inner + 1):
        for k2 in range(inner + 1):
            if (k1, k2) not in reachable or (k1, k2) not in coreachable:
                return (k1, k2)
    return None


def _incoming_offsets(model: WalkModel) -> set[tuple[int, int]]:
    offsets: set[tuple[int, int]] = set()
    for measure in (model.interior, model.horizontal, model.vertical, model.origin):
        offsets.update(measure.support)
    return offsets


def validate_model(model: WalkModel, *, mass_tol: float = 1e-12) -> list[str]:
    """Validate a walk model; raise InvalidModel on a hard failure.

    Returns a list of non-fatal warnings (for instance a mass deficit, which
    is legal and interpreted as killing).
    """
    warnings: list[str] = []
    roles = {
        "interior": model.interior,
        "horizontal": model.horizontal,
        "vertical": model.vertical,
        "origin": model.origin,
    }
    for role, measure in roles.items():
        if not measure.entries:
            raise InvalidModel(f"{role} measure is empty")
        total = measure.total_mass
        if total > 1.0 + mass_tol:
            raise InvalidModel(
                f"{role} measure has total mass {total!r} exceeding one"
            )
        if total < 1.0 - mass_tol:
            warnings.append(
                f"{role} measure is sub-stochastic (total mass {total:.12g}); "
                "the deficit acts as killing"
            )
        _check_support(role, measure)

    if all(dy <= 0 for _, dy, _ in model.horizontal.entries):
        raise InvalidModel(
            "horizontal measure never enters the interior (needs a jump with dy > 0)"
        )
    if all(dx <= 0 for dx, _, _ in model.vertical.entries):
        raise InvalidModel(
            "vertical measure never enters the interior (needs a jump with dx > 0)"
        )
    if all(dx <= 0 for dx, _, _ in model.interior.entries) or all(
        dx >= 0 for dx, _, _ in model.interior.entries
    ):
        raise InvalidModel(
            "interior measure must have jumps with both positive and negative dx"
        )
    if all(dy <= 0 for _, dy, _ in model.interior.entries) or all(
        dy >= 0 for _, dy, _ in model.interior.entries
    ):
        raise InvalidModel(
            "interior measure must have jumps with both positive and negative dy"
        )

    radius = max(2 * model.max_jump * 8, 8)
    failure = _reachability_failure(model, radius)
    if failure is not None:
        raise InvalidModel(
            f"walk is not irreducible: state {failure} does not communicate "
            f"with the origin within a box of radius {radius}"
        )
    return warnings


# -- recurrence classification ---------------------------------------------------


@dataclass(frozen=True)
class RecurrenceResult:
    """Outcome of the drift-based recurrence/transience classification."""

    label: str  # one of R0, R1, R2, T0, T1, T2, Indeterminate
    chain_type: str  # "positive recurrent" | "transient" | "indeterminate"
    interior_drift: tuple[float, float]
    horizontal_drift: tuple[float, float]
    vertical_drift: tuple[float, float]
    warnings: tuple[str, ...] = ()


def classify_recurrence(model: WalkModel, *, tol: float = 1e-12) -> RecurrenceResult:
    """Classify the walk as positive recurrent or transient from its drifts.

    Requires every measure to be stochastic (total mass one); the drift-based
    dichotomy has no meaning for killed walks.  Configurations whose
    classification would flip within ``tol`` of a defining inequality are
    reported as Indeterminate with a warning rather than silently resolved.
    """
    for role, measure in (
        ("interior", model.interior),
        ("horizontal", model.horizontal),
        ("vertical", model.vertical),
        ("origin", model.origin),
    ):
        if abs(measure.total_mass - 1.0) > tol:
            raise NonStochasticBoundary(
                f"recurrence classification needs stochastic measures; "
                f"{role} measure has total mass {measure.total_mass:.12g}"
            )

    m1, m2 = model.interior_drift()
    h1, h2 = model.horizontal_drift()
    v1, v2 = model.vertical_drift()
    d1 = m1 * h2 - m2 * h1  # discriminates the horizontal boundary pull
    d2 = m2 * v1 - m1 * v2  # discriminates the vertical boundary pull

    warnings: list[str] = []
    scale = max(abs(m1), abs(m2), tol)
    dscale1 = max(abs(m1) * abs(h2), abs(m2) * abs(h1), tol)
    dscale2 = max(abs(m2) * abs(v1), abs(m1) * abs(v2), tol)

    def sign(value: float, ref: float) -> int:
        if abs(value) <= tol * ref:
            return 0
        return 1 if value > 0 else -1

    s1, s2 = sign(m1, scale), sign(m2, scale)
    sd1, sd2 = sign(d1, dscale1), sign(d2, dscale2)

    def result(label: str, chain_type: str) -> RecurrenceResult:
        return RecurrenceResult(
            label=label,
            chain_type=chain_type,
            interior_drift=(m1, m2),
            horizontal_drift=(h1, h2),
            vertical_drift=(v1, v2),
            warnings=tuple(warnings),
        )

    if s1 == 0 or s2 == 0 or (s2 < 0 and sd1 == 0) or (s1 < 0 and sd2 == 0):
        warnings.append(
            "a defining drift quantity is within tolerance of zero; the "
            "classification would be unstable"
        )
        return result("Indeterminate", "indeterminate")

    if s1 < 0 and s2 < 0 and sd1 < 0 and sd2 < 0:
        return result("R0", "positive recurrent")
    if s2 < 0 and s1 >= 0 and sd1 < 0:
        return result("R1", "positive recurrent")
    if s1 < 0 and s2 >= 0 and sd2 < 0:
        return result("R2", "positive recurrent")
    if s1 > 0 and s2 > 0:
        return result("T0", "transient")
    if s2 < 0 and sd1 > 0:
        return result("T1", "transient")
    if s1 < 0 and sd2 > 0:
        return result("T2", "transient")

    warnings.append(
        "drift configuration falls outside the classified recurrent and "
        "transient regimes"
    )
    return result("Indeterminate", "indeterminate")


# -- model files -----------------------------------------------------------------

_SECTIONS = {"mu": "interior", "mu0": "origin", "mu1": "horizontal", "mu2": "vertical"}


def parse_model(text: str) -> WalkModel:
    """Parse a model description.

    The format has four sections ``[mu]``, ``[mu0]``, ``[mu1]``, ``[mu2]``,
    one jump per line as ``dx dy mass`` with ``#`` comments; masses may be
    decimals or fractions like ``3/20``.
    """
    sections: dict[str, dict[tuple[int, int], float]] = {
        name: {} for name in _SECTIONS
    }
    current: str | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in sections:
                raise InvalidModel(
                    f"line {lineno}: unknown section [{name}] "
                    f"(expected one of {sorted(sections)})"
                )
            current = name
            continue
        if current is None:
            raise InvalidModel(f"line {lineno}: jump entry before any section header")
        parts = line.split()
        if len(parts) != 3:
            raise InvalidModel(
                f"line {lineno}: expected 'dx dy mass', got {raw.strip()!r}"
            )
        try:
            dx, dy = int(parts[0]), int(parts[1])
            mass = float(Fraction(parts[2]))
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidModel(f"line {lineno}: {exc}") from exc
        key = (dx, dy)
        if key in sections[current]:
            raise InvalidModel(
                f"line {lineno}: duplicate offset ({dx}, {dy}) in [{current}]"
            )
        sections[current][key] = mass

    missing = [name for name, masses in sections.items() if not masses]
    if missing:
        raise InvalidModel(f"missing or empty sections: {missing}")
    kwargs = {
        _SECTIONS[name]: JumpMeasure.from_dict(masses)
        for name, masses in sections.items()
    }
    return WalkModel(**kwargs)


def load_model(path: str) -> WalkModel:
    """Read a model file (UTF-8) and parse it."""
    with open(path, encoding="utf-8") as handle:
        return parse_model(handle.read())


def dump_model(model: WalkModel) -> str:
    """Serialize a model in the same format accepted by :func:`parse_model`."""
    lines: list[str] = []
    by_section = {
        "mu": model.interior,
        "mu0": model.origin,
        "mu1": model.horizontal,
        "mu2": model.vertical,
    }
    for name in ("mu", "mu0", "mu1", "mu2"):
        lines.append(f"[{name}]")
        for dx, dy, mass in by_section[name].entries:
            lines.append(f"{dx} {dy} {mass!r}")
        lines.append("")
    return "\n".join(lines)
