"""Eigenvalue strand tracking, braid-word extraction, and braid-word algebra.

Strands are the three eigenvalues followed continuously along a closed
parameter loop.  The braid projection orders strands by damping (descending
imaginary part, i.e. the least-damped strand sits at position 1) and uses
the real part as the depth coordinate that decides which strand passes in
front.  This choice keeps the pair of eigenvalues that merges on an
exceptional arc adjacent in the ordering, so a loop encircling one arc
point produces a single-generator word; ordering by real part instead would
pin the spectator eigenvalue between the symmetric pair and shred each
crossing into three.

Braid words live in B3 and are compared through the left-greedy Garside
normal form, which is exact integer arithmetic on the six permutation
braids.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    AmbiguousCrossingError,
    DegenerateLoopError,
    ValidationError,
)
from .exceptional import classify_phase, SpectralPhase, trace_ep2_arcs
from .loops import ArcSegment, ControlLoop, LineSegment
from .params import SystemParams
from .spectral import spectrum_grid

_PERMS = tuple(itertools.permutations(range(3)))
_AMBIGUITY_RATIO = 10.0
_MATCH_DEPTH = 20
_CROSSING_DEPTH = 40

# Over-strand orientation: +1 means a crossing is positive when the strand
# moving toward larger damping rank has the smaller real part.  Fixed once
# by requiring the canonical lower-arc loop to read as the single positive
# letter sigma_1, then never re-tuned.
_CROSSING_ORIENTATION = +1


def _eigtriple(loop: ControlLoop, s: float) -> np.ndarray:
    d, om, g = loop.point(float(s))
    return spectrum_grid(d, om, g, loop.kappa)


def _match_cost(prev: np.ndarray, new_raw: np.ndarray) -> tuple[tuple[int, ...], float, float]:
    """Best permutation assigning new eigenvalues to existing strand labels."""
    best_perm, best, second = _PERMS[0], math.inf, math.inf
    for perm in _PERMS:
        cost = 0.0
        for i in range(3):
            diff = new_raw[perm[i]] - prev[i]
            cost += diff.real * diff.real + diff.imag * diff.imag
        if cost < best:
            best_perm, second, best = perm, best, cost
        elif cost < second:
            second = cost
    return best_perm, best, second


@dataclass(frozen=True)
class StrandSet:
    """Continuously labeled eigenvalue strands along one loop.

    ``values[i, k]`` is strand i at ``samples[k]``; strand labels equal the
    braid positions at s = 0 (descending imaginary part, ties broken by
    ascending real part).  ``closure_permutation[i]`` names the strand whose
    starting value strand i lands on after the full loop.
    """

    samples: np.ndarray
    values: np.ndarray
    closure_permutation: tuple[int, int, int]
    loop: ControlLoop

    @property
    def scale(self) -> float:
        return max(1.0, float(np.max(np.abs(self.values))))

    def min_gap(self) -> float:
        v = self.values
        return float(
            min(
                np.min(np.abs(v[0] - v[1])),
                np.min(np.abs(v[0] - v[2])),
                np.min(np.abs(v[1] - v[2])),
            )
        )


def _initial_order(triple: np.ndarray) -> list[int]:
    return sorted(range(3), key=lambda i: (-triple[i].imag, triple[i].real))


def _match_segment(
    loop: ControlLoop,
    s_left: float,
    labeled_left: np.ndarray,
    s_right: float,
    raw_right: np.ndarray,
    depth: int,
) -> list[tuple[float, np.ndarray]]:
    perm, best, second = _match_cost(labeled_left, raw_right)
    if second >= _AMBIGUITY_RATIO * best:
        return [(s_right, raw_right[list(perm)])]
    if depth >= _MATCH_DEPTH:
        raise DegenerateLoopError(
            f"strand matching stays ambiguous between s={s_left:.9g} and s={s_right:.9g}; "
            "the loop passes too close to an exceptional point"
        )
    s_mid = 0.5 * (s_left + s_right)
    left_part = _match_segment(loop, s_left, labeled_left, s_mid, _eigtriple(loop, s_mid), depth + 1)
    right_part = _match_segment(loop, s_mid, left_part[-1][1], s_right, raw_right, depth + 1)
    return left_part + right_part


def sample_strands(loop: ControlLoop, n_initial: int = 1024) -> StrandSet:
    """Track the three eigenvalues along the loop with consistent labels.

    Consecutive samples are assigned by the lowest-cost of the six label
    permutations (cost: summed squared eigenvalue displacements); whenever
    the runner-up assignment comes within a factor of ten of the winner the
    step is bisected, recursively up to depth 20, so near-degenerate
    passages either resolve or fail loudly.
    """
    if not isinstance(n_initial, (int, np.integer)) or n_initial < 64:
        raise ValidationError(f"n_initial must be an integer >= 64, got {n_initial!r}")

    s_grid = np.linspace(0.0, 1.0, int(n_initial) + 1)
    coords = loop.point(s_grid)
    raw = spectrum_grid(coords[:, 0], coords[:, 1], coords[:, 2], loop.kappa)

    order = _initial_order(raw[0])
    chain: list[tuple[float, np.ndarray]] = [(0.0, raw[0][order])]
    for k in range(1, len(s_grid)):
        chain.extend(
            _match_segment(loop, chain[-1][0], chain[-1][1], float(s_grid[k]), raw[k], 0)
        )

    samples = np.array([s for s, _ in chain])
    values = np.stack([triple for _, triple in chain], axis=1)

    start, end = values[:, 0], values[:, -1]
    perm, best, second = _match_cost(end, start)
    closure = tuple(int(p) for p in perm)
    return StrandSet(samples, values, closure, loop)


@dataclass(frozen=True)
class BraidWord:
    """Word in B3 over letters +-1 (sigma_1) and +-2 (sigma_2)."""

    letters: tuple[int, ...]

    def __post_init__(self):
        letters = tuple(int(v) for v in self.letters)
        if any(v not in (1, -1, 2, -2) for v in letters):
            raise ValidationError(f"braid letters must be in {{+-1, +-2}}, got {self.letters!r}")
        object.__setattr__(self, "letters", letters)

    def __len__(self) -> int:
        return len(self.letters)

    def exponent_sum(self) -> int:
        return sum(1 if v > 0 else -1 for v in self.letters)

    def induced_permutation(self) -> tuple[int, int, int]:
        perm = (0, 1, 2)
        for letter in self.letters:
            perm = _compose(perm, _TRANSPOSITIONS[abs(letter)])
        return perm

    def inverse(self) -> "BraidWord":
        return BraidWord(tuple(-v for v in reversed(self.letters)))

    def __mul__(self, other: "BraidWord") -> "BraidWord":
        return BraidWord(self.letters + other.letters)

    def to_text(self) -> str:
        if not self.letters:
            return "e"
        return " ".join(f"s{abs(v)}" + ("" if v > 0 else "^-1") for v in self.letters)

    @classmethod
    def from_text(cls, text: str) -> "BraidWord":
        text = text.strip()
        if text in ("", "e"):
            return cls(())
        letters = []
        for token in text.split():
            sign = 1
            if token.endswith("^-1"):
                sign = -1
                token = token[:-3]
            if token not in ("s1", "s2"):
                raise ValidationError(f"cannot parse braid letter {token!r}")
            letters.append(sign * int(token[1]))
        return cls(tuple(letters))


def free_reduce(word: BraidWord) -> BraidWord:
    """Delete adjacent inverse pairs until none remain."""
    stack: list[int] = []
    for letter in word.letters:
        if stack and stack[-1] == -letter:
            stack.pop()
        else:
            stack.append(letter)
    return BraidWord(tuple(stack))


# Permutations are position maps: perm[i] is the position after the braid of
# the strand that started at position i; _compose(a, b) applies a then b.
_TRANSPOSITIONS = {1: (1, 0, 2), 2: (0, 2, 1)}
_IDENTITY = (0, 1, 2)
_HALF_TWIST = (2, 1, 0)


def _compose(a, b):
    return (b[a[0]], b[a[1]], b[a[2]])


def _invert(p):
    out = [0, 0, 0]
    for i in range(3):
        out[p[i]] = i
    return tuple(out)


def _length(p) -> int:
    return sum(1 for i in range(3) for j in range(i + 1, 3) if p[i] > p[j])


def _left_divides(y, x) -> bool:
    return _length(y) + _length(_compose(_invert(y), x)) == _length(x)


def _meet(u, v):
    best = _IDENTITY
    for p in _PERMS:
        if _left_divides(p, u) and _left_divides(p, v) and _length(p) > _length(best):
            best = p
    return best


def _complement(a):
    # The permutation braid finishing a to the half twist: a * complement = Delta.
    return _compose(_invert(a), _HALF_TWIST)


def _tau(p):
    return _compose(_compose(_HALF_TWIST, p), _HALF_TWIST)


@dataclass(frozen=True)
class NormalForm:
    """Left-greedy Garside normal form: Delta^power followed by factors.

    Factors are permutation braids (as position maps), none equal to the
    identity or the half twist, and each consecutive pair is left-weighted.
    Two braid words are equal in B3 exactly when their normal forms match.
    """

    delta_power: int
    factors: tuple[tuple[int, int, int], ...]

    def as_word(self) -> BraidWord:
        letters: list[int] = []
        for _ in range(abs(self.delta_power)):
            block = (1, 2, 1) if self.delta_power > 0 else (-1, -2, -1)
            letters.extend(block)
        for factor in self.factors:
            letters.extend(_PERM_WORDS[factor])
        return BraidWord(tuple(letters))


def _perm_words() -> dict:
    words = {_IDENTITY: ()}
    frontier = [_IDENTITY]
    while frontier:
        nxt = []
        for p in frontier:
            for g in (1, 2):
                q = _compose(p, _TRANSPOSITIONS[g])
                if q not in words:
                    words[q] = words[p] + (g,)
                    nxt.append(q)
        frontier = nxt
    return words


_PERM_WORDS = _perm_words()


def normal_form(word: BraidWord) -> NormalForm:
    """Left-greedy Garside normal form of a braid word in B3."""
    power = 0
    factors: list[tuple[int, int, int]] = []

    for letter in word.letters:
        if letter > 0:
            factors.append(_TRANSPOSITIONS[letter])
        else:
            # sigma^-1 = Delta^-1 * (Delta sigma^-1); moving Delta^-1 to the
            # far left twists every factor accumulated so far.
            power -= 1
            factors = [_tau(f) for f in factors]
            factors.append(_compose(_HALF_TWIST, _TRANSPOSITIONS[-letter]))

    changed = True
    while changed:
        changed = False
        k = 0
        while k < len(factors):
            factor = factors[k]
            if factor == _IDENTITY:
                factors.pop(k)
                changed = True
                continue
            if factor == _HALF_TWIST:
                factors.pop(k)
                factors[:k] = [_tau(f) for f in factors[:k]]
                power += 1
                changed = True
                continue
            k += 1
        for k in range(len(factors) - 1):
            a, b = factors[k], factors[k + 1]
            move = _meet(_complement(a), b)
            if move != _IDENTITY:
                factors[k] = _compose(a, move)
                factors[k + 1] = _compose(_invert(move), b)
                changed = True
    return NormalForm(power, tuple(factors))


def words_equivalent(a: BraidWord, b: BraidWord) -> bool:
    return normal_form(a) == normal_form(b)


class ClosureInvariants:
    """Permutation, link component count, and exponent sum of a braid word."""

    def __init__(self, word: BraidWord):
        self.permutation = word.induced_permutation()
        self.exponent_sum = word.exponent_sum()
        seen = set()
        count = 0
        for start in range(3):
            if start not in seen:
                count += 1
                pos = start
                while pos not in seen:
                    seen.add(pos)
                    pos = self.permutation[pos]
        self.component_count = count

    def as_tuple(self) -> tuple[tuple[int, int, int], int, int]:
        return self.permutation, self.component_count, self.exponent_sum


def closure_invariants(word: BraidWord) -> ClosureInvariants:
    return ClosureInvariants(word)


def _positions(triple: np.ndarray, tie_tol: float) -> list[int]:
    """Strand indices ordered by damping rank (descending Im, then Re)."""
    damping = [-triple[i].imag for i in range(3)]
    order = sorted(range(3), key=lambda i: damping[i])
    for a in range(1, 3):
        i, j = order[a - 1], order[a]
        if abs(damping[i] - damping[j]) <= tie_tol and triple[j].real < triple[i].real:
            order[a - 1], order[a] = j, i
    return order


def _interp_triple(strands: StrandSet, k: int, s: float) -> np.ndarray:
    s0, s1 = strands.samples[k], strands.samples[k + 1]
    w = 0.0 if s1 == s0 else (s - s0) / (s1 - s0)
    return (1.0 - w) * strands.values[:, k] + w * strands.values[:, k + 1]


def _crossing_letter(
    left: np.ndarray, right: np.ndarray, s_left: float, s_right: float, pair: tuple[int, int], scale: float
) -> int:
    i, j = pair
    d_left = -left[i].imag + left[j].imag
    d_right = -right[i].imag + right[j].imag
    w = d_left / (d_left - d_right)
    crossing = (1.0 - w) * left + w * right

    order = _positions(left, 1e-12 * scale)
    pos_i, pos_j = order.index(i), order.index(j)
    if abs(pos_i - pos_j) != 1:
        raise AmbiguousCrossingError(
            f"strands {i} and {j} cross while not adjacent near s={s_left:.9g}"
        )
    index = min(pos_i, pos_j) + 1

    mover_up = i if d_left < 0.0 else j
    other = j if mover_up == i else i
    re_gap = crossing[mover_up].real - crossing[other].real
    if abs(re_gap) <= 1e-12 * scale:
        raise AmbiguousCrossingError(
            f"strands {i} and {j} coincide in both parts near s={s_left + w * (s_right - s_left):.9g}"
        )
    sign = -_CROSSING_ORIENTATION if re_gap > 0.0 else _CROSSING_ORIENTATION
    return sign * index


def _extract_step(
    strands: StrandSet,
    s_left: float,
    left: np.ndarray,
    s_right: float,
    right: np.ndarray,
    scale: float,
    depth: int,
) -> list[int]:
    flips = []
    for i, j in ((0, 1), (0, 2), (1, 2)):
        d_left = -left[i].imag + left[j].imag
        d_right = -right[i].imag + right[j].imag
        if (d_left < 0.0) != (d_right < 0.0):
            flips.append((i, j))
    if not flips:
        return []
    if len(flips) == 1:
        return [_crossing_letter(left, right, s_left, s_right, flips[0], scale)]
    if depth >= _CROSSING_DEPTH:
        raise AmbiguousCrossingError(
            f"multiple strand crossings remain unresolved in s ∈ [{s_left:.9g}, {s_right:.9g}]"
        )
    s_mid = 0.5 * (s_left + s_right)
    raw_mid = _eigtriple(strands.loop, s_mid)
    perm, best, second = _match_cost(left, raw_mid)
    if second < _AMBIGUITY_RATIO * best:
        raise AmbiguousCrossingError(
            f"strand identification ambiguous at s={s_mid:.9g} while separating crossings"
        )
    mid = raw_mid[list(perm)]
    return _extract_step(strands, s_left, left, s_mid, mid, scale, depth + 1) + _extract_step(
        strands, s_mid, mid, s_right, right, scale, depth + 1
    )


def extract_braid_word(strands: StrandSet) -> BraidWord:
    """Read the braid word off a strand set in the damping projection.

    A letter is emitted wherever two strands trade places in the descending
    imaginary-part ordering; the letter index is the pair's position, and
    the sign applies the fixed over-strand convention via the real parts at
    the interpolated crossing.  Steps containing more than one trade are
    subdivided by re-evaluating the loop until the crossings separate.
    """
    scale = strands.scale
    letters: list[int] = []
    for k in range(len(strands.samples) - 1):
        letters.extend(
            _extract_step(
                strands,
                float(strands.samples[k]),
                strands.values[:, k],
                float(strands.samples[k + 1]),
                strands.values[:, k + 1],
                scale,
                0,
            )
        )
    return BraidWord(tuple(letters))


@dataclass(frozen=True)
class VorticityReport:
    """Pairwise eigenvalue winding numbers along a loop.

    ``nu_pairs[(i, j)]`` is the half-integer winding of lambda_i - lambda_j
    (stored exactly as a Fraction with denominator dividing 2) and
    ``nu_total`` sums every ordered pair, matching minus the exponent sum of
    the loop's braid word.
    """

    nu_pairs: dict
    nu_total: Fraction
    n_samples: int


def vorticity(loop: ControlLoop, n_samples: int = 1024) -> VorticityReport:
    """Accumulated argument winding of eigenvalue differences along a loop."""
    strands = sample_strands(loop, n_samples)
    scale = strands.scale
    if strands.min_gap() <= 1e-6 * scale:
        raise DegenerateLoopError(
            "eigenvalue gap collapses along the loop; vorticity is undefined through an exceptional point"
        )
    nu_pairs: dict = {}
    values = strands.values
    for i in range(3):
        for j in range(3):
            if i == j:
                continue
            diff = values[i] - values[j]
            steps = np.angle(diff[1:] / diff[:-1])
            winding = -float(np.sum(steps)) / (2.0 * math.pi)
            doubled = round(2.0 * winding)
            if abs(2.0 * winding - doubled) > 0.05:
                raise DegenerateLoopError(
                    f"winding of strands ({i}, {j}) is {winding:.6f}, not a half integer; "
                    "refine sampling or move the loop away from degeneracies"
                )
            nu_pairs[(i, j)] = Fraction(int(doubled), 2)
    total = sum(nu_pairs.values(), Fraction(0))
    return VorticityReport(nu_pairs, total, int(n_samples))


def _polyline_arclength_midpoint(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Midpoint (by arc length) of a polyline and the unit tangent there."""
    deltas = np.diff(points, axis=0)
    seg_lengths = np.hypot(deltas[:, 0], deltas[:, 1])
    cumulative = np.concatenate([[0.0], np.cumsum(seg_lengths)])
    half = 0.5 * cumulative[-1]
    k = int(np.searchsorted(cumulative, half)) - 1
    k = max(0, min(k, len(seg_lengths) - 1))
    w = (half - cumulative[k]) / seg_lengths[k]
    midpoint = points[k] + w * deltas[k]
    tangent = deltas[k] / seg_lengths[k]
    return midpoint, tangent


def _min_distance_to_polyline(point: np.ndarray, polyline: np.ndarray) -> float:
    best = math.inf
    for k in range(len(polyline) - 1):
        a = polyline[k]
        d = polyline[k + 1] - a
        denom = float(d @ d)
        t = 0.0 if denom == 0.0 else float(np.clip((point - a) @ d / denom, 0.0, 1.0))
        best = min(best, float(np.linalg.norm(point - (a + t * d))))
    return best


_RADIUS_FACTOR = 0.35
_ARC_TRACE_POINTS = 512


def _transverse_circle(
    kappa: float,
    center2d: np.ndarray,
    tangent2d: np.ndarray,
    radius: float,
    span_sign: float,
) -> ArcSegment:
    """Circle around an in-plane arc point, in the plane of its normal and detuning.

    The circle starts at the pole displaced along the in-plane normal that
    points into the all-imaginary lens, so both tether attachment points sit
    in the lens where strand order is locked.
    """
    normal = np.array([-tangent2d[1], tangent2d[0]])
    probe = center2d + 1e-3 * kappa * normal
    if classify_phase(probe[0], probe[1], kappa) is not SpectralPhase.ALL_IMAGINARY:
        normal = -normal
    u_axis = (0.0, float(normal[0]), float(normal[1]))
    v_axis = (1.0, 0.0, 0.0)
    center3d = (0.0, float(center2d[0]), float(center2d[1]))
    return ArcSegment(center3d, u_axis, v_axis, radius, 0.0, span_sign * 2.0 * math.pi)


# Traversal directions of the two canonical circles, chosen so the lower-arc
# loop reads +1 and the upper-arc loop +2 under the fixed crossing
# convention (the loops' drawn orientations are a geometry choice; the sign
# rule is not re-tuned per loop).
_LOWER_SPAN_SIGN = +1.0
_UPPER_SPAN_SIGN = -1.0


def canonical_loops(kappa: float) -> dict:
    """The five reference loops keyed red, blue, green, brown, purple.

    Red and blue encircle one point of the lower and upper exceptional arc
    respectively with a circle transverse to the plane of the arcs, tethered
    out and back to the shared base point (omega, g) = (0.05, 0.25)*kappa at
    zero detuning inside the lens; green, brown, purple are the
    concatenations red*red, blue*red, and red*blue (first factor traversed
    first).
    """
    if not (isinstance(kappa, (int, float)) and math.isfinite(kappa) and kappa > 0):
        raise ValidationError(f"kappa must be finite and > 0, got {kappa!r}")
    kappa = float(kappa)
    lower, upper = trace_ep2_arcs(kappa, _ARC_TRACE_POINTS)

    base = np.array([0.0, 0.05 * kappa, 0.25 * kappa])
    circles = {}
    for name, own, other, span in (
        ("red", lower, upper, _LOWER_SPAN_SIGN),
        ("blue", upper, lower, _UPPER_SPAN_SIGN),
    ):
        center, tangent = _polyline_arclength_midpoint(own)
        radius = _RADIUS_FACTOR * _min_distance_to_polyline(center, other)
        circle = _transverse_circle(kappa, center, tangent, radius, span)
        pole = circle.start_point
        circles[name] = ControlLoop(
            (
                LineSegment(tuple(base), tuple(pole)),
                circle,
                LineSegment(tuple(pole), tuple(base)),
            ),
            kappa,
        )

    loops = {"red": circles["red"], "blue": circles["blue"]}
    loops["green"] = circles["red"].concat(circles["red"])
    loops["brown"] = circles["blue"].concat(circles["red"])
    loops["purple"] = circles["red"].concat(circles["blue"])
    return loops
