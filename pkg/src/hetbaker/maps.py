"""Generalized heterochaos baker maps on the square and the cube.

Points are tuples of coordinates.  When the coordinates are
``fractions.Fraction`` all arithmetic is exact; when they are floats the
parameters are converted once and the same formulas run in binary
floating point.  Branches are numbered 1..2m: branches 1..m contract the
central (y) direction by 1/m, branches m+1..2m expand it by m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .dyck import Alphabet, Window, is_admissible


def as_fraction(value) -> Fraction:
    """Exact rational from a Fraction, int or "p/q" string (decimals are refused)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "." in text or "e" in text.lower():
            raise ValueError(f"rational expected as 'p/q' or integer, got {value!r}")
        return Fraction(text)
    raise TypeError(f"cannot read {value!r} as an exact rational")


def fraction_str(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Params:
    m: int
    a: Fraction
    b: Fraction | None = None  # defaults to a

    def __post_init__(self):
        object.__setattr__(self, "a", as_fraction(self.a))
        object.__setattr__(self, "b", self.a if self.b is None else as_fraction(self.b))
        if self.m < 2:
            raise ValueError(f"m must be >= 2, got {self.m}")
        for name in ("a", "b"):
            v = getattr(self, name)
            if not 0 < v < self.c0:
                raise ValueError(f"{name}={v} outside (0, 1/{self.m})")

    @property
    def c0(self) -> Fraction:
        return Fraction(1, self.m)

    @property
    def c1(self) -> Fraction:
        return Fraction(1, self.m * (self.m + 1))

    @property
    def c2(self) -> Fraction:
        return Fraction(1, self.m + 1)

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.m)

    def to_json(self) -> dict:
        return {"m": self.m, "a": fraction_str(self.a), "b": fraction_str(self.b)}


class CodingError(ValueError):
    """An orbit met a partition boundary, so its coding is undefined."""

    def __init__(self, message, index):
        super().__init__(message)
        self.index = index


class EmptyCylinderError(ValueError):
    pass


class BoundaryOrbitError(ValueError):
    """The periodic point exists but lies on a partition boundary.

    The solved orbit is kept on ``.orbit`` so its multipliers stay available.
    """

    def __init__(self, message, orbit):
        super().__init__(message)
        self.orbit = orbit


def _exact(p) -> bool:
    return all(isinstance(c, (Fraction, int)) for c in p)


def _consts(params: Params, p):
    if _exact(p):
        return params.a, params.b
    return float(params.a), float(params.b)


def branch_affine(params: Params, i: int, exact: bool = True):
    """Per-axis ``(scale, shift)`` of branch ``i``: coordinate' = scale * coordinate + shift."""
    m = params.m
    a, b = (params.a, params.b) if exact else (float(params.a), float(params.b))
    one = Fraction(1) if exact else 1.0
    if 1 <= i <= m:
        return (
            (one / a, -(i - 1) * one),
            (one / m, (i - 1) * one / m),
            (1 - m * b, 0 * one),
        )
    if m < i <= 2 * m:
        return (
            (one / (1 - m * a), -m * a / (1 - m * a)),
            (m * one, -(i - m - 1) * one),
            (b, 1 - m * b + b * (i - m - 1)),
        )
    raise ValueError(f"branch {i} outside 1..{2 * m}")


def branch_cell(params: Params, i: int):
    """Closed box ``[lo, hi]`` per axis of the domain of branch ``i`` in the cube."""
    m, a = params.m, params.a
    if 1 <= i <= m:
        return ((a * (i - 1), a * i), (Fraction(0), Fraction(1)), (Fraction(0), Fraction(1)))
    if m < i <= 2 * m:
        k = i - m - 1
        return ((m * a, Fraction(1)), (Fraction(k, m), Fraction(k + 1, m)), (Fraction(0), Fraction(1)))
    raise ValueError(f"branch {i} outside 1..{2 * m}")


def region_index(params: Params, p) -> int:
    """Branch whose half-open domain contains ``p`` (z, if present, is ignored)."""
    m = params.m
    a, _ = _consts(params, p)
    x, y = p[0], p[1]
    if not (0 <= x <= 1 and 0 <= y <= 1):
        raise ValueError(f"point {p} outside the unit square")
    if x < m * a:
        return min(int(x // a) + 1, m)
    return m + 1 + min(int(y * m), m - 1)


def in_cell(params: Params, p, i: int, interior: bool) -> bool:
    cell = branch_cell(params, i)
    for c, (lo, hi) in zip(p, cell):
        if interior:
            if not lo < c < hi:
                return False
        elif not lo <= c <= hi:
            return False
    return True


def apply_F(params: Params, x):
    m = params.m
    a, _ = _consts(params, (x,))
    if x < m * a:
        i = min(int(x // a) + 1, m)
        return (x - (i - 1) * a) / a
    return (x - m * a) / (1 - m * a)


def _apply_branch(params: Params, p, i: int):
    maps = branch_affine(params, i, exact=_exact(p))
    return tuple(s * c + t for c, (s, t) in zip(p, maps))


def apply_f2(params: Params, p):
    return _apply_branch(params, p[:2], region_index(params, p))


def apply_f3(params: Params, p):
    return _apply_branch(params, p, region_index(params, p))


def branch_image(params: Params, i: int):
    """Closed box image of branch ``i``'s domain under its affine map."""
    out = []
    for (lo, hi), (s, t) in zip(branch_cell(params, i), branch_affine(params, i)):
        out.append((s * lo + t, s * hi + t))
    return tuple(out)


def apply_f3_inv(params: Params, p):
    """Branch-wise inverse of the cube map; ``p`` must lie in exactly one branch image."""
    hits = []
    for i in range(1, 2 * params.m + 1):
        img = branch_image(params, i)
        if all(lo <= c <= hi for c, (lo, hi) in zip(p, img)):
            hits.append(i)
    if len(hits) != 1:
        kind = "boundary between branch images" if hits else "outside every branch image"
        raise ValueError(f"point {p} is on the {kind} (branches {hits})")
    i = hits[0]
    maps = branch_affine(params, i, exact=_exact(p))
    return tuple((c - t) / s for c, (s, t) in zip(p, maps))


def orbit_coding(params: Params, p, n_fwd: int, n_bwd: int = 0) -> Window:
    """Branch indices visited on ``[-n_bwd, n_fwd)``; every visit must be interior."""
    if len(p) == 2 and n_bwd:
        raise ValueError("the square map is not invertible; n_bwd must be 0")
    forward = []
    q = tuple(p)
    for k in range(n_fwd):
        i = region_index(params, q)
        if not in_cell(params, q, i, interior=True):
            raise CodingError(f"iterate {k} = {q} lies on a partition boundary", k)
        forward.append(i)
        q = _apply_branch(params, q, i)
    backward = []
    q = tuple(p)
    if n_bwd:
        i0 = region_index(params, q)
        if not in_cell(params, q, i0, interior=True):
            raise CodingError(f"point {q} lies on a partition boundary", 0)
    for k in range(1, n_bwd + 1):
        try:
            q = apply_f3_inv(params, q)
        except ValueError as exc:
            raise CodingError(str(exc), -k) from None
        i = region_index(params, q)
        if not in_cell(params, q, i, interior=True):
            raise CodingError(f"iterate {-k} = {q} lies on a partition boundary", -k)
        backward.append(i)
    return Window(tuple(reversed(backward)) + tuple(forward), -n_bwd)


@dataclass(frozen=True)
class Box:
    """Open box: one ``(lo, hi)`` pair per axis."""

    intervals: tuple[tuple[Fraction, Fraction], ...]

    @classmethod
    def unit(cls, dim: int) -> "Box":
        return cls(tuple((Fraction(0), Fraction(1)) for _ in range(dim)))

    @property
    def dim(self) -> int:
        return len(self.intervals)

    @property
    def is_empty(self) -> bool:
        return any(lo >= hi for lo, hi in self.intervals)

    def intersect(self, other: "Box") -> "Box":
        return Box(tuple((max(l1, l2), min(h1, h2))
                         for (l1, h1), (l2, h2) in zip(self.intervals, other.intervals)))

    def contains(self, p) -> bool:
        return all(lo < c < hi for c, (lo, hi) in zip(p, self.intervals))

    def subset_of(self, other: "Box") -> bool:
        if self.is_empty:
            return True
        return all(l2 <= l1 and h1 <= h2
                   for (l1, h1), (l2, h2) in zip(self.intervals, other.intervals))

    @property
    def center(self):
        return tuple((lo + hi) / 2 for lo, hi in self.intervals)

    @property
    def diameters(self):
        return tuple(max(hi - lo, Fraction(0)) for lo, hi in self.intervals)

    def to_json(self) -> dict:
        return {"empty": self.is_empty,
                "intervals": [[fraction_str(lo), fraction_str(hi)] for lo, hi in self.intervals]}


def _cell_box(params: Params, i: int, dim: int) -> Box:
    return Box(branch_cell(params, i)[:dim])


def _preimage(box: Box, maps) -> Box:
    return Box(tuple(((lo - t) / s, (hi - t) / s) for (lo, hi), (s, t) in zip(box.intervals, maps)))


def _image(box: Box, maps) -> Box:
    return Box(tuple((s * lo + t, s * hi + t) for (lo, hi), (s, t) in zip(box.intervals, maps)))


def cylinder_box(params: Params, w, dim: int = 3) -> Box:
    """Open box of points whose orbit visits the interior of ``w[k]``'s domain at every index k.

    ``w`` is a Window (or a plain word read from index 0) whose index range
    must contain 0, or end there.  The square map (``dim=2``) only allows
    forward words.
    """
    w = w if isinstance(w, Window) else Window(tuple(w), 0)
    if not w.start <= 0 <= w.end:
        raise ValueError("window must start at or before index 0 and end at or after it")
    if dim == 2 and w.start < 0:
        raise ValueError("the square map has no backward cylinders")
    if dim not in (2, 3):
        raise ValueError("dim must be 2 or 3")
    alphabet = params.alphabet
    alphabet.check(w.symbols)
    box = Box.unit(dim)
    if w.end > 0:
        fwd = Box.unit(dim)
        for k in range(w.end - 1, -1, -1):
            i = w[k]
            if k < w.end - 1:
                fwd = _preimage(fwd, branch_affine(params, i)[:dim])
            fwd = fwd.intersect(_cell_box(params, i, dim))
        box = box.intersect(fwd)
    if w.start < 0:
        bwd = _cell_box(params, w[w.start], dim)
        for k in range(w.start + 1, 0):
            bwd = _image(bwd, branch_affine(params, w[k - 1])).intersect(_cell_box(params, w[k], dim))
        bwd = _image(bwd, branch_affine(params, w[-1]))
        box = box.intersect(bwd)
    return box


def point_from_window(params: Params, w) -> tuple[Box, tuple]:
    """Cylinder box of an admissible window and its center point."""
    box = cylinder_box(params, w)
    if box.is_empty:
        raise EmptyCylinderError(f"cylinder of {w} is empty")
    return box, box.center


def jacobian_branch(params: Params, i: int):
    """Diagonal Jacobian ``(dx, dy, dz)`` of branch ``i``."""
    return tuple(s for s, _ in branch_affine(params, i))


def jacobian_det(params: Params, i: int) -> Fraction:
    dx, dy, dz = jacobian_branch(params, i)
    return dx * dy * dz


def central_log_sum(params: Params, word: Sequence[int]) -> float:
    return sum(math.log(jacobian_branch(params, i)[1]) for i in word)


@dataclass(frozen=True)
class PeriodicOrbit:
    word: tuple[int, ...]
    x_star: Fraction
    y_fix: Fraction | tuple[Fraction, Fraction]
    z_star: Fraction
    multipliers: tuple[Fraction, Fraction, Fraction]
    points: tuple = field(default=(), repr=False)

    @property
    def neutral(self) -> bool:
        return self.multipliers[1] == 1

    @property
    def unstable_dim(self) -> int | None:
        """2 if the central multiplier exceeds 1, 1 if below, None for a neutral continuum."""
        c = self.multipliers[1]
        if c == 1:
            return None
        return 2 if c > 1 else 1

    def to_json(self) -> dict:
        y = ([fraction_str(v) for v in self.y_fix] if self.neutral else fraction_str(self.y_fix))
        return {
            "word": list(self.word),
            "x_star": fraction_str(self.x_star),
            "y_fix": y,
            "z_star": fraction_str(self.z_star),
            "multipliers": [fraction_str(v) for v in self.multipliers],
            "unstable_dim": "neutral" if self.neutral else self.unstable_dim,
        }


def periodic_orbit_from_word(params: Params, word: Sequence[int]) -> PeriodicOrbit:
    """Solve for the periodic orbit of the cube map that follows ``word`` forever.

    Each axis is affine along the branch sequence, so one period gives
    ``coord -> A*coord + B``.  x expands and z contracts, so both have a
    unique fixed point.  When the central multiplier is 1 every y in the
    word's y-cylinder is fixed and the interval is returned.
    """
    alphabet = params.alphabet
    word = alphabet.check(word)
    if not word:
        raise ValueError("empty word")
    if not is_admissible(word + word, alphabet):
        raise ValueError(f"periodic extension of {word} is not admissible")
    comp = [[Fraction(1), Fraction(0)] for _ in range(3)]
    for i in word:
        for ax, (s, t) in enumerate(branch_affine(params, i)):
            A, B = comp[ax]
            comp[ax] = [s * A, s * B + t]
    (Ax, Bx), (Ay, By), (Az, Bz) = comp
    x_star = Bx / (1 - Ax)
    z_star = Bz / (1 - Az)
    if Ay != 1:
        y_fix = By / (1 - Ay)
        y_rep = y_fix
    else:
        if By != 0:
            raise ValueError(f"word {word} has no y-fixed point")
        lo, hi = cylinder_box(params, Window(word), dim=2).intervals[1]
        if lo >= hi:
            raise ValueError(f"word {word} has an empty y-cylinder")
        y_fix = (lo, hi)
        y_rep = (lo + hi) / 2
    p = (x_star, y_rep, z_star)
    points = []
    boundary = False
    for i in word:
        points.append(p)
        if not in_cell(params, p, i, interior=True):
            if not in_cell(params, p, i, interior=False):
                raise ValueError(f"orbit of {word} leaves the domain of branch {i} at {p}")
            boundary = True
        p = _apply_branch(params, p, i)
    if p != points[0]:
        raise ArithmeticError(f"orbit of {word} does not close: {p} != {points[0]}")
    orbit = PeriodicOrbit(word, x_star, y_fix, z_star, (Ax, Ay, Az), tuple(points))
    if boundary:
        raise BoundaryOrbitError(f"periodic orbit of {word} meets a partition boundary", orbit)
    return orbit


def map_state_after(params: Params, word: Sequence[int]):
    """y-interval of the image of a forward cylinder after reading ``word`` on the square map.

    After a forward word the x-image is always all of (0, 1), so this
    interval alone decides which continuations are possible.  Returns
    None when the cylinder is empty.
    """
    lo, hi = Fraction(0), Fraction(1)
    for i in word:
        (_, (ylo, yhi), _) = branch_cell(params, i)
        lo, hi = max(lo, ylo), min(hi, yhi)
        if lo >= hi:
            return None
        s, t = branch_affine(params, i)[1]
        lo, hi = s * lo + t, s * hi + t
    return lo, hi
