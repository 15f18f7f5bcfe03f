"""Complex constellation type, generators, text codec, and geometry stats.

A constellation here is an ordered tuple of equiprobable complex points.
Order matters only for indexing; all derived statistics are permutation
invariant. The text codec speaks a bracketed array dialect so that
solutions produced by external optimizers (including chatty ones) can be
exchanged as plain strings and round-tripped exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateConstellationError,
    InvalidOrderError,
    InvalidParameterError,
    ParseError,
)

__all__ = [
    "Constellation",
    "ConstellationStats",
    "make_square_qam",
    "make_apsk",
    "parse_complex_array",
    "render_complex_array",
    "stats",
    "normalize",
    "rotate_to_symmetric_span",
]


@dataclass(frozen=True, eq=False)
class Constellation:
    """Ordered, equiprobable complex constellation points.

    The backing array is copied on construction and marked read-only, so a
    Constellation can be shared freely. Equality is element-wise and exact.
    """

    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=np.complex128).reshape(-1)
        if pts.size < 1:
            raise InvalidOrderError("a constellation needs at least one point")
        if not np.all(np.isfinite(pts.real)) or not np.all(np.isfinite(pts.imag)):
            raise DegenerateConstellationError("constellation points must be finite")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def order(self) -> int:
        return int(self.points.size)

    def __len__(self) -> int:
        return int(self.points.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Constellation):
            return NotImplemented
        return bool(np.array_equal(self.points, other.points))

    def __hash__(self) -> int:
        return hash(self.points.tobytes())

    def __repr__(self) -> str:
        return f"Constellation({render_complex_array(self.points)})"


@dataclass(frozen=True)
class ConstellationStats:
    """Scalar geometry summary of a constellation.

    Attributes:
        avg_energy: mean of |x|^2 over the points.
        fourth_moment: mean of |x|^4 over the points.
        papr: peak |x|^2 divided by avg_energy (0.0 for the all-zero corner).
        phase_span: largest absolute principal-value angle over the points.
        d_min: smallest pairwise Euclidean distance (0.0 for a single point).
    """

    avg_energy: float
    fourth_moment: float
    papr: float
    phase_span: float
    d_min: float


def stats(constellation: Constellation) -> ConstellationStats:
    """Compute the geometry summary in one pass."""
    pts = constellation.points
    p2 = np.abs(pts) ** 2
    avg = float(np.mean(p2))
    fourth = float(np.mean(p2**2))
    papr = float(np.max(p2) / avg) if avg > 0.0 else 0.0
    span = float(np.max(np.abs(np.angle(pts))))
    if pts.size == 1:
        d_min = 0.0
    else:
        diff = np.abs(pts[:, None] - pts[None, :])
        d_min = float(np.min(diff[~np.eye(pts.size, dtype=bool)]))
    return ConstellationStats(avg, fourth, papr, span, d_min)


def normalize(constellation: Constellation) -> Constellation:
    """Rescale to unit average symbol energy.

    Raises:
        DegenerateConstellationError: if the points carry no energy at all.
    """
    avg = float(np.mean(np.abs(constellation.points) ** 2))
    if avg <= 0.0:
        raise DegenerateConstellationError("cannot normalize an all-zero constellation")
    return Constellation(constellation.points / math.sqrt(avg))


def rotate_to_symmetric_span(constellation: Constellation) -> Constellation:
    """Rotate so the extreme point angles are symmetric about zero.

    A common rotation leaves every pairwise distance and every amplitude
    unchanged, so information-theoretic quantities are unaffected; only the
    phase span bookkeeping becomes canonical.
    """
    angles = np.angle(constellation.points)
    mid = 0.5 * (float(np.max(angles)) + float(np.min(angles)))
    return Constellation(constellation.points * np.exp(-1j * mid))


def make_square_qam(order: int) -> Constellation:
    """Build a unit-energy square QAM grid.

    Args:
        order: number of points; must be a perfect square with an even side
            (4, 16, 64, ...).
    """
    side = math.isqrt(order)
    if side * side != order or side % 2 != 0:
        raise InvalidOrderError(
            f"square QAM needs a perfect square order with even side, got {order}"
        )
    levels = np.arange(-side + 1, side, 2, dtype=np.float64)
    re, im = np.meshgrid(levels, levels, indexing="ij")
    pts = (re + 1j * im).reshape(-1)
    # Mean energy of the integer grid is 2(order-1)/3.
    return Constellation(pts / math.sqrt(2.0 * (order - 1) / 3.0))


def make_apsk(phase_span: float, order: int) -> Constellation:
    """Build unit-amplitude points spread uniformly over [-span, +span].

    Args:
        phase_span: half-width of the phase arc, in radians, within [0, pi].
            At exactly pi the arc closes into a circle, so the points become
            uniform PSK instead of doubling up the +-pi endpoint.
        order: number of points, at least 2.
    """
    if order < 2:
        raise InvalidOrderError(f"need at least 2 points, got {order}")
    if not (0.0 <= phase_span <= math.pi):
        raise InvalidParameterError(f"phase span must be in [0, pi], got {phase_span}")
    if phase_span == math.pi:
        angles = np.linspace(-math.pi, math.pi, order + 1)[:-1]
    else:
        angles = np.linspace(-phase_span, phase_span, order)
    return Constellation(np.exp(1j * angles))


def _render_real(value: float) -> str:
    # repr gives the shortest string that round-trips the float exactly.
    return repr(float(value))


def render_complex_array(points: np.ndarray | Constellation) -> str:
    """Render points as canonical bracketed text, e.g. "[1.0+2.0j, -0.5-0.5j]".

    The writer always emits both the real and imaginary term with a sign
    between them, so parse_complex_array(render_complex_array(p)) recovers
    every float bit-for-bit.
    """
    if isinstance(points, Constellation):
        points = points.points
    parts = []
    for z in np.asarray(points, dtype=np.complex128).reshape(-1):
        sign = "-" if math.copysign(1.0, z.imag) < 0 else "+"
        parts.append(f"{_render_real(z.real)}{sign}{_render_real(abs(z.imag))}j")
    return "[" + ", ".join(parts) + "]"


def _scan_float(text: str, i: int) -> tuple[float | None, int]:
    """Scan an unsigned float literal at position i; (None, i) if absent."""
    n = len(text)
    j = i
    while j < n and text[j].isdigit():
        j += 1
    if j < n and text[j] == ".":
        j += 1
        while j < n and text[j].isdigit():
            j += 1
    if j == i or (j == i + 1 and text[i] == "."):
        return None, i
    # Exponent part only counts when followed by a well-formed integer.
    if j < n and text[j] in "eE":
        k = j + 1
        if k < n and text[k] in "+-":
            k += 1
        if k < n and text[k].isdigit():
            k += 1
            while k < n and text[k].isdigit():
                k += 1
            j = k
    return float(text[i:j]), j


def _parse_complex_literal(text: str, i: int) -> tuple[complex, int]:
    """Parse one complex literal starting at i; returns (value, next index).

    Accepts real and imaginary terms in either order, the imaginary unit as
    i or j on either side of the magnitude ("2j", "j2", bare "j"), and at
    most one term of each kind.
    """
    n = len(text)
    real: float | None = None
    imag: float | None = None
    start = i
    while i < n and text[i] not in ",]" and not text[i].isspace():
        term_start = i
        sign = 1.0
        if text[i] in "+-":
            if text[i] == "-":
                sign = -1.0
            i += 1
        if i < n and text[i] in "ij":
            i += 1
            mag, i = _scan_float(text, i)
            if mag is None:
                mag = 1.0
            if imag is not None:
                raise ParseError("duplicate imaginary term", term_start)
            imag = sign * mag
        else:
            mag, j = _scan_float(text, i)
            if mag is None:
                raise ParseError("malformed complex literal", i)
            i = j
            if i < n and text[i] in "ij":
                i += 1
                if imag is not None:
                    raise ParseError("duplicate imaginary term", term_start)
                imag = sign * mag
            else:
                if i < n and text[i].isalpha():
                    raise ParseError("invalid suffix on number", i)
                if real is not None:
                    raise ParseError("duplicate real term", term_start)
                real = sign * mag
        if i < n and text[i] not in "+-,]" and not text[i].isspace():
            raise ParseError("unexpected character in complex literal", i)
    if real is None and imag is None:
        raise ParseError("empty complex literal", start)
    return complex(real or 0.0, imag or 0.0), i


def parse_complex_array(text: str) -> Constellation:
    """Parse bracketed complex-array text into a Constellation.

    Grammar: '[' followed by one or more complex literals separated by
    commas or whitespace, then ']'. Raises ParseError carrying the failing
    character offset for unbalanced brackets, malformed literals, empty
    lists, or trailing junk.
    """
    n = len(text)
    i = 0
    while i < n and text[i].isspace():
        i += 1
    if i >= n or text[i] != "[":
        raise ParseError("expected '['", i)
    i += 1
    points: list[complex] = []
    while True:
        while i < n and text[i].isspace():
            i += 1
        if i >= n:
            raise ParseError("unbalanced brackets: missing ']'", n)
        if text[i] == "]":
            close = i
            i += 1
            break
        if text[i] == ",":
            raise ParseError("empty element before ','", i)
        value, i = _parse_complex_literal(text, i)
        points.append(value)
        while i < n and text[i].isspace():
            i += 1
        if i < n and text[i] == ",":
            i += 1
    if not points:
        raise ParseError("empty list", close)
    while i < n and text[i].isspace():
        i += 1
    if i != n:
        raise ParseError("trailing characters after ']'", i)
    return Constellation(np.array(points, dtype=np.complex128))
