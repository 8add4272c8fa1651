"""Exact amplitudes over the Gaussian integers scaled by powers of 1/sqrt(2).

An :class:`Amplitude` holds ``(re + i*im) * 2**(-k/2)``. Sums of operands whose
``k`` differ in parity need a sqrt(2) component, so the value is stored as
``(p + q*sqrt(2)) * 2**(-k/2)`` with Gaussian integers ``p`` and ``q``. Whenever
``q`` can be eliminated it is, and such values read back as the plain
``(re, im, k)`` triple.

:class:`FloatAmplitude` wraps a Python ``complex`` with the same interface and is
used when the ancilla phase is not a quarter turn.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction

__all__ = [
    "Amplitude",
    "FloatAmplitude",
    "Rational",
    "abs_squared",
    "add",
    "mul",
    "EXACT",
    "FLOAT",
    "Backend",
    "get_backend",
]

# Probabilities are exact fractions; Fraction keeps gcd(num, den) = 1 with den > 0.
Rational = Fraction


def _canonical(pr: int, pi: int, qr: int, qi: int, k: int) -> tuple[int, int, int, int, int]:
    if qr == 0 and qi == 0:
        if pr == 0 and pi == 0:
            return 0, 0, 0, 0, 0
        while k >= 2 and pr % 2 == 0 and pi % 2 == 0:
            pr //= 2
            pi //= 2
            k -= 2
        return pr, pi, 0, 0, k
    if pr == 0 and pi == 0:
        # q*sqrt(2)*2^(-k/2) == q*2^(-(k-1)/2)
        if k >= 1:
            return _canonical(qr, qi, 0, 0, k - 1)
        return _canonical(2 * qr, 2 * qi, 0, 0, 1)
    # (p + q*sqrt2)/sqrt2 == q + (p/2)*sqrt2
    while k >= 1 and pr % 2 == 0 and pi % 2 == 0:
        pr, pi, qr, qi = qr, qi, pr // 2, pi // 2
        k -= 1
    return pr, pi, qr, qi, k


class Amplitude:
    """Exact complex number ``(re + i*im) * 2**(-k/2)`` (plus a sqrt(2) part if needed)."""

    __slots__ = ("_pr", "_pi", "_qr", "_qi", "_k")

    def __init__(self, re: int = 0, im: int = 0, k: int = 0, *, sqrt2_re: int = 0, sqrt2_im: int = 0):
        if k < 0:
            raise ValueError("k must be non-negative")
        self._pr, self._pi, self._qr, self._qi, self._k = _canonical(
            int(re), int(im), int(sqrt2_re), int(sqrt2_im), int(k)
        )

    @classmethod
    def _raw(cls, pr, pi, qr, qi, k):
        obj = cls.__new__(cls)
        obj._pr, obj._pi, obj._qr, obj._qi, obj._k = _canonical(pr, pi, qr, qi, k)
        return obj

    # -- accessors -------------------------------------------------------
    @property
    def re(self) -> int:
        self._require_dyadic()
        return self._pr

    @property
    def im(self) -> int:
        self._require_dyadic()
        return self._pi

    @property
    def k(self) -> int:
        return self._k

    @property
    def is_dyadic(self) -> bool:
        """True when the value has no sqrt(2) component, i.e. it is a plain ``(re, im, k)``."""
        return self._qr == 0 and self._qi == 0

    def _require_dyadic(self):
        if not self.is_dyadic:
            raise ValueError(f"{self!r} has an irreducible sqrt(2) component")

    def as_tuple(self) -> tuple[int, int, int]:
        self._require_dyadic()
        return self._pr, self._pi, self._k

    def key(self) -> tuple[int, int, int, int, int]:
        return self._pr, self._pi, self._qr, self._qi, self._k

    # -- arithmetic ------------------------------------------------------
    def _lift(self, k: int) -> tuple[int, int, int, int]:
        """Components of this value rewritten over ``2**(-k/2)`` (k >= self.k)."""
        pr, pi, qr, qi = self._pr, self._pi, self._qr, self._qi
        steps = k - self._k
        scale = 1 << (steps // 2)
        pr, pi, qr, qi = pr * scale, pi * scale, qr * scale, qi * scale
        if steps % 2:
            # multiply by sqrt2: (p + q sqrt2) sqrt2 = 2q + p sqrt2
            pr, pi, qr, qi = 2 * qr, 2 * qi, pr, pi
        return pr, pi, qr, qi

    def __add__(self, other):
        if not isinstance(other, Amplitude):
            other = Amplitude.from_int(other)
        k = max(self._k, other._k)
        a = self._lift(k)
        b = other._lift(k)
        return Amplitude._raw(a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3], k)

    __radd__ = __add__

    def __neg__(self):
        return Amplitude._raw(-self._pr, -self._pi, -self._qr, -self._qi, self._k)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Amplitude):
            other = Amplitude.from_int(other)
        ar, ai, br, bi = self._pr, self._pi, self._qr, self._qi
        cr, ci, dr, di = other._pr, other._pi, other._qr, other._qi
        # (a + b s)(c + d s), s = sqrt2, s^2 = 2
        pr = ar * cr - ai * ci + 2 * (br * dr - bi * di)
        pi = ar * ci + ai * cr + 2 * (br * di + bi * dr)
        qr = ar * dr - ai * di + br * cr - bi * ci
        qi = ar * di + ai * dr + br * ci + bi * cr
        return Amplitude._raw(pr, pi, qr, qi, self._k + other._k)

    __rmul__ = __mul__

    def conjugate(self) -> "Amplitude":
        return Amplitude._raw(self._pr, -self._pi, self._qr, -self._qi, self._k)

    def abs_squared_parts(self) -> tuple[Fraction, Fraction]:
        """``|x|**2 = r + s*sqrt(2)`` as the exact pair ``(r, s)``."""
        # |p + q sqrt2|^2 = |p|^2 + 2|q|^2 + 2 sqrt2 Re(p conj(q))
        den = 1 << self._k
        r = self._pr**2 + self._pi**2 + 2 * (self._qr**2 + self._qi**2)
        cross = 2 * (self._pr * self._qr + self._pi * self._qi)
        return Fraction(r, den), Fraction(cross, den)

    def abs_squared(self) -> Fraction:
        """``|x|**2`` as an exact fraction; the denominator is a power of two."""
        r, s = self.abs_squared_parts()
        if s:
            raise ValueError(f"|{self!r}|^2 is irrational")
        return r

    def __bool__(self):
        return bool(self._pr or self._pi or self._qr or self._qi)

    def __eq__(self, other):
        if isinstance(other, int):
            other = Amplitude.from_int(other)
        if not isinstance(other, Amplitude):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __complex__(self):
        s = math.sqrt(2.0)
        scale = 2.0 ** (-self._k / 2)
        return complex(self._pr + s * self._qr, self._pi + s * self._qi) * scale

    def __repr__(self):
        if self.is_dyadic:
            return f"Amplitude({self._pr}, {self._pi}, {self._k})"
        return (
            f"Amplitude({self._pr}, {self._pi}, {self._k}, "
            f"sqrt2_re={self._qr}, sqrt2_im={self._qi})"
        )

    # -- constructors ----------------------------------------------------
    @staticmethod
    def from_int(n: int) -> "Amplitude":
        return Amplitude(n, 0, 0)

    @staticmethod
    def quarter_turn(n: int) -> "Amplitude":
        """``i**n``."""
        return Amplitude(*[(1, 0), (0, 1), (-1, 0), (0, -1)][n % 4])

    # -- serialization ---------------------------------------------------
    def to_json(self) -> dict:
        out = {"re": str(self._pr), "im": str(self._pi), "k": self._k}
        if not self.is_dyadic:
            out["sqrt2_re"] = str(self._qr)
            out["sqrt2_im"] = str(self._qi)
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Amplitude":
        return cls(
            int(data["re"]),
            int(data["im"]),
            int(data["k"]),
            sqrt2_re=int(data.get("sqrt2_re", 0)),
            sqrt2_im=int(data.get("sqrt2_im", 0)),
        )


def add(x: Amplitude, y: Amplitude) -> Amplitude:
    return x + y


def mul(x: Amplitude, y: Amplitude) -> Amplitude:
    return x * y


def abs_squared(x) -> Fraction | float:
    return x.abs_squared()


def rational_to_json(r: Fraction) -> dict:
    return {"num": str(r.numerator), "den": str(r.denominator)}


def rational_from_json(data: dict) -> Fraction:
    return Fraction(int(data["num"]), int(data["den"]))


class FloatAmplitude:
    """Floating-point stand-in for :class:`Amplitude` with the same arithmetic surface."""

    __slots__ = ("value",)

    def __init__(self, value: complex = 0j):
        self.value = complex(value)

    def __add__(self, other):
        return FloatAmplitude(self.value + _as_complex(other))

    __radd__ = __add__

    def __sub__(self, other):
        return FloatAmplitude(self.value - _as_complex(other))

    def __neg__(self):
        return FloatAmplitude(-self.value)

    def __mul__(self, other):
        return FloatAmplitude(self.value * _as_complex(other))

    __rmul__ = __mul__

    def conjugate(self):
        return FloatAmplitude(self.value.conjugate())

    def abs_squared(self) -> float:
        return abs(self.value) ** 2

    def __bool__(self):
        return abs(self.value) > FLOAT.zero_tol

    def __eq__(self, other):
        try:
            return self.value == _as_complex(other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        return hash(self.value)

    def __complex__(self):
        return self.value

    def __repr__(self):
        return f"FloatAmplitude({self.value!r})"

    def to_json(self) -> dict:
        return {"re": repr(self.value.real), "im": repr(self.value.imag)}


def _as_complex(x) -> complex:
    if isinstance(x, FloatAmplitude):
        return x.value
    return complex(x)


class Backend:
    """Factory for the scalars a simulation runs on.

    ``exact`` yields :class:`Amplitude` values, ``float`` yields
    :class:`FloatAmplitude` values. Both expose the constants the circuits need.
    """

    def __init__(self, name: str, zero_tol: float = 0.0):
        self.name = name
        self.zero_tol = zero_tol

    @property
    def exact(self) -> bool:
        return self.name == "exact"

    def one(self):
        return Amplitude(1) if self.exact else FloatAmplitude(1.0)

    def zero(self):
        return Amplitude(0) if self.exact else FloatAmplitude(0.0)

    def inv_sqrt2(self):
        return Amplitude(1, 0, 1) if self.exact else FloatAmplitude(1 / math.sqrt(2))

    def i_over_sqrt2(self):
        return Amplitude(0, 1, 1) if self.exact else FloatAmplitude(1j / math.sqrt(2))

    def integer(self, n: int):
        return Amplitude(n) if self.exact else FloatAmplitude(float(n))

    def phase(self, phase):
        """``exp(i*phase)``.

        The exact backend takes a quarter-turn index (``phase`` in 0..3, meaning
        ``phase * pi/2``); the float backend takes radians.
        """
        if self.exact:
            if isinstance(phase, float) and not phase.is_integer():
                raise ValueError("exact backend needs an integer quarter-turn index")
            return Amplitude.quarter_turn(int(phase))
        return FloatAmplitude(cmath.exp(1j * float(phase)))

    def __repr__(self):
        return f"Backend({self.name!r})"


EXACT = Backend("exact")
FLOAT = Backend("float", zero_tol=1e-13)


def get_backend(name: str) -> Backend:
    if name == "exact":
        return EXACT
    if name == "float":
        return FLOAT
    raise ValueError(f"unknown backend {name!r}")
