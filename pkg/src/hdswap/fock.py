"""Sparse multi-photon states over (spatial mode, internal mode) cells.

An occupation is a sorted tuple of cells with repetition, so ``(("b'", 1), ("b'", 1))``
means two photons in spatial mode ``b'`` carrying internal label 1. States store
their coefficients in the creation-operator (monomial) convention: the term
``c * (a_1^dag)^n_1 ... |vac>`` is kept as ``c``. The normalized Fock-ket amplitude
of the same term is ``c * sqrt(n_1! n_2! ...)``.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .amplitude import EXACT, Amplitude, Backend

__all__ = [
    "Convention",
    "ModeCell",
    "OccupationVector",
    "PureState",
    "NormalizeResult",
    "basis",
    "tensor",
    "inner_product",
    "normalize",
    "occupation_weight",
]

ModeCell = tuple  # (spatial: str, internal: int)


class Convention(str, Enum):
    MONOMIAL = "monomial"
    FOCK = "fock"


class OccupationVector(tuple):
    """Sorted multiset of :data:`ModeCell` entries; vacuum is the empty tuple."""

    def __new__(cls, cells: Iterable[ModeCell] | Mapping[ModeCell, int] = ()):
        if isinstance(cells, Mapping):
            items = []
            for cell, n in cells.items():
                if n < 0:
                    raise ValueError(f"negative photon count in {cell}")
                items.extend([tuple(cell)] * n)
            cells = items
        return super().__new__(cls, sorted(tuple(c) for c in cells))

    @property
    def total(self) -> int:
        return len(self)

    def counts(self) -> dict:
        return dict(Counter(self))

    def spatial_modes(self) -> set:
        return {cell[0] for cell in self}

    def restrict(self, spatial: Iterable[str]) -> "OccupationVector":
        keep = set(spatial)
        return OccupationVector(c for c in self if c[0] in keep)

    def __repr__(self):
        body = ", ".join(f"{s}{i}" + (f"^{n}" if n > 1 else "") for (s, i), n in self.counts().items())
        return f"Occ[{body}]"


def occupation_weight(occ: Iterable[ModeCell]) -> int:
    """``prod(n_cell!)``: the squared norm of the monomial for ``occ``."""
    w = 1
    for n in Counter(occ).values():
        if n > 1:
            w *= math.factorial(n)
    return w


def _sqrt_weight(weight: int, backend: Backend):
    """sqrt(weight) as a backend scalar; exact only when weight is 2^a times a square."""
    if not backend.exact:
        return backend.integer(1) * math.sqrt(weight)
    k = 0
    while weight % 2 == 0:
        weight //= 2
        k += 1
    root = math.isqrt(weight)
    if root * root != weight:
        raise ValueError("sqrt of occupation weight is not exactly representable")
    # sqrt(2^k * root^2) = root * 2^(k/2); negative powers are not needed
    if k % 2 == 0:
        return Amplitude(root << (k // 2))
    return Amplitude(root << ((k + 1) // 2), 0, 1)


class PureState:
    """Immutable sparse superposition of occupations.

    Parameters
    ----------
    terms:
        Mapping from occupation (any iterable of cells) to coefficient.
        Zero coefficients are dropped.
    convention:
        How the coefficients are to be read, see module docstring.
    backend:
        Scalar backend; inferred from the coefficients when omitted.
    """

    __slots__ = ("_terms", "convention", "backend", "_hash")

    def __init__(
        self,
        terms: Mapping | None = None,
        convention: Convention = Convention.MONOMIAL,
        backend: Backend | None = None,
    ):
        clean = {}
        total = None
        for occ, amp in (terms or {}).items():
            if not amp:
                continue
            occ = occ if isinstance(occ, OccupationVector) else OccupationVector(occ)
            if total is None:
                total = len(occ)
            elif len(occ) != total:
                raise ValueError("photon number differs between terms")
            clean[occ] = clean[occ] + amp if occ in clean else amp
            if not clean[occ]:
                del clean[occ]
        self._terms = clean
        self.convention = Convention(convention)
        if backend is None:
            backend = EXACT
            for amp in clean.values():
                if not isinstance(amp, Amplitude):
                    from .amplitude import FLOAT

                    backend = FLOAT
                break
        self.backend = backend
        self._hash = None

    @classmethod
    def _trusted(cls, terms: dict, convention, backend) -> "PureState":
        obj = cls.__new__(cls)
        obj._terms = terms
        obj.convention = convention
        obj.backend = backend
        obj._hash = None
        return obj

    # -- mapping-like access ---------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def items(self) -> Iterator:
        return iter(self._terms.items())

    def __len__(self):
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def __getitem__(self, occ):
        occ = occ if isinstance(occ, OccupationVector) else OccupationVector(occ)
        return self._terms.get(occ, self.backend.zero())

    def __bool__(self):
        return bool(self._terms)

    @property
    def photon_number(self) -> int | None:
        for occ in self._terms:
            return len(occ)
        return None

    def spatial_modes(self) -> set:
        modes = set()
        for occ in self._terms:
            modes.update(c[0] for c in occ)
        return modes

    # -- algebra -----------------------------------------------------------
    def __add__(self, other: "PureState") -> "PureState":
        other = other.to(self.convention)
        terms = dict(self._terms)
        for occ, amp in other.items():
            terms[occ] = terms[occ] + amp if occ in terms else amp
        return PureState(terms, self.convention, self.backend)

    def __neg__(self):
        return self.scale(self.backend.integer(-1))

    def __sub__(self, other):
        return self + (-other)

    def scale(self, factor) -> "PureState":
        return PureState({occ: amp * factor for occ, amp in self._terms.items()}, self.convention, self.backend)

    def __rmul__(self, factor):
        return self.scale(factor)

    def map_terms(self, fn) -> "PureState":
        """Apply ``fn(occ) -> occ`` to every key (e.g. relabeling); coefficients collect."""
        terms = {}
        for occ, amp in self._terms.items():
            new = OccupationVector(fn(occ))
            terms[new] = terms[new] + amp if new in terms else amp
        return PureState(terms, self.convention, self.backend)

    def filter(self, predicate) -> "PureState":
        return PureState._trusted(
            {occ: amp for occ, amp in self._terms.items() if predicate(occ)}, self.convention, self.backend
        )

    # -- conventions -------------------------------------------------------
    def to(self, convention: Convention) -> "PureState":
        convention = Convention(convention)
        if convention is self.convention:
            return self
        terms = {}
        for occ, amp in self._terms.items():
            w = occupation_weight(occ)
            if w == 1:
                terms[occ] = amp
                continue
            root = _sqrt_weight(w, self.backend)
            if convention is Convention.FOCK:
                terms[occ] = amp * root
            else:
                terms[occ] = _divide_exact(amp, root, w)
        return PureState._trusted(terms, convention, self.backend)

    def to_fock(self) -> "PureState":
        return self.to(Convention.FOCK)

    def to_monomial(self) -> "PureState":
        return self.to(Convention.MONOMIAL)

    def norm_squared(self):
        """Exact ``<s|s>`` (a Fraction on the exact backend)."""
        monomial = self.convention is Convention.MONOMIAL
        if not self.backend.exact:
            return sum(
                (amp.abs_squared() * (occupation_weight(occ) if monomial else 1) for occ, amp in self._terms.items()),
                0.0,
            )
        # single terms may carry a sqrt(2) part that only cancels in the sum
        total = irrational = Fraction(0)
        for occ, amp in self._terms.items():
            r, s = amp.abs_squared_parts()
            w = occupation_weight(occ) if monomial else 1
            total += r * w
            irrational += s * w
        if irrational:
            raise ValueError("norm squared is irrational")
        return total

    # -- comparison, display ------------------------------------------------
    def __eq__(self, other):
        if not isinstance(other, PureState):
            return NotImplemented
        a = self.to(Convention.MONOMIAL)._terms
        b = other.to(Convention.MONOMIAL)._terms
        return a == b

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.to(Convention.MONOMIAL)._terms.items()))
        return self._hash

    def __repr__(self):
        inner = " + ".join(f"{amp!r}*{occ!r}" for occ, amp in sorted(self._terms.items()))
        return f"PureState<{self.convention.value}>({inner or '0'})"

    def to_json(self) -> list:
        """Byte-stable dump: sorted list of ``{occupation, amp}``."""
        rows = []
        for occ, amp in sorted(self._terms.items()):
            counts = sorted(Counter(occ).items())
            rows.append({"occupation": [[s, i, n] for (s, i), n in counts], "amp": amp.to_json()})
        return rows

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, rows: list, convention: Convention = Convention.MONOMIAL) -> "PureState":
        terms = {}
        for row in rows:
            occ = OccupationVector({(s, int(i)): int(n) for s, i, n in row["occupation"]})
            terms[occ] = Amplitude.from_json(row["amp"])
        return cls(terms, convention)


def _divide_exact(amp, root, weight):
    if isinstance(amp, Amplitude):
        # amp / sqrt(w) == amp * sqrt(w) / w; only powers of two keep the ring closed
        if weight & (weight - 1):
            raise ValueError("division by sqrt of non-power-of-two weight")
        prod = amp * root
        shift = weight.bit_length() - 1
        return prod * Amplitude(1, 0, 2 * shift)
    return amp * (1.0 / complex(root).real)


def basis(occ, backend: Backend = EXACT, convention: Convention = Convention.FOCK) -> PureState:
    """Single normalized Fock ket for ``occ`` (amplitude 1 in the chosen convention)."""
    occ = occ if isinstance(occ, OccupationVector) else OccupationVector(occ)
    return PureState({occ: backend.one()}, convention, backend)


def tensor(*states: PureState) -> PureState:
    """Product of states living on disjoint spatial modes."""
    if not states:
        raise ValueError("tensor of nothing")
    result = states[0]
    for s in states[1:]:
        if s.convention is not result.convention:
            raise ValueError("tensor requires equal conventions")
        overlap = result.spatial_modes() & s.spatial_modes()
        if overlap:
            raise ValueError(f"states share spatial modes {sorted(overlap)}")
        terms = {}
        for o1, a1 in result.items():
            for o2, a2 in s.items():
                terms[OccupationVector(o1 + o2)] = a1 * a2
        result = PureState._trusted(terms, result.convention, result.backend)
    return result


def inner_product(s1: PureState, s2: PureState):
    """``<s1|s2>``, conjugate-linear in ``s1``."""
    a = s1.to_monomial()
    b = s2.to_monomial()
    if len(a) > len(b):
        small, large, flip = b, a, True
    else:
        small, large, flip = a, b, False
    total = s1.backend.zero()
    for occ, amp in small.items():
        other = large._terms.get(occ)
        if other is None:
            continue
        w = occupation_weight(occ)
        term = amp.conjugate() * other if not flip else other.conjugate() * amp
        if w != 1:
            term = term * s1.backend.integer(w)
        total = total + term
    return total


class NormalizeResult(tuple):
    """``(state, norm_squared, exact)``; ``exact`` is False when the state came back unscaled."""

    def __new__(cls, state, norm_squared, exact):
        return super().__new__(cls, (state, norm_squared, exact))

    @property
    def state(self):
        return self[0]

    @property
    def norm_squared(self):
        return self[1]

    @property
    def exact(self):
        return self[2]


def normalize(s: PureState) -> NormalizeResult:
    """Scale ``s`` to unit norm when the scale factor is representable.

    On the exact backend the norm must be a power of two for ``1/sqrt(norm^2)``
    to stay in the ring; otherwise ``s`` is returned as-is with ``exact=False`` and
    callers fall back to ratio-form overlaps (see :func:`hdswap.measure.fidelity`).
    """
    n2 = s.norm_squared()
    if not n2:
        raise ValueError("cannot normalize the zero state")
    if not s.backend.exact:
        return NormalizeResult(s.scale(1.0 / math.sqrt(n2)), n2, True)
    if n2 == 1:
        return NormalizeResult(s, n2, True)
    num, den = n2.numerator, n2.denominator
    if num & (num - 1) == 0 and den & (den - 1) == 0:
        # n2 = 2^e; scale by 2^(-e/2)
        e = num.bit_length() - den.bit_length()
        factor = Amplitude(1, 0, e) if e >= 0 else _pow_sqrt2(-e)
        return NormalizeResult(s.scale(factor), n2, True)
    return NormalizeResult(s, n2, False)


def _pow_sqrt2(n: int) -> Amplitude:
    """``sqrt(2)**n``."""
    if n % 2 == 0:
        return Amplitude(1 << (n // 2))
    return Amplitude(1 << ((n + 1) // 2), 0, 1)
