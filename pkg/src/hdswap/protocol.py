"""Named states and circuits of the high-dimensional swapping scheme.

Spatial modes follow the usual drawing: sources on ``(a, b)`` and ``(c, d)``,
ancilla pairs on ``(e, f)`` (or ``(e1, f1)``, ``(e2, f2)`` for the two-ancilla
layout), primes marking each beam splitter a mode has passed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from enum import Enum

from .amplitude import EXACT, Amplitude, Backend, get_backend
from .fock import Convention, OccupationVector, PureState, tensor
from .optics import BeamSplitter, Circuit

__all__ = [
    "DetectorModel",
    "HeraldAssignment",
    "ProtocolConfig",
    "bell_singlet",
    "ket",
    "initial_state",
    "ancilla_state",
    "alternative_ancilla",
    "build_circuit",
    "input_state",
    "TimeBin",
    "Polarization",
    "hyper_label",
    "hyper_unlabel",
    "hyper_render",
    "render_state",
    "SUPPORTED_DIMENSIONS",
    "VARIANTS",
    "ANCILLAS",
]

SUPPORTED_DIMENSIONS = (3, 4, 5, 6)
VARIANTS = ("standard", "A1", "A2")
ANCILLAS = ("plain", "symmetric", "alternative")


class DetectorModel(str, Enum):
    THRESHOLD = "threshold"
    PNR = "pnr"


class HeraldAssignment(str, Enum):
    FIXED_AD = "fixed"
    FLEXIBLE = "flexible"


@dataclass(frozen=True)
class ProtocolConfig:
    """Run configuration.

    ``ancilla_phase`` is a quarter-turn index on the exact backend and radians on
    the float backend. ``variant`` picks the embedded three-dimensional source
    state (``A1`` or ``A2``) and must be ``standard`` otherwise. ``ancilla``
    switches the d = 4 ancilla between the plain superposition, its symmetric
    four-term form and the ``|1,4> + |2,3>`` alternative. ``ancilla_order`` sets
    which two-ancilla pair enters first in the five-splitter layout.
    """

    dimension: int = 4
    ancilla_phase: float = 0
    detector_model: DetectorModel = DetectorModel.THRESHOLD
    herald_assignment: HeraldAssignment = HeraldAssignment.FIXED_AD
    variant: str = "standard"
    backend: str = "exact"
    ancilla: str = "plain"
    ancilla_order: tuple = ("A1", "A2")

    def __post_init__(self):
        object.__setattr__(self, "detector_model", DetectorModel(self.detector_model))
        object.__setattr__(self, "herald_assignment", HeraldAssignment(self.herald_assignment))
        object.__setattr__(self, "ancilla_order", tuple(self.ancilla_order))
        if self.dimension not in SUPPORTED_DIMENSIONS:
            raise ValueError(f"dimension must be one of {SUPPORTED_DIMENSIONS}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.dimension == 3 and self.variant == "standard":
            object.__setattr__(self, "variant", "A1")
        if self.variant != "standard" and self.dimension != 3:
            raise ValueError("variants A1/A2 only apply to dimension 3")
        if self.ancilla not in ANCILLAS:
            raise ValueError(f"ancilla must be one of {ANCILLAS}")
        if self.ancilla != "plain" and self.dimension != 4:
            raise ValueError("symmetric and alternative ancillas exist for dimension 4 only")
        if sorted(self.ancilla_order) != ["A1", "A2"]:
            raise ValueError("ancilla_order must be a permutation of ('A1', 'A2')")
        get_backend(self.backend)
        if self.backend == "exact":
            phase = float(self.ancilla_phase)
            if not phase.is_integer():
                raise ValueError("exact backend takes the ancilla phase as a quarter-turn index 0..3")

    @property
    def scalar_backend(self) -> Backend:
        return get_backend(self.backend)

    def with_(self, **changes) -> "ProtocolConfig":
        return replace(self, **changes)

    def to_json(self) -> dict:
        out = asdict(self)
        out["detector_model"] = self.detector_model.value
        out["herald_assignment"] = self.herald_assignment.value
        out["ancilla_order"] = list(self.ancilla_order)
        return out


def ket(pairs, m: str, n: str, backend: Backend = EXACT, phases=None) -> PureState:
    """Unnormalized ``sum_t phase_t |k_t, j_t>_{m,n}`` in the monomial convention."""
    terms = {}
    for idx, (k, j) in enumerate(pairs):
        occ = OccupationVector([(m, k), (n, j)])
        amp = backend.one() if phases is None else phases[idx]
        terms[occ] = terms[occ] + amp if occ in terms else amp
    return PureState(terms, Convention.MONOMIAL, backend)


def bell_singlet(k: int, j: int, m: str, n: str, backend: Backend = EXACT) -> PureState:
    """``(|k,j> - |j,k>)/sqrt(2)`` on spatial modes ``(m, n)``."""
    if k == j:
        raise ValueError("singlet needs two different internal labels")
    s = ket([(k, j), (j, k)], m, n, backend, phases=[backend.one(), backend.integer(-1)])
    return s.scale(backend.inv_sqrt2())


def initial_state(d: int, m: str, n: str, variant: str = "standard", backend: Backend = EXACT) -> PureState:
    """Maximally entangled source state on ``(m, n)``.

    For ``d`` in (3, 5, 6) the result is left unnormalized (every term carries
    amplitude 1); the caller tracks ``norm_squared``. ``d == 4`` is returned
    normalized with amplitudes 1/2. Odd dimensions live inside the next even
    label space: d = 3 uses variant ``A1`` or ``A2`` over labels 1..4, and d = 5
    is ``|1,1> + ... + |4,4> + |5,6>``.
    """
    if d == 4:
        return ket([(k, k) for k in range(1, 5)], m, n, backend).scale(backend.inv_sqrt2() * backend.inv_sqrt2())
    if d == 6:
        return ket([(k, k) for k in range(1, 7)], m, n, backend)
    if d == 5:
        # labels 5 and 6 are paired, as the odd-dimensional states embed in the even layout
        return ket([(1, 1), (2, 2), (3, 3), (4, 4), (5, 6)], m, n, backend)
    if d == 3:
        if variant in ("standard", "A1"):
            return ket([(1, 2), (2, 1), (3, 4)], m, n, backend)
        if variant == "A2":
            return ket([(1, 1), (2, 2), (3, 4)], m, n, backend)
        raise ValueError(f"unknown variant {variant!r}")
    raise ValueError(f"unsupported dimension {d}")


def ancilla_state(d: int, m: str, n: str, phase=0, symmetric: bool = False, backend: Backend = EXACT, which: str = "A1"):
    """Ancilla pair(s).

    ``d`` in (3, 4): ``(|1,2> + e^{i phase}|3,4>)/sqrt(2)``, or the symmetric form
    ``(|1,2> + |2,1> + |3,4> + |4,3>)/2``. ``d`` in (5, 6): ``which`` selects
    ``A1 = (|1,2> + |3,4>)/sqrt(2)`` or ``A2 = (|5,6> + |3,4>)/sqrt(2)``.
    """
    h = backend.inv_sqrt2()
    if symmetric:
        if d != 4:
            raise ValueError("symmetric ancilla is defined for d = 4 only")
        return ket([(1, 2), (2, 1), (3, 4), (4, 3)], m, n, backend).scale(h * h)
    if d in (3, 4):
        return ket([(1, 2), (3, 4)], m, n, backend, phases=[backend.one(), backend.phase(phase)]).scale(h)
    if d in (5, 6):
        if which == "A1":
            return ket([(1, 2), (3, 4)], m, n, backend).scale(h)
        if which == "A2":
            return ket([(5, 6), (3, 4)], m, n, backend).scale(h)
        raise ValueError(f"unknown ancilla {which!r}")
    raise ValueError(f"unsupported dimension {d}")


def alternative_ancilla(m: str, n: str, backend: Backend = EXACT) -> PureState:
    """``(|1,4> + |2,3>)/sqrt(2)``; swaps which singlet pair is repeated after the cascade."""
    return ket([(1, 4), (2, 3)], m, n, backend).scale(backend.inv_sqrt2())


P1, P2, P3 = "'", "''", "'''"


def build_circuit(cfg: ProtocolConfig) -> Circuit:
    """Beam-splitter network for ``cfg.dimension``.

    Three splitters for d <= 4: ``BS(b,c)``, then ``BS(b',e)`` and ``BS(c',f)``.
    Five for d >= 5: the same cascade followed by ``BS(b'',e2)`` and ``BS(c'',f2)``
    with the first ancilla pair on ``(e1, f1)``.
    """
    if cfg.dimension in (3, 4):
        return Circuit(
            elements=(
                BeamSplitter("b", "c", "b" + P1, "c" + P1),
                BeamSplitter("b" + P1, "e", "b" + P2, "e" + P1),
                BeamSplitter("c" + P1, "f", "c" + P2, "f" + P1),
            ),
            modes=("a", "b", "c", "d", "e", "f"),
            detected=("b" + P2, "e" + P1, "f" + P1, "c" + P2),
            kept=("a", "d"),
            name="three-splitter",
        )
    return Circuit(
        elements=(
            BeamSplitter("b", "c", "b" + P1, "c" + P1),
            BeamSplitter("b" + P1, "e1", "b" + P2, "e1" + P1),
            BeamSplitter("c" + P1, "f1", "c" + P2, "f1" + P1),
            BeamSplitter("b" + P2, "e2", "b" + P3, "e2" + P1),
            BeamSplitter("c" + P2, "f2", "c" + P3, "f2" + P1),
        ),
        modes=("a", "b", "c", "d", "e1", "f1", "e2", "f2"),
        detected=("b" + P3, "e1" + P1, "e2" + P1, "f1" + P1, "f2" + P1, "c" + P3),
        kept=("a", "d"),
        name="five-splitter-cascade",
    )


def input_state(cfg: ProtocolConfig) -> PureState:
    """Sources plus ancilla(s) as one monomial state (possibly unnormalized)."""
    backend = cfg.scalar_backend
    d = cfg.dimension
    left = initial_state(d, "a", "b", cfg.variant, backend)
    right = initial_state(d, "c", "d", cfg.variant, backend)
    if d in (3, 4):
        if cfg.ancilla == "alternative":
            anc = alternative_ancilla("e", "f", backend)
        else:
            anc = ancilla_state(d, "e", "f", cfg.ancilla_phase, cfg.ancilla == "symmetric", backend)
        return tensor(left, right, anc)
    first, second = cfg.ancilla_order
    a1 = ancilla_state(6, "e1", "f1", backend=backend, which=first)
    a2 = ancilla_state(6, "e2", "f2", backend=backend, which=second)
    return tensor(left, right, a1, a2)


# -- time-bin x polarization encoding -------------------------------------------


class TimeBin(str, Enum):
    EARLY = "te"
    LATE = "tl"


class Polarization(str, Enum):
    H = "H"
    V = "V"


_HYPER = {
    (TimeBin.EARLY, Polarization.H): 1,
    (TimeBin.EARLY, Polarization.V): 2,
    (TimeBin.LATE, Polarization.H): 3,
    (TimeBin.LATE, Polarization.V): 4,
}
_HYPER_INV = {v: k for k, v in _HYPER.items()}


def hyper_label(timebin, pol) -> int:
    return _HYPER[(TimeBin(timebin), Polarization(pol))]


def hyper_unlabel(label: int) -> tuple[TimeBin, Polarization]:
    try:
        return _HYPER_INV[label]
    except KeyError:
        raise ValueError(f"internal label {label} has no time-bin/polarization meaning") from None


def _hyper_token(label: int) -> str:
    tb, pol = hyper_unlabel(label)
    return f"{pol.value}({tb.value})"


def render_state(s: PureState, modes=None, token=str) -> str:
    """Render a state as ``(|x,y>+...)/norm``, global phase removed.

    Terms are ordered by their labels read in ``modes`` order. When all kets share
    one magnitude and differ by quarter-turn phases the common factor is pulled
    out as ``/sqrt(n)``; anything else prints complex coefficients term by term.
    """
    s = s.to_monomial()
    if not s:
        return "0"
    order = {m: i for i, m in enumerate(modes or ())}
    rows = []
    for occ, amp in s.items():
        cells = sorted(occ, key=lambda c: (order.get(c[0], len(order)), c))
        rows.append((tuple(c[1] for c in cells), amp))
    rows.sort(key=lambda r: r[0])
    kets = ["|" + ",".join(token(x) for x in labels) + "⟩" for labels, _ in rows]
    ref = rows[0][1]
    signs = []
    if s.backend.exact and len({amp.abs_squared() for _, amp in rows}) == 1:
        for _, amp in rows:
            for t, sym in enumerate(("+", "+i", "−", "−i")):
                if amp == ref * Amplitude.quarter_turn(t):
                    signs.append(sym)
                    break
            else:
                break
    if len(signs) == len(rows):
        body = "".join(("" if i == 0 else sg) + k for i, (sg, k) in enumerate(zip(signs, kets)))
        n = len(rows)
        if n == 1:
            return body
        root = math.isqrt(n)
        return f"({body})/{root}" if root * root == n else f"({body})/√{n}"
    norm = math.sqrt(sum(abs(complex(a)) ** 2 for _, a in rows))
    phase = complex(ref) / abs(complex(ref))
    parts = []
    for (_, amp), k in zip(rows, kets):
        c = complex(amp) / phase / norm
        parts.append(f"({c.real:.6g}{c.imag:+.6g}j){k}")
    return " + ".join(parts)


def hyper_render(s: PureState, modes=None) -> str:
    """Render ``s`` with labels 1..4 written as ``H(te)``, ``V(te)``, ``H(tl)``, ``V(tl)``."""
    for occ in s:
        for _, label in occ:
            if label not in _HYPER_INV:
                raise ValueError(f"internal label {label} exceeds the hyper-encoded range 1..4")
    return render_state(s, modes, _hyper_token)
