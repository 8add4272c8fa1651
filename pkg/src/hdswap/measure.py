"""Detection, heralding and success-probability bookkeeping.

Detectors resolve internal modes: every (spatial, internal) cell behind a
detected spatial mode has its own detector. With ``PNR`` each cell reports a
photon count. With ``THRESHOLD`` it reports a click, and patterns that only
differ in counts merge incoherently. The threshold runs also post-select on
every detected spatial mode clicking (the usual coincidence requirement) before
a herald class is assigned.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Sequence

from .amplitude import Amplitude, rational_to_json
from .fock import Convention, OccupationVector, PureState, inner_product, occupation_weight
from .optics import Circuit, apply_circuit
from .protocol import (
    DetectorModel,
    HeraldAssignment,
    ProtocolConfig,
    bell_singlet,
    build_circuit,
    input_state,
    ket,
)

__all__ = [
    "HeraldClass",
    "DetectionPattern",
    "Outcome",
    "HeraldRow",
    "HeraldReport",
    "enumerate_outcomes",
    "classify",
    "classify_state",
    "run",
    "simulate",
    "pnr_gains",
    "fidelity",
    "fidelity_decay",
    "count_events",
    "target_state",
    "flexible_pairs",
]


class HeraldClass(str, Enum):
    SWAP_6D = "SWAP_6D"
    SWAP_5D = "SWAP_5D"
    SWAP_4D = "SWAP_4D"
    SWAP_3D = "SWAP_3D"
    SWAP_2D = "SWAP_2D"
    OTHER = "OTHER"


CLASS_ORDER = (HeraldClass.SWAP_6D, HeraldClass.SWAP_5D, HeraldClass.SWAP_4D, HeraldClass.SWAP_3D, HeraldClass.SWAP_2D, HeraldClass.OTHER)


# -- detection patterns ----------------------------------------------------------


class DetectionPattern:
    """Outcome on the detected cells.

    ``outcome`` maps cells to counts; under ``THRESHOLD`` every stored count is 1
    (a click). Cells not listed saw nothing.
    """

    __slots__ = ("model", "outcome", "_key")

    def __init__(self, model: DetectorModel, outcome):
        self.model = DetectorModel(model)
        if not isinstance(outcome, dict):
            outcome = Counter(outcome)
        if self.model is DetectorModel.THRESHOLD:
            outcome = {cell: 1 for cell, n in outcome.items() if n}
        self.outcome = {tuple(c): int(n) for c, n in outcome.items() if n}
        self._key = tuple(sorted(self.outcome.items()))

    @classmethod
    def from_occupation(cls, model, occ: Iterable) -> "DetectionPattern":
        return cls(model, Counter(occ))

    @classmethod
    def parse(cls, text: str, model=DetectorModel.PNR) -> "DetectionPattern":
        """Parse ``"b'':3,e':1"`` (one photon per entry; repeat entries for more)."""
        counts: Counter = Counter()
        for token in filter(None, (t.strip() for t in text.split(","))):
            spatial, _, label = token.rpartition(":")
            if not spatial or not label:
                raise ValueError(f"bad pattern entry {token!r}; expected MODE:LABEL")
            counts[(spatial, int(label))] += 1
        return cls(model, counts)

    def occupation(self) -> OccupationVector:
        return OccupationVector(self.outcome)

    def collapse(self) -> "DetectionPattern":
        return DetectionPattern(DetectorModel.THRESHOLD, self.outcome)

    @property
    def photons(self) -> int:
        return sum(self.outcome.values())

    def clicked_modes(self) -> set:
        return {cell[0] for cell in self.outcome}

    def is_coincidence(self, detected: Iterable[str]) -> bool:
        return set(detected) <= self.clicked_modes()

    def labels(self, modes: Sequence[str]) -> tuple:
        """Internal labels per mode in ``modes`` order (tuples when a mode saw several)."""
        out = []
        for m in modes:
            labs = []
            for (s, i), n in sorted(self.outcome.items()):
                if s == m:
                    labs.extend([i] * n)
            out.append(labs[0] if len(labs) == 1 else tuple(labs))
        return tuple(out)

    def __str__(self):
        parts = []
        for (s, i), n in self._key:
            parts.extend([f"{s}:{i}"] * n)
        return ",".join(parts)

    def __repr__(self):
        return f"DetectionPattern({self.model.value}, {self})"

    def __eq__(self, other):
        if not isinstance(other, DetectionPattern):
            return NotImplemented
        return self.model is other.model and self._key == other._key

    def __hash__(self):
        return hash((self.model, self._key))

    def __lt__(self, other):
        return self._key < other._key


@dataclass
class Outcome:
    """One detection outcome with the kept-mode state it leaves behind.

    ``components`` lists ``(probability, state)`` for every PNR signature that
    merged into this outcome; ``heralded`` is the single state when there is one.
    """

    pattern: DetectionPattern
    probability: Fraction
    components: list
    kept_coincident: bool = True

    @property
    def heralded(self) -> PureState | None:
        return self.components[0][1] if len(self.components) == 1 else None

    @property
    def pure(self) -> bool:
        return len(self.components) == 1


def enumerate_outcomes(
    s: PureState,
    detected: Iterable[str],
    model=DetectorModel.PNR,
    *,
    norm_squared=None,
    kept_pair: Sequence[str] | None = None,
) -> list[Outcome]:
    """All nonzero detection outcomes on ``detected`` spatial modes.

    ``s`` may be in either convention; heralded states keep it. Probabilities are normalized by ``norm_squared`` (default:
    the norm of ``s``). With ``kept_pair`` given, each outcome is further split
    by whether the undetected pair holds exactly one photon per mode; the
    non-coincident part comes back with ``kept_coincident=False``.
    """
    detected = set(detected)
    if not detected:
        raise ValueError("no detected modes")
    conv = s.convention
    if norm_squared is None:
        norm_squared = s.norm_squared()
    backend = s.backend
    pair = tuple(kept_pair) if kept_pair else None

    groups: dict = defaultdict(dict)
    for occ, amp in s.items():
        det = tuple(c for c in occ if c[0] in detected)
        kept = tuple(c for c in occ if c[0] not in detected)
        flag = True
        if pair is not None:
            flag = sorted(c[0] for c in kept) == sorted(pair)
        groups[(det, flag)][kept] = amp

    pnr = []
    for (det, flag), kept_terms in groups.items():
        weight = occupation_weight(det) if conv is Convention.MONOMIAL else 1
        herald = PureState._trusted(
            {tuple.__new__(OccupationVector, k): a for k, a in kept_terms.items()}, conv, backend
        )
        p = herald.norm_squared() * weight / norm_squared
        if not p:
            continue
        pnr.append((DetectionPattern.from_occupation(DetectorModel.PNR, det), flag, p, herald))

    model = DetectorModel(model)
    if model is DetectorModel.PNR:
        out = [Outcome(pat, p, [(p, h)], flag) for pat, flag, p, h in pnr]
    else:
        merged: dict = defaultdict(list)
        for pat, flag, p, h in pnr:
            merged[(pat.collapse(), flag)].append((p, h))
        out = []
        for (pat, flag), comps in merged.items():
            comps.sort(key=lambda ph: ph[1].dumps() if backend.exact else repr(ph[1]))
            out.append(Outcome(pat, sum(p for p, _ in comps), comps, flag))
    out.sort(key=lambda o: (not o.kept_coincident, o.pattern._key))
    return out


# -- fidelity -------------------------------------------------------------------


def fidelity(s: PureState, target: PureState):
    """``|<target|s>|^2 / (<s|s><target|target>)``: exact, global-phase blind."""
    ns = s.norm_squared()
    nt = target.norm_squared()
    if not ns or not nt:
        raise ValueError("fidelity of a zero state")
    return inner_product(target, s).abs_squared() / (ns * nt)


def fidelity_decay(eta: float, n_bs: int) -> float:
    """Fidelity left after ``n_bs`` two-photon interferences of efficiency ``eta``.

    A ``Fraction`` eta gives an exact ``Fraction``; anything else a float.
    """
    if not 0 <= eta <= 1:
        raise ValueError("eta must lie in [0, 1]")
    if n_bs < 0:
        raise ValueError("number of beam splitters must be non-negative")
    if isinstance(eta, Fraction):
        return eta ** int(n_bs)
    return float(eta) ** int(n_bs)


# -- target families ------------------------------------------------------------

# Each family is a list of blocks; a block is a list of ((k, j), sign) kets on (m, n).
_SINGLET = {(k, j): [((k, j), 1), ((j, k), -1)] for k, j in ((1, 2), (3, 4), (5, 6))}
_FAMILIES = {
    6: [_SINGLET[1, 2], _SINGLET[3, 4], _SINGLET[5, 6]],
    5: [_SINGLET[1, 2], _SINGLET[3, 4], [((5, 6), 1)]],
    4: [_SINGLET[1, 2], _SINGLET[3, 4]],
    3: [_SINGLET[1, 2], [((3, 4), 1)]],
}


def target_state(dim: int, m: str = "a", n: str = "d", backend=None) -> PureState:
    """Nominal heralded target on ``(m, n)``, unnormalized (every ket has weight 1).

    ``dim == 2`` gives the singlet on labels 1, 2.
    """
    from .amplitude import EXACT

    backend = backend or EXACT
    if dim == 2:
        return bell_singlet(1, 2, m, n, backend)
    if dim not in _FAMILIES:
        raise ValueError(f"no target for dimension {dim}")
    kets = [kj for block in _FAMILIES[dim] for kj in block]
    return ket([kj for kj, _ in kets], m, n, backend, phases=[backend.integer(sg) for _, sg in kets])


def _family_fidelity(s: PureState, dim: int, pair: Sequence[str]):
    """Best fidelity to ``sum_b phase_b * block_b`` over relative block phases.

    Exact backend: phases range over quarter turns. Float backend: phases are
    free, giving ``(sum_b |<block_b|s>|)^2 / (sum_b <b|b> * <s|s>)``.
    """
    backend = s.backend
    m, n = pair
    terms = s._terms
    overlaps = []
    nt = 0
    for block in _FAMILIES[dim]:
        x = None
        for (k, j), sign in block:
            key = ((m, k), (n, j)) if (m, k) <= (n, j) else ((n, j), (m, k))
            amp = terms.get(key)
            if amp is not None:
                amp = amp if sign > 0 else -amp
                x = amp if x is None else x + amp
        nt += len(block)
        if x is not None and x:
            overlaps.append(x)
    exact = backend.exact
    if not overlaps:
        return Fraction(0) if exact else 0.0
    ns = s.norm_squared()
    if not exact:
        return sum(abs(complex(x)) for x in overlaps) ** 2 / (nt * ns)
    if len(overlaps) == 1:
        return overlaps[0].abs_squared() / (nt * ns)
    best = Fraction(0)
    first = overlaps[0]
    for turns in itertools.product(range(4), repeat=len(overlaps) - 1):
        total = first
        for x, t in zip(overlaps[1:], turns):
            total = total + x * Amplitude.quarter_turn(t)
        f = total.abs_squared()
        if f > best:
            best = f
    return best / (nt * ns)


def _is_two_dim_bell(s: PureState, pair: Sequence[str], tol: float) -> bool:
    """Two terms ``|p,q> + w|r,s>`` with p != r, q != s and equal weights."""
    if len(s) != 2:
        return False
    (o1, a1), (o2, a2) = sorted(s.items())
    m, n = pair
    try:
        l1 = {c[0]: c[1] for c in o1}
        l2 = {c[0]: c[1] for c in o2}
    except IndexError:
        return False
    if len(o1) != 2 or len(o2) != 2 or set(l1) != {m, n} or set(l2) != {m, n}:
        return False
    if l1[m] == l2[m] or l1[n] == l2[n]:
        return False
    w1, w2 = a1.abs_squared(), a2.abs_squared()
    if s.backend.exact:
        if w1 != w2:
            return False
        # relative phase must be a quarter turn
        return any(a2 == a1 * Amplitude.quarter_turn(t) for t in range(4))
    return abs(w1 - w2) <= tol * max(w1, w2)


def _is_one(f, exact: bool, tol: float) -> bool:
    return f == 1 if exact else abs(f - 1.0) <= tol


def classify_state(
    s: PureState, pair: Sequence[str] = ("a", "d"), dims: Sequence[int] = (6, 4, 3), tol: float = 1e-9
) -> tuple[HeraldClass, object]:
    """Herald class of a pure kept-pair state, with the best family fidelity found.

    Only states with one photon in each mode of ``pair`` can be in a SWAP class.
    """
    exact = s.backend.exact
    zero = Fraction(0) if exact else 0.0
    if not s:
        return HeraldClass.OTHER, zero
    for occ in s:
        if sorted(c[0] for c in occ) != sorted(pair):
            return HeraldClass.OTHER, zero
    best = zero
    for dim in dims:
        f = _family_fidelity(s, dim, pair)
        if _is_one(f, exact, tol):
            return HeraldClass(f"SWAP_{dim}D"), f
        best = max(best, f)
    if _is_two_dim_bell(s, pair, tol):
        return HeraldClass.SWAP_2D, (Fraction(1) if exact else 1.0)
    return HeraldClass.OTHER, best


# -- reports ----------------------------------------------------------------------


@dataclass
class HeraldRow:
    pattern: DetectionPattern
    probability: object
    herald_class: HeraldClass
    heralded_state: PureState | None
    fidelity_to_target: object
    kept: tuple = ("a", "d")
    coincidence: bool = True
    kept_coincident: bool = True

    def to_json(self) -> dict:
        prob = rational_to_json(self.probability) if isinstance(self.probability, Fraction) else self.probability
        fid = (
            rational_to_json(self.fidelity_to_target)
            if isinstance(self.fidelity_to_target, Fraction)
            else self.fidelity_to_target
        )
        return {
            "kept": list(self.kept),
            "pattern": str(self.pattern),
            "coincidence": self.coincidence,
            "kept_coincident": self.kept_coincident,
            "probability": prob,
            "class": self.herald_class.value,
            "fidelity_to_target": fid,
            "heralded_state": None if self.heralded_state is None else self.heralded_state.to_json(),
        }


@dataclass
class HeraldReport:
    config: ProtocolConfig
    rows: list
    aggregates: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    by_pair: dict = field(default_factory=dict)
    conditional: dict = field(default_factory=dict)

    def rows_of(self, cls: HeraldClass) -> list:
        return [r for r in self.rows if r.herald_class is cls]

    def total_probability(self, kept=("a", "d")):
        return sum((r.probability for r in self.rows if tuple(r.kept) == tuple(kept)), Fraction(0))

    def to_json(self) -> dict:
        def enc(v):
            return rational_to_json(v) if isinstance(v, Fraction) else v

        return {
            "config": self.config.to_json(),
            "aggregates": {k.value: enc(v) for k, v in self.aggregates.items()},
            "counts": {k.value: v for k, v in self.counts.items()},
            "by_pair": {
                "/".join(pair): {k.value: enc(v) for k, v in agg.items()} for pair, agg in self.by_pair.items()
            },
            "conditional": {k.value: enc(v) for k, v in self.conditional.items()},
            "dyadic": {k.value: self.dyadic(k) for k in self.aggregates if self.dyadic(k) is not None},
            "rows": [r.to_json() for r in self.rows],
        }

    def dyadic(self, cls: HeraldClass, kept=None) -> str | None:
        """Class aggregate written over the finest power-of-two row denominator,
        e.g. ``"4/512"`` rather than the reduced ``"1/128"``."""
        rows = [r for r in self.rows_of(cls) if kept is None or tuple(r.kept) == tuple(kept)]
        if not rows or not all(isinstance(r.probability, Fraction) for r in rows):
            return None
        dens = [r.probability.denominator for r in rows]
        if any(d & (d - 1) for d in dens):
            return None
        den = max(dens)
        total = sum(r.probability for r in rows)
        return f"{total * den}/{den}"

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1, ensure_ascii=False) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["kept", "pattern", "coincidence", "kept_coincident", "probability", "class", "fidelity_to_target"])
        for r in self.rows:
            writer.writerow(
                [
                    "/".join(r.kept),
                    str(r.pattern),
                    int(r.coincidence),
                    int(r.kept_coincident),
                    str(r.probability),
                    r.herald_class.value,
                    str(r.fidelity_to_target),
                ]
            )
        return buf.getvalue()


def flexible_pairs(circuit: Circuit) -> list[tuple[str, str]]:
    """Output pairs that can carry the heralded state: the kept pair plus one
    (last-stage output, ancilla output) pair per arm for the three-splitter layout."""
    pairs = [tuple(circuit.kept)]
    if len(circuit.elements) == 3:
        for bs in circuit.elements[1:][::-1]:
            pairs.append((bs.out1, bs.out2))
    return pairs


def _dims_for(cfg: ProtocolConfig) -> tuple:
    return {3: (3, 4), 4: (4,), 5: (5, 4), 6: (6, 4)}[cfg.dimension]


def classify(outcomes: list[Outcome], cfg: ProtocolConfig, detected: Sequence[str], kept=("a", "d")) -> list[HeraldRow]:
    """Label outcomes by herald class.

    Under ``THRESHOLD`` only outcomes with every detected spatial mode clicking
    (and a pure heralded state) can be SWAP rows; ``PNR`` drops the coincidence
    requirement.
    """
    dims = _dims_for(cfg)
    tol = 1e-9
    rows = []
    for o in outcomes:
        coinc = o.pattern.is_coincidence(detected)
        eligible = o.kept_coincident and (cfg.detector_model is DetectorModel.PNR or coinc)
        if o.pure:
            state = o.heralded
            cls, fid = classify_state(state, kept, dims, tol)
            if not eligible:
                cls = HeraldClass.OTHER
        else:
            state = None
            # mixture: fidelity is the probability-weighted average
            weighted = Fraction(0) if cfg.scalar_backend.exact else 0.0
            classes = set()
            for p, h in o.components:
                c, f = classify_state(h, kept, dims, tol)
                classes.add(c)
                weighted += p * f
            fid = weighted / o.probability
            cls = HeraldClass.OTHER
        rows.append(HeraldRow(o.pattern, o.probability, cls, state, fid, tuple(kept), coinc, o.kept_coincident))
    return rows


def _aggregate(rows) -> tuple[dict, dict]:
    agg: dict = {}
    cnt: dict = {}
    for r in rows:
        agg[r.herald_class] = agg.get(r.herald_class, 0) + r.probability
        cnt[r.herald_class] = cnt.get(r.herald_class, 0) + 1
    ordered = {c: agg[c] for c in CLASS_ORDER if c in agg}
    return ordered, {c: cnt[c] for c in CLASS_ORDER if c in cnt}


def simulate(cfg: ProtocolConfig) -> tuple[PureState, Circuit, object]:
    """Evolve the protocol input through its circuit; returns ``(state, circuit, input norm^2)``."""
    circuit = build_circuit(cfg)
    psi = input_state(cfg)
    norm = psi.norm_squared()
    return apply_circuit(psi, circuit), circuit, norm


def run(cfg: ProtocolConfig, evolved=None) -> HeraldReport:
    """Full pipeline: evolve, enumerate, classify, aggregate."""
    out, circuit, norm = evolved if evolved is not None else simulate(cfg)
    if cfg.herald_assignment is HeraldAssignment.FIXED_AD:
        pairs = [tuple(circuit.kept)]
    else:
        pairs = flexible_pairs(circuit)
    rows = []
    by_pair = {}
    for pair in pairs:
        terminal = circuit.terminal_modes
        detected = sorted(terminal - set(pair))
        outcomes = enumerate_outcomes(out, detected, cfg.detector_model, norm_squared=norm, kept_pair=pair)
        pair_rows = classify(outcomes, cfg, detected, pair)
        by_pair[pair], _ = _aggregate(pair_rows)
        rows.extend(pair_rows)
    aggregates, counts = _aggregate(rows)
    report = HeraldReport(cfg, rows, aggregates, counts, by_pair)
    report.conditional = conditional_success(report)
    return report


def conditional_success(report: HeraldReport) -> dict:
    """Class probability given a full coincidence on the detectors of the fixed pair."""
    kept = tuple(report.rows[0].kept) if report.rows else ("a", "d")
    main = [r for r in report.rows if tuple(r.kept) == kept]
    p_coinc = sum((r.probability for r in main if r.coincidence and r.kept_coincident), Fraction(0))
    out = {}
    if not p_coinc:
        return out
    for cls in CLASS_ORDER[:-1]:
        p = sum((r.probability for r in main if r.herald_class is cls and r.coincidence), Fraction(0))
        if p:
            out[cls] = p / p_coinc
    return out


def pnr_gains(cfg: ProtocolConfig) -> dict:
    """Threshold and PNR aggregates side by side, keyed by class.

    Each entry is ``{"threshold": (count, prob), "pnr": (count, prob)}``.
    """
    evolved = simulate(cfg)
    thr = run(cfg.with_(detector_model=DetectorModel.THRESHOLD), evolved)
    pnr = run(cfg.with_(detector_model=DetectorModel.PNR), evolved)
    table = {}
    for cls in CLASS_ORDER[:-1]:
        t = (thr.counts.get(cls, 0), thr.aggregates.get(cls, Fraction(0)))
        p = (pnr.counts.get(cls, 0), pnr.aggregates.get(cls, Fraction(0)))
        if t[0] or p[0]:
            if p[1] < t[1]:
                raise AssertionError(f"PNR below threshold for {cls.value}")
            table[cls] = {"threshold": t, "pnr": p}
    return table


def count_events(cfg: ProtocolConfig, evolved=None) -> dict:
    """Distinct nonzero outcome counts under several conventions.

    ``total_full`` counts PNR signatures over every output mode (kept modes
    included); ``total_detected`` only over detected modes; the ``*_threshold``
    variants collapse counts to clicks. ``coincidence_*`` keep the outcomes where
    every mode of the respective set holds exactly one photon. ``success``
    counts coincident detected patterns in the configuration's top herald class
    under the configured detector model.
    """
    out, circuit, norm = evolved if evolved is not None else simulate(cfg)
    detected = set(circuit.detected)
    terminal = circuit.terminal_modes
    full = set()
    full_thr = set()
    det_pnr = set()
    det_thr = set()
    coinc_full = 0
    coinc_det = set()
    for occ in out:
        full.add(occ)
        full_thr.add(frozenset(occ))
        det = tuple(c for c in occ if c[0] in detected)
        det_pnr.add(det)
        det_thr.add(frozenset(det))
        if len({c[0] for c in occ}) == len(terminal) == len(occ):
            coinc_full += 1
        if len({c[0] for c in det}) == len(detected) == len(det):
            coinc_det.add(det)
    report = run(cfg.with_(herald_assignment=HeraldAssignment.FIXED_AD), (out, circuit, norm))
    top = HeraldClass(f"SWAP_{_dims_for(cfg)[0]}D")
    success = sum(1 for r in report.rows if r.herald_class is top and r.coincidence)
    success_any = sum(1 for r in report.rows if r.herald_class is top)
    return {
        "total_full": len(full),
        "total_full_threshold": len(full_thr),
        "total_detected": len(det_pnr),
        "total_detected_threshold": len(det_thr),
        "coincidence_full": coinc_full,
        "coincidence_detected": len(coinc_det),
        "success": success,
        "success_any": success_any,
        "success_class": top.value,
    }
