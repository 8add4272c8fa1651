"""50:50 beam splitters and feed-forward circuits acting on monomial states.

Phase convention: a photon entering port ``in1`` leaves through ``out1`` with
amplitude ``1/sqrt(2)`` and through ``out2`` with ``i/sqrt(2)``; a photon entering
``in2`` leaves through ``out2`` with ``1/sqrt(2)`` and through ``out1`` with
``i/sqrt(2)``. Internal labels pass through unchanged.
"""

from __future__ import annotations

import json
from bisect import insort
from dataclasses import dataclass, field
from pathlib import Path

from .fock import Convention, OccupationVector, PureState

__all__ = ["BeamSplitter", "Circuit", "apply_beam_splitter", "apply_circuit"]


@dataclass(frozen=True)
class BeamSplitter:
    in1: str
    in2: str
    out1: str
    out2: str

    def __post_init__(self):
        if self.in1 == self.in2:
            raise ValueError("beam splitter inputs must differ")
        if self.out1 == self.out2:
            raise ValueError("beam splitter outputs must differ")

    @property
    def inputs(self) -> tuple[str, str]:
        return self.in1, self.in2

    @property
    def outputs(self) -> tuple[str, str]:
        return self.out1, self.out2


@dataclass(frozen=True)
class Circuit:
    """Ordered beam splitters plus the roles of the terminal modes."""

    elements: tuple[BeamSplitter, ...] = ()
    modes: tuple[str, ...] = ()
    detected: tuple[str, ...] = ()
    kept: tuple[str, ...] = ()
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        live = set(self.modes)
        for bs in self.elements:
            for m in bs.inputs:
                if m not in live:
                    raise ValueError(f"beam splitter input {m!r} is not a live mode")
            live -= set(bs.inputs)
            for m in bs.outputs:
                if m in live:
                    raise ValueError(f"beam splitter output {m!r} collides with a live mode")
            live |= set(bs.outputs)
        for m in (*self.detected, *self.kept):
            if m not in live:
                raise ValueError(f"terminal mode {m!r} is not produced by the circuit")
        if set(self.detected) & set(self.kept):
            raise ValueError("a mode cannot be both detected and kept")

    @property
    def terminal_modes(self) -> set:
        live = set(self.modes)
        for bs in self.elements:
            live = (live - set(bs.inputs)) | set(bs.outputs)
        return live

    def __len__(self):
        return len(self.elements)

    def to_json(self) -> dict:
        return {
            "modes": list(self.modes),
            "elements": [{"in": list(bs.inputs), "out": list(bs.outputs)} for bs in self.elements],
            "detected": list(self.detected),
            "kept": list(self.kept),
        }

    @classmethod
    def from_json(cls, data: dict) -> "Circuit":
        elements = [BeamSplitter(*e["in"], *e["out"]) for e in data["elements"]]
        return cls(
            elements=tuple(elements),
            modes=tuple(data["modes"]),
            detected=tuple(data.get("detected", ())),
            kept=tuple(data.get("kept", ())),
        )

    @classmethod
    def load(cls, path) -> "Circuit":
        return cls.from_json(json.loads(Path(path).read_text()))


def apply_beam_splitter(s: PureState, bs: BeamSplitter) -> PureState:
    """Substitute every creation operator on the input ports and re-collect."""
    if s.convention is not Convention.MONOMIAL:
        raise ValueError("beam splitters act on MONOMIAL-convention states; convert first")
    modes = s.spatial_modes()
    for m in (bs.out1, bs.out2):
        if m in modes:
            raise ValueError(f"output mode {m!r} already occupied in the input state")
    backend = s.backend
    t = backend.inv_sqrt2()
    r = backend.i_over_sqrt2()
    routes = {bs.in1: (bs.out1, bs.out2), bs.in2: (bs.out2, bs.out1)}

    out: dict = {}
    for occ, amp in s.items():
        rest = []
        moving = []
        for cell in occ:
            if cell[0] in routes:
                moving.append(cell)
            else:
                rest.append(cell)
        if not moving:
            _accumulate(out, occ, amp)
            continue
        partial = {tuple(rest): amp}
        for spatial, internal in moving:
            straight, crossed = routes[spatial]
            nxt: dict = {}
            for cells, c in partial.items():
                _accumulate(nxt, _insert(cells, (straight, internal)), c * t)
                _accumulate(nxt, _insert(cells, (crossed, internal)), c * r)
            partial = nxt
        for cells, c in partial.items():
            _accumulate(out, cells, c)
    terms = {_occ(k): v for k, v in out.items() if v}
    return PureState._trusted(terms, Convention.MONOMIAL, backend)


def _insert(cells: tuple, cell: tuple) -> tuple:
    lst = list(cells)
    insort(lst, cell)
    return tuple(lst)


def _occ(cells: tuple) -> OccupationVector:
    # cells are already sorted
    return tuple.__new__(OccupationVector, cells)


def _accumulate(acc: dict, key, value):
    prev = acc.get(key)
    acc[key] = value if prev is None else prev + value


def apply_circuit(s: PureState, circuit: Circuit) -> PureState:
    """Apply the elements of ``circuit`` left to right."""
    unknown = s.spatial_modes() - set(circuit.modes)
    if unknown:
        raise ValueError(f"state occupies modes unknown to the circuit: {sorted(unknown)}")
    for bs in circuit.elements:
        s = apply_beam_splitter(s, bs)
    return s
