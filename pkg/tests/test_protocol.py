import itertools

import pytest

from hdswap.amplitude import Amplitude
from hdswap.fock import OccupationVector, PureState, inner_product
from hdswap.measure import HeraldClass
from hdswap.protocol import (
    Polarization,
    ProtocolConfig,
    TimeBin,
    alternative_ancilla,
    ancilla_state,
    bell_singlet,
    build_circuit,
    hyper_label,
    hyper_render,
    hyper_unlabel,
    initial_state,
    input_state,
    render_state,
)
from conftest import report

AD = ("a", "d")


def test_bell_singlet():
    s = bell_singlet(1, 2, "a", "d")
    assert render_state(s, AD) == "(|1,2⟩−|2,1⟩)/√2"
    assert inner_product(s, s) == Amplitude(1)
    assert bell_singlet(2, 1, "a", "d") == s.scale(Amplitude(-1))
    assert not (bell_singlet(2, 1, "a", "d") + s)
    with pytest.raises(ValueError):
        bell_singlet(3, 3, "a", "d")


def test_initial_states():
    d4 = initial_state(4, "a", "b")
    assert len(d4) == 4 and set(d4.terms.values()) == {Amplitude(1, 0, 2)}
    assert render_state(d4, ("a", "b")) == "(|1,1⟩+|2,2⟩+|3,3⟩+|4,4⟩)/2"
    d6 = initial_state(6, "a", "b")
    assert len(d6) == 6 and d6.norm_squared() == 6
    a1 = initial_state(3, "a", "b", "A1")
    assert render_state(a1, ("a", "b")) == "(|1,2⟩+|2,1⟩+|3,4⟩)/√3"
    a2 = initial_state(3, "a", "b", "A2")
    assert render_state(a2, ("a", "b")) == "(|1,1⟩+|2,2⟩+|3,4⟩)/√3"
    d5 = initial_state(5, "a", "b")
    assert render_state(d5, ("a", "b")) == "(|1,1⟩+|2,2⟩+|3,3⟩+|4,4⟩+|5,6⟩)/√5"
    with pytest.raises(ValueError):
        initial_state(7, "a", "b")


def test_initial_state_is_label_permutation_invariant():
    s = initial_state(4, "a", "b")
    for perm in itertools.permutations(range(1, 5)):
        relabel = dict(zip(range(1, 5), perm))
        moved = s.map_terms(lambda occ: OccupationVector([(m, relabel[i]) for m, i in occ]))
        assert moved == s


def test_ancilla_states():
    assert render_state(ancilla_state(4, "e", "f"), ("e", "f")) == "(|1,2⟩+|3,4⟩)/√2"
    assert render_state(ancilla_state(4, "e", "f", phase=2), ("e", "f")) == "(|1,2⟩−|3,4⟩)/√2"
    assert render_state(ancilla_state(4, "e", "f", phase=1), ("e", "f")) == "(|1,2⟩+i|3,4⟩)/√2"
    sym = ancilla_state(4, "e", "f", symmetric=True)
    assert render_state(sym, ("e", "f")) == "(|1,2⟩+|2,1⟩+|3,4⟩+|4,3⟩)/2"
    assert render_state(alternative_ancilla("e", "f"), ("e", "f")) == "(|1,4⟩+|2,3⟩)/√2"
    assert render_state(ancilla_state(6, "e1", "f1", which="A2"), ("e1", "f1")) == "(|3,4⟩+|5,6⟩)/√2"
    with pytest.raises(ValueError):
        ancilla_state(6, "e", "f", symmetric=True)


def test_circuits():
    c4 = build_circuit(ProtocolConfig(dimension=4))
    assert len(c4) == 3
    assert c4.detected == ("b''", "e'", "f'", "c''") and c4.kept == AD
    assert build_circuit(ProtocolConfig(dimension=3)) == c4
    c6 = build_circuit(ProtocolConfig(dimension=6))
    assert len(c6) == 5 and len(c6.detected) == 6 and c6.kept == AD
    assert len(input_state(ProtocolConfig(dimension=6))) == 6 * 6 * 2 * 2


def test_config_validation():
    assert ProtocolConfig(dimension=3).variant == "A1"
    with pytest.raises(ValueError):
        ProtocolConfig(dimension=4, variant="A1")
    with pytest.raises(ValueError):
        ProtocolConfig(dimension=2)
    with pytest.raises(ValueError):
        ProtocolConfig(dimension=4, ancilla_phase=0.5)
    with pytest.raises(ValueError):
        ProtocolConfig(dimension=6, ancilla="symmetric")
    assert ProtocolConfig(dimension=4, ancilla_phase=0.5, backend="float").ancilla_phase == 0.5


def test_hyper_labels():
    assert hyper_label(TimeBin.EARLY, Polarization.H) == 1
    assert hyper_label("tl", "V") == 4
    for k in range(1, 5):
        assert hyper_label(*hyper_unlabel(k)) == k
    with pytest.raises(ValueError):
        hyper_unlabel(5)


def test_hyper_render():
    eq8 = "(|H(te),H(te)⟩+|V(te),V(te)⟩+|H(tl),H(tl)⟩+|V(tl),V(tl)⟩)/2"
    assert hyper_render(initial_state(4, "a", "b"), ("a", "b")).replace(" ", "") == eq8
    sym = "(|H(te),V(te)⟩+|V(te),H(te)⟩+|H(tl),V(tl)⟩+|V(tl),H(tl)⟩)/2"
    assert hyper_render(ancilla_state(4, "e", "f", symmetric=True), ("e", "f")) == sym
    assert hyper_render(bell_singlet(1, 2, "a", "d"), AD) == "(|H(te),V(te)⟩−|V(te),H(te)⟩)/√2"
    with pytest.raises(ValueError):
        hyper_render(initial_state(6, "a", "b"))


def test_render_falls_back_to_coefficients():
    s = PureState({(("a", 1), ("d", 2)): Amplitude(1), (("a", 2), ("d", 1)): Amplitude(1, 0, 2)})
    text = render_state(s, AD)
    assert "|1,2⟩" in text and "|2,1⟩" in text and "j)" in text


def _four_d_states(**kw):
    rows = report(dimension=4, **kw).rows_of(HeraldClass.SWAP_4D)
    return {str(r.pattern): r.heralded_state for r in rows}


def test_symmetric_ancilla_heralds_the_same_state():
    plain = _four_d_states()
    sym = _four_d_states(ancilla="symmetric")
    # the symmetric form heralds more patterns; on the shared ones the state agrees
    assert plain.keys() <= sym.keys()
    assert len(sym) == 16
    for key in plain:
        a, b = plain[key], sym[key]
        assert inner_product(a, b).abs_squared() == a.norm_squared() * b.norm_squared()
