"""Exact simulation of linear-optics high-dimensional entanglement swapping."""

__version__ = "0.1.0"

from .amplitude import Amplitude, FloatAmplitude, Rational, abs_squared, add, mul
from .fock import Convention, OccupationVector, PureState, basis, inner_product, normalize, tensor
from .measure import (
    DetectionPattern,
    HeraldClass,
    HeraldReport,
    classify,
    count_events,
    enumerate_outcomes,
    fidelity,
    fidelity_decay,
    pnr_gains,
    run,
    simulate,
)
from .optics import BeamSplitter, Circuit, apply_beam_splitter, apply_circuit
from .protocol import (
    DetectorModel,
    HeraldAssignment,
    ProtocolConfig,
    ancilla_state,
    bell_singlet,
    build_circuit,
    hyper_label,
    hyper_render,
    initial_state,
)
