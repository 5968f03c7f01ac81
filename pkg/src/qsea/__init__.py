"""Entanglement-augmented self-supervised learning on simulated qubit registers."""

from .augment import EaParams, augment_state, build_ea_circuit
from .config import RunConfig, load_config, parse_config
from .encoder import RawImage, amplitude_encode, encode_image
from .fidelity import compute_uncompute_estimate, exact_fidelity, swap_test_estimate
from .noise import KrausChannel, NoiseModel, noisy_execute
from .qstate import DensityMatrix, Gate, Op, StateVector, apply_gate, partial_trace, run_circuit
from .training import train

__version__ = "0.1.0"
