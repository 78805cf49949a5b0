"""Geometric phases and vibronic degeneracy of Jahn-Teller models with
maximal continuous symmetry."""
__version__ = "0.1.0"

from .errors import JTError
from .model import (
    AdiabaticFrame,
    JTModel,
    apes,
    available_models,
    build_model,
    eigensystem,
    hamiltonian,
    induced_configuration_rotation,
    register_model,
)
from .trough import (
    TroughPoint,
    TroughSpec,
    antipode,
    electronic_rotation,
    find_trough,
    trough_point,
    verify_trough_spectrum,
)
from .holonomy import (
    HolonomyResult,
    LoopPath,
    TransportRecord,
    berry_phase,
    make_loop,
    projector,
    subspace_holonomy,
    transport_ground,
)
from .vibronic import build_vibronic, low_spectrum, rotor_spectrum, vgsd_check
from .perturb import PerturbedModel, add_field, add_quadratic, robustness_scan
