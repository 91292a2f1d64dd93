"""Scenery reconstruction by random walks on finite abelian groups."""

__version__ = "0.1.0"

from .analysis import (
    AnalysisVerdict,
    Verdict,
    analyze,
    bounded_support_N,
    drift,
    drift_verdict,
    embed_mod_n,
    find_collisions,
    fourier_transform,
    is_symmetric,
    multiplier_of_collision,
)
from .cyclotomic import CyclotomicNumber
from .errors import (
    CapacityError,
    DomainError,
    FallbackRequiredError,
    InconsistencyError,
    InvalidInputError,
    SceneryLabError,
    SingularSystemError,
)
from .groups import GroupElement, GroupSpec
from .kernels import BACKEND
from .oracle import ObservationProcess, enumerate_classes, processes_equivalent, verify_verdict
from .scenery import (
    IndistinguishablePair,
    Scenery,
    build_pair_cycle,
    build_pair_product,
    build_pair_torus,
    is_shift_of,
    parity_example_Z12,
)
from .sim import estimate_b, simulate, simulate_coupled_cycle, simulate_coupled_product
from .spectral import full_pipeline, recover_scenery, spatial_multispectrum
from .walks import StepDistribution, StepMultiset, delta_walk_z7
