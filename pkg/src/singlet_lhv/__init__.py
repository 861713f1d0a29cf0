"""Local hidden-variable simulation of singlet statistics for restricted qubit POVMs."""

from .analysis import (
    RegionSpec,
    SweepRow,
    crossing_kappa,
    kappa_sweep,
    region_area,
    region_area_mc,
    restriction_measure,
)
from .errors import (
    InvalidRange,
    InvalidRegion,
    NotAdmissible,
    OptimizerDidNotConverge,
    ProtocolMismatch,
    ZeroDirection,
    ZeroSamples,
)
from .lhv import (
    EtaModel,
    HiddenVariable,
    KappaInterval,
    KappaModel,
    SimulationResult,
    alice_response_kappa,
    bob_response_kappa,
    common_kappa,
    eta_admissible,
    exact_lhv_joint,
    find_kappa,
    kappa_admissible,
    quadrature_lhv_joint,
    responses_eta,
    simulate_lhv,
)
from .povm import (
    Direction,
    Effect,
    SpectralForm,
    complement,
    joint_measurability_value,
    jointly_measurable,
    make_effect,
    spectral_decompose,
    unsharp_effect,
)
from .quantum import (
    ChshResult,
    ChshSetting,
    JointDistribution,
    Scenario,
    chsh_max,
    chsh_value,
    correlator,
    singlet_joint,
    singlet_joint_oracle,
)

__version__ = "0.1.0"
