"""Impulse responses of spherical transmitters in diffusive channels.

Analytic point and volume-transmitter responses for passive and absorbing
receivers in 1D and 3D, a particle simulator to check them, and the
experiment harness that regenerates the published figures.
"""

from .analytic import peak_time, point_concentration, point_source_cir, receiver_volume, uca_cir
from .config import ExperimentConfig, dump_config, load_config, parse_config
from .errors import (
    ConvergenceError,
    DimensionError,
    DomainError,
    EmptyCurveError,
    GridMismatchError,
    KindError,
    ModelError,
    OverlapError,
    ParseError,
    SpecError,
    ValidationError,
)
from .experiment import ComparisonReport, ExperimentResult, compare, run_experiment
from .model import (
    ChannelSpec,
    CirCurve,
    Dimension,
    ReceiverKind,
    SourcePoint,
    TimeGrid,
    TransmitterModel,
    derived_geometry,
    validate,
)
from .simulation import (
    AbsorptionMode,
    EnsembleResult,
    SimParams,
    TxSolidity,
    run_ensemble,
    run_realization,
)
from .volume import (
    QuadratureMethod,
    QuadratureSpec,
    line_tx_cir_absorbing_1d,
    line_tx_cir_passive_1d,
    pta_deviation,
    sphere_tx_cir_3d,
    surface_tx_cir_3d,
    volume_cir,
    volume_cir_generic,
    volume_peak,
)

__version__ = "0.1.0"
