"""Bright-soliton tunneling-time toolkit.

Split-step spectral solver for the attractive 1D Gross-Pitaevskii equation,
boundary-maximum tunneling chronometry, regime sweeps and fits, and SI unit
conversion for named atomic species.
"""

from .chronometry import (
    BoundaryRecord,
    TunnelingResult,
    extract_times,
    sample_boundaries,
    tunneling_probability,
)
from .errors import (
    CollisionIncompleteError,
    DegeneratePeakError,
    DivergenceError,
    InteractionOngoingError,
    NumericsError,
    TunnelclockError,
    ValidationError,
)
from .experiments import (
    FitResult,
    MaxSearchResult,
    ScenarioConfig,
    SweepRow,
    SweepTable,
    WidthRow,
    WidthSweepResult,
    find_max_tunneling_time,
    fit_linear_law,
    fit_log_law,
    run_scenario,
    uncertainty_products,
    velocity_sweep,
    width_sweep,
)
from .physics import (
    BarrierSpec,
    EnergyBreakdown,
    PacketSpec,
    analytic_energy,
    classical_time,
    de_broglie,
    energy,
    init_soliton,
    semiclassical_time,
    square_barrier,
    velocity_at_energy,
)
from .spectral import Grid, StepperConfig, WaveField, make_grid, propagate, step
from .units import SpeciesProfile, from_si, species, to_si

__version__ = "0.1.0"
