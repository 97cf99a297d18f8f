"""Heights of p-watermelons with a wall: exact counts, sum formulas, asymptotics."""
from .errors import ConfigurationError, ConsistencyError, DomainError, NumericError
from .exact import (
    HeightSpectrum,
    MelonConfig,
    avg_height_exact,
    capped_melon_count,
    count_melons,
    dp_oracle_count,
    height_spectrum,
)
from .sums import SumMode, avg_height1_sum, avg_height2_sum
from .dirichlet import DirichletConstants, c_const, compute_constants, Z_continued, Z_direct
from .asymptotics import H1_asym, H2_coefficient, convergence_ratio, g_asym, g_direct

__version__ = "0.1.0"
