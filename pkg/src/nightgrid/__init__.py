"""Urban hotspot analysis on luminosity rasters.

Library + CLI implementing the full chain: endogenous Lorenz-curve
hotspot thresholding, equal-area-circle compactness indices, hotspot vs
population scaling fits, and quadratic growth regressions with AIC model
selection - plus a deterministic synthetic-city generator used as the
oracle layer for testing.
"""

__version__ = "0.1.0"

from .compactness import (
    CompactnessIndices,
    compactness_indices,
    convex_hull,
    max_pairwise_distance,
)
from .errors import (
    CityTableError,
    CollinearityError,
    DataError,
    DegenerateCityError,
    GridParseError,
    NightgridError,
    ProjectionError,
    UsageError,
)
from .grid_io import (
    CellPoint,
    CityRecord,
    CoordMode,
    GridHeader,
    LuminosityGrid,
    cell_area_m2,
    cell_points,
    load_city_table,
    parse_ascii_grid,
    write_ascii_grid,
)
from .hotspots import (
    GridStats,
    HotspotSet,
    extract_hotspots,
    fractional_count,
    grid_stats,
    lorenz_threshold,
)
from .stats import (
    IndexSummary,
    ModelSpec,
    RegressionFit,
    ScalingFit,
    aic,
    f_statistic,
    fit_growth_model,
    fit_scaling,
    ols,
    summarize_index,
    t_pvalue,
)
from .synth import (
    Blob,
    SplitMix64,
    SynthCorpusSpec,
    SynthSpec,
    generate_city,
    generate_corpus,
    write_corpus,
)
