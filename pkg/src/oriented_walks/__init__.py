"""Random walks on horizontally oriented lattices with positively correlated
orientations: environment samplers, the full walk, its vertical/horizontal
embedding, the scenery limit process and the estimators built on them."""

__version__ = "0.1.0"

from .embedding import (
    EmbeddedState,
    LocalTimeTable,
    VerticalPath,
    coupled_check,
    embed,
    embed_check,
    embedded_trajectory,
    sample_geometric,
    simulate_vertical,
    x1_variance_probe,
)
from .environment import (
    CorrelationProfile,
    Law,
    OrientationEnvironment,
    check_association,
    empirical_correlation,
    fit_decay_exponent,
    make_environment,
    sample_ising_lr,
    sample_ising_nn,
)
from .estimators import (
    FLT_CONSTANT,
    NewmanCheckReport,
    estimate_return_probability,
    exact_second_moment,
    flt_check,
    loglog_slope,
    newman_records,
    tn_ratio,
    variance_scaling,
    verify_newman_bound,
)
from .lattice_walk import (
    ReturnStats,
    WalkState,
    growth_ratio,
    return_contrast,
    simulate_walk,
    step_walk,
)
from .randomness import StreamKey, derive_stream, standard_normal
from .records import EstimateRecord, ResultSet
from .scenery import (
    DELTA_VARIANCE,
    DeltaSample,
    check_selfsimilarity,
    delta_draws,
    ks_two_sample,
    sample_delta_continuum,
    sample_delta_discrete,
    selfsimilarity_record,
)
