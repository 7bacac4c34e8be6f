"""Fairness-aware feature acquisition driven by group-wise AUC."""

from .acquisition import (
    AcquisitionConfig,
    AcquisitionState,
    FairFeatureAcquirer,
    RoundRecord,
    Strategy,
    run,
)
from .auc import (
    Binormal1D,
    bias,
    binormal_auc,
    empirical_auc,
    fld_auc,
    fld_direction,
    pair_auc,
    unconditional_variance,
)
from .datagen import GammaConfig, GuyonConfig, gen_gamma, gen_guyon
from .exceptions import (
    DataError,
    FairAUCError,
    InsufficientSamples,
    NoViableCandidate,
    NumericError,
    RangeError,
    SingularMatrix,
    UnsupportedGroups,
)
from .moments import ClassStats, GroupedColumns, overall_ssr, ssr, ssr2
from .scoring import FLDScorer, LogisticScorer, fit_fld, fit_logistic, score

__version__ = "0.1.0"
