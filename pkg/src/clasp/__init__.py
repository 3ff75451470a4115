"""Self-supervised time series segmentation with classification score profiles."""

__version__ = "0.1.0"

from .ensemble import EnsembleConfig, EnsembleProfile, calc_clasp_ensemble
from .errors import InvalidParameterError, ParseError, SeriesTooShortError
from .io import DatasetRecord, load_series
from .knn import KnnIndex, knn_profile
from .metrics import covering_score, f1_score
from .profile import Profile, calc_clasp
from .segmentation import Segmentation, segment
from .suss import SussConfig, calc_suss
from .validation import ValidationConfig, ranksum_pvalue

__all__ = [
    "DatasetRecord",
    "EnsembleConfig",
    "EnsembleProfile",
    "InvalidParameterError",
    "KnnIndex",
    "ParseError",
    "Profile",
    "Segmentation",
    "SeriesTooShortError",
    "SussConfig",
    "ValidationConfig",
    "calc_clasp",
    "calc_clasp_ensemble",
    "calc_suss",
    "covering_score",
    "f1_score",
    "knn_profile",
    "load_series",
    "ranksum_pvalue",
    "segment",
]
