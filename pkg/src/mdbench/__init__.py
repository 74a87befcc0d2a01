"""Missing-data perturbation, imputation, and classification benchmark toolkit."""

from mdbench.data import Dataset, FeatureSchema, MISSING, load_uci
from mdbench.perturb import perturb_mcar, perturb_mnar
from mdbench.encode import fit_encoder, encode
from mdbench.impute import fit_imputer

__all__ = [
    "Dataset",
    "FeatureSchema",
    "MISSING",
    "load_uci",
    "perturb_mcar",
    "perturb_mnar",
    "fit_encoder",
    "encode",
    "fit_imputer",
]

__version__ = "0.1.0"
