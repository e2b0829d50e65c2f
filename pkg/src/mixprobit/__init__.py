"""Locally adaptive binary regression with mixtures of probit spline experts.

The public surface: build a :class:`Dataset`, describe the run with a
:class:`RunConfig`, call :func:`fit_dataset`, then :func:`predict` or the
metric helpers.  ``run_study`` wraps the replicated simulation comparison
and the ``mixprobit`` console script exposes the same steps as subcommands.
"""

from .archive import load_archive, save_archive
from .basis import BasisExpansion, Dataset, build_expansion
from .config import RunConfig
from .errors import DataError, NumericalError, UsageError
from .fit import fit_dataset
from .inference import FitResult, predict, summarize
from .metrics import (askld, ase, ecp, pct_delta_aecp, pct_delta_ase, roc,
                      RocCurve)
from .model import MixtureParams, PriorConfig, mixture_probabilities
from .rjmcmc import Chain, ChainTrace, run_chain, run_pilots
from .simgen import FUNCTION_NAMES, generate, true_probability
from .study import StudyResult, run_study
from .within import FitContext, within_sweep

__version__ = "0.1.0"

__all__ = [
    "BasisExpansion",
    "Chain",
    "ChainTrace",
    "Dataset",
    "DataError",
    "FUNCTION_NAMES",
    "FitContext",
    "FitResult",
    "MixtureParams",
    "NumericalError",
    "PriorConfig",
    "RocCurve",
    "RunConfig",
    "StudyResult",
    "UsageError",
    "askld",
    "ase",
    "build_expansion",
    "ecp",
    "fit_dataset",
    "generate",
    "load_archive",
    "mixture_probabilities",
    "pct_delta_aecp",
    "pct_delta_ase",
    "predict",
    "roc",
    "run_chain",
    "run_pilots",
    "run_study",
    "save_archive",
    "summarize",
    "true_probability",
    "within_sweep",
    "__version__",
]
