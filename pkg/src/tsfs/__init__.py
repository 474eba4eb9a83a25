"""Teacher-student feature selection.

A teacher (PCA, MDS, Isomap, LLE, spectral embedding, t-SNE or a supervised
MLP) maps the data to a low-dimensional code; a one-hidden-layer student
learns to reproduce that code from the raw features under an L2,1 row
penalty on its first layer, and features are ranked by the energy of their
first-layer rows.
"""

from .baselines import aefs, laplacian_score, random_score, rsr, variance_score
from .datasets import Dataset, PlantedSpec, load_csv, load_whitespace, make_planted
from .errors import (ConnectivityError, ConvergenceError, InvalidInputError, NumericalError,
                     ParseError, TSFSError)
from .evaluation import classify_cv, clustering_acc, clustering_eval, evaluate, nmi, reconstruct_cv
from .student import SelectionResult, StudentConfig, run_tsfs, select_top
from .teacher import Embedding, TeacherSpec, fit_teacher

__version__ = "0.1.0"

__all__ = [
    "Dataset", "PlantedSpec", "load_csv", "load_whitespace", "make_planted",
    "TeacherSpec", "Embedding", "fit_teacher",
    "StudentConfig", "SelectionResult", "run_tsfs", "select_top",
    "variance_score", "laplacian_score", "rsr", "aefs", "random_score",
    "clustering_acc", "nmi", "clustering_eval", "classify_cv", "reconstruct_cv", "evaluate",
    "TSFSError", "InvalidInputError", "ParseError", "ConnectivityError", "NumericalError",
    "ConvergenceError",
]
