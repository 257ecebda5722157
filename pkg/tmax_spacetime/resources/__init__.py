# resources/__init__.py

from .base import SessionResource
from .fitting import Fitting
from .prediction import Prediction
from .evaluation import Evaluation
from .local_models import LocalModels

__all__ = [
    "SessionResource",
    "Fitting",
    "Prediction",
    "Evaluation",
    "LocalModels",
]
