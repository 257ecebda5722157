from .change import change_summary, change_table
from .loocv import LOOCV_COLUMNS, loocv_frame, loocv_summary, run_fold, run_loocv
from .scores import crps_ensemble, score_cells, score_site

__all__ = [
    "change_summary",
    "change_table",
    "LOOCV_COLUMNS",
    "loocv_frame",
    "loocv_summary",
    "run_fold",
    "run_loocv",
    "crps_ensemble",
    "score_cells",
    "score_site",
]
