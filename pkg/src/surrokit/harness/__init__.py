from .config import ExperimentConfig, split_counts
from .dataset import (
    DatasetRecord,
    fit_arrays_for_tasks,
    generate_dataset,
    load_dataset,
    records_by_task,
)
from .evaluate import run_surrogate_eval, run_uncertainty_study
from .optimize import best_of_training, build_surrogate, run_optimization
