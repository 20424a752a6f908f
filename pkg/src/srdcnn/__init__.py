"""1D convolutional network with an elastic-net weight penalty (SRDCNN) for univariate time-series classification."""

from .data import LabeledDataset, load_model, load_ucr, save_model, znormalize
from .dtw import DtwConfig, baseline_evaluate, dtw_distance, nn1_classify
from .kernels import BACKEND
from .model import (
    Hyperparameters,
    SrdcnnModel,
    TrainingHistory,
    build_model,
    compute_batch_size,
    recalibrate_batchnorm,
    evaluate,
    forward,
    loss_and_grads,
    predict,
    train,
)
from .regularization import PenaltyConfig

__version__ = "0.1.0"
