"""Compact from-scratch convolutional classifier (numpy only)."""

from .model import (BOT_CLASS, LayerSpec, ModelState, Prediction, backward,
                    conv, default_layer_specs, dense, flatten, forward,
                    init_model, load_checkpoint, normalize_pixels, pool,
                    predict, predict_batch, relu, save_checkpoint,
                    softmax_layer)
from .ops import (CLAMP_EPS, conv2d_backward, conv2d_forward, cross_entropy,
                  dense_backward, dense_forward, pool2d, pool2d_backward,
                  relu_backward, softmax, softmax_cross_entropy_grad)
from .train import (MONITOR_VAL_ACCURACY, MONITOR_VAL_LOSS, EarlyStopper,
                    EpochRecord, EvalResult, TrainConfig, TrainHistory,
                    evaluate, train)

__all__ = [
    "BOT_CLASS", "CLAMP_EPS", "EarlyStopper", "EpochRecord", "EvalResult",
    "LayerSpec", "MONITOR_VAL_ACCURACY", "MONITOR_VAL_LOSS", "ModelState",
    "Prediction", "TrainConfig", "TrainHistory", "backward", "conv",
    "conv2d_backward", "conv2d_forward", "cross_entropy",
    "default_layer_specs", "dense", "dense_backward", "dense_forward",
    "evaluate", "flatten", "forward", "init_model", "load_checkpoint",
    "normalize_pixels", "pool", "pool2d", "pool2d_backward", "predict",
    "predict_batch", "relu", "relu_backward", "save_checkpoint", "softmax",
    "softmax_cross_entropy_grad", "softmax_layer", "train",
]
