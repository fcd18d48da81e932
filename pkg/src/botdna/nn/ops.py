"""Forward and backward primitives for the compact CNN.

All arrays are numpy, NCHW layout for feature maps. Dense weights are
(out, in) so a single example computes w @ x + b. Backward passes are
derived by hand and verified against central finite differences in the
test suite; keep any change here in sync with those checks.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatch

CLAMP_EPS = 1e-7


def _out_dim(size: int, window: int, stride: int, padding: int = 0) -> int:
    out = (size + 2 * padding - window) // stride + 1
    if out < 1:
        raise ShapeMismatch(
            f"window {window} stride {stride} padding {padding} "
            f"does not fit input size {size}"
        )
    return out


def _windows(x: np.ndarray, window_h: int, window_w: int, stride: int) -> np.ndarray:
    """Strided view (N, C, Ho, Wo, window_h, window_w) of sliding windows."""
    view = np.lib.stride_tricks.sliding_window_view(x, (window_h, window_w), axis=(2, 3))
    return view[:, :, ::stride, ::stride]


def conv2d_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray,
                   stride: int = 1, padding: int = 0) -> np.ndarray:
    """Cross-correlate x (N,C,H,W) with weight (O,C,KH,KW), add bias (O,).

    Output spatial dims follow floor((in + 2*padding - kernel)/stride) + 1;
    padded borders are zeros.
    """
    if x.ndim != 4 or weight.ndim != 4:
        raise ShapeMismatch(f"conv expects 4-D input/weight, got {x.shape}/{weight.shape}")
    n, c, h, w = x.shape
    out_c, in_c, kh, kw = weight.shape
    if in_c != c:
        raise ShapeMismatch(f"input has {c} channels, kernel expects {in_c}")
    if stride < 1 or padding < 0:
        raise ShapeMismatch(f"invalid stride {stride} or padding {padding}")
    _out_dim(h, kh, stride, padding)
    _out_dim(w, kw, stride, padding)
    if padding:
        x = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
    windows = _windows(x, kh, kw, stride)
    out = np.einsum("nchwij,ocij->nohw", windows, weight, optimize=True)
    return out + bias[None, :, None, None]


def conv2d_backward(dout: np.ndarray, x: np.ndarray, weight: np.ndarray,
                    stride: int = 1, padding: int = 0):
    """Gradients (dx, dweight, dbias) of conv2d_forward."""
    n, c, h, w = x.shape
    out_c, _, kh, kw = weight.shape
    _, _, ho, wo = dout.shape
    xp = (np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
          if padding else x)
    windows = _windows(xp, kh, kw, stride)
    dweight = np.einsum("nchwij,nohw->ocij", windows, dout, optimize=True)
    dbias = dout.sum(axis=(0, 2, 3))
    dxp = np.zeros_like(xp)
    # Scatter each kernel tap back onto the (padded) input grid.
    for ki in range(kh):
        for kj in range(kw):
            contrib = np.einsum("nohw,oc->nchw", dout, weight[:, :, ki, kj],
                                optimize=True)
            dxp[:, :, ki : ki + stride * ho : stride,
                kj : kj + stride * wo : stride] += contrib
    dx = dxp[:, :, padding : padding + h, padding : padding + w] if padding else dxp
    return dx, dweight, dbias


def pool2d(x: np.ndarray, mode: str, window: int, stride: int) -> np.ndarray:
    """Max or average pooling over square windows, no padding."""
    if x.ndim != 4:
        raise ShapeMismatch(f"pool expects 4-D input, got {x.shape}")
    if mode not in ("max", "avg"):
        raise ValueError(f"unknown pooling mode '{mode}'")
    _out_dim(x.shape[2], window, stride)
    _out_dim(x.shape[3], window, stride)
    windows = _windows(x, window, window, stride)
    if mode == "max":
        return windows.max(axis=(-2, -1))
    return windows.mean(axis=(-2, -1))


def pool2d_backward(dout: np.ndarray, x: np.ndarray, mode: str,
                    window: int, stride: int) -> np.ndarray:
    """Gradient of pool2d; max routes to the first maximum of each window."""
    n, c, ho, wo = dout.shape
    dx = np.zeros_like(x)
    windows = _windows(x, window, window, stride)
    if mode == "max":
        flat = windows.reshape(n, c, ho, wo, window * window)
        winner = flat.argmax(axis=-1)
        for m in range(window * window):
            i, j = divmod(m, window)
            dx[:, :, i : i + stride * ho : stride,
               j : j + stride * wo : stride] += dout * (winner == m)
    else:
        share = dout / (window * window)
        for i in range(window):
            for j in range(window):
                dx[:, :, i : i + stride * ho : stride,
                   j : j + stride * wo : stride] += share
    return dx


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0)


def relu_backward(dout: np.ndarray, x: np.ndarray) -> np.ndarray:
    return dout * (x > 0)


def dense_forward(x: np.ndarray, weight: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Affine map for a batch: x (N, in) -> x @ weight.T + bias."""
    single = x.ndim == 1
    xb = x[None, :] if single else x
    if xb.shape[1] != weight.shape[1]:
        raise ShapeMismatch(
            f"dense input width {xb.shape[1]} vs weight input dim {weight.shape[1]}"
        )
    out = xb @ weight.T + bias
    return out[0] if single else out


def dense_backward(dout: np.ndarray, x: np.ndarray, weight: np.ndarray):
    """Gradients (dx, dweight, dbias) of dense_forward for a batch."""
    dweight = dout.T @ x
    dbias = dout.sum(axis=0)
    dx = dout @ weight
    return dx, dweight, dbias


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable softmax over the last axis."""
    logits = np.asarray(logits)
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def cross_entropy(p_bot, y) -> float:
    """Binary cross entropy -(y*log(p) + (1-y)*log(1-p)), mean over a batch.

    Probabilities are clamped to [eps, 1-eps] with eps = 1e-7 before the
    logs, so perfect predictions cost ~1e-7 instead of producing infinities.
    """
    p = np.clip(np.asarray(p_bot, dtype=np.float64), CLAMP_EPS, 1.0 - CLAMP_EPS)
    y = np.asarray(y, dtype=np.float64)
    losses = -(y * np.log(p) + (1.0 - y) * np.log1p(-p))
    return float(np.mean(losses))


def softmax_cross_entropy_grad(probs: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Gradient of the mean cross entropy w.r.t. the two-class logits.

    For a softmax head the combined gradient is (p - onehot(y)) / N, which
    also handles the clamp region: a saturated probability has a vanishing
    softmax Jacobian, so the gradient correctly goes to zero there.
    """
    n = probs.shape[0]
    onehot = np.zeros_like(probs)
    onehot[np.arange(n), y.astype(int)] = 1.0
    return (probs - onehot) / n
