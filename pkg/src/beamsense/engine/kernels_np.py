"""Pure-numpy fallback for the hot data-movement kernels.

The convolution itself runs as a BLAS matmul in either backend; these
kernels cover the patch extraction (im2col), the scatter-add back to image
layout (col2im) and 2x2 max pooling with explicit argmax routing.
"""

import numpy as np

NAME = "numpy"


def im2col(x, kh, kw):
    """(N,C,H,W) -> (N*OH*OW, C*kh*kw) patch matrix for valid convolution."""
    n, c, h, w = x.shape
    oh, ow = h - kh + 1, w - kw + 1
    windows = np.lib.stride_tricks.sliding_window_view(x, (kh, kw), axis=(2, 3))
    cols = windows.transpose(0, 2, 3, 1, 4, 5).reshape(n * oh * ow, c * kh * kw)
    return np.ascontiguousarray(cols)


def col2im(cols, n, c, h, w, kh, kw):
    """Scatter-add a patch matrix back into (N,C,H,W) image layout."""
    oh, ow = h - kh + 1, w - kw + 1
    cols = cols.reshape(n, oh, ow, c, kh, kw).transpose(0, 3, 4, 5, 1, 2)
    out = np.zeros((n, c, h, w), dtype=cols.dtype)
    for i in range(kh):
        for j in range(kw):
            out[:, :, i:i + oh, j:j + ow] += cols[:, :, i, j]
    return out


def maxpool2_forward(x):
    """Non-overlapping 2x2 max pool, trailing odd row/col dropped.

    Returns (out, arg) where arg holds the in-window argmax in row-major
    order (0..3), first occurrence on ties.
    """
    n, c, h, w = x.shape
    h2, w2 = h // 2, w // 2
    blocks = x[:, :, :2 * h2, :2 * w2].reshape(n, c, h2, 2, w2, 2)
    blocks = blocks.transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h2, w2, 4)
    arg = blocks.argmax(axis=-1)
    out = np.take_along_axis(blocks, arg[..., None], axis=-1)[..., 0]
    return out, arg


def maxpool2_backward(grad_out, arg, h, w):
    """Route each upstream gradient to its recorded argmax position."""
    n, c, h2, w2 = grad_out.shape
    grad_x = np.zeros((n, c, h, w), dtype=grad_out.dtype)
    ii, jj = np.meshgrid(np.arange(h2), np.arange(w2), indexing="ij")
    rows = 2 * ii[None, None] + arg // 2
    cols = 2 * jj[None, None] + arg % 2
    nn = np.arange(n)[:, None, None, None]
    cc = np.arange(c)[None, :, None, None]
    grad_x[nn, cc, rows, cols] = grad_out
    return grad_x
