"""LSTM sequence encoders.

The recurrence is implemented as a single fused tape op: the time loop runs
in plain numpy (jitted with numba when available) and the backward pass is a
hand-derived BPTT, so a long sequence costs two tape nodes instead of
thousands. Gradients of the fused op are covered by finite-difference tests.
"""

from __future__ import annotations

import numpy as np

from .autodiff import GraphError, Tensor, _make, concat

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a normal dependency
    def njit(*args, **kwargs):
        def wrap(f):
            return f
        return wrap(args[0]) if args and callable(args[0]) else wrap

# Gate layout along the 4H axis: input, forget, cell, output.


@njit(cache=True)
def _lstm_forward_loop(xw, wh):
    L, four_h = xw.shape
    H = four_h // 4
    hs = np.zeros((L, H), dtype=xw.dtype)
    cs = np.zeros((L, H), dtype=xw.dtype)
    gi = np.zeros((L, H), dtype=xw.dtype)
    gf = np.zeros((L, H), dtype=xw.dtype)
    gg = np.zeros((L, H), dtype=xw.dtype)
    go = np.zeros((L, H), dtype=xw.dtype)
    tc = np.zeros((L, H), dtype=xw.dtype)
    h = np.zeros(H, dtype=xw.dtype)
    c = np.zeros(H, dtype=xw.dtype)
    for t in range(L):
        s = xw[t] + np.dot(h, wh)
        i = 1.0 / (1.0 + np.exp(-s[0:H]))
        f = 1.0 / (1.0 + np.exp(-s[H:2 * H]))
        g = np.tanh(s[2 * H:3 * H])
        o = 1.0 / (1.0 + np.exp(-s[3 * H:4 * H]))
        c = f * c + i * g
        th = np.tanh(c)
        h = o * th
        gi[t], gf[t], gg[t], go[t] = i, f, g, o
        cs[t], tc[t], hs[t] = c, th, h
    return hs, cs, gi, gf, gg, go, tc


@njit(cache=True)
def _lstm_backward_loop(dhs, hs, cs, gi, gf, gg, go, tc, wh):
    L, H = dhs.shape
    dxw = np.zeros((L, 4 * H), dtype=dhs.dtype)
    dwh = np.zeros_like(wh)
    dh = np.zeros(H, dtype=dhs.dtype)
    dc = np.zeros(H, dtype=dhs.dtype)
    for t in range(L - 1, -1, -1):
        dh = dh + dhs[t]
        i, f, g, o, th = gi[t], gf[t], gg[t], go[t], tc[t]
        do = dh * th
        dc = dc + dh * o * (1.0 - th * th)
        di = dc * g
        dg = dc * i
        if t > 0:
            c_prev = cs[t - 1]
            h_prev = hs[t - 1]
        else:
            c_prev = np.zeros(H, dtype=dhs.dtype)
            h_prev = np.zeros(H, dtype=dhs.dtype)
        df = dc * c_prev
        ds = np.empty(4 * H, dtype=dhs.dtype)
        ds[0:H] = di * i * (1.0 - i)
        ds[H:2 * H] = df * f * (1.0 - f)
        ds[2 * H:3 * H] = dg * (1.0 - g * g)
        ds[3 * H:4 * H] = do * o * (1.0 - o)
        dxw[t] = ds
        dwh += np.outer(h_prev, ds)
        dh = np.dot(wh, ds)
        dc = dc * f
    return dxw, dwh


def lstm_seq(x: Tensor, wx: Tensor, wh: Tensor, b: Tensor, reverse: bool = False) -> Tensor:
    """Run one LSTM direction over ``x`` (L x E); returns hidden states (L x H).

    Row t of the output is the hidden state after reading position t in scan
    order; with ``reverse=True`` the scan runs right-to-left but the output
    rows stay aligned to input positions.
    """
    L = x.data.shape[0]
    if L == 0:
        raise GraphError("lstm over an empty sequence; callers must pad")
    xd = x.data[::-1] if reverse else x.data
    xw = xd @ wx.data + b.data
    hs, cs, gi, gf, gg, go, tc = _lstm_forward_loop(np.ascontiguousarray(xw), wh.data)

    def backward(g):
        dhs = np.ascontiguousarray(g[::-1] if reverse else g)
        dxw, dwh = _lstm_backward_loop(dhs, hs, cs, gi, gf, gg, go, tc, wh.data)
        dxd = dxw @ wx.data.T
        dwx = xd.T @ dxw
        db = dxw.sum(axis=0)
        dx = dxd[::-1].copy() if reverse else dxd
        return dx, dwx, dwh, db

    out = hs[::-1].copy() if reverse else hs
    return _make(out, (x, wx, wh, b), backward)


def bilstm(x: Tensor, params: dict[str, Tensor], prefix: str) -> tuple[Tensor, Tensor, Tensor]:
    """Bidirectional LSTM.

    Returns (per-position [fwd_t; bwd_t] of shape L x 2H, final forward state,
    final backward state). The finals are 1 x H row tensors.
    """
    fwd = lstm_seq(x, params[f"{prefix}.fw.wx"], params[f"{prefix}.fw.wh"], params[f"{prefix}.fw.b"])
    bwd = lstm_seq(x, params[f"{prefix}.bw.wx"], params[f"{prefix}.bw.wh"], params[f"{prefix}.bw.b"],
                   reverse=True)
    out = concat([fwd, bwd], axis=1)
    from .autodiff import take_rows
    final_fwd = take_rows(fwd, [fwd.data.shape[0] - 1])
    final_bwd = take_rows(bwd, [0])
    return out, final_fwd, final_bwd


def bilstm_param_shapes(input_dim: int, hidden_dim: int) -> dict[str, tuple[int, ...]]:
    """Shape table for one BiLSTM's parameters, keyed by name suffix."""
    shapes = {}
    for d in ("fw", "bw"):
        shapes[f"{d}.wx"] = (input_dim, 4 * hidden_dim)
        shapes[f"{d}.wh"] = (hidden_dim, 4 * hidden_dim)
        shapes[f"{d}.b"] = (4 * hidden_dim,)
    return shapes
