"""Batched forward/backward primitives for the recognizer.

Feature maps are ``(N, H, W, C)``; sequences are ``(N, T, D)``.  Every
``*_forward`` returns its output and a cache that the matching ``*_backward``
consumes.
"""

import numpy as np


def sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def conv3x3_forward(x, kernel, bias):
    """Same-padded 3x3 convolution via im2col.

    ``kernel`` has shape ``(3, 3, C_in, C_out)``.
    """
    n, h, w, cin = x.shape
    xp = np.pad(x, ((0, 0), (1, 1), (1, 1), (0, 0)))
    cols = np.empty((n, h, w, 9, cin))
    for dy in range(3):
        for dx in range(3):
            cols[:, :, :, dy * 3 + dx, :] = xp[:, dy:dy + h, dx:dx + w, :]
    cols = cols.reshape(n * h * w, 9 * cin)
    out = cols @ kernel.reshape(9 * cin, -1) + bias
    return out.reshape(n, h, w, -1), (cols, x.shape)


def conv3x3_backward(dout, cache, kernel, need_dx=True):
    cols, (n, h, w, cin) = cache
    d2 = dout.reshape(-1, dout.shape[-1])
    dkernel = (cols.T @ d2).reshape(kernel.shape)
    dbias = d2.sum(axis=0)
    if not need_dx:
        return None, dkernel, dbias
    dcols = (d2 @ kernel.reshape(9 * cin, -1).T).reshape(n, h, w, 9, cin)
    dxp = np.zeros((n, h + 2, w + 2, cin))
    for dy in range(3):
        for dx in range(3):
            dxp[:, dy:dy + h, dx:dx + w, :] += dcols[:, :, :, dy * 3 + dx, :]
    return dxp[:, 1:-1, 1:-1, :], dkernel, dbias


def maxpool2_forward(x):
    """2x2 max-pool, stride 2; the first maximal element of a window wins."""
    n, h, w, c = x.shape
    win = x.reshape(n, h // 2, 2, w // 2, 2, c).transpose(0, 1, 3, 5, 2, 4)
    win = win.reshape(n, h // 2, w // 2, c, 4)
    arg = win.argmax(axis=-1)
    out = np.take_along_axis(win, arg[..., None], axis=-1)[..., 0]
    return out, (arg, x.shape)


def maxpool2_backward(dout, cache):
    arg, (n, h, w, c) = cache
    dwin = np.zeros(dout.shape + (4,))
    np.put_along_axis(dwin, arg[..., None], dout[..., None], axis=-1)
    dwin = dwin.reshape(n, h // 2, w // 2, c, 2, 2).transpose(0, 1, 4, 2, 5, 3)
    return dwin.reshape(n, h, w, c)


def lstm_forward(x, w_x, w_h, bias):
    """Unidirectional LSTM from a zero state; gate order is (i, f, g, o)."""
    n, T, d = x.shape
    units = w_h.shape[0]
    xw = (x.reshape(n * T, d) @ w_x + bias).reshape(n, T, 4 * units)
    h = np.zeros((n, units))
    c = np.zeros((n, units))
    hs = np.empty((n, T, units))
    gates = np.empty((n, T, 4 * units))
    cs = np.empty((n, T, units))
    for t in range(T):
        z = xw[:, t] + h @ w_h
        g = np.empty_like(z)
        g[:, :2 * units] = sigmoid(z[:, :2 * units])
        g[:, 2 * units:3 * units] = np.tanh(z[:, 2 * units:3 * units])
        g[:, 3 * units:] = sigmoid(z[:, 3 * units:])
        i, f, gg, o = np.split(g, 4, axis=1)
        c = f * c + i * gg
        h = o * np.tanh(c)
        gates[:, t] = g
        cs[:, t] = c
        hs[:, t] = h
    return hs, (x, hs, cs, gates)


def lstm_backward(dhs, cache, w_x, w_h, need_dx=True):
    x, hs, cs, gates = cache
    n, T, d = x.shape
    units = w_h.shape[0]
    dz_all = np.empty((n, T, 4 * units))
    dw_h = np.zeros_like(w_h)
    dh_next = np.zeros((n, units))
    dc_next = np.zeros((n, units))
    for t in range(T - 1, -1, -1):
        i, f, gg, o = np.split(gates[:, t], 4, axis=1)
        c = cs[:, t]
        c_prev = cs[:, t - 1] if t > 0 else np.zeros_like(c)
        tanh_c = np.tanh(c)
        dh = dhs[:, t] + dh_next
        dc = dh * o * (1.0 - tanh_c ** 2) + dc_next
        dz = dz_all[:, t]
        dz[:, :units] = dc * gg * i * (1.0 - i)
        dz[:, units:2 * units] = dc * c_prev * f * (1.0 - f)
        dz[:, 2 * units:3 * units] = dc * i * (1.0 - gg ** 2)
        dz[:, 3 * units:] = dh * tanh_c * o * (1.0 - o)
        if t > 0:
            dw_h += hs[:, t - 1].T @ dz
        dh_next = dz @ w_h.T
        dc_next = dc * f
    dz2 = dz_all.reshape(n * T, 4 * units)
    dw_x = x.reshape(n * T, d).T @ dz2
    dbias = dz2.sum(axis=0)
    dx = (dz2 @ w_x.T).reshape(n, T, d) if need_dx else None
    return dx, dw_x, dw_h, dbias


def log_softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))
