"""Finite-difference verification of analytic gradients."""

from __future__ import annotations

import math

import numpy as np

from .params import ParamStore
from .tensor import backward


def grad_check(
    build_loss,
    store: ParamStore,
    step: float = 1e-3,
    max_entries_per_param: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Compare analytic gradients against central differences.

    ``build_loss`` must be a deterministic function of the store that
    returns a scalar loss tensor; the graph is rebuilt on every call, so
    analytic and numeric routes never share state.  Returns the max over
    checked entries of ``|analytic - fd| / max(1e-8, |fd|)``.  When
    ``max_entries_per_param`` is given, that many entries per parameter are
    sampled (seeded via ``rng``) instead of sweeping every entry.
    """
    store.zero_grads()
    loss = build_loss(store)
    if not math.isfinite(loss.item()):
        raise ValueError(f"grad_check: loss is not finite ({loss.item()})")
    backward(loss)
    analytic = {
        name: (t.grad.copy() if t.grad is not None else np.zeros(t.shape))
        for name, t in store.items()
    }

    if rng is None:
        rng = np.random.default_rng(0)
    worst = 0.0
    for name, t in store.items():
        flat = t.data.reshape(-1)
        grad_flat = analytic[name].reshape(-1)
        n = flat.size
        if max_entries_per_param is not None and n > max_entries_per_param:
            idxs = rng.choice(n, size=max_entries_per_param, replace=False)
        else:
            idxs = range(n)
        for i in idxs:
            orig = flat[i]
            flat[i] = orig + step
            f_plus = build_loss(store).item()
            flat[i] = orig - step
            f_minus = build_loss(store).item()
            flat[i] = orig
            if not (math.isfinite(f_plus) and math.isfinite(f_minus)):
                raise ValueError(f"grad_check: non-finite loss while perturbing {name}[{i}]")
            fd = (f_plus - f_minus) / (2.0 * step)
            rel = abs(grad_flat[i] - fd) / max(1e-8, abs(fd))
            if rel > worst:
                worst = rel
    store.zero_grads()
    return worst


def fd_gradient(f, x: np.ndarray, step: float = 1e-3) -> np.ndarray:
    """Central-difference gradient of scalar ``f`` w.r.t. array ``x``."""
    g = np.zeros_like(x, dtype=np.float64)
    flat = x.reshape(-1)
    gflat = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        f_plus = f(x)
        flat[i] = orig - step
        f_minus = f(x)
        flat[i] = orig
        gflat[i] = (f_plus - f_minus) / (2.0 * step)
    return g
