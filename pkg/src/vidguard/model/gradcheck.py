"""Analytic vs finite-difference gradient comparison for the network."""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from .network import FusionNet


def max_relative_gradient_error(
    net: FusionNet,
    inputs: tuple[torch.Tensor, ...],
    targets: torch.Tensor,
    n_probes: int = 20,
    h: float = 1e-6,
    seed: int = 0,
) -> float:
    """Probe random parameters and compare autograd against central
    differences of the cross-entropy loss. Runs in float64; dropout is
    disabled so the loss is a deterministic function of the parameters.
    """
    net = net.double().train(False)
    inputs = tuple(
        t.double() if t.is_floating_point() else t for t in inputs
    )
    criterion = nn.CrossEntropyLoss()

    def loss_value() -> float:
        return criterion(net(*inputs), targets).item()

    net.zero_grad()
    loss = criterion(net(*inputs), targets)
    loss.backward()

    params = [p for p in net.parameters() if p.requires_grad and p.numel() > 0]
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_probes):
        p = params[rng.integers(len(params))]
        flat_index = int(rng.integers(p.numel()))
        analytic = p.grad.view(-1)[flat_index].item()
        with torch.no_grad():
            original = p.view(-1)[flat_index].item()
            p.view(-1)[flat_index] = original + h
            plus = loss_value()
            p.view(-1)[flat_index] = original - h
            minus = loss_value()
            p.view(-1)[flat_index] = original
        numeric = (plus - minus) / (2 * h)
        scale = max(abs(analytic), abs(numeric), 1e-8)
        worst = max(worst, abs(analytic - numeric) / scale)
    return worst
