#!/usr/bin/env python3
"""Regenerates the shipped fixtures under fixtures/.

The policies imitate closed-form expert controllers:
  di: saturated state feedback toward the origin.
  gr: heading controller toward the origin with repulsion from the obstacles.
The initial sets are our own choice.
"""

import argparse
import json
import math
from pathlib import Path

import numpy as np
import torch

DT = 0.2


def di_expert(x, k1, k2):
    return np.clip(-k1 * x[:, 0] - k2 * x[:, 1], -1.0, 1.0)[:, None]


OBSTACLES = [(-6.0, -0.5, 2.2), (-1.25, 1.75, 1.6)]


def gr_heading(x, gain, reach):
    px, py = x[:, 0], x[:, 1]
    fx, fy = -px, -py
    norm = np.maximum(np.hypot(fx, fy), 1e-6)
    fx, fy = fx / norm, fy / norm
    for cx, cy, r in OBSTACLES:
        dx, dy = px - cx, py - cy
        d = np.maximum(np.hypot(dx, dy), 1e-6)
        w = gain * np.clip((r + reach - d) / reach, 0.0, None) ** 2
        fx = fx + w * dx / d
        fy = fy + w * dy / d
    return np.arctan2(fy, fx)


def gr_expert(x, k, w_max, gain, reach):
    err = gr_heading(x, gain, reach) - x[:, 2]
    err = (err + np.pi) % (2 * np.pi) - np.pi
    return np.clip(k * err, -w_max, w_max)[:, None]


def di_step(x, u):
    return np.stack([x[:, 0] + DT * x[:, 1] + 0.5 * DT**2 * u[:, 0], x[:, 1] + DT * u[:, 0]], axis=1)


def gr_step(x, u, v=1.0):
    return np.stack(
        [x[:, 0] + DT * v * np.cos(x[:, 2]), x[:, 1] + DT * v * np.sin(x[:, 2]), x[:, 2] + DT * u[:, 0]],
        axis=1,
    )


def rollouts(expert, step, lo, hi, n, steps, rng):
    x = rng.uniform(lo, hi, size=(n, len(lo)))
    states = [x]
    for _ in range(steps):
        x = step(x, expert(x))
        states.append(x)
    return np.concatenate(states)


def fit(inputs, targets, hidden, epochs, seed):
    torch.manual_seed(seed)
    dims = [inputs.shape[1], *hidden, 1]
    layers = []
    for a, b in zip(dims[:-1], dims[1:]):
        layers += [torch.nn.Linear(a, b), torch.nn.ReLU()]
    net = torch.nn.Sequential(*layers[:-1]).double()
    xs = torch.tensor(inputs)
    ys = torch.tensor(targets)
    opt = torch.optim.Adam(net.parameters(), lr=3e-3)
    sched = torch.optim.lr_scheduler.CosineAnnealingLR(opt, epochs)
    gen = torch.Generator().manual_seed(seed)
    for _ in range(epochs):
        perm = torch.randperm(len(xs), generator=gen)
        for i in range(0, len(xs), 512):
            idx = perm[i : i + 512]
            opt.zero_grad()
            loss = torch.mean((net(xs[idx]) - ys[idx]) ** 2)
            loss.backward()
            opt.step()
        sched.step()
    with torch.no_grad():
        mse = torch.mean((net(xs) - ys) ** 2).item()
    return net, mse


def to_weights(net, input_dim):
    linears = [m for m in net if isinstance(m, torch.nn.Linear)]
    return {
        "format_version": 1,
        "input_dim": input_dim,
        "layers": [
            {
                "weights": m.weight.detach().tolist(),
                "bias": m.bias.detach().tolist(),
                "activation": "linear" if i == len(linears) - 1 else "relu",
            }
            for i, m in enumerate(linears)
        ],
    }


def write_json(path, obj):
    path.write_text(json.dumps(obj, indent=1) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "fixtures")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--epochs", type=int, default=150)
    ap.add_argument("--only", choices=["di", "gr"])
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)

    if args.only in (None, "di"):
        k1, k2 = 0.5, 1.5
        expert = lambda x: di_expert(x, k1, k2)
        box = rng.uniform([-0.5, -1.5], [3.5, 1.5], size=(20000, 2))
        traj = rollouts(expert, di_step, [2.4, -0.35], [3.1, 0.35], 400, 30, rng)
        xs = np.concatenate([box, traj])
        net, mse = fit(xs, expert(xs), [30, 20, 10], args.epochs, args.seed)
        print(f"di policy mse {mse:.3e}")
        write_json(args.out / "di_policy.json", to_weights(net, 2))
        write_json(
            args.out / "di.json",
            {
                "dynamics": {"kind": "double_integrator", "dt": DT},
                "policy": "di_policy.json",
                "x0": {"lower": [2.5, -0.25], "upper": [3.0, 0.25]},
                "constraints": [
                    {"type": "halfspace", "normal": [1.0, 0.0], "offset": 0.0},
                    {"type": "halfspace", "normal": [0.0, 1.0], "offset": -1.0},
                ],
                "t_f": 30,
                "k_max": 15,
                "mc": {"n": 1000, "seed": 0},
            },
        )

    if args.only in (None, "gr"):
        k, w_max, gain, reach = 1.0, 1.0, 1.5, 3.0
        expert = lambda x: gr_expert(x, k, w_max, gain, reach)
        x0_lo, x0_hi = [-9.6, -3.6, -0.05], [-9.4, -3.4, 0.05]
        box = rng.uniform([-11.0, -6.0, -1.5], [1.0, 1.0, 2.0], size=(40000, 3))
        traj = rollouts(expert, gr_step, [-9.8, -3.8, -0.25], [-9.2, -3.2, 0.25], 400, 52, rng)
        xs = np.concatenate([box, traj])
        net, mse = fit(xs, expert(xs), [40, 20, 10], args.epochs, args.seed)
        print(f"gr policy mse {mse:.3e}")
        write_json(args.out / "gr_policy.json", to_weights(net, 3))
        write_json(
            args.out / "gr.json",
            {
                "dynamics": {"kind": "unicycle", "dt": DT, "v": 1.0},
                "policy": "gr_policy.json",
                "x0": {"lower": x0_lo, "upper": x0_hi},
                "constraints": [
                    {"type": "disk_avoid", "center": [cx, cy], "radius": r, "coords": [0, 1]}
                    for cx, cy, r in OBSTACLES
                ],
                "t_f": 52,
                "k_max": 10,
                "mc": {"n": 1000, "seed": 0},
            },
        )


if __name__ == "__main__":
    main()
