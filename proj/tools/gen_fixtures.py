#!/usr/bin/env python3
# Copyright 2026 The VFI Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Generates the model and dataset fixtures under data/.

The CNN (conv 7x7/3 -> square -> conv 2x2/2 -> dense, 1198 parameters) is
trained on the 5000-image MNIST subset bundled with mlxtend; 100 held-out
digits become the test dataset. Output files are committed; rerunning with
the same seed reproduces them.

    pip install torch mlxtend
    python3 tools/gen_fixtures.py --out data
"""

import argparse
import json
import os

import numpy as np
import torch
from mlxtend.data import mnist_data
from torch import nn


class Square(nn.Module):
  def forward(self, x):
    return x * x


def make_cnn():
  return nn.Sequential(
      nn.Conv2d(1, 3, 7, stride=3),   # 28x28 -> 3x8x8, 150 params
      Square(),
      nn.Conv2d(3, 6, 2, stride=2),   # -> 6x4x4, 78 params
      nn.Flatten(),
      nn.Linear(96, 10),              # 970 params
  )


def flat(t):
  return [float(v) for v in t.detach().double().reshape(-1).numpy()]


def cnn_to_json(model, scale, shift, with_weights=True):
  conv1, _, conv2, _, dense = model
  layers = []
  for conv in (conv1, conv2):
    layer = {
        "type": "conv2d",
        "inChannels": conv.in_channels,
        "outChannels": conv.out_channels,
        "kernel": list(conv.kernel_size),
        "stride": list(conv.stride),
    }
    if with_weights:
      layer["weights"] = flat(conv.weight)
      layer["bias"] = flat(conv.bias)
    layers.append(layer)
    if conv is conv1:
      layers.append({"type": "activation", "coefficients": [0.0, 0.0, 1.0]})
  d = {"type": "dense", "rows": dense.out_features, "cols": dense.in_features}
  if with_weights:
    d["weights"] = flat(dense.weight)
    d["bias"] = flat(dense.bias)
  layers.append(d)
  return {
      "name": "mnist-cnn-1198",
      "inputShape": [28, 28],
      "normalization": {"scale": scale, "shift": shift},
      "layers": layers,
  }


def write_dataset(path, ids, rows, height, width):
  with open(path, "w") as f:
    keys = [f"{r}:{c}" for r in range(height) for c in range(width)]
    f.write(",".join(["id"] + keys) + "\n")
    for rid, row in zip(ids, rows):
      f.write(",".join([rid] + [repr(float(v)) if not float(v).is_integer()
                                else str(int(v)) for v in row]) + "\n")


def train_cnn(x, y, seed, epochs):
  torch.manual_seed(seed)
  model = make_cnn()
  opt = torch.optim.Adam(model.parameters(), lr=3e-3, weight_decay=1e-4)
  loss_fn = nn.CrossEntropyLoss()
  n = x.shape[0]
  for epoch in range(epochs):
    perm = torch.randperm(n)
    for i in range(0, n, 64):
      idx = perm[i:i + 64]
      opt.zero_grad()
      out = model(x[idx])
      # Penalizing large logits keeps the encrypted output well inside the
      # decryption headroom.
      loss = loss_fn(out, y[idx]) + 1e-4 * (out ** 2).mean()
      loss.backward()
      opt.step()
  return model


def main():
  parser = argparse.ArgumentParser()
  parser.add_argument("--out", default="data")
  parser.add_argument("--seed", type=int, default=2024)
  parser.add_argument("--epochs", type=int, default=30)
  args = parser.parse_args()
  models = os.path.join(args.out, "models")
  datasets = os.path.join(args.out, "datasets")
  os.makedirs(models, exist_ok=True)
  os.makedirs(datasets, exist_ok=True)

  # ---- CNN on MNIST. --------------------------------------------------------
  pixels, labels = mnist_data()
  rng = np.random.default_rng(args.seed)
  perm = rng.permutation(len(labels))
  test_idx, train_idx = perm[:100], perm[100:]
  scale, shift = 1.0 / 255.0, -0.5
  x = torch.tensor(pixels[train_idx] * scale + shift,
                   dtype=torch.float32).reshape(-1, 1, 28, 28)
  y = torch.tensor(labels[train_idx], dtype=torch.long)
  model = train_cnn(x, y, args.seed, args.epochs)
  model.eval()
  xt = torch.tensor(pixels[test_idx] * scale + shift,
                    dtype=torch.float32).reshape(-1, 1, 28, 28)
  with torch.no_grad():
    logits = model(xt)
    hidden = model[1](model[0](xt))
  acc = (logits.argmax(1).numpy() == labels[test_idx]).mean()
  print(f"cnn params={sum(p.numel() for p in model.parameters())} "
        f"test accuracy={acc:.2f} max|logit|={logits.abs().max():.2f} "
        f"max|hidden|={hidden.abs().max():.2f}")

  with open(os.path.join(models, "mnist_cnn.json"), "w") as f:
    json.dump(cnn_to_json(model, scale, shift), f)
  with open(os.path.join(models, "mnist_cnn.structure.json"), "w") as f:
    json.dump(cnn_to_json(model, scale, shift, with_weights=False), f,
              indent=1)
  ids = [f"digit-{i:03d}" for i in range(100)]
  write_dataset(os.path.join(datasets, "mnist_test100.csv"), ids,
                pixels[test_idx], 28, 28)
  with open(os.path.join(datasets, "mnist_test100_labels.csv"), "w") as f:
    f.write("id,label\n")
    for rid, lab in zip(ids, labels[test_idx]):
      f.write(f"{rid},{int(lab)}\n")

  # ---- Toy MLP on 12 tabular features. ---------------------------------------
  g = np.random.default_rng(args.seed + 1)
  width = 12
  w1 = g.uniform(-1, 1, (8, width)) / np.sqrt(width)
  w2 = g.uniform(-1, 1, (3, 8)) / np.sqrt(8)
  toy = {
      "name": "toy-mlp",
      "inputShape": [1, width],
      "normalization": {"scale": [1.0 / 10] * width, "shift": [0.0] * width},
      "layers": [
          {"type": "dense", "rows": 8, "cols": width,
           "weights": w1.reshape(-1).tolist(),
           "bias": g.uniform(-0.1, 0.1, 8).tolist()},
          {"type": "activation", "coefficients": [0.5, 0.197, 0.0, -0.004]},
          {"type": "dense", "rows": 3, "cols": 8,
           "weights": w2.reshape(-1).tolist(),
           "bias": g.uniform(-0.1, 0.1, 3).tolist()},
      ],
  }
  with open(os.path.join(models, "toy_mlp.json"), "w") as f:
    json.dump(toy, f, indent=1)
  records = np.round(g.uniform(0, 10, (20, width)), 3)
  with open(os.path.join(datasets, "toy_records.csv"), "w") as f:
    f.write(",".join(["id"] + [str(c) for c in range(width)]) + "\n")
    for i, row in enumerate(records):
      f.write(",".join([f"r{i:02d}"] + [repr(float(v)) for v in row]) + "\n")


if __name__ == "__main__":
  main()
