#!/usr/bin/env python3
# Copyright 2026 The TripleNet Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ==============================================================================
"""Converts SVHN cropped-digit .mat files into 3073-byte image records.

Usage: convert_svhn.py <train_32x32.mat> <test_32x32.mat> <out_dir>

Writes svhn_train.bin and svhn_test.bin. Each record is one label byte
followed by the R, G and B planes, 1024 bytes each, row-major.
"""

import argparse
import os
import sys

import numpy as np
import scipy.io


def convert(mat_path: str, out_path: str) -> int:
  mat = scipy.io.loadmat(mat_path)
  x = mat["X"]  # [32, 32, 3, N], uint8
  y = mat["y"].reshape(-1).astype(np.int64)
  if x.shape[:3] != (32, 32, 3) or x.shape[3] != y.shape[0]:
    raise ValueError(f"{mat_path}: unexpected shapes X{x.shape} y{y.shape}")
  y[y == 10] = 0  # digit zero is stored as label 10
  if y.min() < 0 or y.max() > 9:
    raise ValueError(f"{mat_path}: labels outside [0, 9]")
  planes = np.transpose(x, (3, 2, 0, 1)).reshape(x.shape[3], 3072)
  records = np.concatenate([y.astype(np.uint8)[:, None], planes.astype(np.uint8)], axis=1)
  records.tofile(out_path)
  return records.shape[0]


def main() -> int:
  p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
  p.add_argument("train_mat")
  p.add_argument("test_mat")
  p.add_argument("out_dir")
  a = p.parse_args()
  os.makedirs(a.out_dir, exist_ok=True)
  for src, name in ((a.train_mat, "svhn_train.bin"), (a.test_mat, "svhn_test.bin")):
    n = convert(src, os.path.join(a.out_dir, name))
    print(f"{name}: {n} records")
  return 0


if __name__ == "__main__":
  sys.exit(main())
