#!/usr/bin/env python3
"""Build a small MNIST sample in IDX format from the `mnist` npm package.

The npm package ships 10,000 digits as JSON (pixel values already divided
by 255 and rounded to 3 decimals). They are shuffled with a fixed seed and
split 8000/2000 into train/t10k IDX files, gzip-compressed with mtime=0 so
the output is byte-stable.

    npm pack mnist && tar xzf mnist-*.tgz
    python3 scripts/make_mnist_sample.py package/src/digits data/mnist-sample
"""
import gzip
import json
import struct
import sys
from pathlib import Path

import numpy as np

TRAIN = 8000


def write_gz(path, payload):
    with open(path, "wb") as raw:
        with gzip.GzipFile(fileobj=raw, mode="wb", mtime=0, filename="") as gz:
            gz.write(payload)


def main(src, dst):
    src, dst = Path(src), Path(dst)
    images, labels = [], []
    for digit in range(10):
        flat = json.loads((src / f"{digit}.json").read_text())["data"]
        arr = np.rint(np.asarray(flat, dtype=np.float64) * 255.0).clip(0, 255)
        arr = arr.astype(np.uint8).reshape(-1, 784)
        images.append(arr)
        labels.append(np.full(len(arr), digit, dtype=np.uint8))
    images = np.concatenate(images)
    labels = np.concatenate(labels)
    order = np.random.RandomState(0).permutation(len(labels))
    images, labels = images[order], labels[order]

    dst.mkdir(parents=True, exist_ok=True)
    for prefix, sl in (("train", slice(0, TRAIN)), ("t10k", slice(TRAIN, None))):
        img, lab = images[sl], labels[sl]
        n = len(lab)
        write_gz(dst / f"{prefix}-images-idx3-ubyte.gz",
                 struct.pack(">IIII", 0x803, n, 28, 28) + img.tobytes())
        write_gz(dst / f"{prefix}-labels-idx1-ubyte.gz",
                 struct.pack(">II", 0x801, n) + lab.tobytes())
        print(prefix, n, np.bincount(lab, minlength=10).tolist())


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
