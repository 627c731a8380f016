#!/usr/bin/env python3
"""Export the scikit-learn handwritten digits dataset as IDX files.

Produces train/test image+label files in the standard big-endian IDX format
(magic 0x803 / 0x801) so the simulator's IDX loader can consume them when no
MNIST directory is configured.
"""

import struct
import sys
from pathlib import Path


def write_idx(out_dir: Path, stem: str, images, labels) -> None:
    n, side = images.shape[0], images.shape[1]
    with open(out_dir / f"{stem}-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x803, n, side, side))
        f.write(images.astype("uint8").tobytes())
    with open(out_dir / f"{stem}-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x801, n))
        f.write(labels.astype("uint8").tobytes())


def main() -> int:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data/digits_idx")
    out_dir.mkdir(parents=True, exist_ok=True)

    from sklearn.datasets import load_digits
    import numpy as np

    digits = load_digits()
    images = np.clip(digits.images * (255.0 / 16.0), 0, 255).round()
    labels = digits.target

    # Deterministic shuffle, fixed split.
    rng = np.random.RandomState(12345)
    order = rng.permutation(len(labels))
    images, labels = images[order], labels[order]
    n_train = 1500
    write_idx(out_dir, "train", images[:n_train], labels[:n_train])
    # The loader accepts t10k- or test- prefixes; use the MNIST-style name.
    n, side = images[n_train:].shape[0], images.shape[1]
    with open(out_dir / "t10k-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x803, n, side, side))
        f.write(images[n_train:].astype("uint8").tobytes())
    with open(out_dir / "t10k-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x801, n))
        f.write(labels[n_train:].astype("uint8").tobytes())
    print(f"wrote {n_train} train / {n} test digits to {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
