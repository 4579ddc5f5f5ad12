#!/usr/bin/env python3
"""Build the on-disk datasets used by the experiment configs.

Sources are the `mnist` and `fashion-mnist` npm packages, which bundle real
28x28 grayscale samples as JSON. Output:

  data/mnist/images-idx3-ubyte, data/mnist/labels-idx1-ubyte
      standard big-endian IDX files holding the requested digits
  data/taskb/<class>/NNNN.pgm
      binary PGM (P5) images, one directory per class, for the
      grayscale-directory loader

Usage: tools/prepare_data.py [--out data] [--digits 1 9]
                              [--fashion 1 8] [--per-class 600]
"""
import argparse
import json
import os
import struct
import subprocess
import tarfile
import tempfile


def npm_fetch(package, workdir):
    out = subprocess.run(["npm", "pack", package, "--silent"], cwd=workdir,
                         check=True, capture_output=True, text=True)
    tgz = os.path.join(workdir, out.stdout.strip().splitlines()[-1])
    with tarfile.open(tgz) as tar:
        tar.extractall(os.path.join(workdir, package))
    return os.path.join(workdir, package, "package", "src")


def mnist_digit(src, digit):
    flat = json.load(open(os.path.join(src, "digits", f"{digit}.json")))["data"]
    n = len(flat) // 784
    return [[min(255, max(0, round(v * 255))) for v in flat[i * 784:(i + 1) * 784]]
            for i in range(n)]


def fashion_class(src, cls):
    return json.load(open(os.path.join(src, "clothes", f"{cls}.json")))["data"]


def write_idx(path_images, path_labels, images, labels):
    with open(path_images, "wb") as f:
        f.write(struct.pack(">IIII", 2051, len(images), 28, 28))
        for img in images:
            f.write(bytes(img))
    with open(path_labels, "wb") as f:
        f.write(struct.pack(">II", 2049, len(labels)))
        f.write(bytes(labels))


def write_pgm(path, pixels, side=28):
    with open(path, "wb") as f:
        f.write(f"P5\n{side} {side}\n255\n".encode("ascii"))
        f.write(bytes(pixels))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data")
    ap.add_argument("--digits", type=int, nargs=2, default=[1, 9])
    ap.add_argument("--fashion", type=int, nargs=2, default=[1, 8])
    ap.add_argument("--per-class", type=int, default=600)
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        src = npm_fetch("mnist", tmp)
        per_digit = [mnist_digit(src, d) for d in args.digits]
        images, labels = [], []
        for i in range(max(len(p) for p in per_digit)):
            for d, samples in zip(args.digits, per_digit):
                if i < len(samples):
                    images.append(samples[i])
                    labels.append(d)
        os.makedirs(os.path.join(args.out, "mnist"), exist_ok=True)
        write_idx(os.path.join(args.out, "mnist", "images-idx3-ubyte"),
                  os.path.join(args.out, "mnist", "labels-idx1-ubyte"),
                  images, labels)
        print(f"mnist: {len(images)} samples of digits {args.digits}")

        fsrc = npm_fetch("fashion-mnist", tmp)
        for cls in args.fashion:
            samples = fashion_class(fsrc, cls)[:args.per_class]
            d = os.path.join(args.out, "taskb", f"class{cls}")
            os.makedirs(d, exist_ok=True)
            for i, px in enumerate(samples):
                write_pgm(os.path.join(d, f"{i:04d}.pgm"), px)
            print(f"taskb: {len(samples)} images of class {cls} -> {d}")


if __name__ == "__main__":
    main()
