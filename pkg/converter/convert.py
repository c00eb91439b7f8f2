#!/usr/bin/env python3
"""Convert Hopkins-style .mat trajectory archives to the moseg text format.

Usage: convert.py <archive.mat> <out.txt>

The archive must contain a tracked-point array in one of the common layouts

    (2F, N)     rows interleaved per frame: x_f, y_f
    (F, 2, N)
    (2, N, F)
    (3, N, F)   homogeneous; normalized by the third row

plus a ground-truth label vector of length N. Missing data is taken from an
optional visibility mask (or from NaN entries) and written as the 'nan nan'
sentinel. Output floats carry 9 significant digits; the output is
byte-deterministic for a given archive.

Exit codes: 0 success, 2 unrecognized schema, 3 I/O error.
"""

import sys

import numpy as np
from scipy.io import loadmat

POINT_NAMES = ("y", "x", "points", "W", "data", "traj")
LABEL_NAMES = ("s", "labels", "gt", "groups", "group", "ids")
MASK_NAMES = ("m", "mask", "visibility", "vis")


class SchemaError(Exception):
    pass


def _describe(variables):
    rows = []
    for name, value in sorted(variables.items()):
        if name.startswith("__"):
            continue
        shape = getattr(value, "shape", None)
        rows.append(f"{name}{list(shape) if shape is not None else ''}")
    return ", ".join(rows) if rows else "none"


def _find_labels(variables):
    for name in LABEL_NAMES:
        if name in variables:
            arr = np.asarray(variables[name]).squeeze()
            if arr.ndim == 1 and arr.size > 1:
                return arr.astype(np.int64)
    raise SchemaError("no label vector found")


def _coerce_points(arr, num_points):
    """Return positions (N, F, 2) from any recognized layout, else None."""
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim == 2 and arr.shape[0] % 2 == 0 and arr.shape[1] == num_points:
        frames = arr.shape[0] // 2
        stacked = arr.reshape(frames, 2, num_points)  # rows (x_f, y_f) per frame
        return np.transpose(stacked, (2, 0, 1))
    if arr.ndim == 3 and arr.shape[1] == 2 and arr.shape[2] == num_points:
        return np.transpose(arr, (2, 0, 1))
    if arr.ndim == 3 and arr.shape[0] == 2 and arr.shape[1] == num_points:
        return np.transpose(arr, (1, 2, 0))
    if arr.ndim == 3 and arr.shape[0] == 3 and arr.shape[1] == num_points:
        with np.errstate(divide="ignore", invalid="ignore"):
            normalized = arr[:2] / arr[2:3]
        return np.transpose(normalized, (1, 2, 0))
    return None


def _find_points(variables, num_points):
    for name in POINT_NAMES:
        if name in variables:
            positions = _coerce_points(variables[name], num_points)
            if positions is not None:
                return positions
    raise SchemaError("no point array matching the label count")


def _find_mask(variables, num_points, num_frames):
    for name in MASK_NAMES:
        if name not in variables:
            continue
        arr = np.asarray(variables[name]).squeeze()
        if arr.shape == (num_points, num_frames):
            return arr != 0
        if arr.shape == (num_frames, num_points):
            return arr.T != 0
    return None


def convert(archive_path, output_path):
    variables = loadmat(archive_path)
    try:
        labels = _find_labels(variables)
        positions = _find_points(variables, labels.size)
    except SchemaError as exc:
        raise SchemaError(f"{exc}; variables found: {_describe(variables)}")

    num_points, num_frames = positions.shape[0], positions.shape[1]
    visible = np.isfinite(positions).all(axis=2)
    mask = _find_mask(variables, num_points, num_frames)
    if mask is not None:
        visible &= mask

    if labels.min() == 0:
        labels = labels + 1  # 0-based archives
    # compact to a dense 1..M range, preserving first-appearance order
    unique = sorted(set(labels.tolist()))
    remap = {old: new + 1 for new, old in enumerate(unique)}
    labels = np.array([remap[v] for v in labels.tolist()], dtype=np.int64)
    num_motions = len(unique)

    lines = [f"{num_frames} {num_points} {num_motions}"]
    for i in range(num_points):
        tokens = [str(int(labels[i]))]
        for f in range(num_frames):
            if visible[i, f]:
                tokens.append(f"{positions[i, f, 0]:.9g}")
                tokens.append(f"{positions[i, f, 1]:.9g}")
            else:
                tokens.append("nan")
                tokens.append("nan")
        lines.append(" ".join(tokens))
    with open(output_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return num_frames, num_points, num_motions


def main(argv):
    if len(argv) != 3:
        print(__doc__.strip().splitlines()[2], file=sys.stderr)
        return 2
    archive, output = argv[1], argv[2]
    try:
        num_frames, num_points, num_motions = convert(archive, output)
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {output}: F={num_frames} N={num_points} M={num_motions}")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
