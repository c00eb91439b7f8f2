"""Trajectory data model and the on-disk text format.

Format (UTF-8, whitespace separated)::

    line 1:       F N [M]     frame count, point count, optional motion count
    lines 2..N+1: label x_1 y_1 x_2 y_2 ... x_F y_F

``label`` is an integer ground-truth motion index in 1..M, or 0 when unknown.
Frames where a point is invisible carry the sentinel pair ``nan nan``.
Coordinates are raw pixels; floats are written with 9 significant digits.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvariantViolation, TrajectoryFormatError


@dataclass
class TrajectorySet:
    """Tracked 2-D points over F frames with per-frame visibility.

    ``positions`` is (N, F, 2) float64 with NaN wherever ``visibility`` is
    False. ``labels`` is an optional (N,) int64 array of motion indices in
    1..num_motions. Instances are treated as immutable after construction.
    """

    positions: np.ndarray
    visibility: np.ndarray
    labels: np.ndarray | None = None

    @property
    def num_points(self):
        return self.positions.shape[0]

    @property
    def num_frames(self):
        return self.positions.shape[1]

    @property
    def num_motions(self):
        return None if self.labels is None else int(self.labels.max())

    def validate(self):
        """Raise :class:`InvariantViolation` on any broken invariant."""
        pos, vis = self.positions, self.visibility
        if pos.ndim != 3 or pos.shape[2] != 2 or vis.shape != pos.shape[:2]:
            raise InvariantViolation(
                f"inconsistent shapes: positions {pos.shape}, visibility {vis.shape}"
            )
        if pos.shape[0] == 0 or pos.shape[1] == 0:
            raise InvariantViolation("empty trajectory set")
        counts = vis.sum(axis=1)
        short = np.where(counts < 2)[0]
        if short.size:
            raise InvariantViolation(
                f"point {short[0] + 1} is visible in {int(counts[short[0]])} frame(s); "
                "every point must be visible in at least 2"
            )
        bad = ~np.isfinite(pos[vis])
        if bad.any():
            idx = np.argwhere(vis)[np.where(bad.any(axis=1))[0][0]]
            raise InvariantViolation(
                f"point {idx[0] + 1} has a non-finite coordinate in frame {idx[1] + 1}"
            )
        if self.labels is not None:
            labels = self.labels
            if labels.shape != (pos.shape[0],):
                raise InvariantViolation("labels must have one entry per point")
            if labels.min() < 1:
                bad_pt = int(np.argmin(labels)) + 1
                raise InvariantViolation(f"point {bad_pt} has label < 1")
            m = int(labels.max())
            present = np.unique(labels)
            if present.size != m:
                missing = sorted(set(range(1, m + 1)) - set(present.tolist()))
                raise InvariantViolation(f"motion {missing[0]} is empty")
        return self

    def covisibility_counts(self):
        """(N, N) int64 matrix of frames where both points are visible."""
        v = self.visibility.astype(np.int64)
        return v @ v.T

    def select(self, indices):
        """Subset by point indices, preserving order; labels compacted if a
        motion vanishes entirely."""
        indices = np.asarray(indices, dtype=np.int64)
        labels = None
        if self.labels is not None:
            labels = self.labels[indices]
            present = np.unique(labels)
            if present.size != labels.max():
                remap = {old: new + 1 for new, old in enumerate(present.tolist())}
                labels = np.array([remap[v] for v in labels.tolist()], dtype=np.int64)
        return TrajectorySet(
            positions=self.positions[indices].copy(),
            visibility=self.visibility[indices].copy(),
            labels=labels,
        )


def load_trajectories(path):
    """Parse a trajectory text file into a validated :class:`TrajectorySet`."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    body = [(i + 1, ln) for i, ln in enumerate(lines) if ln.strip()]
    if not body:
        raise TrajectoryFormatError("empty file", line=1)

    header_no, header = body[0]
    fields = header.split()
    if len(fields) not in (2, 3):
        raise TrajectoryFormatError(
            f"header must be 'F N [M]', got {len(fields)} fields", line=header_no
        )
    try:
        header_ints = [int(tok) for tok in fields]
    except ValueError:
        raise TrajectoryFormatError(f"non-integer header field in {fields}", line=header_no)
    num_frames, num_points = header_ints[0], header_ints[1]
    declared_m = header_ints[2] if len(header_ints) == 3 else None
    if num_frames < 1 or num_points < 1:
        raise TrajectoryFormatError("F and N must be positive", line=header_no)
    if len(body) - 1 != num_points:
        raise TrajectoryFormatError(
            f"expected {num_points} point lines, found {len(body) - 1}", line=header_no
        )

    positions = np.full((num_points, num_frames, 2), np.nan)
    visibility = np.zeros((num_points, num_frames), dtype=bool)
    labels = np.zeros(num_points, dtype=np.int64)
    expected = 1 + 2 * num_frames
    for row, (line_no, line) in enumerate(body[1:]):
        toks = line.split()
        if len(toks) != expected:
            raise TrajectoryFormatError(
                f"expected {expected} fields (label + 2F coords), got {len(toks)}",
                line=line_no,
            )
        try:
            labels[row] = int(toks[0])
        except ValueError:
            raise TrajectoryFormatError(f"label {toks[0]!r} is not an integer", line=line_no)
        try:
            coords = np.array([float(tok) for tok in toks[1:]]).reshape(num_frames, 2)
        except ValueError:
            raise TrajectoryFormatError("unparseable coordinate", line=line_no)
        vis = ~np.isnan(coords).any(axis=1)
        if np.isnan(coords).any(axis=1).any() and not np.isnan(coords[~vis]).all():
            raise TrajectoryFormatError(
                "invisible frames must use the sentinel 'nan nan' for both coordinates",
                line=line_no,
            )
        positions[row, vis] = coords[vis]
        visibility[row] = vis

    if (labels == 0).all():
        label_arr = None
    elif (labels > 0).all():
        label_arr = labels
    else:
        mixed = int(np.where(labels == 0)[0][0]) + 1
        raise TrajectoryFormatError(
            f"point {mixed} has label 0 while other points are labeled; "
            "labels must be all-known or all-unknown"
        )
    if label_arr is not None and declared_m is not None and int(label_arr.max()) != declared_m:
        raise TrajectoryFormatError(
            f"header declares {declared_m} motions but labels span 1..{int(label_arr.max())}"
        )

    traj = TrajectorySet(positions=positions, visibility=visibility, labels=label_arr)
    traj.validate()
    return traj


def save_trajectories(traj, path):
    """Write the text representation (9 significant digits, 'nan nan' sentinel)."""
    lines = []
    header = f"{traj.num_frames} {traj.num_points}"
    if traj.labels is not None:
        header += f" {traj.num_motions}"
    lines.append(header)
    labels = traj.labels if traj.labels is not None else np.zeros(traj.num_points, dtype=np.int64)
    for i in range(traj.num_points):
        toks = [str(int(labels[i]))]
        for f in range(traj.num_frames):
            if traj.visibility[i, f]:
                toks.append(f"{traj.positions[i, f, 0]:.9g}")
                toks.append(f"{traj.positions[i, f, 1]:.9g}")
            else:
                toks.append("nan")
                toks.append("nan")
        lines.append(" ".join(toks))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def prune_short_tracks(traj, min_frames):
    """Keep exactly the points visible in at least ``min_frames`` frames."""
    if min_frames < 2:
        raise InvariantViolation("min_frames must be >= 2")
    counts = traj.visibility.sum(axis=1)
    keep = np.where(counts >= min_frames)[0]
    if keep.size == 0:
        raise InvariantViolation(
            f"pruning at min_frames={min_frames} removes every track"
        )
    return traj.select(keep)
