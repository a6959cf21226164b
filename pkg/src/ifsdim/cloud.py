"""Finite-resolution point clouds of limit sets and fixed-point sets.

The builder expands cylinders breadth first: every cylinder of diameter
at least delta that meets the window is expanded, and each frontier
cylinder below delta contributes the image of the anchor point.  An
infinite tail is truncated metrically: representatives are kept on a
delta/2 grid (points closer than that merge inside any delta-ball) and
the remaining tail, confined to a shrinking envelope around the
accumulation point, is replaced by a single representative.
"""

from __future__ import annotations

import io
import math
import struct
from collections import deque
from dataclasses import dataclass

import numpy as np

from .cifs import CifsSpec, Region
from .errors import CloudSizeError, ConfigurationError
from .maps import Similarity
from .mobius import (
    Mobius,
    deriv_range_disc,
    deriv_range_interval,
    disc_image,
    interval_image,
)
from .tails import SimilarityTail

DEFAULT_CAP = 5_000_000

_MAGIC = b"IFSC"
_VERSION = 1


@dataclass(frozen=True)
class PointCloud:
    """Finite delta-resolution sample of a set, sorted and duplicate-free."""

    points: np.ndarray
    delta: float
    ambient_dim: int
    label: str = "limit_set"
    source: str = ""
    complete: bool = True

    @classmethod
    def from_points(cls, points, delta, ambient_dim=1, label="limit_set", source="", complete=True):
        arr = np.asarray(points, dtype=float)
        if ambient_dim == 1:
            arr = np.unique(arr.reshape(-1))
        else:
            arr = arr.reshape(-1, 2)
            arr = np.unique(arr, axis=0)
        return cls(arr, float(delta), ambient_dim, label, source, complete)

    def __len__(self) -> int:
        return len(self.points)

    def hull_diameter(self) -> float:
        if len(self.points) == 0:
            return 0.0
        if self.ambient_dim == 1:
            return float(self.points[-1] - self.points[0])
        spans = self.points.max(axis=0) - self.points.min(axis=0)
        return float(np.hypot(*spans))

    # -- persistence ----------------------------------------------------

    def to_bytes(self) -> bytes:
        head = _MAGIC + struct.pack("<IId Q", _VERSION, self.ambient_dim, self.delta, len(self.points))
        return head + np.ascontiguousarray(self.points, dtype="<f8").tobytes()

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def from_bytes(cls, blob: bytes) -> "PointCloud":
        if blob[:4] != _MAGIC:
            raise ConfigurationError("not a point-cloud file (bad magic)")
        version, dim, delta, count = struct.unpack("<IId Q", blob[4 : 4 + 24])
        if version != _VERSION:
            raise ConfigurationError(f"unsupported point-cloud version {version}")
        coords = np.frombuffer(blob[4 + 24 :], dtype="<f8", count=count * dim)
        pts = coords.copy() if dim == 1 else coords.reshape(-1, 2).copy()
        return cls(pts, delta, dim)

    @classmethod
    def load(cls, path) -> "PointCloud":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())

    def to_csv(self) -> str:
        buf = io.StringIO()
        if self.ambient_dim == 1:
            buf.write("x\n")
            for x in self.points:
                buf.write(f"{x!r}\n")
        else:
            buf.write("x,y\n")
            for x, y in self.points:
                buf.write(f"{x!r},{y!r}\n")
        return buf.getvalue()


# ---------------------------------------------------------------------------
# geometry helpers


def _intersects_window(dim: int, region: Region, window: Region | None) -> bool:
    if window is None:
        return True
    if dim == 1:
        return region[1] >= window[0] and region[0] <= window[1]
    return region.intersects(window)


def _region_diam(dim: int, region: Region) -> float:
    if dim == 1:
        return region[1] - region[0]
    return 2.0 * region.radius


def _grid_net_1d(positions: np.ndarray, step: float) -> np.ndarray:
    """First position per step-cell, deterministic in the walk order."""
    if len(positions) == 0:
        return positions
    cells = np.floor(positions / step).astype(np.int64)
    _, first = np.unique(cells, return_index=True)
    return positions[np.sort(first)]


# ---------------------------------------------------------------------------
# fast path: purely similarity families on the line


def _similarity_arrays(spec: CifsSpec):
    ratios = np.array([m.ratio for _, m in spec.explicit], dtype=float)
    offsets = np.array([m.offset for _, m in spec.explicit], dtype=float)
    return ratios, offsets


def _first_below(value_fn, lo: int, threshold: float) -> int:
    """Smallest index >= lo whose (decreasing) value drops below threshold."""
    if value_fn(lo) < threshold:
        return lo
    i = lo
    step = 1
    while value_fn(i) >= threshold:
        i += step
        step *= 2
    a = max(lo, i - step // 2 + 1)
    b = i
    while a < b:
        mid = (a + b) // 2
        if value_fn(mid) < threshold:
            b = mid
        else:
            a = mid + 1
    return a


def _tail_net_indices(tail: SimilarityTail, node_r: float, node_o: float, step: float,
                      i_from: int, i_stop: int) -> np.ndarray:
    """Indices of one representative per step-cell on [i_from, i_stop).

    While consecutive anchor positions are more than step apart every
    index is kept; past that the walk jumps straight to the first index
    entering each occupied cell, so the cost is the number of kept
    representatives rather than the number of tail indices.
    """
    if i_stop <= i_from:
        return np.empty(0, dtype=np.int64)
    offs = tail.offsets

    def spacing(i: int) -> float:
        return node_r * (offs.value(i) - offs.value(i + 1))

    if spacing(i_from) < step:
        i_dense = i_from
    else:
        i_dense = min(_first_below(spacing, i_from, step), i_stop)
    sparse = np.arange(i_from, i_dense, dtype=np.int64)
    if i_dense >= i_stop:
        return sparse
    top = node_o + node_r * offs.value(i_dense)
    k_hi = int(np.floor(top / step))
    k_lo = int(np.floor(node_o / step))
    if k_hi <= k_lo:
        return np.concatenate([sparse, np.array([i_dense], dtype=np.int64)])
    cell_tops = (np.arange(k_hi, k_lo, -1, dtype=float) + 1.0) * step
    thresholds = (cell_tops - node_o) / node_r
    dense = offs.first_indices_below(thresholds)
    dense = np.unique(np.clip(dense, i_dense, i_stop - 1))
    return np.concatenate([sparse, dense])


def _build_similarity_1d(spec: CifsSpec, delta, window, cap, fixed_points_only):
    d0, d1 = spec.domain
    dom_w = d1 - d0
    anchor = float(spec.anchor)
    exp_r, exp_o = _similarity_arrays(spec)
    tail = spec.tail
    step = delta / 2.0

    chunks: list[np.ndarray] = []
    expanded: list[tuple[float, float]] = []
    total = 0

    def push_points(arr: np.ndarray):
        nonlocal total
        if len(arr):
            total += len(arr)
            if total > cap:
                raise CloudSizeError(total, cap)
            chunks.append(arr)

    def window_mask(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        if window is None:
            return np.ones(len(lo), dtype=bool)
        return (hi >= window[0]) & (lo <= window[1])

    queue = deque([(1.0, 0.0)])
    while queue:
        node_r, node_o = queue.popleft()

        # explicit children
        if len(exp_r):
            ch_r = node_r * exp_r
            ch_o = node_o + node_r * exp_o
            ok = window_mask(ch_o + ch_r * d0, ch_o + ch_r * d1)
            big = ok & (ch_r * dom_w >= delta) & ~np.bool_(fixed_points_only)
            for r, o in zip(ch_r[big], ch_o[big]):
                queue.append((float(r), float(o)))
                expanded.append((float(o + r * d0), float(o + r * d1)))
            small = ok & ~big
            push_points(ch_o[small] + ch_r[small] * anchor)

        if tail is not None:
            i0 = tail.start
            i_stop = _first_below(
                lambda j: node_r * (tail.offsets.value(j) + tail.ratios.value(j)), i0, step
            )
            if fixed_points_only:
                i_exp = i0
            else:
                i_exp = _first_below(lambda j: node_r * tail.ratios.value(j) * dom_w, i0, delta)
                i_exp = min(max(i_exp, i0), i_stop)
                if i_exp > i0:
                    t_r, t_o = tail.arrays(i0, i_exp)
                    ch_r = node_r * t_r
                    ch_o = node_o + node_r * t_o
                    ok = window_mask(ch_o + ch_r * d0, ch_o + ch_r * d1)
                    for r, o in zip(ch_r[ok], ch_o[ok]):
                        queue.append((float(r), float(o)))
                        expanded.append((float(o + r * d0), float(o + r * d1)))
            # one representative per delta/2 cell for the sub-delta tail
            idx = _tail_net_indices(tail, node_r, node_o, step, i_exp, i_stop)
            if len(idx):
                t_r, t_o = tail.arrays_at(idx)
                ch_r = node_r * t_r
                ch_o = node_o + node_r * t_o
                ok = window_mask(ch_o + ch_r * d0, ch_o + ch_r * d1)
                push_points(_grid_net_1d(ch_o[ok] + ch_r[ok] * anchor, step))
            # single representative for the remaining tail envelope
            accum = node_o + node_r * tail.accumulation_point()
            env_hi = node_o + node_r * (tail.offsets.value(i_stop) + tail.ratios.value(i_stop))
            lo_e, hi_e = min(accum, env_hi), max(accum, env_hi)
            if window is None or (hi_e >= window[0] and lo_e <= window[1]):
                push_points(np.array([accum]))

        if fixed_points_only:
            break

    pts = np.unique(np.concatenate(chunks)) if chunks else np.array([], dtype=float)
    return pts, expanded


# ---------------------------------------------------------------------------
# generic path: arbitrary Moebius branches, 1-D or 2-D


def _reach(dim: int, region: Region, accum) -> float:
    """Largest distance from the accumulation point to the region."""
    if dim == 1:
        return max(abs(region[0] - accum), abs(region[1] - accum))
    return abs(region.center - accum) + region.radius


def _deriv_sup(dim: int, m: Mobius, domain: Region) -> float:
    if dim == 1:
        return deriv_range_interval(m, domain)[1]
    return deriv_range_disc(m, domain)[1]


def _generation_mobius(tail, g: int):
    direct = getattr(tail, "generation_mobius", None)
    if direct is not None:
        return direct(g)
    return [(lab, m.mobius()) for lab, m in tail.generation_maps(g)]


def _build_generic(spec: CifsSpec, delta, window, cap, fixed_points_only):
    dim = spec.ambient_dim
    anchor = spec.anchor
    tail = spec.tail
    dom_diam = spec.domain_diameter()
    step = delta / 2.0

    points: list = []
    expanded: list[Region] = []

    def push(p):
        points.append(p)
        if len(points) > cap:
            raise CloudSizeError(len(points), cap)

    def child_region(child: Mobius) -> Region:
        if dim == 1:
            return interval_image(child, spec.domain)
        return disc_image(child, spec.domain)

    def cell_of(pos, width: float):
        if dim == 1:
            return (int(np.floor(pos / width)),)
        return (int(np.floor(pos.real / width)), int(np.floor(pos.imag / width)))

    def point_in_window(p, slack: float) -> bool:
        if window is None:
            return True
        if dim == 1:
            return window[0] - slack <= p <= window[1] + slack
        return abs(p - window.center) <= window.radius + slack

    queue = deque([Mobius(1, 0, 0, 1)])
    while queue:
        node = queue.popleft()

        for _, branch in spec.explicit:
            child = node.compose(branch.mobius())
            region = child_region(child)
            if not _intersects_window(dim, region, window):
                continue
            if not fixed_points_only and _region_diam(dim, region) >= delta:
                queue.append(child)
                expanded.append(region)
            else:
                push(child(anchor))

        if tail is not None:
            node_sup = _deriv_sup(dim, node, spec.domain)
            base_step = step / node_sup
            accum = tail.accumulation_point()
            kept_cells: set = set()
            g = 0

            # expansion sweep: generation child sizes shrink, so stop
            # once even the largest child stays below the resolution
            while True:
                mats = _generation_mobius(tail, g)
                size = max(_deriv_sup(dim, mat, spec.domain) for _, mat in mats) * dom_diam
                if size * node_sup < delta:
                    break
                for _, mat in mats:
                    child = node.compose(mat)
                    region = child_region(child)
                    if not _intersects_window(dim, region, window):
                        continue
                    if not fixed_points_only and _region_diam(dim, region) >= delta:
                        queue.append(child)
                        expanded.append(region)
                    else:
                        pos = mat(anchor)
                        cell = cell_of(pos, base_step)
                        if cell not in kept_cells:
                            kept_cells.add(cell)
                            push(child(anchor))
                g += 1

            # netting sweep: one representative per base-step cell, with
            # jumps straight to the generation entering the next cell
            while True:
                env = tail.envelope_at(g)
                reach_env = _reach(dim, env, accum)
                if reach_env < base_step:
                    break
                min_reach = math.inf
                for _, mat in _generation_mobius(tail, g):
                    pos = mat(anchor)
                    reach = abs(pos - accum)
                    min_reach = min(min_reach, reach)
                    cell = cell_of(pos, base_step)
                    if cell in kept_cells:
                        continue
                    kept_cells.add(cell)
                    p_amb = node(pos)
                    if point_in_window(p_amb, delta):
                        push(p_amb)
                target = math.floor(min_reach / base_step) * base_step
                if target <= 0.0 or not math.isfinite(target):
                    g += 1
                else:
                    g = max(g + 1, tail.generation_reaching(target))

            p_acc = node(accum)
            if point_in_window(p_acc, delta):
                push(p_acc)

        if fixed_points_only:
            break

    if dim == 1:
        pts = np.unique(np.array(points, dtype=float))
    else:
        arr = np.array([(p.real, p.imag) for p in points], dtype=float)
        pts = np.unique(arr, axis=0) if len(arr) else arr.reshape(0, 2)
    return pts, expanded


# ---------------------------------------------------------------------------
# public builders


def _check_complete(dim: int, pts: np.ndarray, expanded) -> bool:
    if dim == 1:
        for lo, hi in expanded:
            i = np.searchsorted(pts, lo, side="left")
            if i >= len(pts) or pts[i] > hi:
                return False
        return True
    for disc in expanded:
        d = np.hypot(pts[:, 0] - disc.center.real, pts[:, 1] - disc.center.imag)
        if not np.any(d <= disc.radius + 1e-12):
            return False
    return True


def _is_similarity_spec(spec: CifsSpec) -> bool:
    if spec.ambient_dim != 1:
        return False
    if not all(isinstance(m, Similarity) for _, m in spec.explicit):
        return False
    return spec.tail is None or isinstance(spec.tail, SimilarityTail)


def build_limit_cloud(spec: CifsSpec, delta: float, window: Region | None = None,
                      cap: int = DEFAULT_CAP) -> PointCloud:
    """Breadth-first finite-resolution approximation of the limit set."""
    if delta <= 0:
        raise ConfigurationError(f"resolution delta must be positive, got {delta}")
    if delta >= spec.domain_diameter():
        raise ConfigurationError("resolution delta must be below the seed-domain size")
    if _is_similarity_spec(spec):
        pts, expanded = _build_similarity_1d(spec, delta, window, cap, False)
    else:
        pts, expanded = _build_generic(spec, delta, window, cap, False)
    complete = _check_complete(spec.ambient_dim, pts, expanded)
    return PointCloud(pts, delta, spec.ambient_dim, "limit_set", spec.digest(), complete)


def build_fixed_point_cloud(spec: CifsSpec, delta: float, cap: int = DEFAULT_CAP) -> PointCloud:
    """One anchor image per first-level branch, tail truncated as usual."""
    if delta <= 0:
        raise ConfigurationError(f"resolution delta must be positive, got {delta}")
    if _is_similarity_spec(spec):
        pts, _ = _build_similarity_1d(spec, delta, None, cap, True)
    else:
        pts, _ = _build_generic(spec, delta, None, cap, True)
    return PointCloud(pts, delta, spec.ambient_dim, "fixed_points", spec.digest(), True)
