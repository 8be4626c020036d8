"""Path distances between scaled lattice paths and the target arc.

Two metrics: the Hausdorff distance between point sets, and the
sup-distance between arc-length profiles in the tangent-slope
coordinate.  The profile distance is evaluated exactly on the closure
of the jump set, since the path profile is a step function and the
curve profile is continuous and monotone between knots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import curve as _curve
from .curve import ConvexCurve
from .errors import EmptyPath
from .sampler import PolygonalLine

_POINT_CHUNK = 1024


@dataclass(frozen=True)
class PathDistanceReport:
    d_hausdorff: float
    d_length: float
    argmax_t: float


def _directed_hausdorff(points: np.ndarray, poly: np.ndarray) -> float:
    """max over points of the distance to the polyline poly."""
    if poly.shape[0] == 1:
        d = np.hypot(points[:, 0] - poly[0, 0], points[:, 1] - poly[0, 1])
        return float(d.max())
    a = poly[:-1]
    v = poly[1:] - a
    vv = np.maximum(np.einsum("ij,ij->i", v, v), 1e-300)
    best = np.full(points.shape[0], math.inf)
    for start in range(0, points.shape[0], _POINT_CHUNK):
        p = points[start:start + _POINT_CHUNK]
        w = p[:, None, :] - a[None, :, :]
        t = np.clip(np.einsum("pij,ij->pi", w, v) / vv, 0.0, 1.0)
        d2 = np.einsum("pij,pij->pi", w - t[:, :, None] * v[None, :, :],
                       w - t[:, :, None] * v[None, :, :])
        best[start:start + _POINT_CHUNK] = np.sqrt(d2.min(axis=1))
    return float(best.max())


def hausdorff(a, b) -> float:
    """Symmetric Hausdorff distance between two polylines.

    Vertices of each path are tested against the segments of the other,
    so the result is exact whenever the directed maxima sit at vertices;
    densify beforehand when mid-segment excursions matter.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0 or b.size == 0:
        raise EmptyPath("hausdorff needs two non-empty paths")
    a = np.atleast_2d(a)
    b = np.atleast_2d(b)
    return max(_directed_hausdorff(a, b), _directed_hausdorff(b, a))


def _line_profile_knots(line: PolygonalLine):
    """Sorted edge slopes with cumulative lengths (before/after jumps)."""
    taus = np.array([x2 / x1 if x1 else math.inf for (x1, x2), _ in line.edges])
    lens = np.array([math.hypot(x1, x2) * nu for (x1, x2), nu in line.edges])
    order = np.argsort(taus)
    taus = taus[order]
    cum_after = np.cumsum(lens[order])
    cum_before = cum_after - lens[order]
    return taus, cum_before, cum_after


def length_distance(line: PolygonalLine, scale: float, curve: ConvexCurve,
                    t_grid=None) -> float:
    return distance_report(line, scale, curve, t_grid).d_length


def profile_distance(line_a: PolygonalLine, scale_a: float,
                     line_b: PolygonalLine, scale_b: float) -> float:
    """Sup-distance between two scaled path length profiles.

    Both profiles are step functions, so the sup sits on the union of
    their jump slopes, evaluated from both sides.
    """
    knots = []
    profiles = []
    for line in (line_a, line_b):
        taus, cum_before, cum_after = _line_profile_knots(line)
        knots.append(taus)
        profiles.append((taus, cum_before, cum_after))
    all_taus = np.unique(np.concatenate(knots)) if (knots[0].size or knots[1].size) \
        else np.array([0.0])

    def eval_sides(profile, scale):
        taus, cum_before, cum_after = profile
        if taus.size == 0:
            z = np.zeros_like(all_taus)
            return z, z
        idx = np.searchsorted(taus, all_taus, side="right")
        after = np.where(idx > 0, np.concatenate([[0.0], cum_after])[idx], 0.0)
        idx_b = np.searchsorted(taus, all_taus, side="left")
        before = np.where(idx_b > 0, np.concatenate([[0.0], cum_after])[idx_b], 0.0)
        return scale * before, scale * after

    a_before, a_after = eval_sides(profiles[0], scale_a)
    b_before, b_after = eval_sides(profiles[1], scale_b)
    return float(np.maximum(np.abs(a_after - b_after),
                            np.abs(a_before - b_before)).max())


def distance_report(line: PolygonalLine, scale: float, curve: ConvexCurve,
                    t_grid=None, curve_points: int = 2048) -> PathDistanceReport:
    """Both path distances between the scaled line and the target arc.

    The profile distance is the sup over slopes of
    |scale * path_profile(t) - curve_profile(t)|, attained on the union
    of the path's jump slopes (evaluated on both sides), the curve's
    slope range endpoints and a fixed refinement grid.
    """
    if scale < 0.0:
        raise ValueError("scale must be nonnegative")
    curve_total = _curve.total_length(curve)

    taus, cum_before, cum_after = _line_profile_knots(line)
    finite = np.isfinite(taus)
    cand_t: list[float] = []
    cand_gap: list[float] = []

    if taus.size:
        ell = _curve.length_profile(curve, np.where(finite, taus, 1e300))
        ell[~finite] = curve_total
        gap = np.maximum(np.abs(scale * cum_after - ell),
                         np.abs(scale * cum_before - ell))
        cand_t.extend(taus.tolist())
        cand_gap.extend(gap.tolist())
        line_total = float(cum_after[-1])
    else:
        line_total = 0.0

    refine = np.concatenate([_curve.slope_grid(curve, 256),
                             [curve.t0, curve.t1 if math.isfinite(curve.t1) else 1e300]])
    from .sampler import length_profile as line_profile_at

    if taus.size:
        lp = line_profile_at(line, np.where(np.isfinite(refine), refine, 1e300))
    else:
        lp = np.zeros_like(refine)
    gap_r = np.abs(scale * lp - _curve.length_profile(curve, refine))
    cand_t.extend(refine.tolist())
    cand_gap.extend(gap_r.tolist())

    # slope +inf endpoint: total lengths
    cand_t.append(math.inf)
    cand_gap.append(abs(scale * line_total - curve_total))

    if t_grid is not None:
        extra = np.asarray(t_grid, dtype=float)
        lp = line_profile_at(line, np.where(np.isfinite(extra), extra, 1e300)) \
            if taus.size else np.zeros_like(extra)
        cand_t.extend(extra.tolist())
        cand_gap.extend(np.abs(scale * lp - _curve.length_profile(curve, extra)).tolist())

    gaps = np.asarray(cand_gap)
    i = int(np.argmax(gaps))
    d_len = float(gaps[i])
    argmax_t = float(cand_t[i])

    d_h = hausdorff(line.vertices.astype(float) * scale if taus.size
                    else np.zeros((1, 2)),
                    _curve.discretize(curve, curve_points))
    return PathDistanceReport(d_hausdorff=d_h, d_length=d_len, argmax_t=argmax_t)
