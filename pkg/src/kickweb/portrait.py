"""Stroboscopic phase portraits: point clouds, occupancy grids and zoom windows."""
from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .webmap import ESCAPE_X, MapParams, step_arrays

DEFAULT_VIEWPORT = (-30.0, 30.0, -30.0, 30.0)
U32_MAX = np.iinfo(np.uint32).max

# orbits per work unit; fixed so that results do not depend on the thread count
CHUNK = 512


@dataclass(frozen=True)
class GridInitials:
    """``nx`` by ``np_`` lattice of initial conditions, optionally plus the origin."""

    x_range: tuple[float, float]
    p_range: tuple[float, float]
    nx: int = 21
    np_: int = 21
    include_origin: bool = True

    def states(self) -> np.ndarray:
        xs = np.linspace(*self.x_range, self.nx)
        ps = np.linspace(*self.p_range, self.np_)
        X, P = np.meshgrid(xs, ps)
        pts = np.column_stack([X.ravel(), P.ravel()])
        if self.include_origin:
            pts = np.vstack([pts, [0.0, 0.0]])
        return pts

    def describe(self) -> dict:
        return {"kind": "grid", "x_range": list(self.x_range), "p_range": list(self.p_range),
                "nx": self.nx, "np": self.np_, "include_origin": self.include_origin}


@dataclass(frozen=True)
class RandomInitials:
    """``count`` initial conditions uniform in ``box = (x_min, x_max, p_min, p_max)``."""

    count: int
    box: tuple[float, float, float, float] = (-0.5, 0.5, -0.5, 0.5)
    seed: int = 0

    def states(self) -> np.ndarray:
        rng = np.random.default_rng(self.seed)
        x = rng.uniform(self.box[0], self.box[1], self.count)
        p = rng.uniform(self.box[2], self.box[3], self.count)
        return np.column_stack([x, p])

    def describe(self) -> dict:
        return {"kind": "random", "count": self.count, "box": list(self.box), "seed": self.seed}


Initials = Union[GridInitials, RandomInitials, np.ndarray]


def _check_viewport(vp):
    x0, x1, p0, p1 = vp
    if not (x1 > x0 and p1 > p0):
        raise ValueError(f"degenerate viewport {vp!r}")


@dataclass(frozen=True)
class PortraitSpec:
    params: MapParams
    initials: Initials | None = None
    n_kicks: int = 15_000
    viewport: tuple[float, float, float, float] = DEFAULT_VIEWPORT
    mode: str = "points"  # "points" | "grid"
    bins: tuple[int, int] = (600, 600)  # (nx, np)

    def __post_init__(self):
        _check_viewport(self.viewport)
        if self.mode not in ("points", "grid"):
            raise ValueError(f"mode must be 'points' or 'grid', got {self.mode!r}")
        if self.mode == "grid" and min(self.bins) < 2:
            raise ValueError("grid mode needs at least 2 bins per axis")
        if self.n_kicks < 0:
            raise ValueError("n_kicks must be >= 0")

    def initial_states(self) -> np.ndarray:
        ini = self.initials
        if ini is None:
            vp = self.viewport
            ini = GridInitials((vp[0], vp[1]), (vp[2], vp[3]))
        if isinstance(ini, (GridInitials, RandomInitials)):
            return ini.states()
        return np.asarray(ini, dtype=float).reshape(-1, 2)

    def describe_initials(self) -> dict:
        ini = self.initials
        if ini is None:
            vp = self.viewport
            ini = GridInitials((vp[0], vp[1]), (vp[2], vp[3]))
        if isinstance(ini, (GridInitials, RandomInitials)):
            return ini.describe()
        return {"kind": "explicit", "count": int(np.asarray(ini).size // 2)}

    def metadata(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "initials": self.describe_initials(),
            "n_kicks": self.n_kicks,
            "viewport": list(self.viewport),
            "mode": self.mode,
            "bins": list(self.bins),
        }


@dataclass
class OccupancyGrid:
    """Visit counts; ``counts[j, i]`` is row ``j`` in p, column ``i`` in x."""

    viewport: tuple[float, float, float, float]
    counts: np.ndarray  # uint32, shape (np, nx)
    total: int
    out_of_view: int
    escaped_tail: int
    escaped_orbits: int
    metadata: dict = field(default_factory=dict)

    @property
    def bins(self) -> tuple[int, int]:
        return self.counts.shape[1], self.counts.shape[0]

    def digest(self) -> str:
        return hashlib.sha256(np.ascontiguousarray(self.counts, dtype="<u4").tobytes()).hexdigest()


@dataclass
class PointCloud:
    points: np.ndarray  # (n, 2), kick-major within each chunk of orbits
    total: int
    escaped_tail: int
    escaped_orbits: int
    metadata: dict = field(default_factory=dict)


def bin_points(x, p, viewport, bins) -> tuple[np.ndarray, int]:
    """Histogram points into half-open bins; returns ``(counts int64, n_outside)``."""
    x0, x1, p0, p1 = viewport
    nx, np_ = bins
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        fx = (x - x0) * (nx / (x1 - x0))
        fp = (p - p0) * (np_ / (p1 - p0))
        inside = (fx >= 0) & (fx < nx) & (fp >= 0) & (fp < np_)
    ix = fx[inside].astype(np.int64)
    ip = fp[inside].astype(np.int64)
    counts = np.bincount(ip * nx + ix, minlength=nx * np_).reshape(np_, nx)
    return counts, int(x.size - inside.sum())


def _run_chunk(x, p, params, n_kicks, keep_points, viewport, bins):
    x = x.copy()
    p = p.copy()
    alive = np.arange(x.size)
    esc_tail = 0
    esc_orbits = 0
    pts = [] if keep_points else None
    counts = None if keep_points else np.zeros((bins[1], bins[0]), dtype=np.int64)
    outside = 0
    for k in range(1, n_kicks + 1):
        if not alive.size:
            break
        xs, ps = x[alive], p[alive]
        ok = (np.abs(xs) <= ESCAPE_X) & np.isfinite(ps)
        if not ok.all():
            gone = int((~ok).sum())
            esc_orbits += gone
            esc_tail += gone * (n_kicks - k + 1)
            alive = alive[ok]
            xs, ps = xs[ok], ps[ok]
        with np.errstate(over="ignore", invalid="ignore"):
            xs, ps = step_arrays(xs, ps, params)
        x[alive], p[alive] = xs, ps
        if keep_points:
            pts.append(np.column_stack([xs, ps]))
        else:
            c, out = bin_points(xs, ps, viewport, bins)
            counts += c
            outside += out
    if keep_points:
        pts = np.concatenate(pts) if pts else np.empty((0, 2))
    return pts, counts, outside, esc_tail, esc_orbits


def _simulate(spec: PortraitSpec, keep_points: bool, viewport, bins, threads: int):
    init = spec.initial_states()
    chunks = [init[i:i + CHUNK] for i in range(0, len(init), CHUNK)]
    work = lambda c: _run_chunk(c[:, 0], c[:, 1], spec.params, spec.n_kicks,  # noqa: E731
                                keep_points, viewport, bins)
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(work, chunks))
    else:
        results = [work(c) for c in chunks]
    return len(init) * spec.n_kicks, results


def render_portrait(spec: PortraitSpec, threads: int = 1) -> PointCloud | OccupancyGrid:
    """Iterate every initial condition for ``spec.n_kicks`` kicks.

    Initial conditions themselves are not recorded, only their images.
    Escaped orbits (``|x|`` beyond the escape threshold) stop contributing;
    the iterates they would have produced are counted in ``escaped_tail``.
    Chunks of orbits are merged in a fixed order, so the output does not
    depend on ``threads``.
    """
    if spec.mode == "points":
        total, results = _simulate(spec, True, spec.viewport, spec.bins, threads)
        pts = [r[0] for r in results]
        points = np.concatenate(pts) if pts else np.empty((0, 2))
        return PointCloud(points, total, sum(r[3] for r in results),
                          sum(r[4] for r in results), spec.metadata())
    return _grid(spec, spec.viewport, spec.bins, threads)


def _grid(spec, viewport, bins, threads) -> OccupancyGrid:
    total, results = _simulate(spec, False, viewport, bins, threads)
    acc = np.zeros((bins[1], bins[0]), dtype=np.int64)
    for r in results:
        acc += r[1]
    counts = np.minimum(acc, U32_MAX).astype(np.uint32)
    meta = spec.metadata()
    meta.update(viewport=list(viewport), bins=list(bins), mode="grid")
    return OccupancyGrid(tuple(viewport), counts, total, sum(r[2] for r in results),
                         sum(r[3] for r in results), sum(r[4] for r in results), meta)


def grid_from_cloud(cloud: PointCloud, viewport, bins) -> np.ndarray:
    counts, _ = bin_points(cloud.points[:, 0], cloud.points[:, 1], viewport, bins)
    return np.minimum(counts, U32_MAX).astype(np.uint32)


def magnify(spec: PortraitSpec, window, refine: int = 1, threads: int = 1) -> OccupancyGrid:
    """Regenerate ``spec`` keeping only iterates inside ``window``.

    The bin width is the parent grid's bin width divided by ``refine``.
    """
    _check_viewport(window)
    vx0, vx1, vp0, vp1 = spec.viewport
    wx0, wx1, wp0, wp1 = window
    if not (vx0 <= wx0 and wx1 <= vx1 and vp0 <= wp0 and wp1 <= vp1):
        raise ValueError("window must lie inside the viewport")
    if refine < 1:
        raise ValueError("refine must be >= 1")
    nx = max(2, int(round((wx1 - wx0) / (vx1 - vx0) * spec.bins[0] * refine)))
    np_ = max(2, int(round((wp1 - wp0) / (vp1 - vp0) * spec.bins[1] * refine)))
    grid = _grid(spec, tuple(window), (nx, np_), threads)
    grid.metadata.update(window=list(window), refine=refine, parent_viewport=list(spec.viewport))
    return grid


# ---------------------------------------------------------------------------
# serialisation


def write_cloud_csv(path, cloud: PointCloud, metadata: dict | None = None) -> None:
    """CSV with a ``# {json metadata}`` comment line, an ``x,p`` header, one iterate per row."""
    meta = dict(cloud.metadata)
    meta.update(metadata or {})
    meta.update(total=cloud.total, escaped_tail=cloud.escaped_tail,
                escaped_orbits=cloud.escaped_orbits, n_points=len(cloud.points))
    with open(path, "w", newline="\n") as fh:
        fh.write("# " + json.dumps(meta, sort_keys=True) + "\n")
        fh.write("x,p\n")
        np.savetxt(fh, cloud.points, fmt="%.17g", delimiter=",")


def read_cloud_csv(path) -> tuple[np.ndarray, dict]:
    with open(path) as fh:
        meta = json.loads(fh.readline()[2:])
        header = fh.readline().strip()
        if header != "x,p":
            raise ValueError(f"unexpected header {header!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return data.reshape(-1, 2), meta


def _grid_header(grid: OccupancyGrid, metadata: dict | None) -> dict:
    meta = dict(grid.metadata)
    meta.update(metadata or {})
    nx, np_ = grid.bins
    meta.update(viewport=list(grid.viewport), nx=nx, np=np_, total=grid.total,
                out_of_view=grid.out_of_view, escaped_tail=grid.escaped_tail,
                escaped_orbits=grid.escaped_orbits, dtype="<u4", order="row-major (p rows, x columns)")
    return meta


def write_grid(path, grid: OccupancyGrid, metadata: dict | None = None, binary: bool = True) -> None:
    """Write a grid as one JSON header line followed by counts.

    Binary: little-endian uint32, row-major, rows indexed by p.  Text: one
    whitespace-separated row of counts per line.
    """
    header = _grid_header(grid, metadata)
    header["encoding"] = "binary" if binary else "text"
    line = (json.dumps(header, sort_keys=True) + "\n").encode()
    with open(path, "wb") as fh:
        fh.write(line)
        if binary:
            fh.write(np.ascontiguousarray(grid.counts, dtype="<u4").tobytes())
        else:
            for row in grid.counts:
                fh.write((" ".join(map(str, row.tolist())) + "\n").encode())


def read_grid(path) -> tuple[np.ndarray, dict]:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline())
        rest = fh.read()
    shape = (header["np"], header["nx"])
    if header["encoding"] == "binary":
        counts = np.frombuffer(rest, dtype="<u4").reshape(shape).astype(np.uint32)
    else:
        counts = np.loadtxt(rest.decode().splitlines(), dtype=np.uint32, ndmin=2).reshape(shape)
    return counts, header
