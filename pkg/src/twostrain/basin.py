"""Basins of attraction on a three-dimensional slice of state space.

The workflow has three stages. First a box of grid nodes on an affine
slice (by default the invariant hyperplane with the second strain absent,
coordinates (P, S, V)) is classified by integrating each node to one of a
given set of attractors. Second, the basin boundary is located precisely
by bisecting straight segments whose endpoints reach different
attractors. Segments can be laid out as a fixed-direction lattice
(``axis_segments``), or harvested from the classified grid as the edges
joining nodes with differing labels (``boundary_edge_segments``); the
edge strategy concentrates all bisection work on cells the boundary
actually crosses, which matters when one basin is a small pocket of the
box. Third, the point cloud is interpolated with a polyharmonic radial
basis surface so the boundary can be evaluated, meshed, and probed
anywhere.
"""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

import numpy as np

from .integrate import IntegrationConfig, UNDECIDED, run_to_attractor
from .model import ModelParameters

__all__ = [
    "PhaseSlice",
    "DEFAULT_SLICE",
    "BasinGrid",
    "SeparatrixSample",
    "KernelConfig",
    "SeparatrixModel",
    "DegenerateGeometryError",
    "FitResidualError",
    "classify_grid",
    "axis_segments",
    "boundary_edge_segments",
    "separatrix_points",
    "fit_surface",
    "probe_surface_sides",
    "write_grid_csv",
    "write_points_csv",
    "write_surface_obj",
    "write_surface_lattice_csv",
]


class DegenerateGeometryError(ValueError):
    """Sample sites are collinear or duplicated; the fit is underdetermined."""


class FitResidualError(RuntimeError):
    """The interpolant failed to reproduce its own samples."""


@dataclass(frozen=True)
class PhaseSlice:
    """An affine three-dimensional slice of the four-dimensional state space.

    Points on the slice are ``origin + u1*axes[0] + u2*axes[1] + u3*axes[2]``.
    """

    origin: np.ndarray
    axes: np.ndarray
    names: tuple[str, str, str]

    def embed(self, u: Sequence[float]) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.asarray(self.origin, dtype=float) + u @ np.asarray(self.axes, dtype=float)


DEFAULT_SLICE = PhaseSlice(
    origin=np.zeros(4),
    axes=np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]]),
    names=("P", "S", "V"),
)


def _normalize_attractors(attractors: Iterable) -> list[tuple[str, np.ndarray]]:
    out = []
    for item in attractors:
        if hasattr(item, "id") and hasattr(item, "coordinates"):
            out.append((str(item.id), np.asarray(item.coordinates, dtype=float)))
        else:
            name, coords = item
            out.append((str(name), np.asarray(coords, dtype=float)))
    if not out:
        raise ValueError("need at least one attractor")
    return out


def _check_box(slice_: PhaseSlice, bounds: Sequence[tuple[float, float]]) -> None:
    bounds = list(bounds)
    if len(bounds) != 3:
        raise ValueError("bounds must give (lo, hi) for each of the three slice axes")
    for lo, hi in bounds:
        if not lo < hi:
            raise ValueError(f"degenerate bounds ({lo}, {hi})")
    # The affine image of a box is spanned by its corners.
    for corner in np.ndindex(2, 2, 2):
        u = [bounds[k][corner[k]] for k in range(3)]
        x = slice_.embed(u)
        if np.any(x < 0.0):
            raise ValueError(f"slice box corner {u} maps outside the nonnegative orthant: {x}")


@dataclass(frozen=True)
class BasinGrid:
    """Labelled grid nodes on a slice box.

    ``labels[i, j, k]`` indexes ``attractor_ids`` (-1 for undecided) at
    node ``(axes_1d[0][i], axes_1d[1][j], axes_1d[2][k])``.
    """

    slice: PhaseSlice
    bounds: tuple[tuple[float, float], ...]
    axes_1d: tuple[np.ndarray, np.ndarray, np.ndarray]
    labels: np.ndarray
    attractor_ids: tuple[str, ...]

    @property
    def undecided_fraction(self) -> float:
        return float(np.mean(self.labels < 0))

    def label_name(self, index: int) -> str:
        return UNDECIDED if index < 0 else self.attractor_ids[index]


def classify_grid(
    params: ModelParameters,
    bounds: Sequence[tuple[float, float]],
    resolution: int | tuple[int, int, int],
    attractors: Iterable,
    config: IntegrationConfig | None = None,
    match_radius: float = 0.05,
    slice_: PhaseSlice = DEFAULT_SLICE,
    max_undecided: float = 0.05,
) -> BasinGrid:
    """Integrate every grid node to an attractor (or undecided).

    Emits a warning (never an error) when more than ``max_undecided`` of
    the nodes fail to classify: points exactly on basin boundaries or on
    invariant faces that drain to an unlisted attractor are legitimate.
    """
    targets = _normalize_attractors(attractors)
    _check_box(slice_, bounds)
    if isinstance(resolution, int):
        shape = (resolution, resolution, resolution)
    else:
        shape = tuple(int(n) for n in resolution)
    if len(shape) != 3 or any(n < 2 for n in shape):
        raise ValueError("resolution must be an int >= 2 or three ints >= 2")

    axes_1d = tuple(np.linspace(lo, hi, n) for (lo, hi), n in zip(bounds, shape))
    labels = np.full(shape, -1, dtype=np.int8)
    index_of = {name: i for i, (name, _) in enumerate(targets)}

    for i, u1 in enumerate(axes_1d[0]):
        for j, u2 in enumerate(axes_1d[1]):
            for k, u3 in enumerate(axes_1d[2]):
                x0 = slice_.embed((u1, u2, u3))
                result = run_to_attractor(
                    params, x0, targets, config=config, match_radius=match_radius
                )
                if result.attractor_id is not None:
                    labels[i, j, k] = index_of[result.attractor_id]

    grid = BasinGrid(
        slice=slice_,
        bounds=tuple((float(lo), float(hi)) for lo, hi in bounds),
        axes_1d=axes_1d,
        labels=labels,
        attractor_ids=tuple(name for name, _ in targets),
    )
    if grid.undecided_fraction > max_undecided:
        warnings.warn(
            f"{grid.undecided_fraction:.1%} of grid nodes undecided "
            f"(threshold {max_undecided:.1%})",
            stacklevel=2,
        )
    return grid


def write_grid_csv(grid: BasinGrid, stream: IO[str]) -> None:
    """One row per node: slice coordinates and the attractor label."""
    stream.write(",".join(grid.slice.names) + ",label\n")
    n1, n2, n3 = grid.labels.shape
    for i in range(n1):
        for j in range(n2):
            for k in range(n3):
                name = grid.label_name(int(grid.labels[i, j, k]))
                stream.write(
                    f"{grid.axes_1d[0][i]:.17g},{grid.axes_1d[1][j]:.17g},"
                    f"{grid.axes_1d[2][k]:.17g},{name}\n"
                )


@dataclass(frozen=True)
class SeparatrixSample:
    """Boundary points found by segment bisection.

    ``points`` are slice coordinates; ``side_labels[i]`` gives the
    attractor ids bracketing point ``i`` (segment-start side first) and
    ``segments[i]`` the originating segment endpoints, shape (n, 2, 3).
    ``skipped`` records (segment index, reason) for segments that could
    not be bisected.
    """

    points: np.ndarray
    side_labels: list[tuple[str, str]]
    segments: np.ndarray
    skipped: list[tuple[int, str]]


def axis_segments(
    bounds: Sequence[tuple[float, float]],
    axis: int,
    lattice: int | tuple[int, int],
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Segments parallel to one slice axis over a lattice in the others.

    Because all segments share a direction, each can contribute at most
    one crossing of a boundary that is a graph over the lattice plane, so
    the collected points project one-to-one onto that plane.
    """
    bounds = [(float(lo), float(hi)) for lo, hi in bounds]
    if axis not in (0, 1, 2):
        raise ValueError("axis must be 0, 1 or 2")
    if isinstance(lattice, int):
        counts = (lattice, lattice)
    else:
        counts = tuple(int(n) for n in lattice)
    plane = [k for k in range(3) if k != axis]
    grids = [np.linspace(*bounds[plane[0]], counts[0]), np.linspace(*bounds[plane[1]], counts[1])]
    segments = []
    for g1 in grids[0]:
        for g2 in grids[1]:
            lo_pt = np.zeros(3)
            hi_pt = np.zeros(3)
            lo_pt[plane[0]] = hi_pt[plane[0]] = g1
            lo_pt[plane[1]] = hi_pt[plane[1]] = g2
            lo_pt[axis] = bounds[axis][0]
            hi_pt[axis] = bounds[axis][1]
            segments.append((lo_pt, hi_pt))
    return segments


def boundary_edge_segments(
    grid: BasinGrid, diagonals: bool = False
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Segments joining differently-labelled nodes of boundary cells.

    With ``diagonals=False`` these are exactly the grid edges whose two
    nodes classified to different attractors; each brackets the basin
    boundary within one node spacing, so bisecting them spends no
    integrator time on segments that never leave a single basin. With
    ``diagonals=True`` every decided opposite-label corner pair of each
    grid cell is included (face and body diagonals as well), which
    multiplies the harvest severalfold at the same grid resolution.
    Pairs involving an undecided node are never returned.
    """
    labels = grid.labels
    segments = []
    seen: set[tuple[tuple[int, int, int], tuple[int, int, int]]] = set()

    def node_point(node: tuple[int, int, int]) -> np.ndarray:
        return np.array([grid.axes_1d[d][node[d]] for d in range(3)])

    if not diagonals:
        for axis in range(3):
            lo_sel = [slice(None)] * 3
            hi_sel = [slice(None)] * 3
            lo_sel[axis] = slice(0, -1)
            hi_sel[axis] = slice(1, None)
            la = labels[tuple(lo_sel)]
            lb = labels[tuple(hi_sel)]
            mixed = (la >= 0) & (lb >= 0) & (la != lb)
            for idx in np.argwhere(mixed):
                lo_pt = node_point(tuple(idx))
                hi_pt = lo_pt.copy()
                hi_pt[axis] = grid.axes_1d[axis][idx[axis] + 1]
                segments.append((lo_pt, hi_pt))
        return segments

    corners = list(np.ndindex(2, 2, 2))
    n0, n1, n2 = labels.shape
    for i in range(n0 - 1):
        for j in range(n1 - 1):
            for k in range(n2 - 1):
                nodes = [(i + d0, j + d1, k + d2) for d0, d1, d2 in corners]
                labs = [int(labels[n]) for n in nodes]
                decided = {l for l in labs if l >= 0}
                if len(decided) < 2:
                    continue
                for a in range(8):
                    if labs[a] < 0:
                        continue
                    for b in range(a + 1, 8):
                        if labs[b] < 0 or labs[b] == labs[a]:
                            continue
                        key = (nodes[a], nodes[b])
                        if key in seen:
                            continue
                        seen.add(key)
                        segments.append((node_point(nodes[a]), node_point(nodes[b])))
    return segments


def separatrix_points(
    params: ModelParameters,
    segments: Sequence[tuple[Sequence[float], Sequence[float]]],
    attractors: Iterable,
    bisect_tol: float = 1e-4,
    config: IntegrationConfig | None = None,
    match_radius: float = 0.05,
    slice_: PhaseSlice = DEFAULT_SLICE,
) -> SeparatrixSample:
    """Bisect each segment to a basin-boundary point.

    Segments whose endpoints classify identically, or fail to classify,
    are skipped with a note. The bisection stops once the bracket is
    shorter than ``bisect_tol`` in slice coordinates; the returned point
    is the bracket midpoint.
    """
    targets = _normalize_attractors(attractors)

    def label(u: np.ndarray) -> str | None:
        x0 = slice_.embed(u)
        if np.any(x0 < 0.0):
            raise ValueError(f"segment point {u} maps outside the nonnegative orthant")
        res = run_to_attractor(params, x0, targets, config=config, match_radius=match_radius)
        return res.attractor_id

    points = []
    sides = []
    used = []
    skipped = []
    for idx, (start, end) in enumerate(segments):
        u_lo = np.asarray(start, dtype=float)
        u_hi = np.asarray(end, dtype=float)
        lab_lo = label(u_lo)
        lab_hi = label(u_hi)
        if lab_lo is None or lab_hi is None:
            skipped.append((idx, "undecided endpoint"))
            continue
        if lab_lo == lab_hi:
            skipped.append((idx, f"both endpoints reach {lab_lo}"))
            continue
        length = float(np.linalg.norm(u_hi - u_lo))
        undecided_mid = False
        while length > bisect_tol:
            mid = 0.5 * (u_lo + u_hi)
            lab_mid = label(mid)
            if lab_mid is None:
                undecided_mid = True
                break
            if lab_mid == lab_lo:
                u_lo = mid
            else:
                u_hi = mid
            length *= 0.5
        if undecided_mid:
            skipped.append((idx, "undecided midpoint during bisection"))
            continue
        points.append(0.5 * (u_lo + u_hi))
        sides.append((lab_lo, lab_hi))
        used.append((np.asarray(start, dtype=float), np.asarray(end, dtype=float)))

    pts = np.asarray(points, dtype=float).reshape(len(points), 3)
    segs = np.asarray(used, dtype=float).reshape(len(used), 2, 3)
    return SeparatrixSample(points=pts, side_labels=sides, segments=segs, skipped=skipped)


def write_points_csv(sample: SeparatrixSample, slice_: PhaseSlice, stream: IO[str]) -> None:
    stream.write(",".join(slice_.names) + ",side_lo,side_hi\n")
    for pt, (lo, hi) in zip(sample.points, sample.side_labels):
        stream.write(f"{pt[0]:.17g},{pt[1]:.17g},{pt[2]:.17g},{lo},{hi}\n")


# ----------------------------------------------------------------------
# Surface fitting
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class KernelConfig:
    """Radial kernel choice for the boundary interpolant.

    ``kind`` is one of "thin_plate" (r^2 log r), "cubic" (r^3) or
    "wendland_c2" (compactly supported, needs ``support``). ``min_points``
    is the smallest sample count accepted by the fit.
    """

    kind: str = "thin_plate"
    support: float | None = None
    min_points: int = 10

    def __post_init__(self) -> None:
        if self.kind not in ("thin_plate", "cubic", "wendland_c2"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "wendland_c2" and (self.support is None or self.support <= 0.0):
            raise ValueError("wendland_c2 requires a positive support radius")
        if self.min_points < 3:
            raise ValueError("min_points must be at least 3")


def _kernel_matrix(kind: str, support: float | None, r: np.ndarray) -> np.ndarray:
    if kind == "thin_plate":
        out = np.zeros_like(r)
        mask = r > 0.0
        out[mask] = r[mask] ** 2 * np.log(r[mask])
        return out
    if kind == "cubic":
        return r**3
    # wendland_c2
    q = np.clip(1.0 - r / support, 0.0, None)
    return q**4 * (4.0 * r / support + 1.0)


@dataclass(frozen=True)
class SeparatrixModel:
    """Interpolated basin boundary as a graph over a coordinate plane.

    ``evaluate`` maps plane coordinates to the graph-axis value. Sites
    are stored normalized (centered and scaled) for conditioning; the
    transform is part of the model.
    """

    graph_axis: int
    plane_axes: tuple[int, int]
    names: tuple[str, str, str]
    kernel: KernelConfig
    sites: np.ndarray
    center: np.ndarray
    scale: float
    weights: np.ndarray
    poly: np.ndarray
    points: np.ndarray
    fit_residual: float

    def evaluate(self, plane_coords: Sequence[float] | np.ndarray) -> np.ndarray:
        """Graph-axis values at one or many plane points (shape (..., 2))."""
        uv = np.asarray(plane_coords, dtype=float)
        single = uv.ndim == 1
        uv2 = np.atleast_2d(uv)
        z = (uv2 - self.center) / self.scale
        r = np.sqrt(
            np.maximum(
                ((z[:, None, :] - self.sites[None, :, :]) ** 2).sum(axis=2), 0.0
            )
        )
        phi = _kernel_matrix(self.kernel.kind, self.kernel.support, r)
        vals = phi @ self.weights + self.poly[0] + z @ self.poly[1:]
        return float(vals[0]) if single else vals

    def point_on_surface(self, plane_coords: Sequence[float]) -> np.ndarray:
        """Full slice-coordinate point above the given plane coordinates."""
        out = np.zeros(3)
        out[self.plane_axes[0]] = plane_coords[0]
        out[self.plane_axes[1]] = plane_coords[1]
        out[self.graph_axis] = self.evaluate(plane_coords)
        return out


_AXIS_BY_NAME = {"0": 0, "1": 1, "2": 2}


def _resolve_axis(graph_axis: int | str, names: tuple[str, str, str]) -> int:
    if isinstance(graph_axis, str):
        if graph_axis in names:
            return names.index(graph_axis)
        if graph_axis in _AXIS_BY_NAME:
            return _AXIS_BY_NAME[graph_axis]
        raise ValueError(f"unknown graph axis {graph_axis!r}; slice axes are {names}")
    if graph_axis not in (0, 1, 2):
        raise ValueError("graph_axis must be 0, 1 or 2")
    return graph_axis


def fit_surface(
    points: np.ndarray,
    graph_axis: int | str = 2,
    kernel: KernelConfig | None = None,
    names: tuple[str, str, str] = DEFAULT_SLICE.names,
) -> SeparatrixModel:
    """Interpolate boundary points as a graph over the remaining plane.

    The interpolant is a radial basis expansion augmented with an affine
    polynomial, solved as one symmetric linear system with the standard
    orthogonality side conditions on the radial weights. It reproduces
    the samples exactly (residual enforced below 1e-8) and degrades to
    the pure affine part far from data for the default kernels.

    Raises DegenerateGeometryError for too few, duplicated, or collinear
    sites, and FitResidualError if the solved system fails to reproduce
    the samples.
    """
    kernel = kernel or KernelConfig()
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError("points must have shape (n, 3)")
    axis = _resolve_axis(graph_axis, names)
    plane = tuple(k for k in range(3) if k != axis)

    n = pts.shape[0]
    if n < kernel.min_points:
        raise DegenerateGeometryError(
            f"need at least {kernel.min_points} points, got {n}"
        )

    proj = pts[:, plane]
    vals = pts[:, axis]

    # Duplicate sites make the kernel matrix singular.
    diff = proj[:, None, :] - proj[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    offdiag = dist + np.diag(np.full(n, np.inf))
    if float(offdiag.min()) < 1e-10:
        raise DegenerateGeometryError("duplicate projected sites")

    center = proj.mean(axis=0)
    spread = proj.std(axis=0)
    scale = float(np.max(spread))
    if scale <= 0.0:
        raise DegenerateGeometryError("all sites project to a single point")
    z = (proj - center) / scale

    # Collinear sites cannot pin down the affine part.
    sv = np.linalg.svd(z - z.mean(axis=0), compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        raise DegenerateGeometryError("projected sites are collinear")

    r = np.sqrt(np.maximum(((z[:, None, :] - z[None, :, :]) ** 2).sum(axis=2), 0.0))
    phi = _kernel_matrix(kernel.kind, kernel.support, r)
    P = np.column_stack((np.ones(n), z))
    A = np.zeros((n + 3, n + 3))
    A[:n, :n] = phi
    A[:n, n:] = P
    A[n:, :n] = P.T
    b = np.concatenate((vals, np.zeros(3)))
    try:
        sol = np.linalg.solve(A, b)
        # One step of iterative refinement buys back rounding losses on
        # ill-conditioned kernel systems.
        sol = sol + np.linalg.solve(A, b - A @ sol)
    except np.linalg.LinAlgError as err:
        raise DegenerateGeometryError(f"singular interpolation system: {err}") from err

    weights = sol[:n]
    poly = sol[n:]
    model = SeparatrixModel(
        graph_axis=axis,
        plane_axes=plane,
        names=names,
        kernel=kernel,
        sites=z,
        center=center,
        scale=scale,
        weights=weights,
        poly=poly,
        points=pts,
        fit_residual=0.0,
    )
    residual = float(np.max(np.abs(model.evaluate(proj) - vals)))
    model = dataclasses.replace(model, fit_residual=residual)
    if residual > 1e-8:
        raise FitResidualError(
            f"interpolant misses its own samples by {residual:.3g} (> 1e-8)"
        )
    return model


def probe_surface_sides(
    params: ModelParameters,
    model: SeparatrixModel,
    attractors: Iterable,
    expected_above: str,
    expected_below: str,
    n_probes: int = 100,
    offset: float = 0.05,
    rng: np.random.Generator | None = None,
    config: IntegrationConfig | None = None,
    match_radius: float = 0.05,
    slice_: PhaseSlice = DEFAULT_SLICE,
) -> tuple[int, int]:
    """Check that points offset from the surface reach the expected side.

    Draws probe sites as convex combinations of random sample triples (so
    they stay inside the sampled region), offsets them by ``offset``
    along the graph axis in both directions, classifies each offset
    point, and counts matches against the expected attractor for that
    side. Offsets that leave the nonnegative orthant are redrawn.

    Returns (matches, total) with total = 2 * n_probes.
    """
    rng = rng or np.random.default_rng(0)
    targets = _normalize_attractors(attractors)
    proj = model.points[:, model.plane_axes]
    n = proj.shape[0]

    matches = 0
    total = 0
    produced = 0
    attempts = 0
    while produced < n_probes:
        attempts += 1
        if attempts > 50 * n_probes:
            raise RuntimeError("could not place probes inside the orthant")
        idx = rng.integers(0, n, size=3)
        w = rng.dirichlet(np.ones(3))
        site = w @ proj[idx]
        g = float(model.evaluate(site))
        candidates = []
        ok = True
        for sign, expected in ((+1.0, expected_above), (-1.0, expected_below)):
            u = np.zeros(3)
            u[model.plane_axes[0]] = site[0]
            u[model.plane_axes[1]] = site[1]
            u[model.graph_axis] = g + sign * offset
            x0 = slice_.embed(u)
            if np.any(x0 < 0.0):
                ok = False
                break
            candidates.append((x0, expected))
        if not ok:
            continue
        produced += 1
        for x0, expected in candidates:
            res = run_to_attractor(params, x0, targets, config=config, match_radius=match_radius)
            total += 1
            if res.attractor_id == expected:
                matches += 1
    return matches, total


def write_surface_obj(
    model: SeparatrixModel,
    stream: IO[str],
    resolution: tuple[int, int] = (40, 40),
    bounds: tuple[tuple[float, float], tuple[float, float]] | None = None,
) -> None:
    """Triangulated Wavefront OBJ mesh of the fitted surface.

    Vertices are written in slice coordinates (the three axis values in
    order), evaluated on a regular lattice over the sampled plane region.
    """
    proj = model.points[:, model.plane_axes]
    if bounds is None:
        lo = proj.min(axis=0)
        hi = proj.max(axis=0)
    else:
        lo = np.array([bounds[0][0], bounds[1][0]], dtype=float)
        hi = np.array([bounds[0][1], bounds[1][1]], dtype=float)
    nu, nv = resolution
    us = np.linspace(lo[0], hi[0], nu)
    vs = np.linspace(lo[1], hi[1], nv)
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    sites = np.column_stack((uu.ravel(), vv.ravel()))
    gg = model.evaluate(sites)
    for (u, v), g in zip(sites, gg):
        coords = np.zeros(3)
        coords[model.plane_axes[0]] = u
        coords[model.plane_axes[1]] = v
        coords[model.graph_axis] = g
        stream.write(f"v {coords[0]:.10g} {coords[1]:.10g} {coords[2]:.10g}\n")
    for i in range(nu - 1):
        for j in range(nv - 1):
            v00 = i * nv + j + 1
            v01 = v00 + 1
            v10 = v00 + nv
            v11 = v10 + 1
            stream.write(f"f {v00} {v10} {v11}\n")
            stream.write(f"f {v00} {v11} {v01}\n")


def write_surface_lattice_csv(
    model: SeparatrixModel,
    stream: IO[str],
    resolution: tuple[int, int] = (40, 40),
    bounds: tuple[tuple[float, float], tuple[float, float]] | None = None,
) -> None:
    """Regular lattice of surface evaluations as CSV."""
    proj = model.points[:, model.plane_axes]
    if bounds is None:
        lo = proj.min(axis=0)
        hi = proj.max(axis=0)
    else:
        lo = np.array([bounds[0][0], bounds[1][0]], dtype=float)
        hi = np.array([bounds[0][1], bounds[1][1]], dtype=float)
    nu, nv = resolution
    names = model.names
    stream.write(
        f"{names[model.plane_axes[0]]},{names[model.plane_axes[1]]},{names[model.graph_axis]}\n"
    )
    for u in np.linspace(lo[0], hi[0], nu):
        for v in np.linspace(lo[1], hi[1], nv):
            g = float(model.evaluate((u, v)))
            stream.write(f"{u:.17g},{v:.17g},{g:.17g}\n")
