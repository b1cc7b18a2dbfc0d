"""Quasi-fractal uniform circular array (QF-UCA) geometry.

A QF-UCA is a recursive arrangement of circular arrays: the outermost ring
(level N) carries K_N cells, each cell is itself a ring of K_{N-1} cells, and
so on down to level 1 whose "cells" are the physical antenna elements.  Level
n contributes the radial offset R_n * (cos phi_n, sin phi_n) with azimuth
phi_n = 2*pi*k_n / K_n measured from the global +x axis at every level (no
per-cell rotation), so a logical index (k_N, ..., k_1) maps to the planar
point sum_n R_n * u(phi_n).

With commensurate cell counts and particular radius ratios, cells at adjacent
ring positions land elements on exactly the same planar points.  Those shared
elements are the whole point of the construction: the array then radiates
prod(K_n) independently-fed data streams from fewer physical antennas.  Under
the global-alignment convention, sharing between sibling cells (K_in elements
per cell, K_out cells on the ring) happens precisely when

    K_out | K_in,  K_in even,  witness i in [0, i_max],
    i == K_in/K_out + K_in/2  (mod 2),
    R_in / R_out == sin(pi/K_out) / cos(pi*i/K_in),

where i_max = K_in/2 - K_in/K_out.  The witness pins the layout type:
i == i_max gives ratio 1 and every sibling shares one element at the parent
centre ("shared-centre"), i == 0 makes adjacent siblings tangent with one
shared element at the tangency point ("tangential"), intermediate witnesses
make adjacent siblings properly intersecting with both intersection points
shared ("intersecting").  `check_layout_conditions` evaluates these integer
conditions; `validate_geometrically` verifies the same claims by brute-force
position clustering and is the authoritative oracle.
"""

from __future__ import annotations

import configparser
import enum
import io
import itertools
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

__all__ = [
    "LayoutType",
    "PairRelation",
    "DimensionSpec",
    "QfUcaGeometry",
    "EnumerationCaps",
    "LayoutCheck",
    "LayoutError",
    "ToleranceError",
    "position_of",
    "all_positions",
    "check_layout_conditions",
    "validate_geometrically",
    "build_geometry",
    "enumerate_layouts",
    "pair_witnesses",
    "witness_ratio",
    "radii_from_witnesses",
    "save_layout",
    "load_layout",
    "layout_svg",
]

# Tolerance on trigonometric equalities in the layout conditions.  The
# quantities compared are exact trig values of rational angles, so float error
# is the only thing this needs to absorb.
EPS_FEAS = 1e-9

# Default element-merge tolerance as a fraction of the total radius.
MERGE_TOL_FACTOR = 1e-6


class LayoutError(Exception):
    """A spec fails its declared geometric sharing pattern."""


class ToleranceError(Exception):
    """Position clustering is ambiguous at the requested tolerance."""


class LayoutType(str, enum.Enum):
    """Array-element layout families (also used as per-pair relation tags)."""

    TYPE1_SHARED_CENTER = "type1"
    TYPE2_MIXED = "type2"
    TYPE3_INTERSECTING = "type3"
    TYPE4_TANGENTIAL = "type4"
    PLAIN_1D = "plain1d"
    #: no sharing claimed between sibling cells; ratio unconstrained
    FREE = "free"


# ---------------------------------------------------------------------------
# integer feasibility conditions for one adjacent level pair
# ---------------------------------------------------------------------------

def _i_max(k_in: int, k_out: int) -> int:
    return k_in // 2 - k_in // k_out


def pair_witnesses(k_in: int, k_out: int) -> list[int]:
    """All sharing witnesses for a (K_in elements per cell, K_out cells) pair.

    Empty when the pair admits no sharing layout at all.
    """
    if k_out < 2 or k_in % 2 or k_in % k_out:
        return []
    imax = _i_max(k_in, k_out)
    if imax < 1:
        # K_out == 2: a two-cell "ring" has no proper adjacency cycle and the
        # witness range starts at 1.
        return []
    parity = (k_in // k_out + k_in // 2) % 2
    return [i for i in range(0, imax + 1) if i % 2 == parity]


def witness_ratio(k_in: int, k_out: int, witness: int) -> float:
    """Radius ratio R_in/R_out pinned by a sharing witness."""
    return math.sin(math.pi / k_out) / math.cos(math.pi * witness / k_in)


def _tag_for_witness(k_in: int, k_out: int, witness: int) -> LayoutType:
    imax = _i_max(k_in, k_out)
    if witness == imax:
        return LayoutType.TYPE1_SHARED_CENTER
    if witness == 0:
        return LayoutType.TYPE4_TANGENTIAL
    return LayoutType.TYPE3_INTERSECTING


@dataclass(frozen=True)
class PairRelation:
    """Relation between levels (n, n+1): how sibling cells share elements.

    `witness` is the integer i quantizing the radius ratio (see module
    docstring); it is None for FREE pairs.  `ra` is only meaningful for a
    literal TYPE2 tag and names the level gap to the intersecting relation of
    the mixed layout.
    """

    tag: LayoutType
    witness: Optional[int] = None
    ra: Optional[int] = None

    def __post_init__(self) -> None:
        if self.tag in (LayoutType.PLAIN_1D,):
            raise ValueError("plain1d is a system family, not a pair relation")
        if self.tag is LayoutType.TYPE2_MIXED and self.ra is None:
            raise ValueError("type2 pair relation requires ra")
        if self.tag is LayoutType.FREE and self.witness is not None:
            raise ValueError("free pair relation carries no witness")

    def effective_tag(self) -> LayoutType:
        """Geometric relation actually claimed (resolves the TYPE2 alias)."""
        if self.tag is LayoutType.TYPE2_MIXED:
            return (LayoutType.TYPE4_TANGENTIAL if self.ra == 1
                    else LayoutType.TYPE1_SHARED_CENTER)
        return self.tag

    def paper_witnesses(self, k_in: int, k_out: int) -> tuple[int, ...]:
        """Witness tuple in the conventional (i_{2n-1}, i_{2n}) / i_n form."""
        if self.tag is LayoutType.FREE:
            return ()
        imax = _i_max(k_in, k_out)
        if self.effective_tag() is LayoutType.TYPE4_TANGENTIAL:
            return (imax,)
        i = imax if self.effective_tag() is LayoutType.TYPE1_SHARED_CENTER \
            else int(self.witness or 0)
        return (i, imax - i)


@dataclass(frozen=True)
class DimensionSpec:
    """Complete description of an N-level QF-UCA layout.

    `cells` lists K_1..K_N innermost-first; `radii` lists R_1..R_N in meters
    (the total radius is their sum); `pairs` holds one PairRelation per
    adjacent level pair (n, n+1), innermost pair first.  Transmit and receive
    arrays are identical by assumption.
    """

    cells: tuple[int, ...]
    radii: tuple[float, ...]
    pairs: tuple[PairRelation, ...] = ()

    def __post_init__(self) -> None:
        n = len(self.cells)
        if n < 1:
            raise ValueError("at least one level required")
        if len(self.radii) != n:
            raise ValueError("radii must match cells")
        if len(self.pairs) != max(n - 1, 0):
            raise ValueError("need one pair relation per adjacent level pair")
        if self.cells[0] < 1:
            raise ValueError("innermost cell count must be >= 1")
        if n >= 2 and any(k < 2 for k in self.cells):
            raise ValueError("cell counts must be >= 2 in multi-level layouts")
        if any(r <= 0 for r in self.radii):
            raise ValueError("radii must be positive")
        for p, rel in enumerate(self.pairs):
            if rel.tag is LayoutType.TYPE2_MIXED and not (1 <= rel.ra <= n - (p + 1)):
                raise ValueError(f"type2 ra={rel.ra} out of range at pair {p + 1}")

    # -- basic shape ------------------------------------------------------

    @property
    def n_levels(self) -> int:
        return len(self.cells)

    @property
    def n_modes(self) -> int:
        return math.prod(self.cells)

    @property
    def r_total(self) -> float:
        return float(sum(self.radii))

    @classmethod
    def plain_1d(cls, n_elements: int, r_total: float = 4.0) -> "DimensionSpec":
        return cls(cells=(int(n_elements),), radii=(float(r_total),))

    def family(self) -> LayoutType:
        """Layout family of the whole system."""
        if self.n_levels == 1:
            return LayoutType.PLAIN_1D
        tags = {p.effective_tag() for p in self.pairs}
        if LayoutType.FREE in tags:
            return LayoutType.FREE
        if tags == {LayoutType.TYPE1_SHARED_CENTER}:
            return LayoutType.TYPE1_SHARED_CENTER
        if tags == {LayoutType.TYPE3_INTERSECTING}:
            return LayoutType.TYPE3_INTERSECTING
        if tags == {LayoutType.TYPE4_TANGENTIAL}:
            return LayoutType.TYPE4_TANGENTIAL
        return LayoutType.TYPE2_MIXED

    def family_ra(self) -> Optional[int]:
        """Level gap between the first centre-sharing pair and the first
        intersecting/tangential pair, for mixed (type-2) systems."""
        if self.family() is not LayoutType.TYPE2_MIXED:
            return None
        center = [p for p, rel in enumerate(self.pairs)
                  if rel.effective_tag() is LayoutType.TYPE1_SHARED_CENTER]
        inter = [p for p, rel in enumerate(self.pairs)
                 if rel.effective_tag() in (LayoutType.TYPE3_INTERSECTING,
                                            LayoutType.TYPE4_TANGENTIAL)]
        if center and inter and inter[0] > center[0]:
            return inter[0] - center[0]
        return None

    # -- index helpers ----------------------------------------------------

    def index_tuples(self) -> Iterable[tuple[int, ...]]:
        """All logical index tuples (k_N, ..., k_1), outermost level slowest.

        The iteration order matches the flat ordering used by the channel
        matrix and the modulation matrices.
        """
        return itertools.product(*(range(k) for k in reversed(self.cells)))

    def flat_index(self, idx: Sequence[int]) -> int:
        self._check_index(idx)
        return int(np.ravel_multi_index(tuple(idx), tuple(reversed(self.cells))))

    def _check_index(self, idx: Sequence[int]) -> None:
        if len(idx) != self.n_levels:
            raise ValueError(f"index must have {self.n_levels} components")
        for j, k in enumerate(idx):
            kmax = self.cells[self.n_levels - 1 - j]
            if not 0 <= k < kmax:
                raise ValueError(f"index component {k} out of range [0, {kmax})")


# ---------------------------------------------------------------------------
# positions
# ---------------------------------------------------------------------------

def position_of(spec: DimensionSpec, idx: Sequence[int]) -> np.ndarray:
    """Planar position (meters) of the logical index (k_N, ..., k_1)."""
    spec._check_index(idx)
    x = y = 0.0
    n = spec.n_levels
    for j, k in enumerate(idx):
        lev = n - 1 - j
        ang = 2.0 * math.pi * k / spec.cells[lev]
        x += spec.radii[lev] * math.cos(ang)
        y += spec.radii[lev] * math.sin(ang)
    return np.array([x, y])


def all_positions(spec: DimensionSpec) -> np.ndarray:
    """(n_modes, 2) array of positions in flat logical order."""
    n = spec.n_levels
    pts = np.zeros((spec.n_modes, 2))
    shape = tuple(reversed(spec.cells))
    for axis in range(n):
        lev = n - 1 - axis
        ang = 2.0 * math.pi * np.arange(spec.cells[lev]) / spec.cells[lev]
        off = np.zeros(shape + (2,))
        sl = [None] * n + [slice(None)]
        sl[axis] = slice(None)
        off += np.stack([np.cos(ang), np.sin(ang)], axis=-1)[tuple(sl)]
        pts += spec.radii[lev] * off.reshape(-1, 2)
    return pts


# ---------------------------------------------------------------------------
# fast integer check of the layout conditions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LayoutCheck:
    feasible: bool
    witnesses: tuple[int, ...] = ()
    reason: str = ""


def check_layout_conditions(spec: DimensionSpec, level: int) -> LayoutCheck:
    """Integer/trigonometric feasibility of the relation at pair (n, n+1).

    `level` is the 1-based inner level n, 1 <= n < N.  Returns the witnesses
    in the conventional form when feasible.  This is the fast filter; it is
    constructed to agree exactly with `validate_geometrically`.
    """
    if not 1 <= level < spec.n_levels:
        raise ValueError(f"level must be in [1, {spec.n_levels - 1}]")
    rel = spec.pairs[level - 1]
    if rel.tag is LayoutType.FREE:
        return LayoutCheck(True, (), "no sharing claimed")
    k_in, k_out = spec.cells[level - 1], spec.cells[level]
    ratio = spec.radii[level - 1] / spec.radii[level]
    feasible = pair_witnesses(k_in, k_out)
    if not feasible:
        return LayoutCheck(False, (), "no admissible witness for cell counts")
    imax = _i_max(k_in, k_out)
    tag = rel.effective_tag()
    if tag is LayoutType.TYPE1_SHARED_CENTER:
        want = imax
    elif tag is LayoutType.TYPE4_TANGENTIAL:
        want = 0
    else:  # intersecting: locate the witness matching the stored ratio
        want = None
        for i in feasible:
            if 0 < i < imax and abs(witness_ratio(k_in, k_out, i) - ratio) <= EPS_FEAS:
                want = i
                break
        if want is None:
            return LayoutCheck(False, (), "ratio not on the witness grid")
    if want not in feasible:
        return LayoutCheck(False, (), "witness parity condition fails")
    if abs(witness_ratio(k_in, k_out, want) - ratio) > EPS_FEAS:
        return LayoutCheck(False, (), "radius ratio does not match witness")
    return LayoutCheck(True, rel.paper_witnesses(k_in, k_out))


# ---------------------------------------------------------------------------
# geometric oracle
# ---------------------------------------------------------------------------

def _cluster(points: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Single-linkage clustering; returns (labels, centroids).

    Raises ToleranceError when the clustering is ambiguous: a merged cluster
    wider than the tolerance, or two distinct clusters closer than it.
    """
    n = len(points)
    parent = np.arange(n)

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    tree = cKDTree(points)
    for i, j in tree.query_pairs(tol):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
    labels = np.fromiter((find(i) for i in range(n)), dtype=int, count=n)
    uniq, remap = np.unique(labels, return_inverse=True)
    centroids = np.zeros((len(uniq), 2))
    counts = np.bincount(remap)
    np.add.at(centroids, remap, points)
    centroids /= counts[:, None]
    # ambiguity guards
    spread = np.linalg.norm(points - centroids[remap], axis=1)
    if spread.size and spread.max() > 0.5 * tol:
        raise ToleranceError("cluster diameter comparable to merge tolerance")
    if len(centroids) > 1:
        ctree = cKDTree(centroids)
        d, _ = ctree.query(centroids, k=2)
        if d[:, 1].min() <= tol:
            raise ToleranceError("distinct clusters within merge tolerance")
    return remap, centroids


def _pair_points(k_in: int, k_out: int, r_in: float, r_out: float) -> np.ndarray:
    """Positions of the two-level subsystem (cell-of-interest centres)."""
    a_out = 2.0 * math.pi * np.arange(k_out) / k_out
    a_in = 2.0 * math.pi * np.arange(k_in) / k_in
    cx = r_out * np.cos(a_out)[:, None] + r_in * np.cos(a_in)[None, :]
    cy = r_out * np.sin(a_out)[:, None] + r_in * np.sin(a_in)[None, :]
    return np.stack([cx.ravel(), cy.ravel()], axis=1)  # index = cell*k_in + m


def _validate_pair(rel: PairRelation, k_in: int, k_out: int,
                   r_in: float, r_out: float, tol: float) -> bool:
    """Brute-force check of the sharing pattern one relation claims.

    The pattern concerns sibling cells under one parent, so it is evaluated
    on the isolated two-level subsystem; outer levels only translate copies
    of it.
    """
    tag = rel.effective_tag()
    if tag is LayoutType.FREE:
        return True
    if k_out < 3:
        # a two-cell "ring" has no adjacency cycle; sharing relations are
        # only defined on proper rings (matching the witness range >= 1)
        return False
    pts = _pair_points(k_in, k_out, r_in, r_out)
    try:
        labels, centroids = _cluster(pts, tol)
    except ToleranceError:
        return False
    cells = [set(labels[c * k_in:(c + 1) * k_in]) for c in range(k_out)]

    if tag is LayoutType.TYPE1_SHARED_CENTER:
        if abs(r_in - r_out) > tol:
            return False
        # every sibling must place an element at the shared parent centre
        center = np.flatnonzero(np.linalg.norm(centroids, axis=1) <= tol)
        if len(center) != 1:
            return False
        return all(center[0] in cell for cell in cells)

    target = 2.0 * r_out * math.sin(math.pi / k_out)  # adjacent centre spacing
    if tag is LayoutType.TYPE4_TANGENTIAL:
        if abs(2.0 * r_in - target) > tol:
            return False
        for c in range(k_out):
            shared = cells[c] & cells[(c + 1) % k_out]
            if len(shared) != 1:
                return False
            # the shared element sits at the tangency midpoint
            a = 2.0 * math.pi * c / k_out
            b = 2.0 * math.pi * ((c + 1) % k_out) / k_out
            mid = 0.5 * r_out * np.array([math.cos(a) + math.cos(b),
                                          math.sin(a) + math.sin(b)])
            if np.linalg.norm(centroids[next(iter(shared))] - mid) > tol:
                return False
        return True

    if tag is LayoutType.TYPE3_INTERSECTING:
        # strictly between tangency and concentric overlap
        if not (target / 2.0 + tol < r_in < r_out - tol):
            return False
        return all(len(cells[c] & cells[(c + 1) % k_out]) == 2
                   for c in range(k_out))

    raise ValueError(f"unhandled relation tag {tag}")


def validate_geometrically(spec: DimensionSpec, tol: Optional[float] = None) -> bool:
    """Ground-truth oracle: does the realized geometry exhibit the sharing
    pattern every declared pair relation claims?"""
    if tol is None:
        tol = MERGE_TOL_FACTOR * spec.r_total
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if spec.n_levels == 1:
        return True
    return all(
        _validate_pair(spec.pairs[n - 1], spec.cells[n - 1], spec.cells[n],
                       spec.radii[n - 1], spec.radii[n], tol)
        for n in range(1, spec.n_levels)
    )


# ---------------------------------------------------------------------------
# realized geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QfUcaGeometry:
    """Realized array: deduplicated physical elements + logical->physical map."""

    spec: DimensionSpec
    physical: np.ndarray          # (n_elements, 2) meters
    logical_map: np.ndarray       # (n_modes,) physical element id per flat index
    tol: float

    @property
    def n_elements(self) -> int:
        return len(self.physical)

    def position(self, idx: Sequence[int]) -> np.ndarray:
        return self.physical[self.logical_map[self.spec.flat_index(idx)]]


def build_geometry(spec: DimensionSpec, tol: Optional[float] = None) -> QfUcaGeometry:
    """Realize all logical positions, merge coincident ones, and return the
    physical element list with the total logical->physical map."""
    if tol is None:
        tol = MERGE_TOL_FACTOR * spec.r_total
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    if not validate_geometrically(spec, tol):
        raise LayoutError(f"spec {spec.cells} does not realize its declared layout")
    labels, centroids = _cluster(all_positions(spec), tol)
    return QfUcaGeometry(spec=spec, physical=centroids, logical_map=labels, tol=tol)


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EnumerationCaps:
    """Bounds on the layout search space."""

    max_dimension: int = 4
    max_cells: int = 25
    max_modes: int = 1024


def radii_from_witnesses(cells: Sequence[int], witnesses: Sequence[int],
                         r_total: float) -> tuple[float, ...]:
    """Solve the radius chain innermost-out from the witness ratios and scale
    so the radii sum to the full aperture radius."""
    n = len(cells)
    r = [1.0] * n
    for lev in range(n - 2, -1, -1):
        r[lev] = r[lev + 1] * witness_ratio(cells[lev], cells[lev + 1], witnesses[lev])
    scale = r_total / sum(r)
    return tuple(x * scale for x in r)


def _witness_chains(caps: EnumerationCaps) -> Iterable[tuple[tuple[int, ...], tuple[int, ...]]]:
    """All (cells, witnesses) chains with N >= 2 inside the caps."""

    def rec(cells: list[int], wits: list[int]):
        if len(cells) >= 2:
            yield tuple(cells), tuple(wits)
        if len(cells) >= caps.max_dimension:
            return
        for k_next in range(3, min(cells[-1], caps.max_cells) + 1):
            if math.prod(cells) * k_next > caps.max_modes:
                continue
            for i in pair_witnesses(cells[-1], k_next):
                yield from rec(cells + [k_next], wits + [i])

    for k1 in range(2, caps.max_cells + 1, 2):
        yield from rec([k1], [])


def enumerate_layouts(budget: int,
                      types: Optional[set[LayoutType]] = None,
                      caps: EnumerationCaps = EnumerationCaps(),
                      r_total: float = 4.0,
                      tol: Optional[float] = None) -> list[DimensionSpec]:
    """All layouts realizing exactly `budget` physical elements.

    Candidates are every witness chain inside the caps whose family is in
    `types`, filtered by the integer conditions, the geometric oracle, and
    the element count; the single-ring layout with K_1 = budget is always
    included.  A disagreement between the fast filter and the oracle raises,
    it is never dropped silently.  The result is ordered lexicographically by
    (N, K_N..K_1, family, witnesses).
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    if types is None:
        types = {LayoutType.TYPE1_SHARED_CENTER, LayoutType.TYPE2_MIXED,
                 LayoutType.TYPE3_INTERSECTING, LayoutType.TYPE4_TANGENTIAL}
    found = [DimensionSpec.plain_1d(budget, r_total)]
    for cells, wits in _witness_chains(caps):
        pairs = tuple(
            PairRelation(_tag_for_witness(cells[n], cells[n + 1], wits[n]), wits[n])
            for n in range(len(cells) - 1)
        )
        spec = DimensionSpec(cells=cells,
                             radii=radii_from_witnesses(cells, wits, r_total),
                             pairs=pairs)
        if spec.family() not in types:
            continue
        fast = all(check_layout_conditions(spec, n).feasible
                   for n in range(1, spec.n_levels))
        slow = validate_geometrically(spec, tol)
        if fast != slow:
            raise RuntimeError(
                f"layout-condition filter disagrees with geometric oracle on {spec}")
        if not fast:
            continue
        if build_geometry(spec, tol).n_elements == budget:
            found.append(spec)
    found.sort(key=lambda s: (s.n_levels, tuple(reversed(s.cells)),
                              s.family().value,
                              tuple(p.witness if p.witness is not None else -1
                                    for p in s.pairs)))
    return found


# ---------------------------------------------------------------------------
# layout description files
# ---------------------------------------------------------------------------

def save_layout(spec: DimensionSpec, path: str | Path) -> None:
    """Write the key/value layout description file."""
    cp = configparser.ConfigParser()
    cp["layout"] = {
        "levels": str(spec.n_levels),
        "cells": ", ".join(str(k) for k in spec.cells),
        "radii_m": ", ".join(f"{r:.12g}" for r in spec.radii),
        "family": spec.family().value,
    }
    if spec.pairs:
        cp["layout"]["pair_tags"] = ", ".join(p.tag.value for p in spec.pairs)
        cp["layout"]["witnesses"] = ", ".join(
            str(p.witness) if p.witness is not None else "-" for p in spec.pairs)
        ras = [str(p.ra) if p.ra is not None else "-" for p in spec.pairs]
        if any(x != "-" for x in ras):
            cp["layout"]["ra"] = ", ".join(ras)
    buf = io.StringIO()
    cp.write(buf)
    Path(path).write_text(buf.getvalue(), encoding="utf-8")


def load_layout(path: str | Path) -> DimensionSpec:
    cp = configparser.ConfigParser()
    with open(path, "r", encoding="utf-8") as fh:
        cp.read_file(fh)
    sec = cp["layout"]
    cells = tuple(int(x) for x in sec["cells"].split(","))
    radii = tuple(float(x) for x in sec["radii_m"].split(","))
    pairs: tuple[PairRelation, ...] = ()
    if "pair_tags" in sec:
        tags = [t.strip() for t in sec["pair_tags"].split(",")]
        wits = [w.strip() for w in sec.get("witnesses", "").split(",")] \
            if sec.get("witnesses") else ["-"] * len(tags)
        ras = [r.strip() for r in sec.get("ra", "").split(",")] \
            if sec.get("ra") else ["-"] * len(tags)
        pairs = tuple(
            PairRelation(LayoutType(tag),
                         witness=None if wit == "-" else int(wit),
                         ra=None if ra == "-" else int(ra))
            for tag, wit, ra in zip(tags, wits, ras)
        )
    return DimensionSpec(cells=cells, radii=radii, pairs=pairs)


def layout_svg(geometry: QfUcaGeometry, size: int = 480) -> str:
    """Static SVG drawing: physical elements plus the per-level circles."""
    spec = geometry.spec
    r_total = spec.r_total
    scale = (size / 2 - 20) / r_total

    def sx(x: float) -> float:
        return size / 2 + x * scale

    def sy(y: float) -> float:
        return size / 2 - y * scale

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
           f'viewBox="0 0 {size} {size}">',
           f'<rect width="{size}" height="{size}" fill="white"/>']
    # rings: draw each level's circles around the realized parent centres
    centers = [np.zeros((1, 2))]
    for lev in range(spec.n_levels - 1, 0, -1):
        ang = 2.0 * math.pi * np.arange(spec.cells[lev]) / spec.cells[lev]
        ring = spec.radii[lev] * np.stack([np.cos(ang), np.sin(ang)], axis=1)
        centers.append((centers[-1][:, None, :] + ring[None, :, :]).reshape(-1, 2))
    for c in centers[-1]:
        out.append(f'<circle cx="{sx(c[0]):.2f}" cy="{sy(c[1]):.2f}" '
                   f'r="{spec.radii[0] * scale:.2f}" fill="none" '
                   f'stroke="#8aa" stroke-width="1"/>')
    for p in geometry.physical:
        out.append(f'<circle cx="{sx(p[0]):.2f}" cy="{sy(p[1]):.2f}" r="3.5" '
                   f'fill="#d33"/>')
    out.append(f'<text x="8" y="{size - 8}" font-size="12" fill="#333">'
               f'K={list(spec.cells)} elements={geometry.n_elements} '
               f'modes={spec.n_modes}</text>')
    out.append("</svg>")
    return "\n".join(out)
