"""Direction quadrature on the unit sphere.

Node sets with counts {26, 86, 230, 590}, selectable by name.  The 26-, 86-
and 590-point sets are the classical octahedrally symmetric Lebedev-Laikov
rules (all-positive weights).  The classical 230-point octahedral rule carries
a negative weight, so the 230-count set here is a Gauss-Legendre x uniform
azimuth product rule (10 x 23), which is positive by construction.  Weights
always sum to 4*pi.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

_SQ2 = np.sqrt(0.5)
_SQ3 = np.sqrt(1.0 / 3.0)


def _oh_orbit(code, a, b, v):
    """Points of one octahedral-symmetry orbit with common weight v."""
    pts = []
    if code == 0:
        for ax in range(3):
            for s in (1.0, -1.0):
                p = [0.0, 0.0, 0.0]
                p[ax] = s
                pts.append(p)
    elif code == 1:
        for ax in range(3):
            i, j = [k for k in range(3) if k != ax]
            for si in (1.0, -1.0):
                for sj in (1.0, -1.0):
                    p = [0.0, 0.0, 0.0]
                    p[i] = si * _SQ2
                    p[j] = sj * _SQ2
                    pts.append(p)
    elif code == 2:
        for sx in (1.0, -1.0):
            for sy in (1.0, -1.0):
                for sz in (1.0, -1.0):
                    pts.append([sx * _SQ3, sy * _SQ3, sz * _SQ3])
    elif code == 3:
        # (+-a, +-a, +-c) with c on each axis in turn
        c = np.sqrt(1.0 - 2.0 * a * a)
        for perm in ((0, 1, 2), (0, 2, 1), (1, 2, 0)):
            for sa in (1.0, -1.0):
                for sb in (1.0, -1.0):
                    for sc in (1.0, -1.0):
                        vals = (sa * a, sb * a, sc * c)
                        p = [0.0, 0.0, 0.0]
                        for axis, val in zip(perm, vals):
                            p[axis] = val
                        pts.append(p)
        pts = _dedup(pts)
    elif code == 4:
        c = np.sqrt(1.0 - a * a)
        for i in range(3):
            for j in range(3):
                if i == j:
                    continue
                for sa in (1.0, -1.0):
                    for sc in (1.0, -1.0):
                        p = [0.0, 0.0, 0.0]
                        p[i] = sa * a
                        p[j] = sc * c
                        pts.append(p)
    elif code == 5:
        c = np.sqrt(1.0 - a * a - b * b)
        base = (a, b, c)
        for perm in itertools.permutations(range(3)):
            for signs in itertools.product((1.0, -1.0), repeat=3):
                p = [0.0, 0.0, 0.0]
                for axis, (val, s) in zip(perm, zip(base, signs)):
                    p[axis] = s * val
                pts.append(p)
        pts = _dedup(pts)
    else:
        raise ValueError(f"unknown orbit code {code}")
    pts = np.asarray(pts)
    return pts, np.full(len(pts), v)


def _dedup(pts):
    seen = {}
    for p in pts:
        key = tuple(round(x, 14) for x in p)
        if key not in seen:
            seen[key] = p
    return list(seen.values())


def _assemble(orbits):
    pts = []
    wts = []
    for code, a, b, v in orbits:
        p, w = _oh_orbit(code, a, b, v)
        pts.append(p)
        wts.append(w)
    points = np.vstack(pts)
    weights = np.concatenate(wts) * 4.0 * np.pi   # tables are normalized to 1
    return points, weights


# Lebedev-Laikov orbit parameters (weights normalized to unity).
_LEBEDEV_26 = [
    (0, 0.0, 0.0, 0.4761904761904762e-1),
    (1, 0.0, 0.0, 0.3809523809523810e-1),
    (2, 0.0, 0.0, 0.3214285714285714e-1),
]
_LEBEDEV_86 = [
    (0, 0.0, 0.0, 0.1154401154401154e-1),
    (2, 0.0, 0.0, 0.1194390908585628e-1),
    (3, 0.3696028464541502e+0, 0.0, 0.1111055571060340e-1),
    (3, 0.6943540066026664e+0, 0.0, 0.1187650129453714e-1),
    (4, 0.3742430390903412e+0, 0.0, 0.1181230374690448e-1),
]
_LEBEDEV_590 = [
    (0, 0.0, 0.0, 0.3095121295306187e-3),
    (2, 0.0, 0.0, 0.1852379698597489e-2),
    (3, 0.7040954938227469e+0, 0.0, 0.1871790639277744e-2),
    (3, 0.6807744066455243e+0, 0.0, 0.1858812585438317e-2),
    (3, 0.6372546939258752e+0, 0.0, 0.1852028828296213e-2),
    (3, 0.5044419707800358e+0, 0.0, 0.1846715956151242e-2),
    (3, 0.4215761784010967e+0, 0.0, 0.1818471778162769e-2),
    (3, 0.3317920736472123e+0, 0.0, 0.1749564657281154e-2),
    (3, 0.2384736701421887e+0, 0.0, 0.1617210647254411e-2),
    (3, 0.1459036449157763e+0, 0.0, 0.1384737234851692e-2),
    (3, 0.6095034115507196e-1, 0.0, 0.9764331165051050e-3),
    (4, 0.6116843442009876e+0, 0.0, 0.1857161196774078e-2),
    (4, 0.3964755348199858e+0, 0.0, 0.1705153996395864e-2),
    (4, 0.1724782009907724e+0, 0.0, 0.1300321685886048e-2),
    (5, 0.5610263808622060e+0, 0.3518280927733519e+0, 0.1842866472905286e-2),
    (5, 0.4742392842551980e+0, 0.2634716655937950e+0, 0.1802658934377451e-2),
    (5, 0.5984126497885380e+0, 0.1816640840360209e+0, 0.1849830560443660e-2),
    (5, 0.3791035407695563e+0, 0.1720795225656878e+0, 0.1713904507106709e-2),
    (5, 0.2778673190586244e+0, 0.8213021581932511e-1, 0.1555213603396808e-2),
    (5, 0.5033564271075117e+0, 0.8999205842074875e-1, 0.1802239128008525e-2),
]


def _product_230():
    """Gauss-Legendre (10 polar) x uniform (23 azimuth) product rule."""
    z, wz = np.polynomial.legendre.leggauss(10)
    phi = 2.0 * np.pi * (np.arange(23) + 0.5) / 23.0
    s = np.sqrt(1.0 - z**2)
    pts = []
    wts = []
    for zi, wi in zip(z, wz):
        si = np.sqrt(1.0 - zi * zi)
        for ph in phi:
            pts.append((si * np.cos(ph), si * np.sin(ph), zi))
            wts.append(wi * 2.0 * np.pi / 23.0)
    return np.asarray(pts), np.asarray(wts)


@dataclass(frozen=True)
class SphereQuadrature:
    name: str
    points: np.ndarray     # (n, 3) unit vectors
    weights: np.ndarray    # (n,), positive, sum 4*pi

    @property
    def node_count(self) -> int:
        return len(self.weights)


_BUILDERS = {
    "lebedev26": lambda: _assemble(_LEBEDEV_26),
    "lebedev86": lambda: _assemble(_LEBEDEV_86),
    "product230": _product_230,
    "lebedev590": lambda: _assemble(_LEBEDEV_590),
}
_CACHE: dict[str, SphereQuadrature] = {}

DEFAULT_QUADRATURE = "product230"
QUADRATURE_NAMES = tuple(_BUILDERS)


def get_quadrature(name: str = DEFAULT_QUADRATURE) -> SphereQuadrature:
    if name not in _BUILDERS:
        raise ConfigError(f"unknown quadrature {name!r}; valid: {', '.join(_BUILDERS)}")
    if name not in _CACHE:
        pts, wts = _BUILDERS[name]()
        pts = pts / np.linalg.norm(pts, axis=1, keepdims=True)
        _CACHE[name] = SphereQuadrature(name, pts, wts)
    return _CACHE[name]
