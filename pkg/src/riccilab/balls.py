"""Geodesic ball volumes in the universal cover via Jacobi fields.

A ray from the base point in direction v carries the state

    u (3)    body velocity in the metric-orthonormal left-invariant frame,
    Q (3x3)  parallel-transported orthonormal frame (columns; third = u),
    Y (2x2)  Jacobi matrix on the orthogonal complement, Y(0)=0, Y'(0)=I,
    Y' (2x2) its radial derivative,
    vcum     cumulative integral of j = det Y along the ray.

j(rho) is the exponential-map volume element, so integrating it in rho and
against a direction quadrature yields Vol B(r); j itself gives sphere areas.
Past the first conjugate radius of a ray, j is clamped to zero and vcum is
frozen, making the reported volumes upper bounds (flagged per radius).

Geodesics of left-invariant metrics are integrated in body coordinates
(Euler-Arnold form); space forms use the same machinery with a constant
curvature operator and trivial transport.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import GridError, InvalidStateError, InvariantViolationError
from .geometries import (SPACE_FORM, GeometryModel, MetricState, curvature,
                         milnor_frame_constants)
from .sphere_grids import SphereQuadrature, get_quadrature
from .stepping import hermite_eval, integrate_adaptive

_NSTATE = 21
_CONJ_DIP = 1e-6          # relative dip of det Y that counts as a conjugate touch


@dataclass(frozen=True)
class JacobiRay:
    rho: np.ndarray
    j: np.ndarray
    conjugate_radius: float


@dataclass
class VolumeProfile:
    """Vol B(r) and Area S(r) over a radius grid for one metric state."""

    model: GeometryModel
    state: MetricState
    r_grid: np.ndarray
    vol_ball: np.ndarray
    area_sphere: np.ndarray
    min_conjugate_radius: float
    quadrature: tuple[str, int]

    def __post_init__(self):
        self.r_grid = np.asarray(self.r_grid, dtype=float)
        self.vol_ball = np.asarray(self.vol_ball, dtype=float)
        self.area_sphere = np.asarray(self.area_sphere, dtype=float)
        if np.any(np.diff(self.r_grid) <= 0) or self.r_grid[0] <= 0:
            raise GridError("radius grid must be positive and strictly increasing")
        diffs = np.diff(self.vol_ball)
        below_conj = self.r_grid[1:] <= self.min_conjugate_radius * (1 + 1e-12)
        if np.any(diffs[below_conj] <= 0):
            raise InvariantViolationError("vol_ball must be strictly increasing in r")
        if np.any(diffs < -1e-9 * np.abs(self.vol_ball[1:])):
            # past conjugate radii the volume may saturate but never decrease
            raise InvariantViolationError("vol_ball decreased along the grid")
        if np.any(self.vol_ball <= 0) or np.any(self.area_sphere < -1e-12):
            raise InvariantViolationError("volumes must be positive, areas nonnegative")
        small = self.r_grid <= 0.01
        if np.any(small):
            flat = 4.0 * np.pi / 3.0 * self.r_grid[small] ** 3
            if np.max(np.abs(self.vol_ball[small] / flat - 1.0)) > 0.01:
                raise InvariantViolationError("small-radius volumes deviate from the flat leading term")

    @property
    def conjugate_flags(self) -> np.ndarray:
        """True where the volume is only an upper bound (radius past a conjugate point)."""
        return self.r_grid > self.min_conjugate_radius * (1 + 1e-12)

    def index_of(self, r: float) -> int:
        i = int(np.argmin(np.abs(self.r_grid - r)))
        if abs(self.r_grid[i] - r) > 1e-9 * max(1.0, r):
            raise GridError(f"radius {r} is not on the profile grid")
        return i

    def vol_at(self, r: float) -> float:
        return float(self.vol_ball[self.index_of(r)])

    def area_at(self, r: float) -> float:
        return float(self.area_sphere[self.index_of(r)])


# --- ray field ----------------------------------------------------------------

class _RayField:
    """Frame data turning (model, state) into the batched ray ODE."""

    def __init__(self, model: GeometryModel, state: MetricState):
        self.model = model
        self.state = state
        if model.backend == SPACE_FORM:
            self.kappa_eff = model.kappa / state.scale
            self.m = np.zeros(3)
            self.Ksec = np.full((3, 3), self.kappa_eff)
            np.fill_diagonal(self.Ksec, 0.0)
        else:
            (c1, c2, c3), (m1, m2, m3) = milnor_frame_constants(model.lam, state.coeffs)
            K23 = c1 * m1 - m2 * m3
            K31 = c2 * m2 - m3 * m1
            K12 = c3 * m3 - m1 * m2
            self.kappa_eff = None
            self.m = np.array([m1, m2, m3])
            self.Ksec = np.array([[0.0, K12, K31], [K12, 0.0, K23], [K31, K23, 0.0]])

    def rhs(self, _t, y):
        nd = y.size // _NSTATE
        s = y.reshape(nd, _NSTATE)
        out = np.zeros_like(s)
        Y = s[:, 12:16].reshape(nd, 2, 2)
        Yp = s[:, 16:20].reshape(nd, 2, 2)
        out[:, 12:16] = s[:, 16:20]
        if self.model.backend == SPACE_FORM:
            out[:, 16:20] = (-self.kappa_eff) * s[:, 12:16]
        else:
            u = s[:, 0:3]
            Q = s[:, 3:12].reshape(nd, 3, 3)
            m = self.m
            G = np.zeros((nd, 3, 3))
            G[:, 1, 2] = -u[:, 0] * m[0]
            G[:, 2, 1] = u[:, 0] * m[0]
            G[:, 0, 2] = u[:, 1] * m[1]
            G[:, 2, 0] = -u[:, 1] * m[1]
            G[:, 0, 1] = -u[:, 2] * m[2]
            G[:, 1, 0] = u[:, 2] * m[2]
            out[:, 0:3] = -np.einsum('njk,nk->nj', G, u)
            out[:, 3:12] = -np.einsum('njk,nki->nji', G, Q).reshape(nd, 9)
            diag = np.einsum('ak,nk->na', self.Ksec, u * u)
            M = -self.Ksec[None, :, :] * u[:, :, None] * u[:, None, :]
            M[:, np.arange(3), np.arange(3)] = diag
            P = Q[:, :, 0:2]
            Rhat = np.einsum('nja,njk,nkb->nab', P, M, P)
            out[:, 16:20] = -np.einsum('nab,nbc->nac', Rhat, Y).reshape(nd, 4)
        out[:, 20] = Y[:, 0, 0] * Y[:, 1, 1] - Y[:, 0, 1] * Y[:, 1, 0]
        return out.ravel()


def _initial_ray_states(directions):
    nd = directions.shape[0]
    s = np.zeros((nd, _NSTATE))
    s[:, 0:3] = directions
    for i, u in enumerate(directions):
        k = int(np.argmin(np.abs(u)))
        e = np.zeros(3)
        e[k] = 1.0
        E1 = e - np.dot(e, u) * u
        E1 /= np.linalg.norm(E1)
        E2 = np.cross(u, E1)
        s[i, 3:12] = np.column_stack([E1, E2, u]).ravel()
    s[:, 16] = 1.0
    s[:, 19] = 1.0
    return s


def _det_j(s):
    return s[:, 12] * s[:, 15] - s[:, 13] * s[:, 14]


def _det_j_rate(s):
    # d/drho det Y = tr(adj(Y) Y')
    return (s[:, 16] * s[:, 15] + s[:, 12] * s[:, 19]
            - s[:, 17] * s[:, 14] - s[:, 13] * s[:, 18])


class _RayBatchResult:
    def __init__(self, r_grid, j_grid, v_grid, conj):
        self.r_grid = r_grid
        self.j_grid = j_grid      # (nr, nd), clamped
        self.v_grid = v_grid      # (nr, nd), frozen past conjugate radius
        self.conjugate_radii = conj


def _integrate_rays(field: _RayField, directions, r_grid, rtol, atol):
    nd = directions.shape[0]
    nr = len(r_grid)
    y0 = _initial_ray_states(directions).ravel()
    r_max = float(r_grid[-1])

    conj = np.full(nd, np.inf)
    vconj = np.zeros(nd)
    j_grid = np.zeros((nr, nd))
    v_grid = np.zeros((nr, nd))
    g = 0

    def interp(s0, d0, s1, d1, t0, t1, i, rho):
        return hermite_eval(t0, s0[i], d0[i], t1, s1[i], d1[i], rho)

    first = True
    for (t0, y0v, f0, t1, y1v, f1) in integrate_adaptive(
            field.rhs, 0.0, y0, r_max, rtol=rtol, atol=atol):
        s0 = y0v.reshape(nd, _NSTATE)
        s1 = y1v.reshape(nd, _NSTATE)
        d0 = f0.reshape(nd, _NSTATE)
        d1 = f1.reshape(nd, _NSTATE)
        j0, j1 = _det_j(s0), _det_j(s1)
        jp0, jp1 = _det_j_rate(s0), _det_j_rate(s1)

        active = np.isinf(conj)
        sign_change = active & (j0 > 0) & (j1 <= 0)
        local_min = active & ~sign_change & (jp0 < 0) & (jp1 >= 0) & ~first
        for i in np.nonzero(sign_change | local_min)[0]:
            def jf(rho, i=i):
                v = interp(s0, d0, s1, d1, t0, t1, i, rho)
                return v[12] * v[15] - v[13] * v[14]

            def jpf(rho, i=i):
                v = interp(s0, d0, s1, d1, t0, t1, i, rho)
                return (v[16] * v[15] + v[12] * v[19] - v[17] * v[14] - v[13] * v[18])

            if sign_change[i]:
                rho_c = brentq(jf, t0, t1, xtol=1e-13 * max(1.0, t1)) if j1[i] < 0 else t1
            else:
                rho_m = brentq(jpf, t0, t1, xtol=1e-13 * max(1.0, t1))
                ref = max(j0[i], j1[i])
                if not (jf(rho_m) <= _CONJ_DIP * ref):
                    continue
                rho_c = rho_m
            conj[i] = rho_c
            vconj[i] = interp(s0, d0, s1, d1, t0, t1, i, rho_c)[20]

        while g < nr and r_grid[g] <= t1 * (1 + 1e-14):
            rho = float(r_grid[g])
            vals = hermite_eval(t0, s0, d0, t1, s1, d1, rho)
            jg = _det_j(vals)
            vg = vals[:, 20].copy()
            clamped = conj <= rho
            jg[clamped] = 0.0
            vg[clamped] = vconj[clamped]
            j_grid[g] = np.maximum(jg, 0.0)
            v_grid[g] = vg
            g += 1
        first = False

    if g < nr:
        raise GridError("ray integration ended before covering the radius grid")
    return _RayBatchResult(np.asarray(r_grid, float), j_grid, v_grid, conj)


# --- public operations ----------------------------------------------------------

def geodesic_jacobi_ray(model: GeometryModel, state: MetricState, direction,
                        r_max: float, n_samples: int = 200,
                        rtol: float = 1e-10, atol: float = 1e-13) -> JacobiRay:
    """Radial volume-element samples j(rho) along one geodesic ray.

    ``direction`` is a unit vector in the metric-orthonormal frame.  Returns
    samples on a uniform rho grid together with the first conjugate radius
    (inf when no conjugate point occurs before r_max).
    """
    v = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(v) - 1.0) > 1e-8:
        raise InvalidStateError(f"direction must be a unit vector, |v|={np.linalg.norm(v)}")
    field = _RayField(model, state)
    rho = np.linspace(r_max / n_samples, r_max, n_samples)
    res = _integrate_rays(field, v[None, :], rho, rtol, atol)
    return JacobiRay(rho=res.r_grid, j=res.j_grid[:, 0],
                     conjugate_radius=float(res.conjugate_radii[0]))


def ball_volume_profile(model: GeometryModel, state: MetricState, r_grid,
                        quadrature: str | SphereQuadrature | None = None,
                        rtol: float = 1e-10, atol: float = 1e-13) -> VolumeProfile:
    """Vol B(r) and Area S(r) on ``r_grid`` via the Jacobi-ray engine.

    Vol B(r) = sum_v w_v int_0^r j(rho, v) drho and Area S(r) = sum_v w_v j(r, v)
    over the direction quadrature; the reduction order over directions is fixed
    so results do not depend on threading.
    """
    quad = quadrature if isinstance(quadrature, SphereQuadrature) else get_quadrature(
        quadrature or "product230")
    if np.any(quad.weights <= 0):
        raise InvalidStateError("direction quadrature weights must be positive")
    if abs(quad.weights.sum() - 4 * np.pi) > 1e-9:
        raise InvalidStateError("direction quadrature weights must sum to 4*pi")
    r_grid = np.asarray(r_grid, dtype=float)
    if r_grid.ndim != 1 or len(r_grid) == 0 or np.any(np.diff(r_grid) <= 0) or r_grid[0] <= 0:
        raise GridError("radius grid must be positive and strictly increasing")
    field = _RayField(model, state)
    res = _integrate_rays(field, quad.points, r_grid, rtol, atol)
    vol = np.array([np.sum(quad.weights * row) for row in res.v_grid])
    area = np.array([np.sum(quad.weights * row) for row in res.j_grid])
    min_conj = float(np.min(res.conjugate_radii))
    if r_grid[-1] > min_conj:
        warnings.warn(f"r_max={r_grid[-1]:g} exceeds the first conjugate radius "
                      f"{min_conj:g}; volumes there are upper bounds", stacklevel=2)
    return VolumeProfile(model, state, r_grid, vol, area, min_conj,
                         (quad.name, quad.node_count))


def closed_form_volume(kappa: float, c: float, r: float) -> tuple[float, float]:
    """Exact (Vol B(r), Area S(r)) for the space form of curvature kappa at scale c."""
    if kappa not in (-1.0, 0.0, 1.0):
        raise InvalidStateError("closed forms cover kappa in {-1, 0, +1}")
    if not c > 0 or not r > 0:
        raise InvalidStateError("scale and radius must be positive")
    w = r / math.sqrt(c)
    if kappa == 0.0:
        return 4.0 * math.pi / 3.0 * r ** 3, 4.0 * math.pi * r ** 2
    if kappa == -1.0:
        vol = math.pi * c ** 1.5 * (math.sinh(2 * w) - 2 * w)
        area = 4.0 * math.pi * c * math.sinh(w) ** 2
        return vol, area
    if w > math.pi * (1 + 1e-12):
        raise GridError(f"radius {r} beyond the diameter {math.pi * math.sqrt(c)}")
    w = min(w, math.pi)
    vol = math.pi * c ** 1.5 * (2 * w - math.sin(2 * w))
    area = 4.0 * math.pi * c * math.sin(w) ** 2
    return vol, area


def closed_form_profile(model: GeometryModel, state: MetricState, r_grid,
                        saturate: bool = False) -> VolumeProfile:
    """VolumeProfile built from space-form closed forms (oracle route).

    With ``saturate`` the round sphere reports its total volume (and zero
    sphere area) past the diameter instead of raising.
    """
    if model.backend != SPACE_FORM:
        raise InvalidStateError("closed-form profiles only exist for space-form models")
    c = state.scale
    r_grid = np.asarray(r_grid, dtype=float)
    diameter = math.pi * math.sqrt(c) if model.kappa > 0 else np.inf

    def one(r):
        if saturate and r > diameter:
            return closed_form_volume(model.kappa, c, diameter)[0], 0.0
        return closed_form_volume(model.kappa, c, r)

    va = [one(r) for r in r_grid]
    vol = np.array([x[0] for x in va])
    area = np.array([x[1] for x in va])
    return VolumeProfile(model, state, r_grid, vol, area, diameter, ("closed-form", 0))


def profile_for_state(model: GeometryModel, state: MetricState, r_grid,
                      quadrature=None, rtol: float = 1e-10,
                      engine: bool = False) -> VolumeProfile:
    """Profile via the cheapest faithful route: closed forms for space forms
    (saturating past a sphere diameter) and flat models, the Jacobi engine
    otherwise."""
    if engine:
        return ball_volume_profile(model, state, r_grid, quadrature, rtol=rtol)
    if model.backend == SPACE_FORM:
        return closed_form_profile(model, state, r_grid, saturate=True)
    if curvature(model, state).riemann_norm == 0.0:
        # flat: the Jacobi engine reproduces the Euclidean closed form exactly
        r_grid = np.asarray(r_grid, dtype=float)
        vol = 4.0 * np.pi / 3.0 * r_grid ** 3
        area = 4.0 * np.pi * r_grid ** 2
        return VolumeProfile(model, state, r_grid, vol, area, np.inf, ("closed-form", 0))
    return ball_volume_profile(model, state, r_grid, quadrature, rtol=rtol)


def volume_at(model: GeometryModel, state: MetricState, r: float,
              quadrature=None, rtol: float = 1e-10) -> float:
    """Ball volume at a single radius; closed form for space forms, engine otherwise.

    For the round sphere past its diameter the total volume is returned (the
    ball is the whole space).
    """
    if model.backend == SPACE_FORM:
        c = state.scale
        if model.kappa > 0 and r > math.pi * math.sqrt(c):
            return float(closed_form_volume(model.kappa, c, math.pi * math.sqrt(c))[0])
        return closed_form_volume(model.kappa, c, r)[0]
    profile = ball_volume_profile(model, state, np.array([r]), quadrature, rtol=rtol)
    return float(profile.vol_ball[0])


def mean_curvature_integral(profile: VolumeProfile, r: float) -> float:
    """Integral of the mean curvature over the geodesic sphere of radius r.

    Equal to dArea/dr by the first variation of area; evaluated by a centered
    difference on the profile grid, so r must be an interior grid point.
    """
    i = profile.index_of(r)
    if i == 0 or i == len(profile.r_grid) - 1:
        raise GridError(f"radius {r} must be interior to the profile grid")
    return float((profile.area_sphere[i + 1] - profile.area_sphere[i - 1])
                 / (profile.r_grid[i + 1] - profile.r_grid[i - 1]))
