"""Adjoint-twisted torsion of knot exteriors.

The presentation complex of ``<S_1..S_r | R_1..R_(r-1)>`` gives the twisted
cochain complex ``su(2) -> su(2)^r -> su(2)^(r-1)``.  It is stored as a chain
complex with degree ``i`` holding the ``(2 - i)``-cochains:

    degree 2: C^0 = su(2)            d_2 x = ((1 - S_j) o x)_j
    degree 1: C^1 = su(2)^r          d_1 (x_j) = (sum_j dR_i/dS_j o x_j)_i
    degree 0: C^2 = su(2)^(r-1)

Cochain vectors concatenate (i, j, k)-coordinates, one block per cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    CentralElement,
    CentralMeridian,
    DegeneratePairing,
    InvalidParameter,
    InvalidRepresentation,
    MissingPeripheralData,
    NonRegularTheta,
    NotMuRegular,
    NotRegular,
)
from .fox import alexander_polynomial, evaluate_adjoint, fox_derivative
from .presentation import (
    EPS_REP,
    GroupPresentation,
    Representation,
    Word,
    abelianization_exponents,
    evaluate_images,
    exponent_sum_matrix,
    torus_knot_presentation,
)
from .su2 import UnitQuaternion, adjoint_matrix, axis_angle
from .torsion import (
    BasedChainComplex,
    kernel_mod_image,
    sign_determined_torsion,
)

CHAIN_TOL = 1e-10
# relative size below which a pairing counts as zero
PAIRING_TOL = 1e-9


def _fox_jacobian(p: GroupPresentation, rho: Representation) -> np.ndarray:
    r = p.rank
    d1 = np.zeros((3 * (r - 1), 3 * r))
    for i, rel in enumerate(p.relators):
        for j in rel.generators():
            d1[3 * i:3 * i + 3, 3 * j:3 * j + 3] = evaluate_adjoint(fox_derivative(rel, j), rho)
    return d1


@dataclass(frozen=True, eq=False)
class TwistedComplex:
    presentation: GroupPresentation
    rep: Representation
    d1: np.ndarray
    d2: np.ndarray

    @property
    def dims(self) -> tuple:
        r = self.presentation.rank
        return (3 * (r - 1), 3 * r, 3)

    def chain_residual(self) -> float:
        if self.d1.size == 0:
            return 0.0
        return float(np.abs(self.d1 @ self.d2).max())

    def based(self, h2_rep=None, h1_rep=None, h0_rep=None, tol=None) -> BasedChainComplex:
        """Chain complex with cohomology representatives of ``H^2, H^1, H^0`` as homology bases."""
        return BasedChainComplex.create(
            self.dims, [self.d1, self.d2], [h2_rep, h1_rep, h0_rep], tol=tol
        )

    def cocycle_value(self, v, w: Word) -> np.ndarray:
        """Value on ``w`` of the 1-cochain with generator values ``v``.

        Extends by ``v(gh) = v(g) + Ad_rho(g) v(h)``, i.e. the Fox expansion
        ``sum_j (dw/dS_j) o v_j``.
        """
        v = np.asarray(v, dtype=float).reshape(-1, 3)
        out = np.zeros(3)
        for j in w.generators():
            out += evaluate_adjoint(fox_derivative(w, j), self.rep) @ v[j]
        return out


def twisted_complex(p: GroupPresentation, rho: Representation) -> TwistedComplex:
    r = p.rank
    if len(rho.images) != r:
        raise InvalidRepresentation(f"representation has {len(rho.images)} images for {r} generators")
    eye = np.eye(3)
    d2 = np.vstack([eye - adjoint_matrix(g) for g in rho.images]) if r else np.zeros((0, 3))
    d1 = _fox_jacobian(p, rho)
    d1.setflags(write=False)
    d2.setflags(write=False)
    tc = TwistedComplex(p, rho, d1, d2)
    # an approximate representation only gives d1 d2 = 0 up to its relator residual
    bound = max(CHAIN_TOL, 10 * rho.residual) * max(1.0, np.linalg.norm(d1) * np.linalg.norm(d2))
    if tc.chain_residual() > bound:
        raise InvalidRepresentation(f"d1 d2 != 0 (residual {tc.chain_residual():.2e})")
    return tc


# -- cohomology and regularity -------------------------------------------------

@dataclass(frozen=True, eq=False)
class CohomologySummary:
    dims: tuple  # (b0, b1, b2)
    representatives: tuple  # representatives[k]: orthonormal rows spanning a complement of B^k in Z^k


def twisted_cohomology(tc: TwistedComplex, tol=None) -> CohomologySummary:
    r = tc.presentation.rank
    h0 = kernel_mod_image(tc.d2, np.zeros((3, 0)), tol)
    h1 = kernel_mod_image(tc.d1, tc.d2, tol)
    h2 = kernel_mod_image(np.zeros((0, 3 * (r - 1))), tc.d1, tol)
    reps = tuple(h.T.copy() for h in (h0, h1, h2))
    return CohomologySummary(tuple(h.shape[0] for h in reps), reps)


def commutator_distance(a: UnitQuaternion, b: UnitQuaternion) -> float:
    return (a * b * a.conjugate() * b.conjugate()).distance(UnitQuaternion.identity())


def is_irreducible(rho: Representation, eps: float = EPS_REP) -> bool:
    """False iff all generator images commute (so the image lies on one axis)."""
    ims = rho.images
    return any(
        commutator_distance(ims[i], ims[j]) >= eps
        for i in range(len(ims))
        for j in range(i + 1, len(ims))
    )


def is_regular(tc: TwistedComplex, tol=None) -> bool:
    return is_irreducible(tc.rep) and twisted_cohomology(tc, tol).dims[1] == 1


def meridian_axis(rho: Representation, mu: Word) -> np.ndarray:
    """Unit axis ``P`` of ``rho(mu)``; CentralMeridian when ``rho(mu) = +-1``."""
    try:
        return axis_angle(rho(mu)).axis.to_array()
    except CentralElement:
        raise CentralMeridian("the meridian is sent to a central element") from None


def theta_mu(rho: Representation, mu: Word) -> float:
    """Half the rotation angle of ``Ad rho(mu)``, in ``(0, pi)``."""
    try:
        return axis_angle(rho(mu)).theta
    except CentralElement:
        raise CentralMeridian("the meridian is sent to a central element") from None


def f_mu(tc: TwistedComplex, v, mu: Word) -> float:
    """Pair the cocycle value ``v(mu)`` with the axis of ``rho(mu)``."""
    axis = meridian_axis(tc.rep, mu)
    return float(tc.cocycle_value(v, mu) @ axis)


def _regular_h1(tc: TwistedComplex, tol=None) -> np.ndarray:
    if not is_irreducible(tc.rep):
        raise NotRegular("representation is not irreducible")
    coh = twisted_cohomology(tc, tol)
    if coh.dims[1] != 1:
        raise NotRegular(f"dim H^1 = {coh.dims[1]}, expected 1")
    return coh.representatives[1][0]


def is_mu_regular(tc: TwistedComplex, mu: Word, tol=None) -> bool:
    rep = _regular_h1(tc, tol)
    return abs(f_mu(tc, rep, mu)) > PAIRING_TOL * np.linalg.norm(rep)


def reference_h1(tc: TwistedComplex, mu: Word, tol=None) -> np.ndarray:
    """The ``H^1`` representative on which ``f_mu`` equals +1."""
    rep = _regular_h1(tc, tol)
    value = f_mu(tc, rep, mu)
    if abs(value) <= PAIRING_TOL * np.linalg.norm(rep):
        raise NotMuRegular("f_mu vanishes on H^1")
    return rep / value


def peripheral_pushforward(tc: TwistedComplex, z) -> np.ndarray:
    """Restriction of a 2-cochain to the boundary torus cell.

    ``sum_k sign_k Ad_rho(u_k) z_(j_k)`` over the peripheral identity sequence.
    """
    p = tc.presentation
    if not p.peripheral_identity:
        raise MissingPeripheralData("a peripheral identity sequence is required")
    z = np.asarray(z, dtype=float).reshape(-1, 3)
    out = np.zeros(3)
    for term in p.peripheral_identity:
        out += term.sign * (adjoint_matrix(tc.rep(term.conjugator)) @ z[term.relator_index])
    return out


def reference_h2(tc: TwistedComplex, flip_axis: bool = False, tol=None) -> np.ndarray:
    """The ``H^2`` representative whose boundary restriction pairs to +1 with the meridian axis.

    ``flip_axis`` pairs against ``-P`` instead, which negates the result.
    """
    p = tc.presentation
    if not p.has_peripheral_data():
        raise MissingPeripheralData("meridian, longitude and peripheral identity are required")
    if not is_irreducible(tc.rep):
        raise NotRegular("representation is not irreducible")
    coh = twisted_cohomology(tc, tol)
    if coh.dims[1] != 1 or coh.dims[2] != 1:
        raise NotRegular(f"cohomology dimensions {coh.dims}, expected (0, 1, 1)")
    axis = meridian_axis(tc.rep, p.meridian)
    if flip_axis:
        axis = -axis
    w = coh.representatives[2][0]
    value = float(peripheral_pushforward(tc, w) @ axis)
    if abs(value) <= PAIRING_TOL * np.linalg.norm(w):
        raise DegeneratePairing("boundary restriction of H^2 pairs to zero with the meridian axis")
    return w / value


@dataclass(frozen=True, eq=False)
class ReferenceGenerators:
    h1: Optional[np.ndarray]
    h2: np.ndarray
    axis: np.ndarray


def reference_generators(tc: TwistedComplex, flip_axis: bool = False, tol=None) -> ReferenceGenerators:
    p = tc.presentation
    h2 = reference_h2(tc, flip_axis, tol)
    h1 = reference_h1(tc, p.meridian, tol) if is_mu_regular(tc, p.meridian, tol) else None
    axis = meridian_axis(tc.rep, p.meridian)
    return ReferenceGenerators(h1, h2, -axis if flip_axis else axis)


# -- sign of the untwisted complex -------------------------------------------

def untwisted_complex(p: GroupPresentation) -> BasedChainComplex:
    """Real cochain complex of the presentation, based by the point class and ``m*``."""
    r = p.rank
    n = np.array(abelianization_exponents(p), dtype=float)
    d1 = np.array(exponent_sum_matrix(p), dtype=float).reshape(r - 1, r)
    return BasedChainComplex.create((r - 1, r, 1), [d1, np.zeros((r, 1))], [None, [n], [[1.0]]])


def tau0(p: GroupPresentation) -> int:
    return 1 if sign_determined_torsion(untwisted_complex(p)).value > 0 else -1


# -- full torsion ---------------------------------------------------------------

@dataclass(frozen=True)
class TorsionReport:
    kind: str
    value: float
    twisted_torsion: float
    tau0: int
    cohomology_dims: tuple
    irreducible: bool
    regular: bool
    mu_regular: bool
    theta_m: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "torsion": self.value,
            "twisted_torsion": self.twisted_torsion,
            "tau0": self.tau0,
            "cohomology_dims": list(self.cohomology_dims),
            "irreducible": self.irreducible,
            "regular": self.regular,
            "mu_regular": self.mu_regular,
            "theta_m": self.theta_m,
        }


def nonabelian_report(p: GroupPresentation, rho: Representation, *, flip_axis: bool = False,
                      tol=None, rng=None) -> TorsionReport:
    if not p.has_peripheral_data():
        raise MissingPeripheralData("meridian, longitude and peripheral identity are required")
    tc = twisted_complex(p, rho)
    coh = twisted_cohomology(tc, tol)
    irreducible = is_irreducible(rho)
    if not irreducible or coh.dims[1] != 1:
        raise NotRegular(f"representation is not regular (irreducible={irreducible}, dims={coh.dims})")
    if not is_mu_regular(tc, p.meridian, tol):
        raise NotMuRegular("f_mu vanishes on H^1 for the meridian")
    h1 = reference_h1(tc, p.meridian, tol)
    h2 = reference_h2(tc, flip_axis, tol)
    res = sign_determined_torsion(tc.based(h2, h1, None, tol), tol, rng)
    t0 = tau0(p)
    return TorsionReport(
        "nonabelian", t0 * res.value, res.value, t0, coh.dims, True, True, True,
        theta_mu(rho, p.meridian),
    )


def nonabelian_torsion(p: GroupPresentation, rho: Representation, **kwargs) -> float:
    """Sign-determined twisted torsion on the normalized meridian class."""
    return nonabelian_report(p, rho, **kwargs).value


def abelian_rep(p: GroupPresentation, theta: float) -> Representation:
    """``S_j -> cos(n_j theta) + sin(n_j theta) i`` for the abelianization exponents ``n_j``."""
    n = abelianization_exponents(p)
    images = [UnitQuaternion.from_axis_angle(k * theta, (1.0, 0.0, 0.0)) for k in n]
    return Representation.create(p, images)


def abelian_report(p: GroupPresentation, theta: float, tol=None, rng=None) -> TorsionReport:
    if not 0.0 < theta < math.pi:
        raise InvalidParameter(f"theta must lie in (0, pi), got {theta!r}")
    delta = alexander_polynomial(p)
    value = abs(delta(complex(math.cos(2 * theta), math.sin(2 * theta))))
    scale = sum(abs(c) for _, c in delta.coefficients)
    if value < PAIRING_TOL * scale:
        raise NonRegularTheta(f"e^(2i theta) is a root of the Alexander polynomial {delta}")
    rho = abelian_rep(p, theta)
    tc = twisted_complex(p, rho)
    n = abelianization_exponents(p)
    h0 = [1.0, 0.0, 0.0]
    h1 = np.concatenate([[k, 0.0, 0.0] for k in n])
    res = sign_determined_torsion(tc.based(None, h1, h0, tol), tol, rng)
    t0 = tau0(p)
    dims = twisted_cohomology(tc, tol).dims
    mu_theta = theta_mu(rho, p.meridian) if p.meridian is not None else theta
    return TorsionReport("abelian", t0 * res.value, res.value, t0, dims, False, False, False, mu_theta)


def abelian_torsion(p: GroupPresentation, theta: float, **kwargs) -> float:
    return abelian_report(p, theta, **kwargs).value


# -- torus knots -----------------------------------------------------------------

def _check_torus_params(q, ell, t=None):
    if not isinstance(q, (int, np.integer)) or q < 3 or q % 2 == 0:
        raise InvalidParameter(f"q must be an odd integer >= 3, got {q!r}")
    if not isinstance(ell, (int, np.integer)) or not 1 <= ell <= (q - 1) // 2:
        raise InvalidParameter(f"l must be an integer in [1, {(q - 1) // 2}], got {ell!r}")
    if t is not None and not 0.0 < t < 1.0:
        raise InvalidParameter(f"t must lie in (0, 1), got {t!r}")


def torus_rep(q: int, ell: int, t: float) -> Representation:
    """``x -> i``, ``y -> cos a + sin a (cos(pi t) i + sin(pi t) j)`` with ``a = (2l-1) pi / q``."""
    _check_torus_params(q, ell, t)
    p = torus_knot_presentation(q)
    a = (2 * ell - 1) * math.pi / q
    x = UnitQuaternion(0.0, 1.0, 0.0, 0.0)
    y = UnitQuaternion.from_axis_angle(a, (math.cos(math.pi * t), math.sin(math.pi * t), 0.0))
    return Representation.create(p, [x, y])


def torus_torsion_closed_form(q: int, ell: int) -> float:
    return -(8.0 / q) * math.sin((2 * ell - 1) * math.pi / q) ** 2


def torus_theta_closed_form(q: int, ell: int, t: float) -> float:
    a = (2 * ell - 1) * math.pi / (2 * q)
    return math.acos((-1) ** (ell - 1) * math.cos(a) * math.cos(math.pi * t))


@dataclass(frozen=True)
class ScanRow:
    t: float
    theta_m: float
    tor: float
    dtheta_dt: float
    tau_form: float
    closed_form: float
    abs_err: float


SCAN_COLUMNS = ("t", "theta_m", "tor", "dtheta_dt", "tau_form", "closed_form", "abs_err")


def scan_torus(q: int, ell: int, t_grid: Sequence[float], h: float = 1e-5, tol=None) -> list:
    _check_torus_params(q, ell)
    if not h > 0:
        raise InvalidParameter(f"finite-difference step must be positive, got {h!r}")
    p = torus_knot_presentation(q)
    const = torus_torsion_closed_form(q, ell)
    rows = []
    for t in t_grid:
        t = float(t)
        if not (0.0 < t - h and t + h < 1.0):
            raise InvalidParameter(f"t = {t} with step {h} leaves (0, 1)")
        tor = nonabelian_torsion(p, torus_rep(q, ell, t), tol=tol)
        theta = theta_mu(torus_rep(q, ell, t), p.meridian)
        dtheta = (
            theta_mu(torus_rep(q, ell, t + h), p.meridian)
            - theta_mu(torus_rep(q, ell, t - h), p.meridian)
        ) / (2 * h)
        tau_form = tor * dtheta
        closed = const * dtheta
        rows.append(ScanRow(t, theta, tor, dtheta, tau_form, closed, abs(tau_form - closed)))
    return rows


# -- representation variety ----------------------------------------------------

def _relator_errors(p: GroupPresentation, images) -> np.ndarray:
    return np.concatenate(
        [evaluate_images(r, images).vector_part().to_array() for r in p.relators]
    ) if p.relators else np.zeros(0)


def _exp_pure(v) -> UnitQuaternion:
    v = np.asarray(v, dtype=float)
    a = float(np.linalg.norm(v))
    if a == 0.0:
        return UnitQuaternion.identity()
    return UnitQuaternion.from_axis_angle(a, v / a)


def project_to_variety(p: GroupPresentation, images, steps: int = 30, tol: float = 1e-14) -> Representation:
    """Newton-project generator images onto the relator variety.

    Perturbing ``S_j -> exp(e_j) S_j`` moves each relator value by
    ``sum_j dR_i/dS_j o e_j`` to first order, so the Jacobian is ``d_1``.
    Minimum-norm steps keep the result close to the starting point.
    """
    images = [im if isinstance(im, UnitQuaternion) else UnitQuaternion.from_array(im) for im in images]
    for _ in range(steps):
        err = _relator_errors(p, images)
        if err.size == 0 or np.abs(err).max() < tol:
            break
        J = _fox_jacobian(p, Representation(tuple(images)))
        step = np.linalg.lstsq(J, -err, rcond=None)[0].reshape(-1, 3)
        images = [_exp_pure(e) * g for e, g in zip(step, images)]
    return Representation.create(p, images)
