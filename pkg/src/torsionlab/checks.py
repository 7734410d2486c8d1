"""Seeded randomized property suites.

Each suite takes a ``numpy.random.Generator`` and a trial count and returns a
:class:`CheckResult`.  The same seed always reproduces the same trials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import NonRegularTheta, TorsionLabError
from .fox import GroupRingElement, alexander_minor, alexander_polynomial, fox_derivative
from .knot import (
    abelian_rep,
    abelian_torsion,
    is_irreducible,
    nonabelian_torsion,
    project_to_variety,
    theta_mu,
    torus_rep,
    torus_theta_closed_form,
    torus_torsion_closed_form,
    twisted_complex,
)
from .presentation import (
    Word,
    abelianization_exponents,
    parse_presentation,
    torus_knot_presentation,
)
from .su2 import random_unit_quaternion
from .torsion import (
    BasedChainComplex,
    change_chain_basis,
    change_homology_basis,
    homology_coordinates,
    homology_representatives,
    left_shift,
    rank_kernel_image,
    sign_determined_torsion,
    torsion,
)

TREFOIL = "gens: a, b\nrel: a*b*a*B*A*B\nmeridian: a\n"
FIGURE_EIGHT = "gens: a, b\nrel: A*b*a*B*a*b*A*B*a*B\nmeridian: a\n"
UNKNOT = "gens: x\nmeridian: x\n"


@dataclass
class CheckResult:
    name: str
    trials: int
    failures: int
    max_error: float
    skipped: int = 0
    first_failure: Optional[str] = None
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.failures == 0 and self.trials > 0

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        line = (
            f"{status} {self.name}: trials={self.trials} failures={self.failures} "
            f"skipped={self.skipped} max_error={self.max_error:.12g}"
        )
        if self.note:
            line += f" {self.note}"
        if self.first_failure:
            line += f" first_failure={self.first_failure}"
        return line


class _Tally:
    def __init__(self, name):
        self.name = name
        self.trials = self.failures = self.skipped = 0
        self.max_error = 0.0
        self.first = None
        self.note = ""

    def record(self, error: float, bound: float, label: str = ""):
        self.trials += 1
        if not math.isfinite(error):
            error = math.inf
        self.max_error = max(self.max_error, error)
        if not error <= bound:
            self.failures += 1
            if self.first is None:
                self.first = f"{label} error={error:.3g}".strip()

    def fail(self, label: str):
        self.trials += 1
        self.failures += 1
        if self.first is None:
            self.first = label

    def result(self) -> CheckResult:
        return CheckResult(
            self.name, self.trials, self.failures, self.max_error, self.skipped, self.first, self.note
        )


def _rel(a: float, b: float) -> float:
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def _random_invertible(rng, n, min_det=0.1):
    while True:
        g = rng.standard_normal((n, n))
        if n == 0 or abs(np.linalg.det(g)) > min_det:
            return g


# -- random complexes ---------------------------------------------------------

def random_complex(rng, max_top: int = 3, max_boundary_rank: int = 2, acyclic: bool = False,
                   ) -> BasedChainComplex:
    """Random based complex with prescribed boundary ranks and homology, in a random basis."""
    top = int(rng.integers(1, max_top + 1))
    brank = [int(rng.integers(0, max_boundary_rank + 1)) for _ in range(top)] + [0]
    hdims = [0 if acyclic else int(rng.integers(0, 2)) for _ in range(top + 1)]
    if acyclic and not any(brank):
        brank[0] = 1
    dims = [brank[i] + hdims[i] + (brank[i - 1] if i else 0) for i in range(top + 1)]
    # canonical form: C_i = B_i + H_i + (lift of B_(i-1)), d maps the last block onto B_(i-1)
    P = [_random_invertible(rng, n) for n in dims]
    bds = []
    for i in range(1, top + 1):
        D = np.zeros((dims[i - 1], dims[i]))
        b = brank[i - 1]
        D[:b, dims[i] - b:] = np.eye(b)
        bds.append(P[i - 1] @ D @ np.linalg.inv(P[i]))
    bases = []
    for i in range(top + 1):
        H = np.zeros((dims[i], hdims[i]))
        H[brank[i]:brank[i] + hdims[i]] = np.eye(hdims[i])
        bases.append((P[i] @ H @ _random_invertible(rng, hdims[i])).T)
    return BasedChainComplex.create(dims, bds, bases)


def random_homology_bases(rng, c: BasedChainComplex) -> BasedChainComplex:
    bases = []
    for i in range(c.top + 1):
        R = homology_representatives(c, i)
        k = R.shape[1]
        bases.append((R @ _random_invertible(rng, k)).T if k else None)
    return c.with_homology_bases(bases)


# -- torsion core suites ----------------------------------------------------------

def check_lift_independence(rng, trials: int = 1000, bound: float = 1e-9) -> CheckResult:
    tally = _Tally("lift-independence")
    for k in range(trials):
        c = random_complex(rng)
        base = torsion(c)
        tally.record(_rel(torsion(c, rng=rng), base), bound, f"trial {k}")
    return tally.result()


def check_shift(rng, trials: int = 1000, bound: float = 1e-9) -> CheckResult:
    tally = _Tally("shift")
    for k in range(trials):
        c = random_complex(rng, acyclic=True)
        shifted = sign_determined_torsion(left_shift(c)).value
        tally.record(_rel(shifted * torsion(c), 1.0), bound, f"trial {k}")
    return tally.result()


def check_basis_change(rng, trials: int = 1000, bound: float = 1e-9) -> CheckResult:
    """Homology and chain basis changes scale torsion by the predicted determinant products."""
    tally = _Tally("basis-change")
    for k in range(trials):
        c = random_complex(rng)
        base = torsion(c)
        # homology bases: h' = A h in coordinates, factor prod det(A_i)^((-1)^(i+1))
        mats = [_random_invertible(rng, h.shape[0]) for h in c.homology_bases]
        new = [A @ h if h.size else None for A, h in zip(mats, c.homology_bases)]
        predicted = math.prod(
            np.linalg.det(A) ** ((-1) ** (i + 1)) for i, A in enumerate(mats) if A.size
        )
        tally.record(_rel(torsion(change_homology_basis(c, new)), base * predicted), bound, f"trial {k} homology")
        # chain bases: columns of T_i are the new basis, factor prod det(T_i)^((-1)^i)
        T = [_random_invertible(rng, n) for n in c.dims]
        predicted = math.prod(np.linalg.det(t) ** ((-1) ** i) for i, t in enumerate(T) if t.size)
        tally.record(_rel(torsion(change_chain_basis(c, T)), base * predicted), bound, f"trial {k} chain")
    return tally.result()


def _random_subcomplex(rng, c: BasedChainComplex) -> list:
    """Orthonormal bases of subspaces ``V_i`` with ``d V_(i+1)`` inside ``V_i``."""
    sub = [None] * (c.top + 1)
    for i in range(c.top, -1, -1):
        V = rng.standard_normal((c.dims[i], int(rng.integers(0, c.dims[i] + 1))))
        if i < c.top and sub[i + 1].shape[1]:
            V = np.hstack([V, c.d(i + 1) @ sub[i + 1]])
        sub[i] = rank_kernel_image(V).image if V.size else np.zeros((c.dims[i], 0))
    return sub


class _IllSeparated(Exception):
    """A random draw whose singular values fall between rounding noise and signal."""


# singular values below GAP_LO * scale are noise, above GAP_HI * scale are signal
GAP_LO = 1e-9
GAP_HI = 1e-6


def _separate(mats, scale: float) -> list:
    """Zero out noise-level singular values; reject draws with values inside the gap."""
    out = []
    for m in mats:
        if not m.size:
            out.append(m)
            continue
        U, s, Vt = np.linalg.svd(m, full_matrices=False)
        if np.any((s > GAP_LO * scale) & (s < GAP_HI * scale)):
            raise _IllSeparated
        out.append((U * np.where(s >= GAP_HI * scale, s, 0.0)) @ Vt)
    return out


def _homology_sequence(C, Cp, Cpp, M, k, D) -> BasedChainComplex:
    """The long exact homology sequence ``H(C') -> H(C) -> H(C'') -> H(C')`` as an acyclic complex.

    Degree ``3i+2`` holds ``H_i(C')``, ``3i+1`` holds ``H_i(C)`` and ``3i``
    holds ``H_i(C'')``, each in coordinates of its reference basis.
    """
    N = C.top
    dims, maps = {}, {}
    for i in range(N + 1):
        hp, h, hpp = (x.homology_bases[i] for x in (Cp, C, Cpp))
        dims[3 * i + 2], dims[3 * i + 1], dims[3 * i] = hp.shape[0], h.shape[0], hpp.shape[0]
        maps[3 * i + 2] = homology_coordinates(C, i, M[i][:, :k[i]] @ hp.T)
        maps[3 * i + 1] = homology_coordinates(Cpp, i, (np.linalg.inv(M[i]) @ h.T)[k[i]:])
        if i >= 1:
            lift = np.zeros((C.dims[i], hpp.shape[0]))
            lift[k[i]:] = hpp.T
            maps[3 * i] = homology_coordinates(Cp, i - 1, (D[i - 1] @ lift)[:k[i - 1]])
    top = 3 * N + 2
    mats = [maps[j].reshape(dims[j - 1], dims[j]) for j in range(1, top + 1)]
    # exactness forces some maps to vanish; their computed entries are rounding noise
    scale = max((np.abs(m).max() for m in mats if m.size), default=0.0)
    return BasedChainComplex.create([dims[j] for j in range(top + 1)], _separate(mats, scale), validate=False)


def multiplicativity_trial(rng):
    """One short exact sequence ``0 -> C' -> C -> C'' -> 0``; returns ``(lhs, rhs, nontrivial)``.

    ``C'`` is a random subcomplex of a random ``C`` and ``C''`` the quotient.
    Raises ``_IllSeparated`` for draws too ill-conditioned to decide ranks.
    """
    C = random_complex(rng)
    U = _random_subcomplex(rng, C)
    # new basis of C_i: a basis of V_i followed by a complement, rescaled to det 1
    M, k = [], []
    for i, n in enumerate(C.dims):
        ki = U[i].shape[1]
        Q, _ = np.linalg.qr(np.hstack([U[i], rng.standard_normal((n, n))]))
        Mi = np.hstack([U[i] @ _random_invertible(rng, ki), Q[:, ki:n] @ _random_invertible(rng, n - ki)])
        if n:
            Mi[:, 0] /= np.linalg.det(Mi)
        M.append(Mi)
        k.append(ki)
    D = [np.linalg.inv(M[i - 1]) @ C.d(i) @ M[i] for i in range(1, C.top + 1)]
    kk = [n - ki for n, ki in zip(C.dims, k)]
    scale = max((np.abs(d).max() for d in D if d.size), default=0.0)
    sub = _separate([d[:k[i], :k[i + 1]] for i, d in enumerate(D)], scale)
    quo = _separate([d[k[i]:, k[i + 1]:] for i, d in enumerate(D)], scale)
    Cp = BasedChainComplex.create(k, sub, validate=False)
    Cpp = BasedChainComplex.create(kk, quo, validate=False)
    Cp, Cpp, C = (random_homology_bases(rng, x) for x in (Cp, Cpp, C))
    H = _homology_sequence(C, Cp, Cpp, M, k, D)

    a_p = np.cumsum(Cp.dims) % 2
    a_pp = np.cumsum(Cpp.dims) % 2
    alpha = sum(int(a_p[i - 1] * a_pp[i]) for i in range(1, C.top + 1))
    b, bp, bpp = (np.cumsum([h.shape[0] for h in x.homology_bases]) % 2 for x in (C, Cp, Cpp))
    eps = sum(
        int((b[i] + 1) * (bp[i] + bpp[i])) + (int(bp[i - 1] * bpp[i]) if i else 0)
        for i in range(C.top + 1)
    )
    lhs = sign_determined_torsion(C).value
    rhs = (-1) ** (alpha + eps) * sign_determined_torsion(Cp).value * sign_determined_torsion(Cpp).value * torsion(H)
    return lhs, rhs, any(H.dims)


def check_multiplicativity(rng, trials: int = 1000, bound: float = 1e-8) -> CheckResult:
    """Runs ``trials`` decidable draws; ill-separated draws are resampled and counted as skipped."""
    tally = _Tally("multiplicativity")
    attempts = nontrivial = 0
    while tally.trials < trials and attempts < 10 * trials:
        attempts += 1
        try:
            lhs, rhs, with_homology = multiplicativity_trial(rng)
        except _IllSeparated:
            tally.skipped += 1
            continue
        except TorsionLabError as exc:
            tally.fail(f"trial {tally.trials}: {type(exc).__name__}: {exc}")
            continue
        nontrivial += with_homology
        tally.record(_rel(lhs, rhs), bound, f"trial {tally.trials}")
    tally.note = f"non_acyclic={nontrivial}"
    return tally.result()


# -- knot suites ----------------------------------------------------------------

def random_word(rng, rank: int, max_len: int = 12) -> Word:
    n = int(rng.integers(0, max_len + 1))
    w = Word()
    for _ in range(n):
        w = w * Word.gen(int(rng.integers(0, rank)), int(rng.choice([-1, 1])))
    return w


def check_fox_identity(rng, trials: int = 500) -> CheckResult:
    """``w - 1 = sum_j (dw/dS_j)(S_j - 1)`` exactly in the integral group ring."""
    tally = _Tally("fox-identity")
    one = GroupRingElement.of(Word())
    for k in range(trials):
        rank = int(rng.integers(1, 4))
        w = random_word(rng, rank)
        total = GroupRingElement()
        for j in range(rank):
            total = total + fox_derivative(w, j) * (GroupRingElement.of(Word.gen(j)) - one)
        tally.record(0.0 if total == GroupRingElement.of(w) - one else 1.0, 0.0, f"trial {k}")
    return tally.result()


def _sample_representations(rng, count: int):
    knots = [parse_presentation(TREFOIL), parse_presentation(FIGURE_EIGHT)]
    for _ in range(count):
        kind = int(rng.integers(0, 3))
        if kind == 0:
            q = int(rng.choice([3, 5, 7]))
            ell = int(rng.integers(1, (q - 1) // 2 + 1))
            yield torus_knot_presentation(q), torus_rep(q, ell, float(rng.uniform(0.02, 0.98)))
        elif kind == 1:
            p = knots[int(rng.integers(0, 2))]
            yield p, abelian_rep(p, float(rng.uniform(0, math.pi)))
        else:
            p = knots[int(rng.integers(0, 2))]
            try:
                yield p, project_to_variety(p, [random_unit_quaternion(rng) for _ in range(p.rank)])
            except TorsionLabError:
                continue


def check_chain_condition(rng, trials: int = 100, bound: float = 1e-10) -> CheckResult:
    tally = _Tally("chain-condition")
    for k, (p, rho) in enumerate(_sample_representations(rng, trials)):
        tally.record(twisted_complex(p, rho).chain_residual(), bound, f"trial {k}")
    return tally.result()


def check_conjugation(rng, trials: int = 100, bound: float = 1e-8) -> CheckResult:
    tally = _Tally("conjugation")
    for k in range(trials):
        q = int(rng.choice([3, 5, 7]))
        ell = int(rng.integers(1, (q - 1) // 2 + 1))
        t = float(rng.uniform(0.05, 0.95))
        p = torus_knot_presentation(q)
        rho = torus_rep(q, ell, t)
        base = nonabelian_torsion(p, rho)
        conj = nonabelian_torsion(p, rho.conjugated(random_unit_quaternion(rng)))
        tally.record(_rel(conj, base), bound, f"trial {k} (q={q}, l={ell}, t={t:.6f})")
    return tally.result()


TORUS_T_GRID = (0.1, 0.25, 0.5, 0.75, 0.9)


def check_torus_oracle(rng, trials: int = 5, bound: float = 1e-8) -> CheckResult:
    """All ``(q, l)`` with ``q`` in {3, 5, 7}: the fixed t-grid plus ``trials`` random t each."""
    tally = _Tally("torus-oracle")
    for q in (3, 5, 7):
        p = torus_knot_presentation(q)
        for ell in range(1, (q - 1) // 2 + 1):
            expected = torus_torsion_closed_form(q, ell)
            ts = list(TORUS_T_GRID) + [float(v) for v in rng.uniform(0.01, 0.99, trials)]
            for t in ts:
                rho = torus_rep(q, ell, t)
                tally.record(abs(nonabelian_torsion(p, rho) - expected), bound, f"q={q} l={ell} t={t}")
                tally.record(
                    abs(theta_mu(rho, p.meridian) - torus_theta_closed_form(q, ell, t)),
                    1e-10, f"theta q={q} l={ell} t={t}",
                )
    return tally.result()


def check_alexander_oracle(rng, trials: int = 5, bound: float = 1e-8) -> CheckResult:
    """Abelian torsion against ``4 sin^2 theta / |Delta(e^(2 i theta))|^2``."""
    tally = _Tally("alexander-oracle")
    knots = [parse_presentation(s) for s in (TREFOIL, FIGURE_EIGHT, UNKNOT)]
    knots += [torus_knot_presentation(q) for q in (3, 5)]
    for p in knots:
        delta = alexander_polynomial(p)
        exps = abelianization_exponents(p)
        for j, n in enumerate(exps):
            if n:
                tally.record(0.0 if alexander_minor(p, j, exps) == delta else 1.0, 0.0, f"column {j}")
        thetas = [0.3, math.pi / 2, 2.5] + [float(v) for v in rng.uniform(0.01, math.pi - 0.01, trials)]
        for theta in thetas:
            z = complex(math.cos(2 * theta), math.sin(2 * theta))
            expected = 4 * math.sin(theta) ** 2 / abs(delta(z)) ** 2
            try:
                value = abelian_torsion(p, theta)
            except NonRegularTheta:
                tally.skipped += 1
                continue
            tally.record(_rel(value, expected), bound, f"theta={theta}")
    return tally.result()


SUITES: dict[str, tuple[Callable, int]] = {
    "lift-independence": (check_lift_independence, 1000),
    "shift": (check_shift, 1000),
    "basis-change": (check_basis_change, 1000),
    "multiplicativity": (check_multiplicativity, 1000),
    "fox-identity": (check_fox_identity, 500),
    "chain-condition": (check_chain_condition, 100),
    "conjugation": (check_conjugation, 100),
    "torus-oracle": (check_torus_oracle, 5),
    "alexander-oracle": (check_alexander_oracle, 5),
}


def run_suite(name: str, seed: int = 0, trials: Optional[int] = None) -> CheckResult:
    func, default = SUITES[name]
    rng = np.random.default_rng(seed)
    return func(rng, default if trials is None else trials)
