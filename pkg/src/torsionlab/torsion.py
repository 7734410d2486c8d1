"""Sign-determined Reidemeister torsion of finite based real chain complexes.

A complex ``0 -> C_N -> ... -> C_1 -> C_0 -> 0`` is stored with the standard
coordinate basis of each ``C_i`` as its reference basis, the boundary
matrices ``d_i : C_i -> C_{i-1}`` (shape ``(n_{i-1}, n_i)``) and, per degree,
cycle vectors representing the reference basis of ``H_i``.

For a square matrix whose columns are vectors ``a_1..a_n``, ``det`` is the
bracket ``[a / c]`` against the standard basis ``c``; the torsion is

    tor = prod_i det[b^i | h~^i | b~^(i-1)] ^ ((-1)^(i+1))

and the sign-determined torsion multiplies it by ``(-1)^|C|`` with
``|C| = sum_k alpha_k beta_k`` (cumulative dimensions of chains and homology
mod 2).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateComplex, InvalidBasis, InvalidComplex

DEFAULT_RANK_TOL = 1e-9
CHAIN_TOL = 1e-9
DET_TOL = 1e-12
# singular values below this count as zero even for an all-tiny matrix
ABS_FLOOR = 1e-12


def get_rank_tol(tol: Optional[float] = None) -> float:
    if tol is not None:
        return float(tol)
    env = os.environ.get("TORSIONLAB_RANK_TOL")
    return float(env) if env else DEFAULT_RANK_TOL


@dataclass(frozen=True)
class RankData:
    rank: int
    kernel: np.ndarray  # (n, n - rank), orthonormal columns
    image: np.ndarray  # (m, rank), orthonormal columns


def rank_kernel_image(M, tol: Optional[float] = None) -> RankData:
    """Numerical rank with orthonormal kernel and image bases.

    Singular values above ``tol * sigma_max`` count towards the rank.
    """
    tol = get_rank_tol(tol)
    M = np.asarray(M, dtype=float)
    m, n = M.shape
    if M.size == 0:
        return RankData(0, np.eye(n), np.zeros((m, 0)))
    U, s, Vt = np.linalg.svd(M, full_matrices=True)
    smax = s[0] if s.size else 0.0
    if smax <= ABS_FLOOR:
        rank = 0
    else:
        rank = int(np.sum(s > tol * smax))
    return RankData(rank, Vt[rank:].T.copy(), U[:, :rank].copy())


def matrix_rank(M, tol: Optional[float] = None) -> int:
    return rank_kernel_image(M, tol).rank


def _as_vectors(vs, n):
    if vs is None:
        return np.zeros((0, n))
    a = np.asarray(vs, dtype=float)
    if a.size == 0:
        return np.zeros((0, n))
    return a.reshape(-1, n)


@dataclass(frozen=True, eq=False)
class BasedChainComplex:
    dims: tuple
    boundaries: tuple  # boundaries[k] is d_(k+1)
    homology_bases: tuple  # homology_bases[i] has shape (dim H_i, n_i)

    @classmethod
    def create(cls, dims, boundaries, homology_bases=None, *, tol=None, validate=True):
        dims = tuple(int(n) for n in dims)
        N = len(dims) - 1
        if len(boundaries) != N:
            raise InvalidComplex(f"{len(dims)} chain groups need {N} boundary maps")
        bds = []
        for k, d in enumerate(boundaries, start=1):
            a = np.asarray(d, dtype=float)
            if a.size == 0:
                a = np.zeros((dims[k - 1], dims[k]))
            if a.shape != (dims[k - 1], dims[k]):
                raise InvalidComplex(f"d_{k} has shape {a.shape}, expected {(dims[k - 1], dims[k])}")
            a.setflags(write=False)
            bds.append(a)
        if homology_bases is None:
            homology_bases = [None] * len(dims)
        if len(homology_bases) != len(dims):
            raise InvalidComplex("one homology basis entry per degree is required")
        hbs = []
        for i, h in enumerate(homology_bases):
            a = _as_vectors(h, dims[i])
            a.setflags(write=False)
            hbs.append(a)
        c = cls(dims, tuple(bds), tuple(hbs))
        if validate:
            c.validate(tol)
        return c

    @property
    def top(self) -> int:
        return len(self.dims) - 1

    def d(self, i: int) -> np.ndarray:
        """Boundary ``d_i : C_i -> C_{i-1}``, zero outside ``1..N``."""
        if 1 <= i <= self.top:
            return self.boundaries[i - 1]
        rows = self.dims[i - 1] if 1 <= i <= self.top + 1 else 0
        cols = self.dims[i] if 0 <= i <= self.top else 0
        return np.zeros((rows, cols))

    def ranks(self, tol=None) -> list:
        """``rank d_i`` for ``i = 0..N+1`` (the ends are zero)."""
        return [matrix_rank(self.d(i), tol) for i in range(self.top + 2)]

    def homology_dims(self, tol=None) -> list:
        r = self.ranks(tol)
        return [self.dims[i] - r[i] - r[i + 1] for i in range(self.top + 1)]

    def validate(self, tol=None):
        for i in range(1, self.top):
            a, b = self.d(i), self.d(i + 1)
            scale = max(1.0, np.linalg.norm(a) * np.linalg.norm(b))
            if a.size and b.size and np.abs(a @ b).max() > CHAIN_TOL * scale:
                raise InvalidComplex(f"d_{i} d_{i + 1} != 0")
        hd = self.homology_dims(tol)
        for i, h in enumerate(self.homology_bases):
            check_homology_basis(self, i, h, hd[i], tol)

    def with_homology_bases(self, bases, tol=None) -> "BasedChainComplex":
        return BasedChainComplex.create(self.dims, self.boundaries, bases, tol=tol)

    def to_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "boundaries": [d.tolist() for d in self.boundaries],
            "homology_bases": [h.tolist() for h in self.homology_bases],
        }

    @classmethod
    def from_dict(cls, data: dict, tol=None) -> "BasedChainComplex":
        try:
            dims = data["dims"]
            bds = data.get("boundaries", [])
        except (KeyError, TypeError):
            raise InvalidComplex("complex JSON needs 'dims' and 'boundaries'") from None
        return cls.create(dims, bds, data.get("homology_bases"), tol=tol)


def check_homology_basis(c: BasedChainComplex, i: int, h, expected: int, tol=None):
    n = c.dims[i]
    h = _as_vectors(h, n)
    if h.shape[0] != expected:
        raise InvalidBasis(f"degree {i}: {h.shape[0]} homology vectors given, dim H_{i} = {expected}")
    if expected == 0:
        return
    d = c.d(i)
    if d.size:
        res = np.abs(d @ h.T).max()
        scale = max(1.0, np.linalg.norm(d) * np.linalg.norm(h))
        if res > CHAIN_TOL * scale:
            raise InvalidBasis(f"degree {i}: homology vector is not a cycle (residual {res:.2e})")
    B = rank_kernel_image(c.d(i + 1), tol).image
    # independence modulo boundaries: project out B_i, then require full rank
    proj = h.T - B @ (B.T @ h.T)
    sv = np.linalg.svd(proj, compute_uv=False)
    if sv[-1] <= get_rank_tol(tol) * max(1.0, np.linalg.norm(h, 2)):
        raise InvalidBasis(f"degree {i}: homology vectors are dependent modulo boundaries")


@dataclass(frozen=True)
class TorsionResult:
    value: float
    sign_exponent: int
    alpha: tuple
    beta: tuple
    tor: float


def _random_invertible(rng, k):
    while True:
        g = rng.standard_normal((k, k))
        if k == 0 or abs(np.linalg.det(g)) > 1e-2:
            return g


def _degree_matrices(c: BasedChainComplex, tol=None, rng=None):
    images = [rank_kernel_image(c.d(i + 1), tol) for i in range(c.top + 1)]
    b = []
    for i, rd in enumerate(images):
        bi = rd.image
        if rng is not None and bi.shape[1]:
            bi = bi @ _random_invertible(rng, bi.shape[1])
        b.append(bi)
    mats = []
    for i in range(c.top + 1):
        cols = [b[i]]
        h = c.homology_bases[i].T
        if rng is not None and h.shape[1] and b[i].shape[1]:
            h = h + b[i] @ rng.standard_normal((b[i].shape[1], h.shape[1]))
        cols.append(h)
        if i >= 1 and b[i - 1].shape[1]:
            di = c.d(i)
            lift = np.linalg.lstsq(di, b[i - 1], rcond=None)[0]
            if rng is not None:
                ker = rank_kernel_image(di, tol).kernel
                if ker.shape[1]:
                    lift = lift + ker @ rng.standard_normal((ker.shape[1], lift.shape[1]))
            cols.append(lift)
        M = np.hstack(cols) if cols else np.zeros((c.dims[i], 0))
        mats.append(M)
    return mats


def _log_torsion(c: BasedChainComplex, tol=None, rng=None):
    log_abs, sign = 0.0, 1
    for i, M in enumerate(_degree_matrices(c, tol, rng)):
        n = c.dims[i]
        if M.shape != (n, n):
            raise DegenerateComplex(
                f"degree {i}: assembled basis has {M.shape[1]} vectors for dim C_{i} = {n}"
            )
        if n == 0:
            continue
        s, logdet = np.linalg.slogdet(M)
        scale = float(np.sum(np.log(np.linalg.norm(M, axis=0))))
        if s == 0 or logdet - scale < math.log(DET_TOL):
            raise DegenerateComplex(f"degree {i}: assembled basis is singular")
        e = 1 if i % 2 else -1
        log_abs += e * logdet
        sign *= int(s)
    return log_abs, sign


def torsion(c: BasedChainComplex, tol=None, rng: Optional[np.random.Generator] = None) -> float:
    """Torsion ``tor(C, c, h)``.

    ``rng`` randomizes the auxiliary choices (basis of each ``B_i``, lifts,
    cycle representatives); the value does not depend on them.
    """
    log_abs, sign = _log_torsion(c, tol, rng)
    return sign * math.exp(log_abs)


def sign_exponent(dims: Sequence[int], hdims: Sequence[int]):
    alpha = tuple(int(v) % 2 for v in np.cumsum(dims))
    beta = tuple(int(v) % 2 for v in np.cumsum(hdims))
    return sum(a * b for a, b in zip(alpha, beta)) % 2, alpha, beta


def sign_determined_torsion(c: BasedChainComplex, tol=None, rng=None) -> TorsionResult:
    tor = torsion(c, tol, rng)
    hdims = [h.shape[0] for h in c.homology_bases]
    eps, alpha, beta = sign_exponent(c.dims, hdims)
    return TorsionResult((-1) ** eps * tor, eps, alpha, beta, tor)


def change_homology_basis(c: BasedChainComplex, new_bases, tol=None) -> BasedChainComplex:
    return c.with_homology_bases(new_bases, tol)


def change_chain_basis(c: BasedChainComplex, transforms, tol=None) -> BasedChainComplex:
    """Re-express ``c`` in new chain bases.

    ``transforms[i]`` holds the new basis vectors of ``C_i`` as columns, in
    old coordinates.  Torsion changes by ``prod_i det(T_i)^((-1)^i)``.
    """
    T = [np.asarray(t, dtype=float) for t in transforms]
    Tinv = [np.linalg.inv(t) if t.size else t for t in T]
    bds = [Tinv[k - 1] @ c.d(k) @ T[k] for k in range(1, c.top + 1)]
    hbs = [(Tinv[i] @ h.T).T if h.size else h for i, h in enumerate(c.homology_bases)]
    return BasedChainComplex.create(c.dims, bds, hbs, tol=tol)


def left_shift(c: BasedChainComplex) -> BasedChainComplex:
    """``Gamma_0 = 0``, ``Gamma_i = C_(i-1)``."""
    dims = (0,) + tuple(c.dims)
    bds = [np.zeros((0, c.dims[0]))] + list(c.boundaries)
    hbs = [np.zeros((0, 0))] + list(c.homology_bases)
    return BasedChainComplex.create(dims, bds, hbs, validate=False)


def homology_coordinates(c: BasedChainComplex, i: int, vectors, tol=None) -> np.ndarray:
    """Coordinates of cycles (columns of ``vectors``) in the homology basis of degree ``i``."""
    vectors = np.asarray(vectors, dtype=float)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    h = c.homology_bases[i].T
    if h.shape[1] == 0 or vectors.shape[1] == 0:
        return np.zeros((h.shape[1], vectors.shape[1]))
    B = rank_kernel_image(c.d(i + 1), tol).image
    coeffs = np.linalg.lstsq(np.hstack([h, B]), vectors, rcond=None)[0]
    return coeffs[: h.shape[1]]


def kernel_mod_image(outgoing, incoming, tol=None) -> np.ndarray:
    """Orthonormal columns spanning ``ker(outgoing)`` intersected with ``im(incoming)^perp``."""
    Z = rank_kernel_image(outgoing, tol).kernel
    B = rank_kernel_image(incoming, tol).image
    if B.shape[1] == 0 or Z.shape[1] == 0:
        return Z
    return Z @ rank_kernel_image(B.T @ Z, tol).kernel


def homology_representatives(c: BasedChainComplex, i: int, tol=None) -> np.ndarray:
    """Orthonormal cycles in ``C_i`` orthogonal to ``B_i``, one per homology dimension (columns)."""
    return kernel_mod_image(c.d(i), c.d(i + 1), tol)
