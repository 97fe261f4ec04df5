"""Lie-Jordan algebra of Hermitian observables of an n-level system.

The real vector space of Hermitian ``n x n`` matrices carries two bilinear
products:

* the Lie product  ``[[a, b]] = -(i/2) (ab - ba)``        (antisymmetric)
* the Jordan product  ``a (.) b = (ab + ba) / 2``          (symmetric)

Together they satisfy the Jacobi identity, the Jordan identity, the Leibniz
compatibility rule, and the associator identity

    ``a (.) (b (.) c) - (a (.) b) (.) c = [[a, [[b, c]] ]] - [[ [[a, b]], c]]``

which encodes that both products come from one associative matrix product,
``ab = a (.) b + i [[a, b]]``.

Observables are expanded over a fixed orthogonal Hermitian basis
``sigma_0 = I, sigma_1, ..., sigma_{n^2-1}`` with traceless ``sigma_j`` and
``tr(sigma_j sigma_k) = 2 delta_jk``; for n = 2 these are the Pauli matrices
and for n = 3 the standard Gell-Mann matrices.  The products are then
encoded by real structure-constant arrays ``c`` and ``d`` over the full
basis (index 0 included).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (
    BasisMismatchError,
    DimensionError,
    NonHermitianError,
)

__all__ = [
    "ObservableBasis",
    "Observable",
    "AxiomReport",
    "build_basis",
    "lie_product",
    "jordan_product",
    "associative_product",
    "lie_product_coeffs",
    "jordan_product_coeffs",
    "verify_lie_jordan_axioms",
]


# --------------------------------------------------------------------- basis


def _traceless_basis(n):
    """Orthogonal Hermitian traceless matrices with tr(s_j s_k) = 2 delta_jk.

    Ordering for n = 2 and n = 3 follows the conventional Pauli and
    Gell-Mann sequences (symmetric / antisymmetric / diagonal interleaved by
    growing subspace).  For n >= 4 the same three families are used, ordered
    as: all symmetric pair matrices, then all antisymmetric pair matrices
    (each in lexicographic (row, col) order), then the n - 1 diagonal
    matrices.
    """
    sym = {}
    antisym = {}
    for j in range(n):
        for k in range(j + 1, n):
            s = np.zeros((n, n), dtype=complex)
            s[j, k] = 1.0
            s[k, j] = 1.0
            sym[(j, k)] = s
            a = np.zeros((n, n), dtype=complex)
            a[j, k] = -1.0j
            a[k, j] = 1.0j
            antisym[(j, k)] = a
    diags = []
    for l in range(1, n):
        d = np.zeros((n, n), dtype=complex)
        for i in range(l):
            d[i, i] = 1.0
        d[l, l] = -l
        diags.append(np.sqrt(2.0 / (l * (l + 1))) * d)

    if n == 2:
        return [sym[(0, 1)], antisym[(0, 1)], diags[0]]
    if n == 3:
        return [
            sym[(0, 1)],
            antisym[(0, 1)],
            diags[0],
            sym[(0, 2)],
            antisym[(0, 2)],
            sym[(1, 2)],
            antisym[(1, 2)],
            diags[1],
        ]
    pairs = [(j, k) for j in range(n) for k in range(j + 1, n)]
    return [sym[p] for p in pairs] + [antisym[p] for p in pairs] + diags


class ObservableBasis:
    """Fixed Hermitian basis of the observables of an n-level system.

    Attributes
    ----------
    n : matrix dimension (number of levels)
    dim : real dimension of the observable space, ``n**2``
    m : dimension of the traceless part, ``n**2 - 1``
    elements : list of (n, n) complex arrays, ``elements[0]`` the identity
    lie_constants : real array ``c[mu, nu, lam]`` with
        ``[[s_mu, s_nu]] = sum_lam c[mu, nu, lam] s_lam``
    jordan_constants : real array ``d[mu, nu, lam]`` likewise for ``(.)``
    """

    def __init__(self, n):
        if n < 2:
            raise DimensionError("the number of levels must be at least 2")
        self.n = int(n)
        self.dim = n * n
        self.m = n * n - 1
        self.elements = [np.eye(n, dtype=complex)] + _traceless_basis(n)

        E = np.stack(self.elements)
        lie = np.einsum("iab,jbc->ijac", E, E)
        lie = -0.5j * (lie - lie.transpose(1, 0, 2, 3))
        jor = np.einsum("iab,jbc->ijac", E, E)
        jor = 0.5 * (jor + jor.transpose(1, 0, 2, 3))
        self.lie_constants = self._coeff_table(lie)
        self.jordan_constants = self._coeff_table(jor)

    def _coeff_table(self, prods):
        """Expand a (dim, dim, n, n) array of products over the basis."""
        E = np.stack(self.elements)
        tab = 0.5 * np.einsum("ijab,kba->ijk", prods, E)
        tab[:, :, 0] = np.einsum("ijaa->ij", prods) / self.n
        imag = float(np.abs(tab.imag).max())
        if imag > 1e-12:
            raise NonHermitianError(
                f"structure constants acquired imaginary part {imag:.3e}"
            )
        return np.ascontiguousarray(tab.real)

    # ------------------------------------------------------------ conversion
    def coeffs_of(self, matrix, tol=1e-10):
        """Real expansion coefficients of a Hermitian matrix."""
        A = np.asarray(matrix, dtype=complex)
        if A.shape != (self.n, self.n):
            raise DimensionError(
                f"matrix must be ({self.n},{self.n}), got {A.shape}"
            )
        scale = max(1.0, float(np.abs(A).max()))
        if float(np.abs(A - A.conj().T).max()) > tol * scale:
            raise NonHermitianError("matrix is not Hermitian within tolerance")
        out = np.empty(self.dim)
        out[0] = A.trace().real / self.n
        for j in range(1, self.dim):
            out[j] = 0.5 * np.einsum("ab,ba->", A, self.elements[j]).real
        return out

    def matrix_of(self, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.dim,):
            raise DimensionError(
                f"coefficients must have length {self.dim}, got {coeffs.shape}"
            )
        return np.einsum("i,iab->ab", coeffs, np.stack(self.elements))

    def observable(self, coeffs):
        return Observable(self, np.asarray(coeffs, dtype=float))

    def from_matrix(self, matrix, tol=1e-10):
        return Observable(self, self.coeffs_of(matrix, tol))

    def traceless_observable(self, traceless_coeffs):
        """Observable with vanishing identity component."""
        v = np.asarray(traceless_coeffs, dtype=float)
        if v.shape != (self.m,):
            raise DimensionError(
                f"traceless coefficients must have length {self.m}"
            )
        return Observable(self, np.concatenate(([0.0], v)))

    def __repr__(self):
        return f"ObservableBasis(n={self.n})"

    def __eq__(self, other):
        return isinstance(other, ObservableBasis) and other.n == self.n

    def __hash__(self):
        return hash(("ObservableBasis", self.n))


@lru_cache(maxsize=None)
def build_basis(n):
    """Canonical observable basis for an ``n``-level system (cached)."""
    return ObservableBasis(n)


def _same_basis(a, b):
    if a.basis != b.basis:
        raise BasisMismatchError(
            f"operands use bases for n={a.basis.n} and n={b.basis.n}"
        )


@dataclass
class Observable:
    """Hermitian observable expanded over an :class:`ObservableBasis`."""

    basis: ObservableBasis
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.coeffs.shape != (self.basis.dim,):
            raise DimensionError(
                f"coefficients must have length {self.basis.dim}, "
                f"got {self.coeffs.shape}"
            )

    def matrix(self):
        return self.basis.matrix_of(self.coeffs)

    @property
    def scalar_part(self):
        return float(self.coeffs[0])

    @property
    def traceless_coeffs(self):
        return self.coeffs[1:]

    def is_traceless(self, tol=1e-12):
        return abs(self.coeffs[0]) <= tol

    def __add__(self, other):
        _same_basis(self, other)
        return Observable(self.basis, self.coeffs + other.coeffs)

    def __sub__(self, other):
        _same_basis(self, other)
        return Observable(self.basis, self.coeffs - other.coeffs)

    def __neg__(self):
        return Observable(self.basis, -self.coeffs)

    def __mul__(self, s):
        if isinstance(s, (int, float)):
            return Observable(self.basis, float(s) * self.coeffs)
        return NotImplemented

    __rmul__ = __mul__

    def allclose(self, other, tol=1e-10):
        _same_basis(self, other)
        return bool(np.abs(self.coeffs - other.coeffs).max() <= tol)

    def __repr__(self):
        return f"Observable(n={self.basis.n}, coeffs={np.round(self.coeffs, 6)})"


# ------------------------------------------------------------------ products


def lie_product(a, b):
    """``[[a, b]] = -(i/2)(ab - ba)`` computed at matrix level."""
    _same_basis(a, b)
    A, B = a.matrix(), b.matrix()
    return a.basis.from_matrix(-0.5j * (A @ B - B @ A), tol=1e-9)


def jordan_product(a, b):
    """``a (.) b = (ab + ba)/2`` computed at matrix level."""
    _same_basis(a, b)
    A, B = a.matrix(), b.matrix()
    return a.basis.from_matrix(0.5 * (A @ B + B @ A), tol=1e-9)


def associative_product(a, b):
    """Matrix product split into Hermitian data: ``ab = re + i * im``.

    Returns the pair ``(re, im) = (a (.) b, [[a, b]])`` of observables.
    """
    return jordan_product(a, b), lie_product(a, b)


def lie_product_coeffs(basis, avec, bvec):
    """Lie product through the structure constants (coefficient route)."""
    return np.einsum("i,j,ijk->k", avec, bvec, basis.lie_constants)


def jordan_product_coeffs(basis, avec, bvec):
    """Jordan product through the structure constants (coefficient route)."""
    return np.einsum("i,j,ijk->k", avec, bvec, basis.jordan_constants)


# -------------------------------------------------------------------- axioms


@dataclass
class AxiomReport:
    """Maximal residuals of the defining identities over random trials.

    All residuals are sup-norms of coefficient differences.  The
    ``star_associativity`` slot is only populated when the report describes
    a contracted product pair (where associativity of the recombined
    product ``a * b = a (.) b + i [[a, b]]`` is an extra check, not a
    consequence).
    """

    jacobi: float
    jordan_identity: float
    leibniz: float
    associator: float
    star_associativity: float | None = None
    trials: int = 0

    def max_residual(self):
        vals = [self.jacobi, self.jordan_identity, self.leibniz, self.associator]
        if self.star_associativity is not None:
            vals.append(self.star_associativity)
        return max(vals)

    def passed(self, tol=1e-9):
        return self.max_residual() <= tol


def verify_lie_jordan_axioms(basis, trials=50, seed=0):
    """Check the Lie-Jordan axioms on random observable triples.

    Verified identities (residuals reported as sup-norms, max over trials):

    * Jacobi:      ``[[a,[[b,c]]]] + [[b,[[c,a]]]] + [[c,[[a,b]]]] = 0``
    * Jordan:      ``(a(.)b)(.)(a(.)a) = a(.)(b(.)(a(.)a))``
    * Leibniz:     ``[[a, b(.)c]] = [[a,b]](.)c + b(.)[[a,c]]``
    * associator:  ``a(.)(b(.)c) - (a(.)b)(.)c = [[a,[[b,c]]]] - [[[[a,b]],c]]``
    """
    rng = np.random.default_rng(seed)
    c = basis.lie_constants
    d = basis.jordan_constants

    def lie(u, v):
        return np.einsum("i,j,ijk->k", u, v, c)

    def jor(u, v):
        return np.einsum("i,j,ijk->k", u, v, d)

    res = dict(jacobi=0.0, jordan_identity=0.0, leibniz=0.0, associator=0.0)
    for _ in range(trials):
        a, b, cc = (rng.normal(size=basis.dim) for _ in range(3))
        r = lie(a, lie(b, cc)) + lie(b, lie(cc, a)) + lie(cc, lie(a, b))
        res["jacobi"] = max(res["jacobi"], float(np.abs(r).max()))
        a2 = jor(a, a)
        r = jor(jor(a, b), a2) - jor(a, jor(b, a2))
        res["jordan_identity"] = max(res["jordan_identity"], float(np.abs(r).max()))
        r = lie(a, jor(b, cc)) - jor(lie(a, b), cc) - jor(b, lie(a, cc))
        res["leibniz"] = max(res["leibniz"], float(np.abs(r).max()))
        r = (
            jor(a, jor(b, cc))
            - jor(jor(a, b), cc)
            - lie(a, lie(b, cc))
            + lie(lie(a, b), cc)
        )
        res["associator"] = max(res["associator"], float(np.abs(r).max()))
    return AxiomReport(trials=trials, **res)
