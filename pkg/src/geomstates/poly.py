"""Polynomials of degree at most two on coordinate space, plus vector and
rank-2 tensor fields whose components are such polynomials.

Every geometric object in this package (Poisson and symmetric tensor fields,
Hamiltonian / gradient / Markovian vector fields, their Lie derivatives) has
components that are real polynomials of degree <= 2 in the coordinates
``x_1 .. x_m``.  A polynomial is stored as the triple

    ``p(x) = c0 + c1 . x + x^T c2 x``

with ``c2`` symmetric, so the representation is canonical: two polynomials
are equal iff their triples are equal.  Operations that could leave this
space (products of two quadratics, commutators of quadratic fields) track
the would-be cubic/quartic coefficients and raise
:class:`~geomstates.errors.DegreeOverflowError` unless they cancel.
"""

from __future__ import annotations

import numpy as np

from .errors import DegreeOverflowError, DimensionError

__all__ = [
    "Poly",
    "PolyVectorField",
    "PolyTensorField",
]


def _sym2(mat):
    return 0.5 * (mat + mat.T)


def _sym3(t):
    """Full symmetrization of a rank-3 coefficient array."""
    return (
        t
        + t.transpose(0, 2, 1)
        + t.transpose(1, 0, 2)
        + t.transpose(1, 2, 0)
        + t.transpose(2, 0, 1)
        + t.transpose(2, 1, 0)
    ) / 6.0


class Poly:
    """Real polynomial of degree <= 2 in ``m`` variables."""

    __slots__ = ("m", "c0", "c1", "c2")

    def __init__(self, m, c0=0.0, c1=None, c2=None):
        if m < 0:
            raise DimensionError("number of variables must be >= 0")
        self.m = int(m)
        self.c0 = float(c0)
        if c1 is None:
            self.c1 = np.zeros(m)
        else:
            self.c1 = np.asarray(c1, dtype=float).copy()
            if self.c1.shape != (m,):
                raise DimensionError(
                    f"linear coefficient must have shape ({m},), got {self.c1.shape}"
                )
        if c2 is None:
            self.c2 = np.zeros((m, m))
        else:
            c2 = np.asarray(c2, dtype=float)
            if c2.shape != (m, m):
                raise DimensionError(
                    f"quadratic coefficient must have shape ({m},{m}), got {c2.shape}"
                )
            self.c2 = _sym2(c2)

    # ---------------------------------------------------------------- basics
    @classmethod
    def constant(cls, m, value):
        return cls(m, c0=value)

    @classmethod
    def linear(cls, m, vec):
        return cls(m, c1=vec)

    @classmethod
    def coordinate(cls, m, k):
        c1 = np.zeros(m)
        c1[k] = 1.0
        return cls(m, c1=c1)

    def copy(self):
        return Poly(self.m, self.c0, self.c1, self.c2)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape != (self.m,):
            raise DimensionError(f"point must have shape ({self.m},), got {x.shape}")
        return self.c0 + self.c1 @ x + x @ self.c2 @ x

    def degree(self, tol=0.0):
        if self.max_abs_quadratic() > tol:
            return 2
        if np.abs(self.c1).max(initial=0.0) > tol:
            return 1
        if abs(self.c0) > tol:
            return 0
        return -1  # the zero polynomial

    def max_abs(self):
        return max(
            abs(self.c0),
            np.abs(self.c1).max(initial=0.0),
            self.max_abs_quadratic(),
        )

    def max_abs_quadratic(self):
        return np.abs(self.c2).max(initial=0.0)

    def is_zero(self, tol=0.0):
        return self.max_abs() <= tol

    def allclose(self, other, tol=1e-12):
        self._check(other)
        return (
            abs(self.c0 - other.c0) <= tol
            and np.abs(self.c1 - other.c1).max(initial=0.0) <= tol
            and np.abs(self.c2 - other.c2).max(initial=0.0) <= tol
        )

    def _check(self, other):
        if not isinstance(other, Poly):
            raise TypeError(f"expected Poly, got {type(other).__name__}")
        if other.m != self.m:
            raise DimensionError(
                f"polynomials in {self.m} and {other.m} variables are incompatible"
            )

    # ------------------------------------------------------------ arithmetic
    def __add__(self, other):
        if isinstance(other, (int, float)):
            return Poly(self.m, self.c0 + other, self.c1, self.c2)
        self._check(other)
        return Poly(self.m, self.c0 + other.c0, self.c1 + other.c1, self.c2 + other.c2)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            return Poly(self.m, self.c0 - other, self.c1, self.c2)
        self._check(other)
        return Poly(self.m, self.c0 - other.c0, self.c1 - other.c1, self.c2 - other.c2)

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Poly(self.m, -self.c0, -self.c1, -self.c2)

    def scale(self, s):
        s = float(s)
        return Poly(self.m, s * self.c0, s * self.c1, s * self.c2)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def partial(self, k):
        """Partial derivative with respect to ``x_k`` (degree drops by one)."""
        if not 0 <= k < self.m:
            raise DimensionError(f"coordinate index {k} out of range for m={self.m}")
        return Poly(self.m, c0=self.c1[k], c1=2.0 * self.c2[k])

    def gradient(self):
        """All partial derivatives, as a list of Poly of degree <= 1."""
        return [self.partial(k) for k in range(self.m)]

    # --------------------------------------------------------------- product
    def multiply_tracked(self, other):
        """Product with full bookkeeping.

        Returns ``(product_dropped_to_degree2, c3, c4)`` where ``c3`` is the
        fully symmetrized cubic coefficient array and ``c4`` the sup-norm of
        the quartic part.  Callers decide whether nonzero overflow is an
        error.
        """
        self._check(other)
        m = self.m
        c0 = self.c0 * other.c0
        c1 = self.c0 * other.c1 + other.c0 * self.c1
        c2 = (
            self.c0 * other.c2
            + other.c0 * self.c2
            + _sym2(np.outer(self.c1, other.c1))
        )
        c3 = np.einsum("i,jk->ijk", self.c1, other.c2) + np.einsum(
            "i,jk->ijk", other.c1, self.c2
        )
        c3 = _sym3(c3)
        c4 = 0.0
        if self.max_abs_quadratic() > 0.0 and other.max_abs_quadratic() > 0.0:
            # sup-norm bound of the symmetrized rank-4 coefficient is enough
            # for an exact-cancellation test only when one factor's quadratic
            # part vanishes; otherwise report the actual product norm.
            c4 = float(
                np.abs(np.einsum("ij,kl->ijkl", self.c2, other.c2)).max(initial=0.0)
            )
        return Poly(m, c0, c1, c2), c3, c4

    def multiply(self, other, tol=1e-12):
        """Product, required to stay at degree <= 2 within ``tol``."""
        prod, c3, c4 = self.multiply_tracked(other)
        scale = max(1.0, self.max_abs() * other.max_abs())
        over = max(float(np.abs(c3).max(initial=0.0)), c4)
        if over > tol * scale:
            raise DegreeOverflowError(
                f"product leaves degree-2 space: overflow {over:.3e} "
                f"exceeds {tol:.1e} * {scale:.3e}"
            )
        return prod

    # ----------------------------------------------------------- composition
    def compose_affine(self, mat, shift=None):
        """Exact substitution ``x -> mat @ x + shift`` (degree cannot grow)."""
        mat = np.asarray(mat, dtype=float)
        if mat.shape != (self.m, self.m):
            raise DimensionError(
                f"substitution matrix must be ({self.m},{self.m}), got {mat.shape}"
            )
        if shift is None:
            shift = np.zeros(self.m)
        shift = np.asarray(shift, dtype=float)
        if shift.shape != (self.m,):
            raise DimensionError("substitution shift has wrong length")
        c0 = self.c0 + self.c1 @ shift + shift @ self.c2 @ shift
        c1 = mat.T @ (self.c1 + 2.0 * (self.c2 @ shift))
        c2 = mat.T @ self.c2 @ mat
        return Poly(self.m, c0, c1, c2)

    def restrict(self, free_idx, pinned_values):
        """Substitute fixed values for all coordinates outside ``free_idx``.

        ``pinned_values`` is a full-length vector; entries at ``free_idx``
        are ignored.  The result is a polynomial in ``len(free_idx)``
        variables, ordered as in ``free_idx``.
        """
        free_idx = list(free_idx)
        mfree = len(free_idx)
        pinned = np.asarray(pinned_values, dtype=float).copy()
        pinned[free_idx] = 0.0
        emb = np.zeros((self.m, mfree))
        for col, j in enumerate(free_idx):
            emb[j, col] = 1.0
        c0 = self.c0 + self.c1 @ pinned + pinned @ self.c2 @ pinned
        c1 = emb.T @ (self.c1 + 2.0 * (self.c2 @ pinned))
        c2 = emb.T @ self.c2 @ emb
        return Poly(mfree, c0, c1, c2)

    # ----------------------------------------------------------------- misc
    def snap(self, tol):
        """Copy with coefficient groups below ``tol`` zeroed exactly."""
        c0 = self.c0 if abs(self.c0) > tol else 0.0
        c1 = np.where(np.abs(self.c1) > tol, self.c1, 0.0)
        c2 = np.where(np.abs(self.c2) > tol, self.c2, 0.0)
        return Poly(self.m, c0, c1, c2)

    def to_dict(self):
        return {
            "c0": self.c0,
            "c1": self.c1.tolist(),
            "c2": self.c2.tolist(),
        }

    @classmethod
    def from_dict(cls, data, m=None):
        c1 = np.asarray(data.get("c1", []), dtype=float)
        if m is None:
            m = c1.shape[0]
        return cls(m, data.get("c0", 0.0), data.get("c1"), data.get("c2"))

    def __repr__(self):
        return f"Poly(m={self.m}, degree={self.degree()})"

    def pretty(self, names=None, tol=1e-12, digits=6):
        """Human-readable rendering, e.g. ``0.5*x3 - x1*x2``."""
        if names is None:
            names = [f"x{j + 1}" for j in range(self.m)]
        terms = []

        def coeff_str(v):
            if abs(v - round(v)) < tol and abs(v) < 1e15:
                return str(int(round(v)))
            return f"{v:.{digits}g}"

        if abs(self.c0) > tol:
            terms.append(coeff_str(self.c0))
        for j in range(self.m):
            if abs(self.c1[j]) > tol:
                c = self.c1[j]
                if abs(c - 1.0) < tol:
                    terms.append(names[j])
                elif abs(c + 1.0) < tol:
                    terms.append(f"-{names[j]}")
                else:
                    terms.append(f"{coeff_str(c)}*{names[j]}")
        for j in range(self.m):
            for k in range(j, self.m):
                c = self.c2[j, k] * (1.0 if j == k else 2.0)
                if abs(c) > tol:
                    mono = f"{names[j]}^2" if j == k else f"{names[j]}*{names[k]}"
                    if abs(c - 1.0) < tol:
                        terms.append(mono)
                    elif abs(c + 1.0) < tol:
                        terms.append(f"-{mono}")
                    else:
                        terms.append(f"{coeff_str(c)}*{mono}")
        if not terms:
            return "0"
        out = terms[0]
        for t in terms[1:]:
            out += f" - {t[1:]}" if t.startswith("-") else f" + {t}"
        return out


class PolyVectorField:
    """Vector field on coordinate space with Poly components ``Z^k``."""

    __slots__ = ("m", "components")

    def __init__(self, components):
        components = list(components)
        if not components:
            raise DimensionError("a vector field needs at least one component")
        m = components[0].m
        if len(components) != m:
            raise DimensionError(
                f"need exactly m={m} components, got {len(components)}"
            )
        for p in components:
            if not isinstance(p, Poly) or p.m != m:
                raise DimensionError("all components must be Poly in the same m")
        self.m = m
        self.components = components

    @classmethod
    def zero(cls, m):
        return cls([Poly(m) for _ in range(m)])

    @classmethod
    def from_affine(cls, mat, const=None):
        """Field ``Z(x) = mat @ x + const``."""
        mat = np.asarray(mat, dtype=float)
        m = mat.shape[0]
        if mat.shape != (m, m):
            raise DimensionError("affine part must be square")
        if const is None:
            const = np.zeros(m)
        const = np.asarray(const, dtype=float)
        return cls([Poly(m, c0=const[k], c1=mat[k]) for k in range(m)])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.array([p(x) for p in self.components])

    def __add__(self, other):
        if not isinstance(other, PolyVectorField):
            return NotImplemented
        if other.m != self.m:
            raise DimensionError("vector fields live on different spaces")
        return PolyVectorField(
            [a + b for a, b in zip(self.components, other.components)]
        )

    def __sub__(self, other):
        if not isinstance(other, PolyVectorField):
            return NotImplemented
        if other.m != self.m:
            raise DimensionError("vector fields live on different spaces")
        return PolyVectorField(
            [a - b for a, b in zip(self.components, other.components)]
        )

    def __neg__(self):
        return PolyVectorField([-p for p in self.components])

    def scale(self, s):
        return PolyVectorField([p.scale(s) for p in self.components])

    def max_abs(self):
        return max(p.max_abs() for p in self.components)

    def max_abs_quadratic(self):
        return max(p.max_abs_quadratic() for p in self.components)

    @property
    def is_affine(self):
        return self.max_abs_quadratic() == 0.0

    def linear_parts(self):
        """Return ``(A, b)`` with ``Z(x) = A x + b``; requires affine field."""
        if not self.is_affine:
            raise ValueError("field is not affine; no (A, b) representation")
        A = np.array([p.c1 for p in self.components])
        b = np.array([p.c0 for p in self.components])
        return A, b

    def jacobian(self, x):
        x = np.asarray(x, dtype=float)
        J = np.empty((self.m, self.m))
        for k, p in enumerate(self.components):
            J[k] = p.c1 + 2.0 * (p.c2 @ x)
        return J

    def snap(self, tol):
        return PolyVectorField([p.snap(tol) for p in self.components])

    def allclose(self, other, tol=1e-12):
        if other.m != self.m:
            return False
        return all(
            a.allclose(b, tol) for a, b in zip(self.components, other.components)
        )

    def directional_derivative(self, f):
        """The function ``Z(f) = sum_k Z^k  df/dx_k`` for degree <= 1 ``f``.

        Exact when ``f`` is affine; raises on quadratic ``f`` with a
        quadratic field (degree would exceed 2).
        """
        out = Poly(self.m)
        for k, zk in enumerate(self.components):
            out = out + zk.multiply(f.partial(k))
        return out

    def commutator(self, other, tol=1e-12):
        """Lie bracket ``[Z, W]^k = Z(W^k) - W(Z^k)``.

        Component-wise cubic contributions must cancel within ``tol``
        (relative to the coefficient scale), else
        :class:`DegreeOverflowError` is raised.
        """
        if other.m != self.m:
            raise DimensionError("vector fields live on different spaces")
        m = self.m
        comps = []
        scale = max(1.0, self.max_abs() * other.max_abs())
        for k in range(m):
            acc = Poly(m)
            c3 = np.zeros((m, m, m))
            for j in range(m):
                t1, o1, q1 = self.components[j].multiply_tracked(
                    other.components[k].partial(j)
                )
                t2, o2, q2 = other.components[j].multiply_tracked(
                    self.components[k].partial(j)
                )
                if max(q1, q2) > 0.0:
                    raise DegreeOverflowError(
                        "commutator of two quadratic fields needs quartic tracking"
                    )
                acc = acc + t1 - t2
                c3 += o1 - o2
            over = float(np.abs(c3).max(initial=0.0))
            if over > tol * scale:
                raise DegreeOverflowError(
                    f"commutator component {k} has cubic residue {over:.3e}"
                )
            comps.append(acc)
        return PolyVectorField(comps)

    def __repr__(self):
        kind = "affine" if self.is_affine else "quadratic"
        return f"PolyVectorField(m={self.m}, {kind})"

    def pretty(self, names=None):
        lines = []
        for k, p in enumerate(self.components):
            nm = names[k] if names else f"x{k + 1}"
            lines.append(f"d{nm}/dt = {p.pretty(names)}")
        return "\n".join(lines)


_SYMMETRIES = ("antisymmetric", "symmetric", "none")


class PolyTensorField:
    """Rank-2 contravariant tensor field with Poly components ``T^{jk}``."""

    __slots__ = ("m", "symmetry", "components")

    def __init__(self, components, symmetry="none", validate_tol=1e-10):
        if symmetry not in _SYMMETRIES:
            raise ValueError(f"symmetry must be one of {_SYMMETRIES}")
        m = len(components)
        comps = []
        for row in components:
            row = list(row)
            if len(row) != m:
                raise DimensionError("component grid must be square")
            for p in row:
                if not isinstance(p, Poly) or p.m != m:
                    raise DimensionError("all components must be Poly in m variables")
            comps.append(row)
        self.m = m
        self.symmetry = symmetry
        self.components = comps
        if symmetry != "none" and validate_tol is not None:
            sign = -1.0 if symmetry == "antisymmetric" else 1.0
            for j in range(m):
                for k in range(j, m):
                    mirr = comps[k][j].scale(sign)
                    if not comps[j][k].allclose(mirr, validate_tol):
                        raise ValueError(
                            f"components ({j},{k}) and ({k},{j}) violate "
                            f"{symmetry} symmetry"
                        )

    @classmethod
    def zero(cls, m, symmetry="none"):
        return cls(
            [[Poly(m) for _ in range(m)] for _ in range(m)], symmetry=symmetry
        )

    def component(self, j, k):
        return self.components[j][k]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.empty((self.m, self.m))
        for j in range(self.m):
            for k in range(self.m):
                out[j, k] = self.components[j][k](x)
        return out

    def __add__(self, other):
        if not isinstance(other, PolyTensorField):
            return NotImplemented
        if other.m != self.m:
            raise DimensionError("tensor fields live on different spaces")
        symmetry = self.symmetry if self.symmetry == other.symmetry else "none"
        return PolyTensorField(
            [
                [self.components[j][k] + other.components[j][k] for k in range(self.m)]
                for j in range(self.m)
            ],
            symmetry=symmetry,
            validate_tol=None,
        )

    def __sub__(self, other):
        return self + other.scale(-1.0)

    def scale(self, s):
        return PolyTensorField(
            [[p.scale(s) for p in row] for row in self.components],
            symmetry=self.symmetry,
            validate_tol=None,
        )

    def max_abs(self):
        return max(p.max_abs() for row in self.components for p in row)

    def allclose(self, other, tol=1e-12):
        if other.m != self.m:
            return False
        return all(
            self.components[j][k].allclose(other.components[j][k], tol)
            for j in range(self.m)
            for k in range(self.m)
        )

    def snap(self, tol):
        return PolyTensorField(
            [[p.snap(tol) for p in row] for row in self.components],
            symmetry=self.symmetry,
            validate_tol=None,
        )

    def contract(self, u, v):
        """Scalar field ``T(u, v) = sum_{jk} u_j v_k T^{jk}`` for constant
        covector coefficient arrays ``u``, ``v``."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if u.shape != (self.m,) or v.shape != (self.m,):
            raise DimensionError("contraction coefficients have wrong length")
        out = Poly(self.m)
        for j in range(self.m):
            if u[j] == 0.0:
                continue
            for k in range(self.m):
                if v[k] == 0.0:
                    continue
                out = out + self.components[j][k].scale(u[j] * v[k])
        return out

    def to_dict(self):
        return {
            "m": self.m,
            "symmetry": self.symmetry,
            "components": [[p.to_dict() for p in row] for row in self.components],
        }

    @classmethod
    def from_dict(cls, data):
        m = data["m"]
        comps = [
            [Poly.from_dict(d, m) for d in row] for row in data["components"]
        ]
        return cls(comps, symmetry=data.get("symmetry", "none"), validate_tol=None)

    def __repr__(self):
        return f"PolyTensorField(m={self.m}, symmetry={self.symmetry!r})"

    def pretty(self, names=None, tol=1e-12):
        lines = []
        for j in range(self.m):
            krange = (
                range(j + 1, self.m)
                if self.symmetry == "antisymmetric"
                else range(j, self.m)
                if self.symmetry == "symmetric"
                else range(self.m)
            )
            for k in krange:
                p = self.components[j][k]
                if not p.is_zero(tol):
                    lines.append(f"T[{j + 1},{k + 1}] = {p.pretty(names, tol)}")
        return "\n".join(lines) if lines else "T = 0"
