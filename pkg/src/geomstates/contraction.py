"""Propagation of tensor fields along state-space flows and extraction of
the contracted algebra structure they converge to.

A vector field ``Z`` acts on rank-2 contravariant tensor fields through the
Lie derivative

    ``(L_Z T)^{jk} = Z^m d_m T^{jk} - T^{mk} d_m Z^j - T^{jm} d_m Z^k``,

and the flow ``Phi_t`` of ``Z`` pushes tensors forward; on the polynomial
coefficient space this push-forward is the one-parameter group
``T_t = exp(-t L_Z) T``.  For affine ``Z`` the coefficient space of each
degree-<=2 component is finite dimensional and ``L_Z`` becomes an explicit
matrix (the superoperator built here), so the entire tensor flow reduces to
a matrix exponential and its ``t -> infinity`` behaviour to a spectral
analysis:

* eigenvalues of the superoperator with positive real part are decaying
  directions of the tensor flow,
* the (clustered) zero eigenvalues carry the limit tensor, provided the
  initial tensor does not excite a defective (non-semisimple) zero mode,
* eigenvalues with negative real part are exponentially divergent tensor
  modes, and purely imaginary ones oscillate.

When both the Poisson and the symmetric tensor fields converge, their
limits define a *contracted* Lie-Jordan product pair on the same function
space, generally non-isomorphic to the original one; when the flow instead
has divergent tensor modes, the algebra can still be read off on the
stationary limit set by restricting the static products to it.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dc_field

import numpy as np
import scipy.linalg
from scipy.linalg import get_lapack_funcs

from .errors import (
    ContractionMismatchError,
    DegreeOverflowError,
    DimensionError,
    InvariantViolationError,
    LimitExistsError,
)
from .poly import Poly, PolyTensorField, PolyVectorField
from .states import StateCoordinates
from .tensors import poisson_field, symmetric_field
from .dynamics import affine_flow_map, stationary_points

__all__ = [
    "lie_derivative",
    "tensor_pairs",
    "flatten_poly",
    "unflatten_poly",
    "flatten_field",
    "unflatten_field",
    "slot_label",
    "LieDerivativeSuperoperator",
    "build_superoperator",
    "TensorFlowFamily",
    "flow_family",
    "flow_tensor",
    "pushforward_affine",
    "DivergentMode",
    "LimitAnalysis",
    "asymptotic_limit",
    "ContractedTables",
    "extract_contracted_products",
    "verify_contracted_axioms",
    "lie_algebra_dimensions",
    "LimitSetAlgebra",
    "limit_set_algebra",
    "matches_level_algebra",
    "ContractionReport",
    "analyze_contraction",
    "format_product_table",
]


# -------------------------------------------------------------- Lie derivative


def lie_derivative(Z, T, tol=1e-12):
    """Lie derivative of a tensor field along a vector field.

    Exact on polynomial coefficients.  For affine ``Z`` the result is again
    of degree <= 2; quadratic ``Z`` is accepted only when all cubic terms
    cancel within ``tol`` (relative to the coefficient scale), otherwise
    :class:`DegreeOverflowError` is raised.
    """
    if Z.m != T.m:
        raise DimensionError("field and tensor live on different spaces")
    m = T.m
    scale = max(1.0, Z.max_abs() * T.max_abs())
    out = []
    for j in range(m):
        row = []
        for k in range(m):
            acc = Poly(m)
            c3 = np.zeros((m, m, m))
            for mu in range(m):
                for a, b in (
                    (Z.components[mu], T.components[j][k].partial(mu)),
                    (T.components[mu][k].scale(-1.0), Z.components[j].partial(mu)),
                    (T.components[j][mu].scale(-1.0), Z.components[k].partial(mu)),
                ):
                    prod, over3, over4 = a.multiply_tracked(b)
                    if over4 > tol * scale:
                        raise DegreeOverflowError(
                            "Lie derivative produced quartic terms"
                        )
                    acc = acc + prod
                    c3 += over3
            if float(np.abs(c3).max(initial=0.0)) > tol * scale:
                raise DegreeOverflowError(
                    f"Lie derivative component ({j},{k}) has non-cancelling "
                    f"cubic terms of size {np.abs(c3).max():.3e}"
                )
            row.append(acc)
        out.append(row)
    symmetry = T.symmetry
    return PolyTensorField(out, symmetry=symmetry, validate_tol=None)


# ------------------------------------------------------------------ flattening


def tensor_pairs(m, symmetry):
    """Canonical independent component list for a given symmetry type."""
    if symmetry == "antisymmetric":
        return [(j, k) for j in range(m) for k in range(j + 1, m)]
    if symmetry == "symmetric":
        return [(j, k) for j in range(m) for k in range(j, m)]
    if symmetry == "none":
        return [(j, k) for j in range(m) for k in range(m)]
    raise ValueError(f"unknown symmetry {symmetry!r}")


def coeff_size(m):
    """Length of one component's coefficient vector: 1 + m + m(m+1)/2."""
    return 1 + m + m * (m + 1) // 2


def flatten_poly(p):
    iu = np.triu_indices(p.m)
    return np.concatenate(([p.c0], p.c1, p.c2[iu]))


def unflatten_poly(vec, m):
    vec = np.asarray(vec, dtype=float)
    q = coeff_size(m)
    if vec.shape != (q,):
        raise DimensionError(f"coefficient vector must have length {q}")
    c0 = vec[0]
    c1 = vec[1 : 1 + m]
    c2 = np.zeros((m, m))
    iu = np.triu_indices(m)
    c2[iu] = vec[1 + m :]
    c2 = c2 + c2.T - np.diag(np.diag(c2))
    return Poly(m, c0, c1, c2)


def flatten_field(T):
    """Stack the canonical components' coefficient vectors (pair-major)."""
    return np.concatenate(
        [flatten_poly(T.components[j][k]) for j, k in tensor_pairs(T.m, T.symmetry)]
    )


def unflatten_field(vec, m, symmetry):
    pairs = tensor_pairs(m, symmetry)
    q = coeff_size(m)
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (len(pairs) * q,):
        raise DimensionError(
            f"flat vector must have length {len(pairs) * q}, got {vec.shape}"
        )
    grid = [[Poly(m) for _ in range(m)] for _ in range(m)]
    sgn = -1.0 if symmetry == "antisymmetric" else 1.0
    for idx, (j, k) in enumerate(pairs):
        p = unflatten_poly(vec[idx * q : (idx + 1) * q], m)
        grid[j][k] = p
        if symmetry != "none" and k != j:
            grid[k][j] = p.scale(sgn)
    return PolyTensorField(grid, symmetry=symmetry, validate_tol=None)


def slot_label(m, flat_index, symmetry, names=None):
    """Readable name of one flattened coefficient slot,
    e.g. ``"T[1,2]:x8"`` for the x8-coefficient of the (1,2) component."""
    pairs = tensor_pairs(m, symmetry)
    q = coeff_size(m)
    pidx, sidx = divmod(int(flat_index), q)
    j, k = pairs[pidx]
    if names is None:
        names = [f"x{i + 1}" for i in range(m)]
    if sidx == 0:
        coeff = "1"
    elif sidx <= m:
        coeff = names[sidx - 1]
    else:
        iu = np.triu_indices(m)
        l, p = iu[0][sidx - m - 1], iu[1][sidx - m - 1]
        coeff = f"{names[l]}^2" if l == p else f"{names[l]}*{names[p]}"
    return f"T[{j + 1},{k + 1}]:{coeff}"


# --------------------------------------------------------------- superoperator


@dataclass
class LieDerivativeSuperoperator:
    """Matrix of ``L_Z`` on the flattened coefficient space of one symmetry
    sector; the tensor flow is ``flat(T_t) = expm(-t * matrix) flat(T_0)``."""

    m: int
    symmetry: str
    matrix: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray

    @property
    def size(self):
        return self.matrix.shape[0]

    @property
    def pairs(self):
        return tensor_pairs(self.m, self.symmetry)

    def is_diagonal(self):
        return not np.any(self.matrix - np.diag(np.diag(self.matrix)))


def build_superoperator(Z, symmetry):
    """Lie-derivative matrix of an affine field on one symmetry sector.

    Built column-by-column (batched) from the action on coefficient basis
    tensors; requires ``Z`` affine, since only then does the Lie derivative
    preserve the degree-<=2 coefficient space with no cancellation caveats.
    """
    if not Z.is_affine:
        raise InvariantViolationError(
            "tensor-flow superoperators require an affine vector field"
        )
    m = Z.m
    alpha, beta = Z.linear_parts()
    pairs = tensor_pairs(m, symmetry)
    q = coeff_size(m)
    P = len(pairs)
    B = P * q
    sgn = -1.0 if symmetry == "antisymmetric" else 1.0
    iu = np.triu_indices(m)
    n_tri = iu[0].size

    T0 = np.zeros((B, m, m))
    T1 = np.zeros((B, m, m, m))
    T2 = np.zeros((B, m, m, m, m))
    for pidx, (j, k) in enumerate(pairs):
        base = pidx * q
        T0[base, j, k] = 1.0
        if k != j:
            T0[base, k, j] = sgn
        for l in range(m):
            T1[base + 1 + l, j, k, l] = 1.0
            if k != j:
                T1[base + 1 + l, k, j, l] = sgn
        for t in range(n_tri):
            l, p = iu[0][t], iu[1][t]
            b = base + 1 + m + t
            T2[b, j, k, l, p] = 1.0
            T2[b, j, k, p, l] = 1.0
            if k != j:
                T2[b, k, j, l, p] = sgn
                T2[b, k, j, p, l] = sgn

    U0 = np.einsum("l,bjkl->bjk", beta, T1)
    U0 -= np.einsum("jm,bmk->bjk", alpha, T0)
    U0 -= np.einsum("km,bjm->bjk", alpha, T0)

    U1 = np.einsum("ml,bjkm->bjkl", alpha, T1)
    U1 += 2.0 * np.einsum("bjklp,p->bjkl", T2, beta)
    U1 -= np.einsum("jm,bmkl->bjkl", alpha, T1)
    U1 -= np.einsum("km,bjml->bjkl", alpha, T1)

    U2 = np.einsum("ml,bjkmp->bjklp", alpha, T2)
    U2 += np.einsum("mp,bjklm->bjklp", alpha, T2)
    U2 -= np.einsum("jm,bmklp->bjklp", alpha, T2)
    U2 -= np.einsum("km,bjmlp->bjklp", alpha, T2)

    pj = np.array([j for j, _ in pairs])
    pk = np.array([k for _, k in pairs])
    M0 = U0[:, pj, pk][:, :, None]
    M1 = U1[:, pj, pk, :]
    M2 = U2[:, pj, pk][:, :, iu[0], iu[1]]
    M = np.concatenate([M0, M1, M2], axis=2).reshape(B, B).T
    return LieDerivativeSuperoperator(
        m=m, symmetry=symmetry, matrix=np.ascontiguousarray(M), alpha=alpha, beta=beta
    )


@dataclass
class TensorFlowFamily:
    """One-parameter family ``T_t = exp(-t L_Z) T_0`` of tensor fields."""

    superop: LieDerivativeSuperoperator
    initial: PolyTensorField
    flat0: np.ndarray

    def tensor_at(self, t):
        return unflatten_field(
            self.flat_at(t), self.superop.m, self.superop.symmetry
        )

    def flat_at(self, t):
        M = self.superop.matrix
        if self.superop.is_diagonal():
            return np.exp(-float(t) * np.diag(M)) * self.flat0
        return scipy.linalg.expm(-float(t) * M) @ self.flat0


def flow_family(Z, T):
    """Build the flow family of a tensor field along an affine field."""
    sup = build_superoperator(Z, T.symmetry)
    return TensorFlowFamily(superop=sup, initial=T, flat0=flatten_field(T))


def flow_tensor(Z, T, t):
    """The push-forward ``Phi_{t*} T`` of a tensor field along the flow."""
    return flow_family(Z, T).tensor_at(t)


def pushforward_affine(Z, T, t, y):
    """Point value of the push-forward by the *geometric* route.

    Independent of the coefficient-space exponential: evaluates
    ``(Phi_{t*}T)(y) = E T(Phi_{-t}(y)) E^T`` with ``E = exp(tA)`` the
    (constant) Jacobian of the affine flow map.  Used to cross-check
    :func:`flow_tensor`.
    """
    A, b = Z.linear_parts()
    E, _ = affine_flow_map(A, b, t)
    Eneg, fneg = affine_flow_map(A, b, -t)
    xprev = Eneg @ np.asarray(y, dtype=float) + fneg
    return E @ T(xprev) @ E.T


# ------------------------------------------------------------------ asymptotics


@dataclass
class DivergentMode:
    """One non-decaying excited tensor-flow mode.

    ``eigenvalue`` is the superoperator eigenvalue ``lam``; the mode's
    amplitude in the flow behaves like ``exp(growth_rate * t)`` with
    ``growth_rate = -Re(lam)`` (0 for oscillatory or polynomially growing
    modes).  ``direction`` is a unit vector in the flattened coefficient
    space and ``component`` names its dominant slots.
    """

    eigenvalue: complex
    growth_rate: float
    amplitude: float
    direction: np.ndarray
    component: str
    polynomial_growth: bool = False
    oscillatory: bool = False


@dataclass
class LimitAnalysis:
    """Outcome of the t -> infinity analysis of one tensor-flow family."""

    verdict: str  # "limit" | "divergent" | "oscillatory"
    limit: PolyTensorField | None
    limit_flat: np.ndarray | None
    modes: list
    eigenvalues: np.ndarray
    amplitudes: dict
    defect: float
    etol: float
    symmetry: str


def _quasi_eigs(T):
    """Eigenvalues of a real quasi-triangular (Schur) matrix."""
    N = T.shape[0]
    vals = []
    i = 0
    while i < N:
        if i + 1 < N and T[i + 1, i] != 0.0:
            vals.extend(np.linalg.eigvals(T[i : i + 2, i : i + 2]))
            i += 2
        else:
            vals.append(complex(T[i, i]))
            i += 1
    return np.array(vals, dtype=complex)


def _split_leading(T, Q, k, vec):
    """Spectral component of ``vec`` in the leading invariant subspace of a
    sorted real Schur form ``(T, Q, k)``.

    Returns ``(lead_coords, rest_coords)``: the leading part is
    ``Q[:, :k] @ lead_coords`` in full coordinates, and the complementary
    spectral part evolves under ``T[k:, k:]`` in ``rest_coords`` with
    embedding ``v -> Q @ [Y v; v]``, ``Y`` the Sylvester coupling solution.
    """
    N = T.shape[0]
    phi = Q.T @ vec
    if k == 0:
        return np.zeros(0), phi, None
    if k == N:
        return phi, np.zeros(0), None
    T11, T12, T22 = T[:k, :k], T[:k, k:], T[k:, k:]
    trsyl = get_lapack_funcs(("trsyl",), (T11, T22))[0]
    x, sc, info = trsyl(T11, T22, -T12, isgn=-1)
    if info < 0:
        raise InvariantViolationError("Sylvester solve failed in spectral split")
    Y = x / sc
    lead = phi[:k] - Y @ phi[k:]
    return lead, phi[k:], Y


def _group_modes(block, coords, embed, m, symmetry, oscillatory=False):
    """Eigen-modes of a small quasi-triangular cluster, grouped by value."""
    if block.shape[0] == 0 or np.linalg.norm(coords) == 0.0:
        return []
    vals, vecs = np.linalg.eig(block)
    try:
        combo = np.linalg.solve(vecs, coords.astype(complex))
    except np.linalg.LinAlgError:
        # defective cluster: report it as a single unresolved mode
        full = embed(coords)
        nrm = float(np.linalg.norm(full))
        direction = full / nrm if nrm > 0 else full
        lead = vals[np.argmax(-vals.real)]
        return [
            DivergentMode(
                eigenvalue=complex(lead),
                growth_rate=float(-lead.real),
                amplitude=nrm,
                direction=direction,
                component=_describe(direction, m, symmetry),
                polynomial_growth=True,
                oscillatory=oscillatory,
            )
        ]
    groups = {}
    for i, v in enumerate(vals):
        key = (round(v.real, 9), round(abs(v.imag), 9))
        groups.setdefault(key, []).append(i)
    modes = []
    for key, idx in sorted(groups.items()):
        part = vecs[:, idx] @ combo[idx]
        full = embed(part.real) + 1j * embed(part.imag)
        amp = float(np.linalg.norm(full))
        if amp == 0.0:
            continue
        dirvec = full.real if np.linalg.norm(full.real) > 0 else full.imag
        nrm = float(np.linalg.norm(dirvec))
        direction = dirvec / nrm if nrm > 0 else dirvec
        lam = complex(key[0], key[1])
        modes.append(
            DivergentMode(
                eigenvalue=lam,
                growth_rate=float(max(-lam.real, 0.0)),
                amplitude=amp,
                direction=direction,
                component=_describe(direction, m, symmetry),
                oscillatory=oscillatory,
            )
        )
    modes.sort(key=lambda md: -md.amplitude)
    return modes


def _describe(direction, m, symmetry, top=3):
    order = np.argsort(-np.abs(direction))
    parts = []
    for i in order[:top]:
        if abs(direction[i]) < 1e-6:
            break
        parts.append(f"{direction[i]:+.4g} {slot_label(m, i, symmetry)}")
    return "  ".join(parts) if parts else "0"


def _classify_real_diagonal(fam, zero_tol, proj_tol):
    M = fam.superop.matrix
    lam = np.diag(M).copy()
    f0 = fam.flat0
    scale = max(1.0, float(np.linalg.norm(f0)))
    etol = zero_tol * max(1.0, float(np.abs(lam).max(initial=0.0)))
    zero = np.abs(lam) <= etol
    grow = (~zero) & (lam < 0.0)
    decay = (~zero) & (lam > 0.0)

    def amp(mask):
        return float(np.linalg.norm(f0[mask]))

    amplitudes = {
        "zero": amp(zero),
        "growing": amp(grow),
        "oscillatory": 0.0,
        "decaying": amp(decay),
    }
    m, symmetry = fam.superop.m, fam.superop.symmetry
    modes = []
    excited = grow & (np.abs(f0) > proj_tol * scale)
    if np.any(excited):
        for lv in sorted(set(np.round(lam[excited], 9))):
            mask = excited & (np.round(lam, 9) == lv)
            direction = np.zeros_like(f0)
            direction[mask] = f0[mask]
            nrm = float(np.linalg.norm(direction))
            direction = direction / nrm
            modes.append(
                DivergentMode(
                    eigenvalue=complex(lv),
                    growth_rate=float(-lv),
                    amplitude=nrm,
                    direction=direction,
                    component=_describe(direction, m, symmetry),
                )
            )
        modes.sort(key=lambda md: -md.amplitude)
        verdict = "divergent"
        limit = limit_flat = None
    else:
        verdict = "limit"
        limit_flat = np.where(zero, f0, 0.0)
        limit = unflatten_field(limit_flat, m, symmetry)
    return LimitAnalysis(
        verdict=verdict,
        limit=limit,
        limit_flat=limit_flat,
        modes=modes,
        eigenvalues=lam.astype(complex),
        amplitudes=amplitudes,
        defect=0.0,
        etol=etol,
        symmetry=symmetry,
    )


def asymptotic_limit(fam, zero_tol=1e-8, proj_tol=1e-9):
    """Classify the ``t -> infinity`` behaviour of a tensor-flow family.

    Verdicts:

    * ``"limit"`` — every superoperator mode excited by the initial tensor
      either decays or lies in a semisimple zero cluster; the limit tensor
      (the zero-cluster spectral projection of the initial tensor) is
      returned.  Components with |projection| below ``proj_tol`` relative
      to the initial tensor norm count as unexcited.
    * ``"divergent"`` — some exponentially growing mode is excited (or a
      defective zero mode, which grows polynomially and is flagged so);
      the growing modes are reported with rate, amplitude and direction.
    * ``"oscillatory"`` — no growth, but a purely imaginary excited mode
      prevents convergence; reported distinctly, not as a limit.

    Eigenvalue classification uses ``zero_tol`` relative to the spectral
    scale.  The analysis is exact linear algebra on the superoperator:
    sorted real Schur splittings peel off (1) everything decaying, (2) the
    zero cluster, (3) the growing cluster, leaving oscillatory modes.
    """
    sup = fam.superop
    if sup.is_diagonal():
        return _classify_real_diagonal(fam, zero_tol, proj_tol)
    M = sup.matrix
    f0 = fam.flat0
    N = M.shape[0]
    m, symmetry = sup.m, sup.symmetry
    scale = max(1.0, float(np.linalg.norm(f0)))
    spec_scale = max(
        1.0,
        min(
            float(np.linalg.norm(M, 1)),
            float(np.linalg.norm(M, np.inf)),
            float(np.linalg.norm(M, "fro")),
        ),
    )
    etol = zero_tol * spec_scale

    # level 1: non-decaying spectrum leading, pure decay trailing
    T, Q, k1 = scipy.linalg.schur(
        M, output="real", sort=lambda re, im: re <= etol
    )
    eigenvalues = _quasi_eigs(T)
    w, _, _ = _split_leading(T, Q, k1, f0)
    Z1 = Q[:, :k1]
    decay_amp = float(np.linalg.norm(f0 - Z1 @ w)) if k1 else float(
        np.linalg.norm(f0)
    )

    v_zero = np.zeros(N)
    grow_vec = np.zeros(N)
    osc_vec = np.zeros(N)
    grow_modes, osc_modes = [], []
    defect = 0.0

    if k1:
        T11 = T[:k1, :k1]
        # level 2: zero cluster leading within the non-decaying block
        S, Q2, k2 = scipy.linalg.schur(
            T11, output="real", sort=lambda re, im: re * re + im * im <= etol * etol
        )
        zc, rest, Y2 = _split_leading(S, Q2, k2, w)
        v_zero = Z1 @ (Q2[:, :k2] @ zc) if k2 else np.zeros(N)
        defect = float(np.linalg.norm(M @ v_zero))

        if k2 < k1:
            S22 = S[k2:, k2:]

            def embed_rest(v):
                if Y2 is None:
                    return Z1 @ (Q2 @ v)
                return Z1 @ (Q2 @ np.concatenate([Y2 @ v, v]))

            # level 3: growing cluster leading within the remainder
            G, Q3, k3 = scipy.linalg.schur(
                S22, output="real", sort=lambda re, im: re < -etol
            )
            gc, osc_chi, Y3 = _split_leading(G, Q3, k3, rest)
            gpart = Q3[:, :k3] @ gc if k3 else np.zeros(rest.shape[0])
            opart = rest - gpart
            grow_vec = embed_rest(gpart)
            osc_vec = embed_rest(opart)
            if k3:
                grow_modes = _group_modes(
                    G[:k3, :k3],
                    gc,
                    lambda v: embed_rest(Q3[:, :k3] @ v),
                    m,
                    symmetry,
                )
            if k3 < rest.shape[0]:
                def embed_osc(v):
                    if Y3 is None:
                        return embed_rest(Q3 @ v)
                    return embed_rest(Q3 @ np.concatenate([Y3 @ v, v]))

                osc_modes = _group_modes(
                    G[k3:, k3:],
                    osc_chi,
                    embed_osc,
                    m,
                    symmetry,
                    oscillatory=True,
                )

    amplitudes = {
        "zero": float(np.linalg.norm(v_zero)),
        "growing": float(np.linalg.norm(grow_vec)),
        "oscillatory": float(np.linalg.norm(osc_vec)),
        "decaying": decay_amp,
    }
    cut = proj_tol * scale
    zero_excited = amplitudes["zero"] > cut
    zero_defective = zero_excited and defect > 1e-6 * amplitudes["zero"]

    if amplitudes["growing"] > cut or zero_defective:
        modes = [md for md in grow_modes if md.amplitude > cut]
        if zero_defective:
            direction = v_zero / amplitudes["zero"]
            modes.append(
                DivergentMode(
                    eigenvalue=0j,
                    growth_rate=0.0,
                    amplitude=amplitudes["zero"],
                    direction=direction,
                    component=_describe(direction, m, symmetry),
                    polynomial_growth=True,
                )
            )
        return LimitAnalysis(
            verdict="divergent",
            limit=None,
            limit_flat=None,
            modes=modes,
            eigenvalues=eigenvalues,
            amplitudes=amplitudes,
            defect=defect,
            etol=etol,
            symmetry=symmetry,
        )
    if amplitudes["oscillatory"] > cut:
        return LimitAnalysis(
            verdict="oscillatory",
            limit=None,
            limit_flat=None,
            modes=[md for md in osc_modes if md.amplitude > cut],
            eigenvalues=eigenvalues,
            amplitudes=amplitudes,
            defect=defect,
            etol=etol,
            symmetry=symmetry,
        )
    limit_flat = v_zero
    return LimitAnalysis(
        verdict="limit",
        limit=unflatten_field(limit_flat, m, symmetry),
        limit_flat=limit_flat,
        modes=[],
        eigenvalues=eigenvalues,
        amplitudes=amplitudes,
        defect=defect,
        etol=etol,
        symmetry=symmetry,
    )


# ------------------------------------------------------- contracted products


@dataclass
class ContractedTables:
    """Product tables of a contracted Lie-Jordan pair.

    ``poisson[j][k]`` is the limit bracket ``{x_j, x_k}_inf`` and
    ``jordan[j][k]`` the limit product ``(x_j, x_k)_inf`` (the limit
    symmetric tensor plus ``x_j x_k``), as polynomials.  When every entry
    is affine (the structure constants of a bona fide algebra on the
    coordinate functions), ``linear`` is True and the full structure
    constant arrays over the unit-extended basis are provided.
    """

    m: int
    poisson: list
    jordan: list
    linear: bool
    c_full: np.ndarray | None
    d_full: np.ndarray | None


def extract_contracted_products(lam_limit, r_limit, quad_tol=1e-9):
    m = lam_limit.m
    if r_limit.m != m:
        raise DimensionError("limit tensors live on different spaces")
    poisson = [[lam_limit.component(j, k).copy() for k in range(m)] for j in range(m)]
    jordan = []
    for j in range(m):
        row = []
        for k in range(m):
            c2 = np.zeros((m, m))
            c2[j, k] += 0.5
            c2[k, j] += 0.5
            row.append(r_limit.component(j, k) + Poly(m, c2=c2))
        jordan.append(row)
    linear = all(
        p.max_abs_quadratic() <= quad_tol
        for grid in (poisson, jordan)
        for rw in grid
        for p in rw
    )
    c_full = d_full = None
    if linear:
        c_full = np.zeros((m + 1, m + 1, m + 1))
        d_full = np.zeros((m + 1, m + 1, m + 1))
        for mu in range(m + 1):
            d_full[0, mu, mu] = 1.0
            d_full[mu, 0, mu] = 1.0
        d_full[0, 0, 0] = 1.0
        for j in range(m):
            for k in range(m):
                c_full[j + 1, k + 1, 0] = poisson[j][k].c0
                c_full[j + 1, k + 1, 1:] = poisson[j][k].c1
                d_full[j + 1, k + 1, 0] = jordan[j][k].c0
                d_full[j + 1, k + 1, 1:] = jordan[j][k].c1
    return ContractedTables(
        m=m, poisson=poisson, jordan=jordan, linear=linear, c_full=c_full, d_full=d_full
    )


def verify_contracted_axioms(tables, trials=50, seed=0):
    """Check the Lie-Jordan axioms plus star associativity on contracted
    structure constants.  Requires linear tables."""
    from .algebra import AxiomReport

    if not tables.linear:
        raise InvariantViolationError(
            "axiom verification needs linear product tables"
        )
    c, d = tables.c_full, tables.d_full
    dim = tables.m + 1
    rng = np.random.default_rng(seed)

    def lie(u, v):
        return np.einsum("i,j,ijk->k", u, v, c)

    def jor(u, v):
        return np.einsum("i,j,ijk->k", u, v, d)

    star = d + 1j * c

    def sprod(u, v):
        return np.einsum("i,j,ijk->k", u, v, star)

    res = dict(
        jacobi=0.0, jordan_identity=0.0, leibniz=0.0, associator=0.0,
        star_associativity=0.0,
    )
    for _ in range(trials):
        a, b, cc = (rng.normal(size=dim) for _ in range(3))
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
        za = a + 1j * rng.normal(size=dim)
        zb = b + 1j * rng.normal(size=dim)
        zc = cc + 1j * rng.normal(size=dim)
        r = sprod(sprod(za, zb), zc) - sprod(za, sprod(zb, zc))
        res["star_associativity"] = max(
            res["star_associativity"], float(np.abs(r).max())
        )
    return AxiomReport(trials=trials, **res)


def lie_algebra_dimensions(c_full):
    """(derived-subalgebra dimension, center dimension) of the traceless
    block of a Lie structure-constant array."""
    m = c_full.shape[0] - 1
    c = c_full[1:, 1:, 1:]
    derived = int(np.linalg.matrix_rank(c.reshape(m * m, m), tol=1e-9))
    center = m - int(np.linalg.matrix_rank(c.reshape(m, m * m), tol=1e-9))
    return derived, center


# --------------------------------------------------------- limit-set algebra


@dataclass
class LimitSetAlgebra:
    """Lie-Jordan structure of the static products restricted to the
    stationary affine set of the flow."""

    point: np.ndarray
    free_indices: list
    directions: np.ndarray
    poisson: list
    jordan: list
    closed: bool
    c_red: np.ndarray | None
    d_red: np.ndarray | None


def limit_set_algebra(Z, basis, verdict=None, closure_tol=1e-9):
    """Restrict the Poisson and symmetric brackets to the flow's limit set.

    The limit set is the stationary affine set of the (affine) field
    intersected with the state body.  Coordinates with no component along
    the set's directions are pinned to their stationary values; the product
    tables of the remaining free coordinates are returned, together with
    reduced structure constants when the restricted products close on the
    free coordinates.

    When the tensor flow converges (``verdict == "limit"``) this
    restriction is not the natural object — the contracted products are —
    so the function declines with :class:`LimitExistsError`; pass the
    precomputed verdict to skip re-analysis.
    """
    if verdict is None:
        fam = flow_family(Z, poisson_field(basis))
        verdict = asymptotic_limit(fam).verdict
    if verdict == "limit":
        raise LimitExistsError(
            "the tensor flow converges; use the contracted products of the "
            "limit tensors instead of a limit-set restriction"
        )
    st = stationary_points(Z, basis)
    if st.kind != "affine-set":
        raise InvariantViolationError(
            "limit-set reduction needs an affine stationary set"
        )
    x0 = st.points[0]
    D = st.directions
    m = basis.m
    free = [j for j in range(m) if D.shape[1] and np.abs(D[j]).max() > 1e-9]
    lam = poisson_field(basis)
    rfield = symmetric_field(basis)
    k = len(free)
    poisson = [[None] * k for _ in range(k)]
    jordan = [[None] * k for _ in range(k)]
    closed = True
    xj_poly = {}
    for a in range(k):
        for bidx in range(k):
            j, l = free[a], free[bidx]
            pj = lam.component(j, l).restrict(free, x0)
            ea = Poly.coordinate(m, j)
            eb = Poly.coordinate(m, l)
            jq = (rfield.component(j, l) + ea.multiply(eb)).restrict(free, x0)
            poisson[a][bidx] = pj
            jordan[a][bidx] = jq
            if pj.max_abs_quadratic() > closure_tol or jq.max_abs_quadratic() > closure_tol:
                closed = False
    c_red = d_red = None
    if closed:
        c_red = np.zeros((k + 1, k + 1, k + 1))
        d_red = np.zeros((k + 1, k + 1, k + 1))
        for mu in range(k + 1):
            d_red[0, mu, mu] = 1.0
            d_red[mu, 0, mu] = 1.0
        d_red[0, 0, 0] = 1.0
        for a in range(k):
            for bidx in range(k):
                c_red[a + 1, bidx + 1, 0] = poisson[a][bidx].c0
                c_red[a + 1, bidx + 1, 1:] = poisson[a][bidx].c1
                d_red[a + 1, bidx + 1, 0] = jordan[a][bidx].c0
                d_red[a + 1, bidx + 1, 1:] = jordan[a][bidx].c1
    return LimitSetAlgebra(
        point=x0,
        free_indices=free,
        directions=D,
        poisson=poisson,
        jordan=jordan,
        closed=closed,
        c_red=c_red,
        d_red=d_red,
    )


def matches_level_algebra(lsa, n, tol=1e-9):
    """Whether reduced structure constants equal those of an n-level system."""
    from .algebra import build_basis

    ref = build_basis(n)
    if lsa.c_red is None or lsa.c_red.shape != ref.lie_constants.shape:
        return False
    return bool(
        np.abs(lsa.c_red - ref.lie_constants).max() <= tol
        and np.abs(lsa.d_red - ref.jordan_constants).max() <= tol
    )


# ------------------------------------------------------------- full pipeline


@dataclass
class ContractionReport:
    """Complete contraction analysis of one Markovian flow."""

    n: int
    verdict: str  # combined: divergent > oscillatory > limit
    poisson: LimitAnalysis
    symmetric: LimitAnalysis
    stationary: object
    tables: ContractedTables | None = None
    axioms: object = None
    isomorphism: dict | None = None
    limit_set: LimitSetAlgebra | None = None

    def divergent_modes(self):
        out = []
        for name, ana in (("poisson", self.poisson), ("symmetric", self.symmetric)):
            for md in ana.modes:
                out.append((name, md))
        return out


def analyze_contraction(Z, basis, zero_tol=1e-8, proj_tol=1e-9, parallel=True):
    """Propagate both canonical tensor fields along a flow and classify.

    Returns a :class:`ContractionReport` carrying per-sector verdicts, the
    contracted product tables when both sectors converge (with axiom
    residuals and elementary isomorphism invariants of the contracted Lie
    part), or — for divergent flows — the divergent modes together with
    the limit-set restriction of the static products.
    """
    famL = flow_family(Z, poisson_field(basis))
    famR = flow_family(Z, symmetric_field(basis))
    if parallel and not famL.superop.is_diagonal():
        with ThreadPoolExecutor(max_workers=2) as ex:
            futL = ex.submit(asymptotic_limit, famL, zero_tol, proj_tol)
            futR = ex.submit(asymptotic_limit, famR, zero_tol, proj_tol)
            anaL, anaR = futL.result(), futR.result()
    else:
        anaL = asymptotic_limit(famL, zero_tol, proj_tol)
        anaR = asymptotic_limit(famR, zero_tol, proj_tol)
    st = stationary_points(Z, basis)
    if anaL.verdict == "divergent" or anaR.verdict == "divergent":
        verdict = "divergent"
    elif anaL.verdict == "oscillatory" or anaR.verdict == "oscillatory":
        verdict = "oscillatory"
    else:
        verdict = "limit"
    report = ContractionReport(
        n=basis.n,
        verdict=verdict,
        poisson=anaL,
        symmetric=anaR,
        stationary=st,
    )
    if verdict == "limit":
        tables = extract_contracted_products(anaL.limit, anaR.limit)
        report.tables = tables
        if tables.linear:
            report.axioms = verify_contracted_axioms(tables)
            derived, center = lie_algebra_dimensions(tables.c_full)
            report.isomorphism = {
                "derived_dim": derived,
                "center_dim": center,
                "description": (
                    f"contracted Lie part: derived subalgebra of dimension "
                    f"{derived}, center of dimension {center}"
                ),
            }
    elif st.kind == "affine-set":
        try:
            report.limit_set = limit_set_algebra(Z, basis, verdict=verdict)
        except (InvariantViolationError, LimitExistsError):
            report.limit_set = None
    return report


def contract_3level_decoherence(zero_tol=1e-8, proj_tol=1e-9, match_tol=1e-8):
    """Run the two three-level decoherence models and compare contractions.

    Both the uniform off-diagonal damping model (d = 3, rate 1) and the
    random-phase model (d = 3, rates (1, 1)) contract the tensor fields;
    this driver asserts that their contracted product tables coincide
    entry-wise within ``match_tol`` and returns the pair of reports.
    Raises :class:`ContractionMismatchError` otherwise.
    """
    from .algebra import build_basis
    from .dynamics import model_massive_decoherence, model_pure_decoherence

    basis = build_basis(3)
    zm = model_massive_decoherence(3, 1.0)
    zp = model_pure_decoherence(3, (1.0, 1.0))
    rm = analyze_contraction(zm, basis, zero_tol, proj_tol)
    rp = analyze_contraction(zp, basis, zero_tol, proj_tol)
    if rm.verdict != "limit" or rp.verdict != "limit":
        raise ContractionMismatchError(
            f"expected both models to converge, got {rm.verdict} / {rp.verdict}"
        )
    worst = 0.0
    for j in range(basis.m):
        for k in range(basis.m):
            for grid_m, grid_p in (
                (rm.tables.poisson, rp.tables.poisson),
                (rm.tables.jordan, rp.tables.jordan),
            ):
                diff = grid_m[j][k] - grid_p[j][k]
                worst = max(worst, diff.max_abs())
    if worst > match_tol:
        raise ContractionMismatchError(
            f"contracted tables of the two models differ by {worst:.3e} "
            f"(allowed {match_tol:.1e})"
        )
    return rm, rp


def format_product_table(tables, names=None, tol=1e-9):
    """Readable non-zero entries of contracted product tables."""
    m = tables.m
    if names is None:
        names = [f"x{j + 1}" for j in range(m)]
    lines = []
    for j in range(m):
        for k in range(j + 1, m):
            p = tables.poisson[j][k]
            if not p.is_zero(tol):
                lines.append(f"{{{names[j]},{names[k]}}} = {p.pretty(names, tol)}")
    for j in range(m):
        for k in range(j, m):
            p = tables.jordan[j][k]
            if not p.is_zero(tol):
                lines.append(f"({names[j]},{names[k]}) = {p.pretty(names, tol)}")
    return lines
