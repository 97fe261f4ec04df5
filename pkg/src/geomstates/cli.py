"""Command-line runner for state-space tensor scenarios.

``geomstates run <name|path>`` executes one scenario — either a builtin
model from the registry or a JSON scenario file — and writes plain-text
artifacts into an output directory:

``<name>_field_<label>.csv``
    Vector-field samples on a deterministic low-discrepancy grid
    (columns ``x_1..x_m, v_1..v_m``).  For two-level systems the grid
    fills the closed Bloch ball; for larger systems it fills a
    positivity-checked coordinate slice.  A few exact anchor points
    (the origin, poles, axis points, known stationary states) are
    always included so stationary rows appear exactly.
``<name>_trajectory.csv``
    An integral curve of the generator (columns ``t, x_1..x_m,
    purity``).
``<name>_report.json``
    The contraction analysis of the tensor flow: verdict, sector
    eigenvalues as ``[re, im]`` pairs, contracted or limit-set product
    tables as ``{c0, c1, c2}`` polynomials, and axiom residuals.
``<name>_tables.json``
    The static Poisson/Jordan product tables of the model's algebra.
``<name>_tensor_family.json``
    The transported tensor fields on a coarse time grid.

Artifacts are deterministic: the same scenario with the same seed
produces byte-identical files.  The sampling seed defaults to 7 and can
be overridden with the environment variable ``GEOM_SEED``.  Exit codes:
0 on success, 1 when a model invariant fails, 2 on usage errors
(unknown scenario, malformed file).

Scenario files are JSON objects::

    {
      "name": "my-run",
      "model": "phase-damping",            // builtin name, or:
      // "model": {"H": [[0, [0,-1]], [[0,1], 0]], "V": [ ... ]},
      "n": 2,                              // required for explicit models
      "outputs": ["field-samples", "trajectory", "contraction"],
      "parameters": {"gamma": 0.5, "t_end": 2.0, "x0": [0.3, 0, 0.5]}
    }

Matrix entries are real numbers or ``[re, im]`` pairs.  An explicit
``H`` is the traceless observable generating the Hamiltonian part in
the algebra's own convention ``d rho/dt = [[rho, H]]``; a conventional
commutator Hamiltonian ``H_c`` (``d rho/dt = -i [H_c, rho]``) enters as
``H = -2 H_c``.  Jump matrices ``V`` must be traceless.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import dataclass, field as dc_field
from pathlib import Path

import numpy as np
from scipy.stats import qmc

from .algebra import build_basis
from .errors import GeomstatesError, InvariantViolationError
from .poly import PolyVectorField
from .states import max_bloch_radius, StateCoordinates
from .tensors import (
    field_csv_rows,
    gradient_vf,
    hamiltonian_vf,
    jordan_bracket,
    poisson_bracket,
    poisson_field,
    symmetric_field,
)
from .dynamics import (
    LindbladModel,
    integrate,
    lindblad_vf,
    model_double_bracket,
    model_gisin,
    model_kaufman_morrison,
    model_massive_decoherence,
    model_phase_damping,
    model_pure_decoherence,
    model_qubit_dissipation,
    model_three_level_decay,
    state_from_coords,
)
from .contraction import analyze_contraction, flow_family, format_product_table

DEFAULT_SEED = 7
OUTPUT_KINDS = ("field-samples", "trajectory", "tensor-family", "contraction", "tables")

_DEFAULT_PARAMS = {
    "gamma": 1.0,
    "B": (0.0, 0.0, 1.0),
    "t_end": 5.0,
    "dt": None,
    "x0": None,
    "points": 500,
    "slice": None,
    "d": 3,
    "seed": DEFAULT_SEED,
}

_DEFAULT_X0 = {
    2: (0.3, 0.3, 0.8),
    3: (0.2, 0.1, 0.3, 0.05, -0.05, 0.1, -0.1, 0.25),
}


@dataclass
class RunSetup:
    """Everything one scenario run needs."""

    name: str
    basis: object
    generator: PolyVectorField
    fields: dict
    outputs: tuple
    x0: np.ndarray
    anchors: list = dc_field(default_factory=list)


# ------------------------------------------------------------------ registry


def _b_observable(basis, B):
    B = np.asarray(B, dtype=float)
    if B.shape != (3,):
        raise InvariantViolationError("B must have three components")
    if not np.any(B):
        raise InvariantViolationError("B must be nonzero")
    coeffs = np.zeros(4)
    coeffs[1:] = B
    return basis.observable(coeffs)


def _axis_anchors(u):
    u = np.asarray(u, dtype=float)
    return [np.zeros(u.shape[0]), u.copy(), -u, 0.5 * u, -0.5 * u]


def _x0_of(params, basis):
    x0 = params.get("x0")
    if x0 is None:
        x0 = _DEFAULT_X0.get(basis.n)
    if x0 is None:
        r = np.sqrt(2.0 / (basis.n * (basis.n - 1)))
        x0 = np.zeros(basis.m)
        x0[-1] = 0.8 * r
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (basis.m,):
        raise InvariantViolationError(
            f"x0 must have {basis.m} coordinates, got {x0.shape}"
        )
    return x0


def _setup_bloch_field(params):
    basis = build_basis(2)
    obs = _b_observable(basis, params["B"])
    ham = hamiltonian_vf(basis, obs)
    grad = gradient_vf(basis, obs)
    B = np.asarray(params["B"], dtype=float)
    u = B / np.linalg.norm(B)
    return RunSetup(
        name="bloch-field",
        basis=basis,
        generator=ham,
        fields={"hamiltonian": ham, "gradient-descent": -grad},
        outputs=("field-samples", "trajectory"),
        x0=_x0_of(params, basis),
        anchors=_axis_anchors(u),
    )


def _setup_phase_damping(params):
    basis = build_basis(2)
    Z = lindblad_vf(model_phase_damping(params["gamma"]))
    return RunSetup(
        name="phase-damping",
        basis=basis,
        generator=Z,
        fields={"generator": Z},
        outputs=("field-samples", "trajectory"),
        x0=_x0_of(params, basis),
        anchors=_axis_anchors([0.0, 0.0, 1.0]),
    )


def _setup_qubit_dissipation(params):
    basis = build_basis(2)
    Z = lindblad_vf(model_qubit_dissipation(params["gamma"]))
    return RunSetup(
        name="qubit-dissipation",
        basis=basis,
        generator=Z,
        fields={"generator": Z},
        outputs=("field-samples", "trajectory"),
        x0=_x0_of(params, basis),
        anchors=_axis_anchors([0.0, 0.0, 1.0]),
    )


def _diag_anchors(basis):
    """Origin plus small displacements along the diagonal coordinates."""
    anchors = [np.zeros(basis.m)]
    n = basis.n
    diag_idx = [j for j, el in enumerate(basis.elements[1:]) if
                np.abs(el - np.diag(np.diag(el))).max() < 1e-14]
    for j in diag_idx:
        e = np.zeros(basis.m)
        e[j] = 0.4
        anchors.append(e.copy())
        anchors.append(-0.25 * e)
    return anchors


def _setup_massive_decoherence(params):
    d = int(params["d"])
    basis = build_basis(d)
    Z = model_massive_decoherence(d, params["gamma"])
    return RunSetup(
        name="massive-decoherence",
        basis=basis,
        generator=Z,
        fields={"generator": Z},
        outputs=("field-samples", "trajectory"),
        x0=_x0_of(params, basis),
        anchors=_diag_anchors(basis),
    )


def _setup_pure_decoherence(params):
    d = int(params["d"])
    basis = build_basis(d)
    g = float(params["gamma"])
    Z = model_pure_decoherence(d, (d - 1) * (g,))
    return RunSetup(
        name="pure-decoherence",
        basis=basis,
        generator=Z,
        fields={"generator": Z},
        outputs=("field-samples", "trajectory"),
        x0=_x0_of(params, basis),
        anchors=_diag_anchors(basis),
    )


def _setup_three_level_decay(params):
    basis = build_basis(3)
    Z = lindblad_vf(model_three_level_decay())
    xstar = np.zeros(8)
    xstar[7] = 1.0 / np.sqrt(3.0)
    return RunSetup(
        name="three-level-decay",
        basis=basis,
        generator=Z,
        fields={"generator": Z},
        outputs=("field-samples", "trajectory"),
        x0=_x0_of(params, basis),
        anchors=[np.zeros(8), xstar],
    )


def _setup_gisin(params):
    basis = build_basis(2)
    obs = _b_observable(basis, params["B"])
    Z = model_gisin(basis, obs)
    B = np.asarray(params["B"], dtype=float)
    u = B / np.linalg.norm(B)
    return RunSetup(
        name="gisin",
        basis=basis,
        generator=Z,
        fields={"generator": Z},
        outputs=("field-samples", "trajectory"),
        x0=_x0_of(params, basis),
        anchors=_axis_anchors(u),
    )


def _setup_double_bracket(params):
    basis = build_basis(2)
    obs = _b_observable(basis, params["B"])
    Z = model_double_bracket(basis, obs)
    B = np.asarray(params["B"], dtype=float)
    u = B / np.linalg.norm(B)
    return RunSetup(
        name="double-bracket",
        basis=basis,
        generator=Z,
        fields={"generator": Z},
        outputs=("field-samples", "trajectory"),
        x0=_x0_of(params, basis),
        anchors=_axis_anchors(u),
    )


def _setup_kaufman_morrison(params):
    basis = build_basis(2)
    obs = _b_observable(basis, params["B"])
    s_obs = _b_observable(basis, -np.asarray(params["B"], dtype=float))
    Z = model_kaufman_morrison(basis, obs, s_obs)
    B = np.asarray(params["B"], dtype=float)
    u = B / np.linalg.norm(B)
    return RunSetup(
        name="kaufman-morrison",
        basis=basis,
        generator=Z,
        fields={"generator": Z},
        outputs=("field-samples", "trajectory"),
        x0=_x0_of(params, basis),
        anchors=_axis_anchors(u),
    )


REGISTRY = {
    "bloch-field": _setup_bloch_field,
    "phase-damping": _setup_phase_damping,
    "qubit-dissipation": _setup_qubit_dissipation,
    "massive-decoherence": _setup_massive_decoherence,
    "pure-decoherence": _setup_pure_decoherence,
    "three-level-decay": _setup_three_level_decay,
    "gisin": _setup_gisin,
    "double-bracket": _setup_double_bracket,
    "kaufman-morrison": _setup_kaufman_morrison,
}


# ------------------------------------------------------------------ sampling


def _psd_ok(basis, x, tol=1e-12):
    evals = np.linalg.eigvalsh(StateCoordinates(basis, x).matrix())
    return bool(evals.min() >= -tol)


def sample_states(basis, count, seed, anchors=(), slice_coords=None):
    """Deterministic quasi-uniform grid of valid states.

    Anchor points come first; the rest is a scrambled Halton sequence
    filtered by positivity — over the full coordinate ball for two-level
    systems, over a two-coordinate slice otherwise.
    """
    m, n = basis.m, basis.n
    # "+ 0.0" turns negative zeros into plain zeros for clean CSV output
    pts = [np.asarray(a, dtype=float) + 0.0 for a in anchors]
    if len(pts) >= count:
        return np.array(pts[:count])
    if slice_coords is None:
        cols = list(range(m)) if n == 2 else [0, 1]
    else:
        cols = [int(c) - 1 for c in slice_coords]
        if len(cols) < 1 or len(set(cols)) != len(cols) or any(
            c < 0 or c >= m for c in cols
        ):
            raise InvariantViolationError("slice coordinates out of range")
    R = max_bloch_radius(n)
    sampler = qmc.Halton(d=len(cols), scramble=True, seed=int(seed))
    need = count - len(pts)
    for _ in range(1000):
        if need <= 0:
            break
        for u in sampler.random(max(128, 2 * need)):
            x = np.zeros(m)
            x[cols] = (2.0 * u - 1.0) * R
            if _psd_ok(basis, x):
                pts.append(x)
                need -= 1
                if need <= 0:
                    break
    if need > 0:
        raise InvariantViolationError("state sampling failed to fill the grid")
    return np.array(pts)


# -------------------------------------------------------------- serializers


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonify(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, complex):
        return [float(obj.real), float(obj.imag)]
    return obj


def _grid_json(grid):
    return [[p.to_dict() for p in row] for row in grid]


def _analysis_json(ana):
    eigs = sorted(
        ([float(ev.real), float(ev.imag)] for ev in np.atleast_1d(ana.eigenvalues)),
        key=lambda p: (p[0], p[1]),
    )
    out = {
        "verdict": ana.verdict,
        "symmetry": ana.symmetry,
        "eigenvalues": eigs,
        "amplitudes": {k: float(v) for k, v in ana.amplitudes.items()},
        "defect": float(ana.defect),
        "tolerance": float(ana.etol),
        "modes": [
            {
                "eigenvalue": [float(md.eigenvalue.real), float(md.eigenvalue.imag)],
                "growth_rate": float(md.growth_rate),
                "amplitude": float(md.amplitude),
                "component": md.component,
                "polynomial_growth": bool(md.polynomial_growth),
                "oscillatory": bool(md.oscillatory),
            }
            for md in ana.modes
        ],
    }
    if ana.limit is not None:
        out["limit"] = ana.limit.to_dict()
    return out


def _axioms_json(ax):
    if ax is None:
        return None
    return {
        "jacobi": float(ax.jacobi),
        "jordan_identity": float(ax.jordan_identity),
        "leibniz": float(ax.leibniz),
        "associator": float(ax.associator),
        "star_associativity": (
            None if ax.star_associativity is None else float(ax.star_associativity)
        ),
        "trials": int(ax.trials),
    }


def _stationary_json(st):
    return {
        "kind": st.kind,
        "points": [p.tolist() for p in st.points],
        "residuals": [float(r) for r in st.residuals],
        "directions": None if st.directions is None else st.directions.tolist(),
        "in_body": st.in_body,
    }


def _limit_set_json(lsa):
    if lsa is None:
        return None
    names = [f"x_{j + 1}" for j in lsa.free_indices]
    out = {
        "point": lsa.point.tolist(),
        "free_coordinates": names,
        "poisson": _grid_json(lsa.poisson),
        "jordan": _grid_json(lsa.jordan),
        "closed": bool(lsa.closed),
    }
    k = len(lsa.free_indices)
    level = int(round(np.sqrt(k + 1)))
    if lsa.closed and level * level == k + 1:
        from .contraction import matches_level_algebra

        if matches_level_algebra(lsa, level):
            out["isomorphic_to_level"] = level
    return out


def report_json(report, model_name):
    """JSON-ready dict for a contraction report."""
    out = {
        "model": model_name,
        "n": int(report.n),
        "verdict": report.verdict,
        "sectors": {
            "poisson": _analysis_json(report.poisson),
            "symmetric": _analysis_json(report.symmetric),
        },
        "stationary": _stationary_json(report.stationary),
        "axioms": _axioms_json(report.axioms),
        "isomorphism": report.isomorphism,
        "limit_set": _limit_set_json(report.limit_set),
    }
    if report.tables is not None:
        out["tables"] = {
            "poisson": _grid_json(report.tables.poisson),
            "jordan": _grid_json(report.tables.jordan),
            "linear": bool(report.tables.linear),
        }
    else:
        out["tables"] = None
    return out


def static_tables_json(basis):
    m = basis.m
    lam = poisson_field(basis)
    rfield = symmetric_field(basis)
    poisson = [[None] * m for _ in range(m)]
    jordan = [[None] * m for _ in range(m)]
    for j in range(m):
        ej = np.zeros(m)
        ej[j] = 1.0
        for k in range(m):
            ek = np.zeros(m)
            ek[k] = 1.0
            poisson[j][k] = poisson_bracket(basis, ej, ek, field=lam)
            jordan[j][k] = jordan_bracket(basis, ej, ek, field=rfield)
    return {
        "n": basis.n,
        "names": [f"x_{j + 1}" for j in range(m)],
        "poisson": _grid_json(poisson),
        "jordan": _grid_json(jordan),
    }


# ------------------------------------------------------------------ writers


def _write_text(path, text):
    path.write_text(text, encoding="utf-8")


def _write_csv(path, rows):
    _write_text(path, "\n".join(",".join(row) for row in rows) + "\n")


def _write_json(path, obj):
    _write_text(
        path,
        json.dumps(_jsonify(obj), indent=2, sort_keys=True, allow_nan=False) + "\n",
    )


def _slug(name):
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", name).replace("-", "_").strip("_")


# ------------------------------------------------------------ scenario files


def _parse_matrix(obj, what):
    if not isinstance(obj, list) or not obj or not all(
        isinstance(r, list) for r in obj
    ):
        raise InvariantViolationError(f"{what} must be a list of rows")
    rows = []
    for row in obj:
        out = []
        for v in row:
            if isinstance(v, list):
                if len(v) != 2:
                    raise InvariantViolationError(
                        f"{what}: complex entries are [re, im] pairs"
                    )
                out.append(complex(float(v[0]), float(v[1])))
            elif isinstance(v, (int, float)):
                out.append(complex(float(v), 0.0))
            else:
                raise InvariantViolationError(f"{what}: bad matrix entry {v!r}")
        rows.append(out)
    M = np.array(rows, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvariantViolationError(f"{what} must be square")
    return M


def setup_from_scenario(data, params, default_name):
    """Build a RunSetup from a parsed scenario-file object."""
    if not isinstance(data, dict):
        raise InvariantViolationError("scenario file must hold a JSON object")
    merged = dict(params)
    file_params = data.get("parameters", {})
    if not isinstance(file_params, dict):
        raise InvariantViolationError("'parameters' must be an object")
    for key, value in file_params.items():
        if key not in _DEFAULT_PARAMS:
            raise InvariantViolationError(f"unknown parameter {key!r}")
        # explicit CLI flags win over scenario-file values
        if params.get("_explicit", {}).get(key, False):
            continue
        merged[key] = value

    model = data.get("model")
    if model is None:
        raise InvariantViolationError("scenario file needs a 'model' entry")
    if isinstance(model, str):
        if model not in REGISTRY:
            raise InvariantViolationError(
                f"unknown builtin model {model!r}; registered: "
                + ", ".join(REGISTRY)
            )
        setup = REGISTRY[model](merged)
    else:
        H = model.get("H")
        Vs = model.get("V", [])
        Hm = None if H is None else _parse_matrix(H, "H")
        Vms = [_parse_matrix(V, f"V[{i}]") for i, V in enumerate(Vs)]
        sizes = {M.shape[0] for M in ([Hm] if Hm is not None else []) + Vms}
        if not sizes:
            raise InvariantViolationError("explicit model needs H or V matrices")
        if len(sizes) != 1:
            raise InvariantViolationError("H and V matrices disagree in size")
        n = sizes.pop()
        if "n" in data and int(data["n"]) != n:
            raise InvariantViolationError(
                f"scenario says n={data['n']} but matrices are {n}x{n}"
            )
        basis = build_basis(n)
        Z = lindblad_vf(LindbladModel(basis, H=Hm, V=Vms))
        setup = RunSetup(
            name="scenario",
            basis=basis,
            generator=Z,
            fields={"generator": Z},
            outputs=("field-samples", "trajectory"),
            x0=_x0_of(merged, basis),
            anchors=[np.zeros(basis.m)],
        )
    name = data.get("name") or default_name
    setup.name = str(name)
    outputs = data.get("outputs")
    if outputs is not None:
        outputs = tuple(outputs)
        bad = [o for o in outputs if o not in OUTPUT_KINDS]
        if bad:
            raise InvariantViolationError(
                f"unknown outputs {bad}; supported: {', '.join(OUTPUT_KINDS)}"
            )
        setup.outputs = outputs
    return setup, merged


# ------------------------------------------------------------------ running


def _print_report_summary(report, lines):
    lines.append(f"contraction verdict: {report.verdict}")
    if report.verdict == "limit" and report.tables is not None:
        lines.append("contracted products:")
        table_lines = format_product_table(report.tables)
        if isinstance(table_lines, (list, tuple)):
            lines.extend("  " + t for t in table_lines)
        else:
            lines.append(table_lines)
        if report.axioms is not None:
            lines.append(
                f"axiom residuals: max {report.axioms.max_residual():.3e} "
                f"over {report.axioms.trials} trials"
            )
        if report.isomorphism:
            lines.append(report.isomorphism["description"])
    elif report.verdict == "divergent":
        for sector, md in report.divergent_modes():
            if md.growth_rate <= 0 and not md.polynomial_growth:
                continue
            kind = "polynomial" if md.polynomial_growth else (
                f"rate {md.growth_rate:.6g}"
            )
            lines.append(
                f"divergent mode [{sector}]: {kind}, amplitude "
                f"{md.amplitude:.6g}, {md.component}"
            )
        if report.limit_set is not None:
            lsa = report.limit_set
            names = [f"x_{j + 1}" for j in lsa.free_indices]
            pinned = [
                f"x_{j + 1}={lsa.point[j]:.6g}"
                for j in range(len(lsa.point))
                if j not in lsa.free_indices
            ]
            lines.append(
                "limit set: free coordinates " + ", ".join(names)
                + ("; pinned " + ", ".join(pinned) if pinned else "")
            )
            info = _limit_set_json(lsa)
            if "isomorphic_to_level" in info:
                lines.append(
                    "limit-set algebra matches a "
                    f"{info['isomorphic_to_level']}-level system"
                )


def run_scenario(target, out_dir="geomstates-out", params=None, report=False):
    """Execute a builtin or scenario file; returns (artifact dict, log lines).

    ``target`` is a registry name or a path to a JSON scenario file.
    ``params`` maps parameter names to overrides (``_explicit`` marks the
    ones that must beat scenario-file values).  ``report=True`` adds the
    contraction and static-table artifacts.
    """
    merged = dict(_DEFAULT_PARAMS)
    merged["_explicit"] = {}
    if params:
        for key, value in params.items():
            if key == "_explicit":
                merged["_explicit"] = dict(value)
                continue
            if key not in _DEFAULT_PARAMS:
                raise InvariantViolationError(f"unknown parameter {key!r}")
            merged[key] = value

    path = Path(target)
    looks_like_file = target.endswith(".json") or os.sep in target or path.is_file()
    if looks_like_file:
        if not path.is_file():
            raise FileNotFoundError(f"scenario file not found: {target}")
        data = json.loads(path.read_text(encoding="utf-8"))
        setup, merged = setup_from_scenario(data, merged, path.stem)
    elif target in REGISTRY:
        setup = REGISTRY[target](merged)
    else:
        raise KeyError(target)

    outputs = list(setup.outputs)
    if report:
        for extra in ("contraction", "tables"):
            if extra not in outputs:
                outputs.append(extra)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = _slug(setup.name)
    lines = [f"scenario: {setup.name} (n={setup.basis.n})"]
    artifacts = {}

    if "field-samples" in outputs:
        grid = sample_states(
            setup.basis,
            int(merged["points"]),
            merged["seed"],
            anchors=setup.anchors,
            slice_coords=merged["slice"],
        )
        paths = []
        for label, vf in setup.fields.items():
            p = out / f"{base}_field_{_slug(label)}.csv"
            rows = field_csv_rows(vf, grid)
            _write_csv(p, rows)
            lines.append(f"wrote {p} ({len(rows) - 1} samples)")
            paths.append(p)
        artifacts["field-samples"] = paths

    if "trajectory" in outputs:
        state0 = state_from_coords(setup.basis, setup.x0)
        traj = integrate(
            setup.generator, state0, merged["t_end"], dt=merged["dt"]
        )
        names = (
            ["t"]
            + [f"x_{j + 1}" for j in range(setup.basis.m)]
            + ["purity"]
        )
        rows = [names]
        purities = traj.purities()
        for i, t in enumerate(traj.times):
            vals = np.concatenate(([t], traj.xs[i], [purities[i]]))
            rows.append([f"{v:.17g}" for v in vals])
        p = out / f"{base}_trajectory.csv"
        _write_csv(p, rows)
        lines.append(f"wrote {p} ({len(rows) - 1} samples, {traj.method})")
        artifacts["trajectory"] = p

    if "tensor-family" in outputs:
        times = np.linspace(0.0, float(merged["t_end"]), 11)
        famL = flow_family(setup.generator, poisson_field(setup.basis))
        famR = flow_family(setup.generator, symmetric_field(setup.basis))
        obj = {
            "times": times.tolist(),
            "poisson": [famL.tensor_at(t).to_dict() for t in times],
            "symmetric": [famR.tensor_at(t).to_dict() for t in times],
        }
        p = out / f"{base}_tensor_family.json"
        _write_json(p, obj)
        lines.append(f"wrote {p}")
        artifacts["tensor-family"] = p

    if "contraction" in outputs:
        rep = analyze_contraction(setup.generator, setup.basis)
        _print_report_summary(rep, lines)
        p = out / f"{base}_report.json"
        _write_json(p, report_json(rep, setup.name))
        lines.append(f"wrote {p}")
        artifacts["contraction"] = p

    if "tables" in outputs:
        p = out / f"{base}_tables.json"
        _write_json(p, static_tables_json(setup.basis))
        lines.append(f"wrote {p}")
        artifacts["tables"] = p

    return artifacts, lines


# ---------------------------------------------------------------------- CLI


def _parse_floats(text, what, count=None):
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"{what} must be comma-separated numbers")
    if count is not None and len(vals) != count:
        raise argparse.ArgumentTypeError(f"{what} needs {count} components")
    return vals


def build_parser():
    parser = argparse.ArgumentParser(
        prog="geomstates",
        description="Tensorial state-space models: run scenarios, write "
        "deterministic CSV/JSON artifacts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser(
        "run", help="run a builtin scenario or a JSON scenario file"
    )
    runp.add_argument("scenario", help="builtin name or path to a scenario file")
    runp.add_argument("--out", default="geomstates-out", help="output directory")
    runp.add_argument("--gamma", type=float, default=None, help="damping rate")
    runp.add_argument(
        "--B",
        default=None,
        help="magnetic observable components bx,by,bz (two-level models)",
    )
    runp.add_argument("--t-end", type=float, default=None, help="trajectory length")
    runp.add_argument("--dt", type=float, default=None, help="trajectory sample step")
    runp.add_argument(
        "--x0", default=None, help="initial coordinates, comma separated"
    )
    runp.add_argument(
        "--points", type=int, default=None, help="field-sample grid size"
    )
    runp.add_argument(
        "--report",
        action="store_true",
        help="also write the contraction report and static product tables",
    )

    sub.add_parser("list", help="list the registered builtin scenarios")
    return parser


def _cli_params(args):
    params = {"_explicit": {}}

    def put(key, value):
        if value is not None:
            params[key] = value
            params["_explicit"][key] = True

    put("gamma", args.gamma)
    if args.B is not None:
        put("B", _parse_floats(args.B, "--B", 3))
    put("t_end", args.t_end)
    put("dt", args.dt)
    if args.x0 is not None:
        put("x0", _parse_floats(args.x0, "--x0"))
    put("points", args.points)

    seed_text = os.environ.get("GEOM_SEED")
    if seed_text is not None:
        try:
            put("seed", int(seed_text))
        except ValueError:
            raise argparse.ArgumentTypeError(
                f"GEOM_SEED must be an integer, got {seed_text!r}"
            )
    return params


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "list":
        for name in REGISTRY:
            print(name)
        return 0

    try:
        params = _cli_params(args)
    except argparse.ArgumentTypeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    try:
        _, lines = run_scenario(
            args.scenario, out_dir=args.out, params=params, report=args.report
        )
    except KeyError:
        print(
            f"error: unknown scenario {args.scenario!r}. Registered builtins:",
            file=sys.stderr,
        )
        for name in REGISTRY:
            print(f"  {name}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(
            f"error: could not parse scenario file {args.scenario}: "
            f"line {exc.lineno} column {exc.colno}: {exc.msg}",
            file=sys.stderr,
        )
        return 2
    except GeomstatesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    for line in lines:
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
