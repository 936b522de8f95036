"""Command-line entry point with machine-readable JSON/CSV artifacts.

Exit codes: 0 success, 2 validation/input error, 3 certificate failure.
Outputs are deterministic: JSON is emitted with sorted keys, and nothing
depends on wall time or machine identity.  Errors go to stderr as
``{"error": {"code": ..., "message": ...}}``.
"""

from __future__ import annotations

import os

# Honor the thread-count variable before numpy initializes its BLAS pools.
_threads = os.environ.get("HEISYOUNG_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import io as hio
from .exponents import (
    exponent_profile,
    gamma_stationarity_residual,
    parse_exponent,
    sharp_constant,
)
from .functional_equations import (
    DifferenceDataset,
    estimate_bilinear_phase,
    integrate_difference,
    recover_linear_phase,
    solve_additive_fe,
    solve_heis_fe,
)
from .gaussians import QuadratureSpec, lp_norm
from .heisenberg import standard_symplectic_form
from .pipeline import (
    SampledTriple,
    analyze_near_extremizer,
    make_diffuse_triple,
    sample_triple,
)
from .symplectic_factorization import symplectic_factor
from .trilinear import trilinear_euclid, trilinear_heis, trilinear_twisted

__all__ = ["RunConfig", "run", "main"]

_EXIT_OK = 0
_EXIT_VALIDATION = 2
_EXIT_CERTIFICATE = 3


@dataclass(frozen=True)
class RunConfig:
    """Parsed invocation: subcommand plus its options.

    ``seed`` is accepted for reproducibility bookkeeping; every current
    subcommand is deterministic, so outputs are byte-identical for a fixed
    config regardless of it.
    """

    command: str
    input: str | None = None
    out: str | None = None
    p: tuple | None = None
    dim: int | None = None
    d: int = 1
    form: str | None = None
    lam: float = 0.0
    eps: tuple = ()
    nx: int = 33
    nt: int = 65
    radius_mult: float = 6.0
    matrix: str | None = None
    kind: str | None = None
    L: str | None = None
    constant: float = 5.0
    spec: str | None = None
    scheme: str | None = None
    nodes: int | None = None
    radius_multiplier: float | None = None
    aux_nodes: int | None = None
    seed: int = 0


class _CliError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _emit(doc, out: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="ascii") as fh:
            fh.write(text)


def _emit_csv(header, rows, out: str | None) -> None:
    lines = [",".join(header)]
    lines += [",".join(str(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="ascii") as fh:
            fh.write(text)


def _load_json(path: str, what: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise _CliError("input-missing", f"{what}: no such file: {path}")
    except json.JSONDecodeError as exc:
        raise _CliError("input-malformed", f"{what}: not valid JSON ({exc})")


def _load_matrix(arg: str, what: str) -> np.ndarray:
    """Accept an inline JSON matrix (starts with '[') or a path to one."""
    if arg.lstrip().startswith("["):
        try:
            obj = json.loads(arg)
        except json.JSONDecodeError as exc:
            raise _CliError("input-malformed", f"{what}: inline JSON invalid ({exc})")
    else:
        obj = _load_json(arg, what)
        if isinstance(obj, dict) and "matrix" in obj:
            obj = obj["matrix"]
    try:
        M = np.asarray(obj, dtype=float)
    except (ValueError, TypeError):
        raise _CliError("input-malformed", f"{what}: not a rectangular numeric matrix")
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise _CliError("input-malformed", f"{what}: expected a square matrix, got shape {M.shape}")
    return M


def _parse_p(text: str) -> tuple:
    parts = [s for s in text.split(",") if s.strip()]
    if len(parts) != 3:
        raise _CliError("input-malformed", f"--p needs three comma-separated exponents, got {text!r}")
    return tuple(parse_exponent(s) for s in parts)


def _quad_spec(cfg: RunConfig) -> QuadratureSpec | None:
    """Quadrature settings: --spec file/inline JSON, then per-flag overrides."""
    fields: dict = {}
    if cfg.spec is not None:
        if cfg.spec.lstrip().startswith("{"):
            try:
                obj = json.loads(cfg.spec)
            except json.JSONDecodeError as exc:
                raise _CliError("input-malformed", f"--spec: inline JSON invalid ({exc})")
        else:
            obj = _load_json(cfg.spec, "--spec")
        if not isinstance(obj, dict):
            raise _CliError("input-malformed", "--spec must hold a JSON object")
        allowed = {"scheme", "nodes", "radius_multiplier", "aux_nodes"}
        bad = set(obj) - allowed
        if bad:
            raise _CliError("input-malformed", f"--spec: unknown fields {sorted(bad)}")
        fields.update(obj)
    for name in ("scheme", "nodes", "radius_multiplier", "aux_nodes"):
        value = getattr(cfg, name)
        if value is not None:
            fields[name] = value
    if not fields:
        return None
    return QuadratureSpec(**fields)


# ----------------------------------------------------------------------
# subcommands


def _cmd_constants(cfg: RunConfig) -> int:
    if cfg.p is None:
        raise _CliError("input-missing", "constants requires --p")
    profile = exponent_profile(cfg.p)
    m = cfg.dim if cfg.dim is not None else 1
    if m < 1:
        raise _CliError("input-malformed", f"--dim must be >= 1, got {m}")
    doc = {
        "p": list(profile.p),
        "dual": list(profile.q),
        "dimension": m,
        "sharp_constant": profile.sharp,
        "sharp_constant_power": profile.sharp_power(m),
    }
    if profile.gamma is not None:
        doc["gamma"] = list(profile.gamma)
        doc["gamma_stationarity_residual"] = gamma_stationarity_residual(
            profile.p, profile.gamma
        )
    else:
        doc["gamma"] = None
    _emit(doc, cfg.out)
    return _EXIT_OK


def _cmd_eval(cfg: RunConfig) -> int:
    if cfg.input is None:
        raise _CliError("input-missing", "eval requires --input")
    profile, gs, space = hio.triple_from_json(_load_json(cfg.input, "--input"))
    if cfg.p is not None:
        profile = exponent_profile(cfg.p)
    form = cfg.form or ("heis" if space == "heisenberg" else "euclid")
    if form == "euclid":
        value = trilinear_euclid(*gs)
    elif form == "twisted":
        value = trilinear_twisted(*gs, lam=cfg.lam)
    elif form == "heis":
        if space != "heisenberg":
            raise _CliError("input-malformed", "heis form needs a heisenberg-space triple")
        value = trilinear_heis(*gs, spec=_quad_spec(cfg))
    else:
        raise _CliError("input-malformed", f"unknown form {form!r}")
    norms = [lp_norm(g, pj) for g, pj in zip(gs, profile.p)]
    m = gs[0].m
    phi = abs(value) / math.prod(norms)
    doc = {
        "form": form,
        "value": hio.complex_to_json(value),
        "norms": norms,
        "phi": phi,
        "sharp_constant_power": profile.sharp_power(m),
        "gap": profile.sharp_power(m) - phi,
    }
    _emit(doc, cfg.out)
    return _EXIT_OK


def _cmd_ratio_sweep(cfg: RunConfig) -> int:
    if cfg.p is None:
        raise _CliError("input-missing", "ratio-sweep requires --p")
    if not cfg.eps:
        raise _CliError("input-missing", "ratio-sweep requires --eps")
    if any(e <= 0 for e in cfg.eps):
        raise _CliError("input-malformed", "all --eps values must be positive")
    profile = exponent_profile(cfg.p)
    spec = _quad_spec(cfg)
    n = 2 * cfg.d + 1
    bound = profile.sharp_power(n)
    rows = []
    for eps in cfg.eps:
        gs, measure = make_diffuse_triple(profile, eps, d=cfg.d)
        value = trilinear_heis(*gs, spec=spec)
        norms = [lp_norm(g, pj) for g, pj in zip(gs, profile.p)]
        phi = abs(value) / math.prod(norms)
        rows.append((eps, phi, bound - phi, measure))
    _emit_csv(("eps", "phi", "gap", "diffuseness"), rows, cfg.out)
    return _EXIT_OK


def _cmd_factorize(cfg: RunConfig) -> int:
    if cfg.matrix is None:
        raise _CliError("input-missing", "factorize requires --matrix")
    L = _load_matrix(cfg.matrix, "--matrix")
    fact = symplectic_factor(L)
    J = standard_symplectic_form(L.shape[0] // 2)
    defect = float(np.linalg.norm(fact.S.T @ J @ fact.S - J))
    doc = {
        "S": hio.array_to_json(fact.S),
        "M": hio.array_to_json(fact.M),
        "invariant_scalars": hio.array_to_json(fact.t),
        "operator_norm": fact.operator_norm,
        "residual": fact.residual,
        "symplectic_defect": defect,
    }
    _emit(doc, cfg.out)
    return _EXIT_OK


def _cmd_fe_solve(cfg: RunConfig) -> int:
    if cfg.input is None:
        raise _CliError("input-missing", "fe-solve requires --data")
    if cfg.kind is None:
        raise _CliError(
            "input-missing",
            "fe-solve requires --kind (additive, phase, difference, heisenberg, or bilinear)",
        )
    raw = _load_json(cfg.input, "--data")
    if cfg.kind == "bilinear":
        if not isinstance(raw, dict) or "values" not in raw:
            raise _CliError("input-malformed", '--data: bilinear input needs a "values" grid')
        values = hio.array_from_json(raw["values"])
        axes = None
        if raw.get("axes") is not None:
            axes = tuple(hio.array_from_json(ax).real for ax in raw["axes"])
        v1, v2, eta = estimate_bilinear_phase(values, axes=axes)
        _emit(
            {
                "kind": "bilinear-phase",
                "functions": {"v1": v1, "v2": v2},
                "sup_residual": eta,
            },
            cfg.out,
        )
        return _EXIT_OK
    data = hio.fe_input_from_json(raw)
    is_difference = isinstance(data, DifferenceDataset)
    if (cfg.kind == "difference") != is_difference:
        have = "differences" if is_difference else "samples"
        raise _CliError(
            "input-malformed",
            f'--kind {cfg.kind} does not match the {have} dataset in {cfg.input}',
        )
    if cfg.kind == "difference":
        sol = integrate_difference(data)
    elif cfg.kind == "additive":
        sol = solve_additive_fe(data)
    elif cfg.kind == "heisenberg":
        L = np.eye(data.dimension) if cfg.L is None else _load_matrix(cfg.L, "--L")
        sol = solve_heis_fe(data, L, C=cfg.constant)
    elif cfg.kind == "phase":
        sol = recover_linear_phase(data)
    else:
        raise _CliError("input-malformed", f"unknown kind {cfg.kind!r}")
    _emit(hio.solution_to_json(sol), cfg.out)
    if sol.certificate is not None and not sol.certificate.get("ok", True):
        return _EXIT_CERTIFICATE
    return _EXIT_OK


def _cmd_make_triple(cfg: RunConfig) -> int:
    if cfg.p is None:
        raise _CliError("input-missing", "make-triple requires --p")
    if cfg.out is None:
        raise _CliError("input-missing", "make-triple requires --sample")
    if not cfg.eps or len(cfg.eps) != 1:
        raise _CliError("input-malformed", "make-triple needs exactly one --eps value")
    profile = exponent_profile(cfg.p)
    gs, measure = make_diffuse_triple(profile, cfg.eps[0], d=cfg.d)
    st = sample_triple(gs, profile, nx=cfg.nx, nt=cfg.nt, radius_mult=cfg.radius_mult)
    hio.write_sampled_triple(cfg.out, st)
    summary = {
        "path": cfg.out,
        "d": st.d,
        "eps": cfg.eps[0],
        "diffuseness": measure,
        "shapes": [list(v.shape) for v in st.values],
        "axis_radii": [float(ax[-1]) for ax in st.axes],
        "norms": list(st.norms()),
    }
    _emit(summary, None)
    return _EXIT_OK


def _cmd_pipeline(cfg: RunConfig) -> int:
    if cfg.input is None:
        raise _CliError("input-missing", "pipeline requires --input")
    st = hio.read_sampled_triple(cfg.input)
    if cfg.p is not None:
        profile = exponent_profile(cfg.p)
        st = SampledTriple(profile=profile, d=st.d, axes=st.axes, values=st.values)
    report = analyze_near_extremizer(st, spec=_quad_spec(cfg))
    _emit(hio.report_to_json(report), cfg.out)
    if not report.certificate.get("ok", False):
        return _EXIT_CERTIFICATE
    return _EXIT_OK


_DISPATCH = {
    "constants": _cmd_constants,
    "eval": _cmd_eval,
    "ratio-sweep": _cmd_ratio_sweep,
    "factorize": _cmd_factorize,
    "fe-solve": _cmd_fe_solve,
    "make-triple": _cmd_make_triple,
    "pipeline": _cmd_pipeline,
}


def run(cfg: RunConfig) -> int:
    """Dispatch a parsed config; returns the process exit status."""
    try:
        handler = _DISPATCH[cfg.command]
    except KeyError:
        raise _CliError("input-malformed", f"unknown subcommand {cfg.command!r}")
    return handler(cfg)


# ----------------------------------------------------------------------
# argument parsing


def _add_quad_flags(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--spec", help='QuadratureSpec JSON, inline or path: {"scheme", '
                                   '"nodes", "radius_multiplier", "aux_nodes"}')
    sp.add_argument("--scheme", choices=("tensor-hermite", "truncated-trapezoid"),
                    help="quadrature scheme override")
    sp.add_argument("--nodes", type=int, help="quadrature nodes per axis (>= 8)")
    sp.add_argument("--radius-multiplier", type=float,
                    help="trapezoid box half-width in whitened std devs (>= 4)")
    sp.add_argument("--aux-nodes", type=int,
                    help="nodes for the auxiliary 1-D integral (>= 8)")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="heisyoung",
        description="Sharp Young trilinear functionals: constants, evaluators, "
                    "sweeps, factorization, functional-equation solvers, and the "
                    "near-extremizer pipeline.",
        epilog="Exit codes: 0 success, 2 validation error, 3 certificate failure.",
    )
    ap.add_argument("--seed", type=int, default=0,
                    help="reproducibility tag recorded in the config (all current "
                         "subcommands are deterministic)")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser(
        "constants", help="sharp constant and optimal width ratios for an exponent triple",
        epilog='Output JSON: {"p", "dual", "gamma", "dimension", "sharp_constant", '
               '"sharp_constant_power", "gamma_stationarity_residual"}.')
    sp.add_argument("--p", required=True, help="three exponents, e.g. 3/2,3/2,3/2 or 2,2,inf")
    sp.add_argument("--dim", type=int, default=1, help="ambient dimension m for A_p^m")
    sp.add_argument("--out", help="output path (default stdout)")

    sp = sub.add_parser(
        "eval", help="evaluate a trilinear form on a Gaussian triple",
        epilog='Input JSON: {"space": "heisenberg"|"euclidean", "p": [..], '
               '"functions": [{"Q", "a", "b", "c"} x3]} with complex entries as '
               '{"re", "im"}.  Output JSON: {"form", "value", "norms", "phi", '
               '"sharp_constant_power", "gap"}.')
    sp.add_argument("--input", "--triple", dest="input", required=True,
                    help="triple JSON path")
    sp.add_argument("--p", help="exponent override (default: the triple's profile)")
    sp.add_argument("--form", "--setting", dest="form",
                    choices=("euclid", "twisted", "heis"),
                    help="form to evaluate (default: by the triple's space)")
    sp.add_argument("--lam", type=float, default=0.0, help="twist parameter for --form twisted")
    _add_quad_flags(sp)
    sp.add_argument("--out", help="output path (default stdout)")

    sp = sub.add_parser(
        "ratio-sweep", help="Phi along a diffuseness sweep of canonical triples",
        epilog="Output CSV columns: eps, phi, gap, diffuseness (rows in the "
               "order the eps values were given).")
    sp.add_argument("--p", required=True, help="three exponents")
    sp.add_argument("--d", type=int, default=1, help="Heisenberg dimension d")
    sp.add_argument("--eps", "--eps-grid", dest="eps", required=True,
                    help="comma-separated positive diffuseness values, e.g. 1e-1,1e-2,1e-3,1e-4")
    _add_quad_flags(sp)
    sp.add_argument("--out", help="CSV output path (default stdout)")

    sp = sub.add_parser(
        "factorize", help="symplectic x contraction factorization of a matrix",
        epilog='--matrix accepts inline JSON ("[[1,0],[0,1]]") or a path to a '
               'JSON file holding the nested list (or {"matrix": [..]}).  Output '
               'JSON: {"S", "M", "invariant_scalars", "operator_norm", '
               '"residual", "symplectic_defect"}.')
    sp.add_argument("--matrix", required=True, help="square even-size matrix, inline or path")
    sp.add_argument("--out", help="output path (default stdout)")

    sp = sub.add_parser(
        "fe-solve", help="robust functional-equation solvers",
        epilog='Data JSON for additive/phase/heisenberg: {"kind": "samples", '
               '"dimension", "center", "radius", "points" (one array per '
               'unknown; coordinates in the units of center/radius), "values", '
               '"noise" (sup-norm error bound A), "corruption" (fraction in '
               '[0, 1/2))}.  For difference: {"kind": "differences", "points", '
               '"offsets", "values" (f(x+h) - f(x)), "degree", "center", '
               '"radius", "offset_radius"}.  For bilinear: {"values" (2-D '
               'complex grid as {"re", "im"}), "axes"?}.  Output JSON: '
               'FESolution {"kind", "functions", "inlier_fraction", '
               '"sup_residual", "certificate"?}.  Exits 3 when the heisenberg '
               "certificate fails.")
    sp.add_argument("--data", "--input", dest="input", required=True,
                    help="FE dataset JSON path")
    sp.add_argument("--kind", required=True,
                    choices=("additive", "phase", "difference", "heisenberg", "bilinear"),
                    help="which functional equation the dataset instantiates")
    sp.add_argument("--L", help="base matrix for --kind heisenberg, inline or path "
                                "(default identity)")
    sp.add_argument("--constant", type=float, default=5.0,
                    help="certificate constant C (default 5)")
    sp.add_argument("--out", help="output path (default stdout)")

    sp = sub.add_parser(
        "make-triple", help="sample a canonical diffuse triple to a grid file",
        epilog='Writes the sampled-triple file (JSON header {"format", "d", "p", '
               '"axes", "shapes"} plus base64 payload of the three arrays, '
               "little-endian float64 interleaved re, im) and prints a JSON summary.")
    sp.add_argument("--p", required=True, help="three exponents")
    sp.add_argument("--eps", required=True, help="diffuseness value")
    sp.add_argument("--d", type=int, default=1, help="Heisenberg dimension d")
    sp.add_argument("--nx", type=int, default=33, help="nodes per horizontal axis")
    sp.add_argument("--nt", type=int, default=65, help="nodes on the central axis")
    sp.add_argument("--radius-mult", type=float, default=6.0,
                    help="box half-width in fitted standard deviations")
    sp.add_argument("--sample", "--out", dest="out", required=True,
                    help="sampled-triple output path")

    sp = sub.add_parser(
        "pipeline", help="near-extremizer analysis of a sampled triple",
        epilog="Input: a sampled-triple file from make-triple.  Output JSON: "
               'PipelineReport {"spec", "word", "distances", "phi", "gap", '
               '"diffuseness", "certificate", "diagnostics"}.  Exits 3 when the '
               "symplectic certificate fails (data far from extremal structure).")
    sp.add_argument("--input", required=True, help="sampled-triple file path")
    sp.add_argument("--p", help="exponent override (default: the file's profile)")
    _add_quad_flags(sp)
    sp.add_argument("--out", help="report output path (default stdout)")

    return ap


def _config_from_args(ns: argparse.Namespace) -> RunConfig:
    eps: tuple = ()
    if getattr(ns, "eps", None):
        try:
            eps = tuple(float(s) for s in str(ns.eps).split(",") if s.strip())
        except ValueError:
            raise _CliError("input-malformed", f"--eps values must be numeric, got {ns.eps!r}")
    p = _parse_p(ns.p) if getattr(ns, "p", None) else None
    return RunConfig(
        command=ns.command,
        input=getattr(ns, "input", None),
        out=getattr(ns, "out", None),
        p=p,
        dim=getattr(ns, "dim", None),
        d=getattr(ns, "d", 1),
        form=getattr(ns, "form", None),
        lam=getattr(ns, "lam", 0.0),
        eps=eps,
        nx=getattr(ns, "nx", 33),
        nt=getattr(ns, "nt", 65),
        radius_mult=getattr(ns, "radius_mult", 6.0),
        matrix=getattr(ns, "matrix", None),
        kind=getattr(ns, "kind", None),
        L=getattr(ns, "L", None),
        constant=getattr(ns, "constant", 5.0),
        spec=getattr(ns, "spec", None),
        scheme=getattr(ns, "scheme", None),
        nodes=getattr(ns, "nodes", None),
        radius_multiplier=getattr(ns, "radius_multiplier", None),
        aux_nodes=getattr(ns, "aux_nodes", None),
        seed=getattr(ns, "seed", 0),
    )


def _print_error(code: str, message: str) -> None:
    sys.stderr.write(
        json.dumps({"error": {"code": code, "message": message}}, sort_keys=True) + "\n"
    )


def main(argv=None) -> int:
    ap = _build_parser()
    ns = ap.parse_args(argv)
    try:
        cfg = _config_from_args(ns)
        return run(cfg)
    except _CliError as exc:
        _print_error(exc.code, str(exc))
        return _EXIT_VALIDATION
    except (ValueError, np.linalg.LinAlgError) as exc:
        _print_error("validation-error", str(exc))
        return _EXIT_VALIDATION
    except OSError as exc:
        _print_error("io-error", str(exc))
        return _EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
