"""JSON (de)serialization for the package's data types.

Conventions
-----------
* real arrays: row-major nested lists;
* complex scalars: {"re": x, "im": y}; complex arrays: {"re": .., "im": ..}
  with nested-list parts;
* tagged unions carry a "kind" field (symmetry elements, FE datasets);
* SampledTriple files are a single JSON document whose "payload" field is
  base64 of the three value arrays in order, each little-endian float64
  interleaved (re, im), C order.

All writers return plain dict/list/str/float structures ready for
``json.dumps``; readers accept the result of ``json.loads``.
"""

from __future__ import annotations

import base64
import json

import numpy as np

from .exponents import ExponentProfile, exponent_profile
from .functional_equations import DifferenceDataset, FESampleSet, FESolution
from .gaussians import CompatibleTripleSpec, GaussianH, GaussianR
from .heisenberg import HeisPoint
from .pipeline import PipelineReport, SampledTriple
from .symmetries import (
    AffineMap,
    BiTranslation,
    Dilation,
    Modulation,
    Symplectic,
    SymmetryWord,
    VerticalShear,
)

__all__ = [
    "array_to_json",
    "array_from_json",
    "complex_to_json",
    "complex_from_json",
    "gaussian_to_json",
    "gaussian_from_json",
    "triple_to_json",
    "triple_from_json",
    "spec_to_json",
    "spec_from_json",
    "word_to_json",
    "word_from_json",
    "fe_input_to_json",
    "fe_input_from_json",
    "solution_to_json",
    "report_to_json",
    "write_sampled_triple",
    "read_sampled_triple",
]


# ----------------------------------------------------------------------
# scalars and arrays


def complex_to_json(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def complex_from_json(obj) -> complex:
    if isinstance(obj, dict):
        return complex(obj["re"], obj.get("im", 0.0))
    return complex(obj)


def array_to_json(arr):
    """Real arrays as nested lists; complex arrays as {"re", "im"} parts."""
    a = np.asarray(arr)
    if np.iscomplexobj(a):
        return {"re": a.real.tolist(), "im": a.imag.tolist()}
    return a.tolist()


def array_from_json(obj) -> np.ndarray:
    if isinstance(obj, dict):
        return np.asarray(obj["re"], dtype=float) + 1j * np.asarray(obj["im"], dtype=float)
    return np.asarray(obj, dtype=float)


# ----------------------------------------------------------------------
# Gaussians and triples


def gaussian_to_json(g: GaussianR) -> dict:
    return {
        "Q": array_to_json(g.Q),
        "a": array_to_json(g.a),
        "b": array_to_json(g.b),
        "c": complex_to_json(g.c),
    }


def gaussian_from_json(obj, heisenberg: bool = False) -> GaussianR:
    cls = GaussianH if heisenberg else GaussianR
    return cls(
        Q=array_from_json(obj["Q"]).real,
        a=array_from_json(obj["a"]),
        b=array_from_json(obj["b"]),
        c=complex_from_json(obj.get("c", 1.0)),
    )


def triple_to_json(gaussians, profile: ExponentProfile, space: str = "heisenberg") -> dict:
    if space not in ("heisenberg", "euclidean"):
        raise ValueError(f"unknown space {space!r}")
    return {
        "space": space,
        "p": list(profile.p),
        "functions": [gaussian_to_json(g) for g in gaussians],
    }


def triple_from_json(obj):
    """Returns (profile, (g1, g2, g3), space)."""
    space = obj.get("space", "heisenberg")
    profile = exponent_profile(tuple(obj["p"]))
    heis = space == "heisenberg"
    gs = tuple(gaussian_from_json(f, heisenberg=heis) for f in obj["functions"])
    if len(gs) != 3:
        raise ValueError(f"a triple needs exactly 3 functions, got {len(gs)}")
    return profile, gs, space


def spec_to_json(spec: CompatibleTripleSpec) -> dict:
    return {
        "p": list(spec.profile.p),
        "L": array_to_json(spec.L),
        "a": spec.a,
        "b": spec.b,
        "amplitudes": [complex_to_json(c) for c in spec.amplitudes],
    }


def spec_from_json(obj) -> CompatibleTripleSpec:
    return CompatibleTripleSpec(
        profile=exponent_profile(tuple(obj["p"])),
        L=array_from_json(obj["L"]).real,
        a=float(obj["a"]),
        b=float(obj.get("b", 0.0)),
        amplitudes=tuple(complex_from_json(c) for c in obj.get("amplitudes", (1.0, 1.0, 1.0))),
    )


# ----------------------------------------------------------------------
# symmetry words


def _heis_point_to_json(u: HeisPoint) -> dict:
    return {"x": array_to_json(u.x), "t": u.t}


def _heis_point_from_json(obj) -> HeisPoint:
    return HeisPoint(array_from_json(obj["x"]).real, float(obj["t"]))


def word_to_json(word: SymmetryWord) -> list:
    out = []
    for el in word.elements:
        if isinstance(el, BiTranslation):
            out.append({
                "kind": "bitranslation",
                "u1": _heis_point_to_json(el.u1),
                "u2": _heis_point_to_json(el.u2),
                "u3": _heis_point_to_json(el.u3),
            })
        elif isinstance(el, VerticalShear):
            out.append({
                "kind": "shear",
                "phi": [
                    {"g": array_to_json(phi.g), "c": phi.c}
                    for phi in (el.phi1, el.phi2, el.phi3)
                ],
            })
        elif isinstance(el, Symplectic):
            out.append({"kind": "symplectic", "S": array_to_json(el.S)})
        elif isinstance(el, Dilation):
            out.append({"kind": "dilation", "r": el.r})
        elif isinstance(el, Modulation):
            out.append({"kind": "modulation", "u": array_to_json(el.u)})
        else:  # pragma: no cover - closed union
            raise TypeError(f"unknown symmetry element {type(el).__name__}")
    return out


def word_from_json(obj) -> SymmetryWord:
    elements = []
    for item in obj:
        kind = item["kind"]
        if kind == "bitranslation":
            elements.append(BiTranslation(
                u1=_heis_point_from_json(item["u1"]),
                u2=_heis_point_from_json(item["u2"]),
                u3=_heis_point_from_json(item["u3"]),
            ))
        elif kind == "shear":
            phis = [
                AffineMap(array_from_json(e["g"]).real, float(e["c"]))
                for e in item["phi"]
            ]
            elements.append(VerticalShear(*phis))
        elif kind == "symplectic":
            elements.append(Symplectic(array_from_json(item["S"]).real))
        elif kind == "dilation":
            elements.append(Dilation(float(item["r"])))
        elif kind == "modulation":
            elements.append(Modulation(array_from_json(item["u"]).real))
        else:
            raise ValueError(f"unknown symmetry element kind {kind!r}")
    return SymmetryWord(tuple(elements))


# ----------------------------------------------------------------------
# functional-equation inputs and solutions


def fe_input_to_json(data) -> dict:
    """Serialize an FE input.

    FESampleSet fields: points are coordinates in the same length units as
    ``center``/``radius``; ``values`` are function samples; ``noise`` is the
    sup-norm sampling-error bound A; ``corruption`` a mass fraction in [0, 1/2).
    DifferenceDataset fields: ``offsets`` share the point units
    (|h| <= offset_radius); ``values`` are difference samples f(x+h) - f(x).
    """
    if isinstance(data, FESampleSet):
        return {
            "kind": "samples",
            "dimension": data.dimension,
            "center": array_to_json(data.center),
            "radius": data.radius,
            "points": [array_to_json(pts) for pts in data.points],
            "values": [array_to_json(vals) for vals in data.values],
            "noise": data.noise,
            "corruption": data.corruption,
        }
    if isinstance(data, DifferenceDataset):
        return {
            "kind": "differences",
            "points": array_to_json(data.points),
            "offsets": array_to_json(data.offsets),
            "values": array_to_json(data.values),
            "degree": data.degree,
            "center": array_to_json(data.center),
            "radius": data.radius,
            "offset_radius": data.offset_radius,
        }
    raise TypeError(f"unknown FE input {type(data).__name__}")


def fe_input_from_json(obj):
    kind = obj.get("kind", "samples")
    if kind == "samples":
        return FESampleSet(
            dimension=int(obj["dimension"]),
            center=array_from_json(obj["center"]).real,
            radius=float(obj["radius"]),
            points=tuple(array_from_json(p).real for p in obj["points"]),
            values=tuple(array_from_json(v) for v in obj["values"]),
            noise=float(obj.get("noise", 0.0)),
            corruption=float(obj.get("corruption", 0.0)),
        )
    if kind == "differences":
        return DifferenceDataset(
            points=array_from_json(obj["points"]).real,
            offsets=array_from_json(obj["offsets"]).real,
            values=array_from_json(obj["values"]).real,
            degree=int(obj["degree"]),
            center=array_from_json(obj["center"]).real,
            radius=float(obj["radius"]),
            offset_radius=float(obj["offset_radius"]),
        )
    raise ValueError(f"unknown FE input kind {kind!r}")


def _jsonable(value):
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, complex):
        return complex_to_json(value)
    if isinstance(value, np.ndarray):
        return array_to_json(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def solution_to_json(sol: FESolution) -> dict:
    out = {
        "kind": sol.kind,
        "functions": _jsonable(sol.functions),
        "inlier_fraction": sol.inlier_fraction,
        "sup_residual": sol.sup_residual,
    }
    if sol.certificate is not None:
        out["certificate"] = _jsonable(sol.certificate)
    return out


# ----------------------------------------------------------------------
# pipeline artifacts


def report_to_json(rep: PipelineReport) -> dict:
    return {
        "spec": spec_to_json(rep.spec),
        "word": word_to_json(rep.word),
        "distances": list(rep.distances),
        "phi": rep.phi,
        "gap": rep.gap,
        "diffuseness": rep.diffuseness,
        "certificate": _jsonable(rep.certificate),
        "diagnostics": _jsonable(rep.diagnostics),
    }


def write_sampled_triple(path, st: SampledTriple) -> None:
    """Single-file format: JSON header + base64 payload.

    Header: d, p, axes (explicit node lists), shapes.  Payload: the three
    arrays in order, each complex128 little-endian (interleaved re, im
    float64), C order, concatenated, then base64-encoded.
    """
    blob = b"".join(np.ascontiguousarray(v, dtype="<c16").tobytes() for v in st.values)
    doc = {
        "format": "sampled-triple-v1",
        "d": st.d,
        "p": list(st.profile.p),
        "axes": [ax.tolist() for ax in st.axes],
        "shapes": [list(v.shape) for v in st.values],
        "payload": base64.b64encode(blob).decode("ascii"),
    }
    with open(path, "w", encoding="ascii") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2)
        fh.write("\n")


def read_sampled_triple(path) -> SampledTriple:
    with open(path, "r", encoding="ascii") as fh:
        doc = json.load(fh)
    if doc.get("format") != "sampled-triple-v1":
        raise ValueError(f"not a sampled-triple file: format={doc.get('format')!r}")
    profile = exponent_profile(tuple(doc["p"]))
    axes = tuple(np.asarray(ax, dtype=float) for ax in doc["axes"])
    shapes = [tuple(s) for s in doc["shapes"]]
    raw = base64.b64decode(doc["payload"])
    flat = np.frombuffer(raw, dtype="<c16")
    sizes = [int(np.prod(s)) for s in shapes]
    if flat.size != sum(sizes):
        raise ValueError(
            f"payload holds {flat.size} complex values; shapes require {sum(sizes)}"
        )
    values, pos = [], 0
    for size, shape in zip(sizes, shapes):
        values.append(flat[pos:pos + size].reshape(shape).astype(complex))
        pos += size
    return SampledTriple(
        profile=profile, d=int(doc["d"]), axes=axes, values=tuple(values)
    )
