"""JSON codecs for problems, polyhedra, complexes, valuations, value functions and scenario trees

Rationals are written as strings "p/q" (or "p" for integers). Scalar results are tagged:
``{"kind": "exact", "value": "p/q"}``, ``{"kind": "approx", "value": "p/q", "eps": "p/q"}`` or
``{"kind": "infinite", "value": "+inf"}``.
"""

import json
import logging
import math

from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Union

from .complexes import ChamberComplex, PolyComplex
from .csv_utils import format_cell
from .file_utils import read_json_file, write_txt_file
from .polyhedron import HPolyhedron, PolyCone, VPolyhedron, is_subset
from .quantize import (
    ConeValuation,
    CostDistribution,
    Dirac,
    ExponentialCone,
    Gaussian,
    Mixture,
    UniformEllipsoid,
    UniformPolytope,
    exponential_orthants,
)
from .rational_linalg import Matrix, Vec, to_rat
from .stochastic import (
    ApproxValue,
    FirstOrderValue,
    FirstStage,
    MultistageProblem,
    Outcome,
    PolyhedralValueFunction,
    ScenarioNode,
    Separation,
    StageData,
)

logger = logging.getLogger(__name__)

__all__ = [
    "ProblemFormatError",
    "encode_rat",
    "decode_rat",
    "encode_value",
    "encode_vec",
    "encode_matrix",
    "encode_polyhedron",
    "decode_polyhedron",
    "encode_complex",
    "encode_valuation",
    "encode_value_function",
    "encode_first_order",
    "encode_tree",
    "encode_distribution",
    "decode_distribution",
    "encode_problem",
    "decode_problem",
    "load_problem",
    "dump_json",
]


class ProblemFormatError(ValueError):
    """Raised if a problem file or a dump does not follow the JSON format"""


def encode_rat(value: Fraction) -> str:
    return format_cell(Fraction(value))


def decode_rat(value: Union[str, int]) -> Fraction:
    try:
        return to_rat(value)
    except (ValueError, ZeroDivisionError) as error:
        raise ProblemFormatError(f"'{value}' is not a rational number") from error


def encode_vec(v: Sequence[Fraction]) -> List[str]:
    return [encode_rat(a) for a in v]


def _decode_vec(values: Any) -> Vec:
    if not isinstance(values, list):
        raise ProblemFormatError(f"Expected a list of rationals, got '{values}'")
    return tuple(decode_rat(v) for v in values)


def encode_matrix(m: Matrix) -> List[List[str]]:
    return [encode_vec(row) for row in m.rows]


def _decode_matrix(rows: Any, n_cols: Optional[int] = None) -> Matrix:
    if not isinstance(rows, list):
        raise ProblemFormatError(f"Expected a list of rows, got '{rows}'")
    decoded = tuple(_decode_vec(row) for row in rows)
    if not decoded and n_cols is None:
        raise ProblemFormatError("Matrix without rows needs a known number of columns")
    width = len(decoded[0]) if decoded else n_cols
    if any(len(row) != width for row in decoded):
        raise ProblemFormatError("Matrix rows have different lengths")
    return Matrix(decoded, width)


def encode_value(value: Union[Fraction, float, ApproxValue]) -> Dict[str, str]:
    if isinstance(value, ApproxValue):
        return {"kind": "approx", "value": encode_rat(value.value), "eps": encode_rat(value.eps)}
    if isinstance(value, float) and math.isinf(value):
        return {"kind": "infinite", "value": "+inf" if value > 0 else "-inf"}
    return {"kind": "exact", "value": encode_rat(value)}


def encode_polyhedron(p: HPolyhedron) -> Dict[str, Any]:
    """Canonical H-form with the affine dimension"""
    canonical = p.canonical
    return {"A": encode_matrix(canonical.a), "b": encode_vec(canonical.b), "dim": p.affine_dim}


def decode_polyhedron(data: Dict[str, Any], dim: Optional[int] = None) -> HPolyhedron:
    try:
        return HPolyhedron(_decode_matrix(data["A"], dim), _decode_vec(data["b"]))
    except (KeyError, TypeError) as error:
        raise ProblemFormatError(f"Malformed polyhedron '{data}'") from error


def encode_complex(c: PolyComplex) -> Dict[str, Any]:
    """Cells in the order of the complex; "faces" lists the indices of the lower-dimensional cells contained in a cell"""
    cells = []
    chambers = {chamber.cell.key: chamber for chamber in getattr(c, "chambers", ())}
    for cell in c.cells:
        entry = encode_polyhedron(cell)
        entry["faces"] = [
            index
            for index, other in enumerate(c.cells)
            if other.affine_dim < cell.affine_dim and is_subset(other, cell)
        ]
        if cell.key in chambers:
            entry["witness"] = encode_vec(chambers[cell.key].witness)
        cells.append(entry)
    data: Dict[str, Any] = {"ambientDim": c.ambient_dim, "cells": cells}
    if isinstance(c, ChamberComplex):
        data["keep"] = list(c.keep)
    return data


def encode_valuation(v: ConeValuation) -> Dict[str, Any]:
    return {"p": encode_rat(v.p), "c": encode_vec(v.c), "eps": encode_rat(v.eps)}


def encode_value_function(v: PolyhedralValueFunction) -> Dict[str, Any]:
    data: Dict[str, Any] = {
        "cuts": [{"alpha": encode_vec(cut.alpha), "beta": encode_rat(cut.beta)} for cut in v.cuts],
        "domain": encode_polyhedron(v.domain),
        "eps": encode_rat(v.eps),
    }
    if v.cells is not None:
        data["cells"] = encode_complex(v.cells)
    return data


def encode_first_order(answer: Union[FirstOrderValue, Separation]) -> Dict[str, Any]:
    if isinstance(answer, Separation):
        return {
            "kind": "separation",
            "normal": encode_vec(answer.normal),
            "offset": encode_rat(answer.offset),
            "farkas": encode_vec(answer.farkas),
        }
    return {
        "kind": "value",
        "value": encode_value(ApproxValue(answer.value, answer.eps) if answer.eps else answer.value),
        "subgradient": encode_vec(answer.subgradient),
    }


def encode_tree(node: ScenarioNode) -> Dict[str, Any]:
    data: Dict[str, Any] = {
        "label": [list(step) for step in node.label],
        "stage": node.stage,
        "pathProb": encode_rat(node.path_prob),
        "children": [encode_tree(child) for child in node.children],
    }
    if node.cone is not None and node.quantized is not None:
        data["cone"] = encode_polyhedron(node.cone)
        data["quantized"] = encode_valuation(node.quantized)
    return data


def encode_distribution(dist: CostDistribution) -> Dict[str, Any]:
    if isinstance(dist, Dirac):
        return {"kind": "dirac", "c": encode_vec(dist.c)}
    if isinstance(dist, UniformPolytope):
        return {"kind": "uniform", "vertices": [encode_vec(v) for v in dist.q.vertices]}
    if isinstance(dist, ExponentialCone):
        return {"kind": "exponential", "rays": [encode_vec(r) for r in dist.k.rays], "theta": encode_vec(dist.theta)}
    if isinstance(dist, Gaussian):
        return {"kind": "gaussian", "M": encode_matrix(dist.m)}
    if isinstance(dist, UniformEllipsoid):
        return {"kind": "ellipsoid", "M": encode_matrix(dist.m)}
    if isinstance(dist, Mixture):
        return {
            "kind": "mixture",
            "weights": encode_vec(dist.weights),
            "components": [encode_distribution(component) for component in dist.components],
        }
    raise ProblemFormatError(f"'{type(dist).__name__}' costs cannot be written to a problem file")


def decode_distribution(data: Dict[str, Any]) -> CostDistribution:
    """Builds a cost distribution from its JSON description

    Uniform costs take "vertices" or an H-form "A", "b"; exponential costs take "rays" or "A" (the cone
    {y : A y <= 0}) and "theta"; "exponential_orthants" takes "theta" and "dim" and gives the density
    proportional to exp(-theta |c|_1).
    """
    try:
        kind = data["kind"]
        if kind == "dirac":
            return Dirac(_decode_vec(data["c"]))
        if kind == "uniform":
            if "vertices" in data:
                vertices = [_decode_vec(v) for v in data["vertices"]]
                return UniformPolytope(VPolyhedron.build(vertices, (), len(vertices[0])))
            return UniformPolytope.from_hrep(HPolyhedron(_decode_matrix(data["A"]), _decode_vec(data["b"])))
        if kind == "exponential":
            theta = _decode_vec(data["theta"])
            if "rays" in data:
                cone = PolyCone.from_rays([_decode_vec(r) for r in data["rays"]], len(theta))
            else:
                cone = PolyCone.from_h(_decode_matrix(data["A"], len(theta)))
            return ExponentialCone(cone, theta)
        if kind == "exponential_orthants":
            return exponential_orthants(decode_rat(data["theta"]), int(data["dim"]))
        if kind == "gaussian":
            return Gaussian(_decode_matrix(data["M"]))
        if kind == "ellipsoid":
            return UniformEllipsoid(_decode_matrix(data["M"]))
        if kind == "mixture":
            components = tuple(decode_distribution(component) for component in data["components"])
            return Mixture(_decode_vec(data["weights"]), components)
    except (KeyError, TypeError, IndexError) as error:
        raise ProblemFormatError(f"Malformed cost distribution '{data}'") from error
    raise ProblemFormatError(f"Unknown cost distribution kind '{data.get('kind')}'")


def _decode_outcome(data: Dict[str, Any], n_prev: int) -> Outcome:
    try:
        recourse = _decode_matrix(data["A"])
        technology = _decode_matrix(data["B"], n_prev)
        rhs = _decode_vec(data["b"])
        prob = decode_rat(data["prob"])
        cost = data["cost"]
    except (KeyError, TypeError) as error:
        raise ProblemFormatError(f"Malformed outcome '{data}'") from error
    return Outcome(recourse, technology, rhs, prob, decode_distribution(cost))


def decode_problem(data: Dict[str, Any]) -> MultistageProblem:
    """Builds a MultistageProblem from its JSON form

    Format errors raise ProblemFormatError; well formed data violating a modelling assumption raises the
    validation error of the stochastic module.
    """
    try:
        horizon = int(data["horizon"])
        first = data["firstStage"]
        c = _decode_vec(first["c"])
        first_stage = FirstStage(c, _decode_matrix(first["A"], len(c)), _decode_vec(first["b"]))
        stages_data = data["stages"]
        if not isinstance(stages_data, list):
            raise ProblemFormatError("'stages' must be a list")
    except (KeyError, TypeError) as error:
        raise ProblemFormatError(f"Malformed problem: missing or invalid '{error}'") from error
    if horizon != len(stages_data) + 1:
        raise ProblemFormatError(f"'horizon' is '{horizon}' but '{len(stages_data)}' random stages are given")
    stages = []
    n_prev = first_stage.n
    for stage_data in stages_data:
        if not isinstance(stage_data, dict) or not isinstance(stage_data.get("outcomes"), list):
            raise ProblemFormatError(f"Malformed stage '{stage_data}'")
        stage = StageData(tuple(_decode_outcome(outcome, n_prev) for outcome in stage_data["outcomes"]))
        stages.append(stage)
        n_prev = stage.n
    logger.info(f"Decoded problem with horizon '{horizon}'")
    return MultistageProblem(first_stage, tuple(stages))


def encode_problem(problem: MultistageProblem) -> Dict[str, Any]:
    first = problem.first_stage
    return {
        "horizon": problem.horizon,
        "firstStage": {"c": encode_vec(first.c), "A": encode_matrix(first.a), "b": encode_vec(first.b)},
        "stages": [
            {
                "outcomes": [
                    {
                        "A": encode_matrix(outcome.recourse),
                        "B": encode_matrix(outcome.technology),
                        "b": encode_vec(outcome.rhs),
                        "prob": encode_rat(outcome.prob),
                        "cost": encode_distribution(outcome.cost),
                    }
                    for outcome in stage.outcomes
                ]
            }
            for stage in problem.stages
        ],
    }


def load_problem(path: str) -> MultistageProblem:
    """Reads and decodes a problem file"""
    try:
        data = read_json_file(path)
    except json.JSONDecodeError as error:
        raise ProblemFormatError(f"'{path}' is not valid JSON: {error}") from error
    if not isinstance(data, dict):
        raise ProblemFormatError(f"'{path}' does not hold a JSON object")
    return decode_problem(data)


def dump_json(path: Optional[str], content: Any) -> str:
    """Writes content to path when given and returns the deterministic text either way"""
    text = json.dumps(content, sort_keys=True, indent=2) + "\n"
    if path:
        logger.info(f"Writing '{path}'")
        write_txt_file(path, text)
    return text
