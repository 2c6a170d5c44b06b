"""Unit tests for all functions in serialization.py file"""

import json
import math
import os

from fractions import Fraction

import pytest

from slpquant.complexes import chamber_complex
from slpquant.quantize import ConeValuation, Dirac, ExponentialCone, Gaussian, Mixture, UniformPolytope
from slpquant.rational_linalg import Matrix, vec
from slpquant.serialization import (
    ProblemFormatError,
    decode_distribution,
    decode_polyhedron,
    decode_problem,
    decode_rat,
    dump_json,
    encode_complex,
    encode_distribution,
    encode_first_order,
    encode_polyhedron,
    encode_problem,
    encode_rat,
    encode_tree,
    encode_valuation,
    encode_value,
    encode_value_function,
    load_problem,
)
from slpquant.stochastic import (
    ApproxValue,
    FirstOrderValue,
    Separation,
    build_affine_representation,
    build_scenario_tree,
)

from .conftest import coupling_data

BUNDLED = [
    "coupling_l1_uniform.json",
    "coupling_linf_uniform.json",
    "coupling_exponential.json",
    "coupling_gaussian.json",
    "coupling_l2_ball.json",
    "three_stage_desk.json",
]


class Test_scalars:
    """Tests for functions encode_rat, decode_rat and encode_value"""

    @pytest.mark.parametrize("value, text", [(Fraction(-7, 24), "-7/24"), (Fraction(3), "3"), (Fraction(0), "0")])
    def test_encode(self, value, text):
        assert encode_rat(value) == text
        assert decode_rat(text) == value

    @pytest.mark.parametrize("text", ["1/0", "one", "1.5.2"])
    def test_decode_garbage(self, text):
        with pytest.raises(ProblemFormatError):
            decode_rat(text)

    def test_tagged_values(self):
        assert encode_value(Fraction(-7, 24)) == {"kind": "exact", "value": "-7/24"}
        assert encode_value(math.inf) == {"kind": "infinite", "value": "+inf"}
        assert encode_value(-math.inf) == {"kind": "infinite", "value": "-inf"}
        approx = encode_value(ApproxValue(Fraction(1, 3), Fraction(1, 10**6)))
        assert approx == {"kind": "approx", "value": "1/3", "eps": "1/1000000"}


class Test_geometry:
    """Tests for the polyhedron and complex codecs"""

    def test_polyhedron_is_canonical(self, coupling_polyhedron):
        data = encode_polyhedron(coupling_polyhedron)
        assert data["dim"] == 3
        back = decode_polyhedron(data)
        assert back.key == coupling_polyhedron.key
        assert encode_polyhedron(back) == data

    def test_malformed_polyhedron(self):
        with pytest.raises(ProblemFormatError):
            decode_polyhedron({"A": [["1"]]})
        with pytest.raises(ProblemFormatError):
            decode_polyhedron({"A": [["1", "2"], ["3"]], "b": ["0", "0"]})

    def test_chamber_complex(self, coupling_polyhedron):
        data = encode_complex(chamber_complex(coupling_polyhedron, [0]))
        assert data["ambientDim"] == 1
        assert data["keep"] == [0]
        assert len(data["cells"]) == 8
        points = sorted(Fraction(cell["witness"][0]) for cell in data["cells"] if cell["dim"] == 0)
        assert points == [Fraction(-1, 2), 0, Fraction(1, 2), 1]
        segments = [cell for cell in data["cells"] if cell["dim"] == 1]
        assert sorted(len(cell["faces"]) for cell in segments) == [1, 2, 2, 2]


class Test_results:
    """Tests for the result codecs"""

    def test_valuation(self):
        data = encode_valuation(ConeValuation(Fraction(1, 4), vec(["1/3", "1/3"])))
        assert data == {"p": "1/4", "c": ["1/3", "1/3"], "eps": "0"}

    def test_value_function(self, l1_stage):
        data = encode_value_function(build_affine_representation(l1_stage))
        assert len(data["cuts"]) == 4
        assert {"alpha": ["0"], "beta": "-1/2"} in data["cuts"]
        assert data["eps"] == "0"
        assert "cells" in data

    def test_first_order(self):
        value = encode_first_order(FirstOrderValue(Fraction(-7, 24), vec(["-7/12"])))
        assert value == {"kind": "value", "value": {"kind": "exact", "value": "-7/24"}, "subgradient": ["-7/12"]}
        separation = encode_first_order(Separation(vec([-1]), Fraction(3, 4), vec([1, 0])))
        assert separation["kind"] == "separation"
        assert separation["offset"] == "3/4"

    def test_tree(self, instance_path):
        tree = build_scenario_tree(load_problem(instance_path("coupling_l1_uniform.json")))
        data = encode_tree(tree)
        assert data["label"] == []
        assert "cone" not in data
        assert sum(Fraction(child["pathProb"]) for child in data["children"]) == 1
        assert all("quantized" in child and child["stage"] == 2 for child in data["children"])


class Test_distributions:
    """Tests for functions encode_distribution and decode_distribution"""

    def test_uniform_from_hrep(self):
        dist = decode_distribution({"kind": "uniform", "A": [["1"], ["-1"]], "b": ["1", "1"]})
        assert isinstance(dist, UniformPolytope)
        assert dist.volume == 2

    def test_exponential_from_hrep(self):
        dist = decode_distribution({"kind": "exponential", "A": [["-1", "0"], ["0", "-1"]], "theta": ["-1", "-2"]})
        assert isinstance(dist, ExponentialCone)
        assert set(dist.k.rays) == {vec([1, 0]), vec([0, 1])}

    def test_orthants(self):
        dist = decode_distribution({"kind": "exponential_orthants", "theta": "1", "dim": 2})
        assert isinstance(dist, Mixture)
        assert len(dist.components) == 4

    @pytest.mark.parametrize(
        "dist",
        [
            Dirac((1, -2)),
            Gaussian(Matrix.from_rows([[2, 0], [0, 1]])),
            Mixture((Fraction(1, 3), Fraction(2, 3)), (Dirac((0,)), Dirac((1,)))),
        ],
    )
    def test_encoded_form_decodes_to_same_cost(self, dist):
        assert decode_distribution(encode_distribution(dist)) == dist

    @pytest.mark.parametrize("data", [{"kind": "cauchy"}, {"kind": "dirac"}, {"c": ["1"]}])
    def test_malformed(self, data):
        with pytest.raises(ProblemFormatError):
            decode_distribution(data)


class Test_problems:
    """Tests for problem files"""

    @pytest.mark.parametrize("name", BUNDLED)
    def test_bundled_instances(self, instance_path, name):
        problem = load_problem(instance_path(name))
        assert encode_problem(decode_problem(encode_problem(problem))) == encode_problem(problem)

    def test_horizon_mismatch(self):
        data = coupling_data({"kind": "dirac", "c": ["0", "0"]})
        data["horizon"] = 3
        with pytest.raises(ProblemFormatError):
            decode_problem(data)

    def test_missing_key(self):
        data = coupling_data({"kind": "dirac", "c": ["0", "0"]})
        del data["firstStage"]
        with pytest.raises(ProblemFormatError):
            decode_problem(data)

    def test_validation_error_is_not_format_error(self):
        data = coupling_data({"kind": "dirac", "c": ["0", "0"]})
        data["stages"][0]["outcomes"][0]["prob"] = "1/2"
        with pytest.raises(ValueError) as excinfo:
            decode_problem(data)
        assert not isinstance(excinfo.value, ProblemFormatError)

    def test_not_json(self, tmpdir):
        path = os.path.join(tmpdir, "broken.json")
        with open(path, "w") as broken:
            broken.write("{horizon: 2")
        with pytest.raises(ProblemFormatError):
            load_problem(path)

    def test_not_an_object(self, tmpdir):
        path = os.path.join(tmpdir, "list.json")
        with open(path, "w") as listed:
            json.dump([1, 2], listed)
        with pytest.raises(ProblemFormatError):
            load_problem(path)


class Test_dump_json:
    """Tests for function dump_json"""

    def test_deterministic(self, tmpdir):
        path = os.path.join(tmpdir, "out.json")
        text = dump_json(path, {"b": "1/2", "a": ["1"]})
        assert text == dump_json(None, {"a": ["1"], "b": "1/2"})
        with open(path) as written:
            assert written.read() == text
        assert text.index('"a"') < text.index('"b"')
