"""Unit tests for all functions in csv_utils.py file"""

import csv
import os

from fractions import Fraction

import pytest

from slpquant.csv_utils import Csv_dict_writer, csv_append_row, csv_create_file, format_cell


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as csv_file:
        return list(csv.reader(csv_file))


@pytest.mark.parametrize(
    "value, expected", [(Fraction(-7, 24), "-7/24"), (Fraction(4, 2), "2"), (0.5, 0.5), ("PASS", "PASS")]
)
def test_format_cell(value, expected):
    assert format_cell(value) == expected


def test_csv_file(tmpdir):
    """Test creating and appending on one csv file"""
    header = ["x", "coupling_l1_uniform"]
    path = os.path.join(tmpdir, "values.csv")
    csv_create_file(path, header=header)
    with pytest.raises(FileExistsError):
        csv_create_file(path)
    csv_append_row(path, [Fraction(0), Fraction(-7, 24)])
    csv_append_row(path, {"x": Fraction(1, 2), "coupling_l1_uniform": Fraction(-5, 12)})
    assert read_rows(path) == [header, ["0", "-7/24"], ["1/2", "-5/12"]]
    # overwrite starts a fresh table
    csv_create_file(path, header=header, overwrite=True)
    assert read_rows(path) == [header]


def test_append_needs_file(tmpdir):
    with pytest.raises(FileNotFoundError):
        csv_append_row(os.path.join(tmpdir, "missing.csv"), ["1"])


def test_csv_dict_writer(tmpdir):
    """Test the Csv_dict_writer class"""
    path = os.path.join(tmpdir, "mc.csv")
    dict_writer = Csv_dict_writer(path, ["x", "verdict"])
    dict_writer.write({"x": Fraction(1, 3), "verdict": "PASS"})
    # first writing creates the file
    assert os.path.isfile(path)
    # change order of keys
    dict_writer.write({"verdict": "FAIL", "x": Fraction(2)})
    assert read_rows(path) == [["x", "verdict"], ["1/3", "PASS"], ["2", "FAIL"]]
    with pytest.raises(TypeError):
        # data not stored in dictionary
        dict_writer.write(["0", "PASS"])
    with pytest.raises(KeyError):
        # data with different keys than what was already written
        dict_writer.write({"x": "0", "stderr": "0.1", "verdict": "PASS"})
