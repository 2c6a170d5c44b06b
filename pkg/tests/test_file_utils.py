"""Unit tests for all functions in file_utils.py file"""

import json
import os

import pytest

from slpquant import file_utils


def test_prepare_dir(tmpdir):
    """Test for creating nested directories"""
    dir_path = os.path.join(tmpdir, "results", "plots")
    file_utils.prepare_dir(dir_path)
    assert os.path.isdir(dir_path)
    # existing directory and empty path are no-ops
    file_utils.prepare_dir(dir_path)
    file_utils.prepare_dir("")


def test_write_txt_file(tmpdir):
    path = tmpdir.join("value.txt").strpath
    file_utils.write_txt_file(path, "-7/24\n")
    file_utils.write_txt_file(path, "-1/2\n", mode="a")
    with open(path, encoding="utf-8") as txt_file:
        assert txt_file.read() == "-7/24\n-1/2\n"
    with pytest.raises(ValueError):
        file_utils.write_txt_file(path, "", mode="r")


def test_read_json_file(tmpdir):
    path = tmpdir.join("problem.json").strpath
    with open(path, "w", encoding="utf-8") as json_file:
        json.dump({"horizon": 2}, json_file)
    assert file_utils.read_json_file(path) == {"horizon": 2}
    with pytest.raises(FileNotFoundError):
        file_utils.read_json_file(tmpdir.join("missing.json").strpath)
