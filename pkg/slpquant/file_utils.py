"""Module containing file helpers for problem files and result dumps"""

import json
import logging
import os

from typing import Any

logger = logging.getLogger(__name__)

__all__ = ["write_txt_file", "read_json_file", "prepare_dir"]


def write_txt_file(file_name: str, content: str, mode: str = "w", encoding: str = "utf-8") -> None:
    """Writes a text file

    :param file_name:    path
    :param content:      string to write
    :param mode:         mode of writing (writing, appending, ...)
    :param encoding:     encoding to use
    :return:             None
    """
    possible_modes = ("w", "a", "w+", "a+")
    if not mode in possible_modes:
        raise ValueError(f"Invalid write mode '{mode}'. Please use one of the following: '{possible_modes}'")
    with open(file_name, mode, encoding=encoding) as txt_file:
        txt_file.write(content)


def read_json_file(file_name: str, encoding: str = "utf-8") -> Any:
    """Reads a json file

    :param file_name:    path
    :param encoding:     encoding to use
    :return:             decoded content
    """
    with open(file_name, "r", encoding=encoding) as json_file:
        return json.load(json_file)


def prepare_dir(dir_name: str) -> None:
    """Creates directory dir_name (and its parents) if it does not exist

    :param dir_name:      path
    :return:              None
    """
    if dir_name and not os.path.exists(dir_name):
        logger.info(f"Creating new directory '{dir_name}'.")
        os.makedirs(dir_name)
