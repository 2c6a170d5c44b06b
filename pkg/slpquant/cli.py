"""Command line front end

Every command reads one problem file (``eval --grid`` accepts several), runs one stage of the engine and
writes deterministic JSON or CSV to ``--out`` or stdout. Logs go to stderr.
"""

import argparse
import logging
import math
import os
import sys

from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .__about__ import __version__
from .csv_utils import Csv_dict_writer, csv_append_row, csv_create_file, format_cell
from .file_utils import prepare_dir
from .quantize import DEFAULT_EPS, UnsupportedDistributionError, is_exact
from .rational_linalg import Vec, to_rat
from .serialization import (
    ProblemFormatError,
    dump_json,
    encode_complex,
    encode_first_order,
    encode_polyhedron,
    encode_rat,
    encode_tree,
    encode_valuation,
    encode_value,
    encode_vec,
    load_problem,
)
from .stochastic import (
    ApproxValue,
    FirstOrderValue,
    InfeasibleProblemError,
    MultistageProblem,
    Separation,
    backward_recursion,
    build_scenario_tree,
    eval_or_separate,
    expected_value_at,
    mc_estimate,
    propagate_complexes,
    quantize_stage,
    solve_extensive,
)

logger = logging.getLogger(__name__)

__all__ = ["RunConfig", "COMMANDS", "parse_args", "run", "main"]

COMMANDS = ("eval", "complex", "quantize", "tree", "solve", "mc-check")
OUTPUT_FORMATS = ("json", "csv")

EXIT_OK = 0
EXIT_PARSE_ERROR = 1
EXIT_VALIDATION_ERROR = 2
EXIT_INFEASIBLE = 3

DEFAULT_MC_SAMPLES = 100000
# |quantized - Monte Carlo mean| must stay below this many standard errors
MC_STDERR_BAND = 4


@dataclass(frozen=True)
class RunConfig:
    """Validated options of one CLI run

    :param command:           one of COMMANDS
    :param problem_paths:     problem files, several only for ``eval --grid``
    :param output_path:       output file, stdout when None
    :param eps:               accuracy of the weak valuations
    :param x_query:           previous-stage decision for ``eval`` and ``mc-check``
    :param mc_samples:        number of Monte Carlo draws
    :param seed:              seed of the numpy Generator
    :param output_format:     json or csv
    :param grid:              (a, b, k) for k equidistant plot points on [a, b]
    """

    command: str
    problem_paths: Tuple[str, ...]
    output_path: Optional[str] = None
    eps: Fraction = DEFAULT_EPS
    x_query: Optional[Vec] = None
    mc_samples: int = DEFAULT_MC_SAMPLES
    seed: int = 0
    output_format: str = "json"
    grid: Optional[Tuple[Fraction, Fraction, int]] = None

    def __post_init__(self) -> None:
        if self.command not in COMMANDS:
            raise ValueError(f"'command' must be one of '{COMMANDS}', not '{self.command}'")
        if not self.problem_paths:
            raise ValueError("At least one problem file is required")
        if self.eps <= 0:
            raise ValueError(f"'eps' must be positive, not '{self.eps}'")
        if self.mc_samples <= 0:
            raise ValueError(f"'mc_samples' must be positive, not '{self.mc_samples}'")
        if self.output_format not in OUTPUT_FORMATS:
            raise ValueError(f"'output_format' must be one of '{OUTPUT_FORMATS}', not '{self.output_format}'")
        if self.output_format == "csv":
            if self.command not in ("eval", "mc-check"):
                raise ValueError(f"CSV output is only available for 'eval' and 'mc-check', not '{self.command}'")
            if not self.output_path:
                raise ValueError("CSV output needs '--out'")
        if len(self.problem_paths) > 1 and not (self.command == "eval" and self.grid is not None):
            raise ValueError("Several problem files are only accepted by 'eval' with '--grid'")
        if self.grid is not None:
            lower, upper, points = self.grid
            if not lower < upper or points < 2:
                raise ValueError(f"'grid' must satisfy a < b and k >= 2, not '{self.grid}'")
        if self.command in ("eval", "mc-check") and self.x_query is None and self.grid is None:
            raise ValueError(f"Command '{self.command}' needs '--x'")
        if self.command == "mc-check" and self.x_query is None:
            raise ValueError("Command 'mc-check' needs '--x'")

    @property
    def problem_path(self) -> str:
        return self.problem_paths[0]

    def grid_points(self) -> List[Vec]:
        lower, upper, points = self.grid
        step = (upper - lower) / (points - 1)
        return [(lower + i * step,) for i in range(points)]


def _rational(text: str) -> Fraction:
    try:
        return to_rat(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"'{text}' is not a rational number")


def _rational_vector(text: str) -> Vec:
    return tuple(_rational(part) for part in text.split(","))


def _grid(text: str) -> Tuple[Fraction, Fraction, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"'--grid' expects 'a,b,k', not '{text}'")
    try:
        points = int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{parts[2]}' is not an integer")
    return _rational(parts[0]), _rational(parts[1]), points


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slpquant", description="Exact quantization of stochastic linear programs with continuous costs"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--problem", action="append", required=True, help="problem JSON file, repeatable for eval")
    parser.add_argument("--x", type=_rational_vector, help="previous-stage decision, e.g. '1/2' or '0,1'")
    parser.add_argument("--eps", type=_rational, default=DEFAULT_EPS, help="accuracy of the weak valuations")
    parser.add_argument("--samples", type=int, default=DEFAULT_MC_SAMPLES, help="Monte Carlo draws for mc-check")
    parser.add_argument("--seed", type=int, default=0, help="seed of the random generator")
    parser.add_argument("--out", help="output file, stdout by default")
    parser.add_argument("--format", choices=OUTPUT_FORMATS, default="json")
    parser.add_argument("--grid", type=_grid, help="'a,b,k': evaluate on k equidistant points of [a, b]")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for info, -vv for debug logs")
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> Tuple[RunConfig, int]:
    """Returns the RunConfig and the verbosity count"""
    args = build_parser().parse_args(argv)
    config = RunConfig(
        command=args.command,
        problem_paths=tuple(args.problem),
        output_path=args.out,
        eps=args.eps,
        x_query=args.x,
        mc_samples=args.samples,
        seed=args.seed,
        output_format=args.format,
        grid=args.grid,
    )
    return config, args.verbose


def _tagged(value: Union[Fraction, float, ApproxValue], exact: bool, eps: Fraction) -> Dict[str, str]:
    if isinstance(value, Fraction) and not exact:
        value = ApproxValue(value, eps)
    return encode_value(value)


def _all_exact(problem: MultistageProblem) -> bool:
    return all(is_exact(outcome.cost) for stage in problem.stages for outcome in stage.outcomes)


def _first_order(problem: MultistageProblem, x: Vec, eps: Fraction) -> Union[FirstOrderValue, Separation]:
    """Eval-or-separate on V_2; beyond two stages the stage-2 LPs carry the epigraph of V_3"""
    if problem.horizon == 2:
        return eval_or_separate(problem.stage(2), x, eps)
    v3 = backward_recursion(problem, eps)[1]
    return eval_or_separate(problem.stage(2), x, eps, v_next=v3)


def _plot_value(problem: MultistageProblem, x: Vec, eps: Fraction) -> Union[Fraction, float, ApproxValue]:
    answer = _first_order(problem, x, eps)
    if isinstance(answer, Separation):
        return math.inf
    return ApproxValue(answer.value, answer.eps) if answer.eps else answer.value


def _column_name(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def _run_eval(problems: List[MultistageProblem], config: RunConfig) -> Optional[Dict[str, Any]]:
    if config.grid is None:
        answer = _first_order(problems[0], config.x_query, config.eps)
        content = encode_first_order(answer)
        if isinstance(answer, FirstOrderValue):
            content["value"] = _tagged(answer.value, _all_exact(problems[0]) and not answer.eps, answer.eps)
        content["x"] = encode_vec(config.x_query)
        return content
    if any(problem.first_stage.n != 1 for problem in problems):
        raise ValueError("'--grid' is only available for a one-dimensional first stage")
    xs = config.grid_points()
    names = [_column_name(path) for path in config.problem_paths]
    rows = [
        {"x": x[0], **{name: _plot_value(problem, x, config.eps) for name, problem in zip(names, problems)}}
        for x in xs
    ]
    if config.output_format == "csv":
        _write_csv(config.output_path, ["x"] + names, rows)
        return None
    return {
        "samples": [
            {key: encode_value(value) if key != "x" else encode_rat(value) for key, value in row.items()} for row in rows
        ]
    }


def _run_complex(problems: List[MultistageProblem], config: RunConfig) -> Dict[str, Any]:
    stages = []
    for t, complex_ in enumerate(propagate_complexes(problems[0]), start=2):
        entry = {"stage": t, "complex": encode_complex(complex_)}
        if complex_.ambient_dim == 1:
            points = sorted(cell.vrep.vertices[0][0] for cell in complex_.cells_of_dim(0))
            entry["breakpoints"] = [encode_rat(point) for point in points]
        stages.append(entry)
    return {"stages": stages}


def _run_quantize(problems: List[MultistageProblem], config: RunConfig) -> Dict[str, Any]:
    problem = problems[0]
    values = backward_recursion(problem, config.eps)
    stages = []
    for t in range(2, problem.horizon + 1):
        v_next = values[t - 1] if t < problem.horizon else None
        outcomes = []
        for index, outcome in enumerate(problem.stage(t).outcomes):
            quantized = quantize_stage(outcome, v_next, config.eps)
            outcomes.append(
                {
                    "outcome": index,
                    "fan": encode_complex(quantized.fan),
                    "regions": [
                        {"region": encode_polyhedron(region), "valuation": encode_valuation(valuation)}
                        for region, valuation in quantized.regions
                    ],
                }
            )
        stages.append({"stage": t, "outcomes": outcomes})
    return {"stages": stages}


def _run_tree(problems: List[MultistageProblem], config: RunConfig) -> Dict[str, Any]:
    tree = build_scenario_tree(problems[0], eps=config.eps)
    return {"nodes": sum(1 for _ in tree.walk()), "tree": encode_tree(tree)}


def _run_solve(problems: List[MultistageProblem], config: RunConfig) -> Dict[str, Any]:
    problem = problems[0]
    tree = build_scenario_tree(problem, eps=config.eps)
    solution = solve_extensive(tree, problem.first_stage)
    exact = _all_exact(problem)
    error = Fraction(0) if exact else backward_recursion(problem, config.eps)[0].eps
    policy = [
        {"label": [list(step) for step in label], "x": encode_vec(x)} for label, x in sorted(solution.policy.items())
    ]
    return {
        "value": _tagged(solution.value, exact, error),
        "x1": encode_vec(solution.policy[()]),
        "policy": policy,
    }


def _run_mc_check(problems: List[MultistageProblem], config: RunConfig) -> Optional[Dict[str, Any]]:
    problem = problems[0]
    if problem.horizon != 2:
        raise ValueError(f"'mc-check' needs a two-stage problem, not horizon '{problem.horizon}'")
    stage = problem.stage(2)
    quantized = expected_value_at(stage, config.x_query, config.eps)
    estimate = mc_estimate(stage, config.x_query, config.mc_samples, np.random.default_rng(config.seed))
    reference = float(quantized.value if isinstance(quantized, ApproxValue) else quantized)
    if math.isinf(reference) or math.isinf(estimate.mean):
        delta = 0.0 if reference == estimate.mean else math.inf
    else:
        delta = reference - estimate.mean
    passed = abs(delta) < MC_STDERR_BAND * estimate.stderr or math.isclose(reference, estimate.mean, abs_tol=1e-9)
    verdict = "PASS" if passed else "FAIL"
    logger.info(f"Monte Carlo check '{verdict}' with difference '{delta}' and standard error '{estimate.stderr}'")
    row = {
        "x": ",".join(format_cell(v) for v in config.x_query),
        "quantized": reference,
        "mc_mean": estimate.mean,
        "stderr": estimate.stderr,
        "delta": delta,
        "samples": estimate.n_samples,
        "verdict": verdict,
    }
    if config.output_format == "csv":
        # one row per run, appended below the existing table
        prepare_dir(os.path.dirname(config.output_path))
        Csv_dict_writer(config.output_path, list(row)).write(row)
        return None
    return {
        "x": encode_vec(config.x_query),
        "quantized": encode_value(quantized),
        "mcMean": estimate.mean,
        "stderr": estimate.stderr,
        "delta": delta if math.isfinite(delta) else "+inf",
        "samples": estimate.n_samples,
        "seed": config.seed,
        "verdict": verdict,
    }


def _write_csv(path: str, header: List[str], rows: List[Dict[str, Any]]) -> None:
    prepare_dir(os.path.dirname(path))
    csv_create_file(path, header, overwrite=True)
    for row in rows:
        csv_append_row(path, [row[key].value if isinstance(row[key], ApproxValue) else row[key] for key in header])
    logger.info(f"Wrote '{len(rows)}' rows to '{path}'")


_RUNNERS: Dict[str, Callable[[List[MultistageProblem], RunConfig], Optional[Dict[str, Any]]]] = {
    "eval": _run_eval,
    "complex": _run_complex,
    "quantize": _run_quantize,
    "tree": _run_tree,
    "solve": _run_solve,
    "mc-check": _run_mc_check,
}


def _emit(config: RunConfig, content: Dict[str, Any]) -> None:
    if config.output_path:
        prepare_dir(os.path.dirname(config.output_path))
    text = dump_json(config.output_path, content)
    if not config.output_path:
        sys.stdout.write(text)


def run(config: RunConfig) -> int:
    """Runs one command and returns the exit status

    :param config:    RunConfig
    :return:          0 on success, 1 on parse errors, 2 on validation errors, 3 on infeasible problems
    """
    try:
        problems = [load_problem(path) for path in config.problem_paths]
    except (ProblemFormatError, OSError) as error:
        logger.error(f"Cannot read problem: {error}")
        return EXIT_PARSE_ERROR
    except ValueError as error:
        logger.error(f"Invalid problem: {error}")
        return EXIT_VALIDATION_ERROR
    try:
        content = _RUNNERS[config.command](problems, config)
    except InfeasibleProblemError as error:
        logger.error(f"Infeasible problem: {error}")
        farkas = encode_vec(error.farkas) if error.farkas is not None else None
        _emit(config, {"status": "infeasible", "message": str(error), "farkas": farkas})
        return EXIT_INFEASIBLE
    except (ValueError, UnsupportedDistributionError) as error:
        logger.error(f"Invalid request: {error}")
        return EXIT_VALIDATION_ERROR
    if content is not None:
        _emit(config, content)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        config, verbosity = parse_args(argv)
    except ValueError as error:
        logging.basicConfig(stream=sys.stderr)
        logger.error(str(error))
        return EXIT_VALIDATION_ERROR
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbosity, logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
