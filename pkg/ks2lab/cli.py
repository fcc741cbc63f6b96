"""Command line interface of ks2lab.

Usage:
    ks2lab integrate --function paper.staircase_f --tol 1e-9
    ks2lab gram --d 1 --kmax 8 --mode geometric --normalization paper
    ks2lab operator --kernel random_psd8 --trials 100 --seed 1
    ks2lab mercer --kernel decay_d1
    ks2lab covering --d 1 --c 1 --a 1 --eps-pow-min 6 --eps-pow-max 24 --emit both

Reports are written to --output (default: $KS2LAB_OUTPUT_DIR or the current
directory) as <command>.json and/or <command>.csv. Exit codes: 0 success, 1 invalid
input, 2 numerical non-convergence.
"""
import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from loguru import logger
from typing_extensions import Self

from ks2lab.corpus import load_function, load_kernel_fixture
from ks2lab.covering_numbers import asymptotic_scan
from ks2lab.cube_system import CUBE_MODES, GEOMETRIC, enumerate_cubes
from ks2lab.exceptions import ConvergenceError
from ks2lab.hk_integrate import GAUGE_RIEMANN, HAKE_LIMIT, SERIES_EXACT
from ks2lab.integral_operators import KernelCoefficients, operator_batch, random_symmetric_kernel
from ks2lab.ks2_space import CORRECTED, NORMALIZATIONS, gram_matrix, gram_schmidt_onb
from ks2lab.mercer_rkhs import DecayModel, eigendecompose, iota_norm_bound, mercer_batch
from ks2lab.utils import read_json, write_json

OUTPUT_ENV = "KS2LAB_OUTPUT_DIR"
EMIT_FORMATS = ("json", "csv", "both")
MODE_ALIASES = {
    "gauge": GAUGE_RIEMANN,
    "hake": HAKE_LIMIT,
    "series": SERIES_EXACT,
    GAUGE_RIEMANN: GAUGE_RIEMANN,
    HAKE_LIMIT: HAKE_LIMIT,
    SERIES_EXACT: SERIES_EXACT,
}
RANDOM_KERNEL = "random"

COMMAND_PARAMS = {
    "integrate": {"function", "mode", "domain", "tol", "n_terms"},
    "gram": {"d", "kmax", "mode", "normalization"},
    "operator": {"kernel", "d", "kmax", "mode", "trials"},
    "mercer": {"kernel", "d", "kmax", "mode", "points"},
    "covering": {"d", "c", "a", "eps_pow_min", "eps_pow_max", "grid_factor"},
}
COMMON_ARGS = {"command", "output", "emit", "seed", "log_level"}


class RunConfig:
    """A validated command with its parameters, output location and seed.

    Attributes:
        command: One of integrate, gram, operator, mercer, covering.
        params: Command parameters; keys outside the command's whitelist are rejected.
        output: Output directory.
        emit: json, csv or both.
        seed: Seed recorded in every output.
    """

    def __init__(
        self,
        command: str,
        params: dict,
        output: Optional[str] = None,
        emit: str = "json",
        seed: int = 0,
    ):
        """Initialize a RunConfig.

        Raises:
            ValueError: If the command, a parameter key or the format is unknown.
        """
        if command not in COMMAND_PARAMS:
            raise ValueError(f"Unknown command {command}, expected one of {sorted(COMMAND_PARAMS)}.")
        unknown = set(params) - COMMAND_PARAMS[command]
        if unknown:
            raise ValueError(f"Unknown parameters for {command}: {sorted(unknown)}.")
        if emit not in EMIT_FORMATS:
            raise ValueError(f"Unknown output format {emit}, expected one of {EMIT_FORMATS}.")
        self.command = command
        self.params = dict(params)
        self.output = Path(output or os.environ.get(OUTPUT_ENV, "."))
        self.emit = emit
        self.seed = seed

    @classmethod
    def from_namespace(cls, args: argparse.Namespace) -> Self:
        """Create a config from parsed arguments, dropping unset options."""
        params = {
            key: value
            for key, value in vars(args).items()
            if key not in COMMON_ARGS and value is not None
        }
        return cls(args.command, params, args.output, args.emit, args.seed)

    @property
    def writes_json(self) -> bool:
        return self.emit in ("json", "both")

    @property
    def writes_csv(self) -> bool:
        return self.emit in ("csv", "both")

    def path(self, suffix: str) -> Path:
        """Return the output path for a file suffix."""
        return self.output / f"{self.command}.{suffix}"

    def to_dict(self) -> dict:
        """Return the config as a dict, without the output directory."""
        return {
            "command": self.command,
            "params": self.params,
            "emit": self.emit,
            "seed": self.seed,
        }

    def __repr__(self) -> str:
        """Return a string representation of the RunConfig."""
        return f"RunConfig({self.command}, params={self.params}, seed={self.seed})"


def _emit_json(config: RunConfig, payload: dict):
    if config.writes_json:
        path = write_json({"config": config.to_dict(), **payload}, config.path("json"))
        logger.info(f"Wrote {path}.")


def run_integrate(config: RunConfig) -> int:
    """Integrate a corpus function and report value, error bound and mode.

    Returns 2 when the error bound exceeds the tolerance or the value misses the
    known integral by more than the tolerance; the report is written either way.
    """
    p = config.params
    function = load_function(p["function"])
    mode = p.get("mode")
    if mode is not None and mode not in MODE_ALIASES:
        raise ValueError(f"Unknown mode {mode}, expected one of {sorted(MODE_ALIASES)}.")
    tol = p.get("tol", 1e-6)
    domain = tuple(p["domain"]) if "domain" in p else function.domain
    result = function.integrate(
        MODE_ALIASES.get(mode) if mode else None, domain, tol=tol, n_terms=p.get("n_terms")
    )
    record = result.to_record(function.name, domain, tol)
    if function.exact_value is not None and tuple(domain) == tuple(function.domain):
        record["exact_value"] = function.exact_value
        record["within_tol"] = abs(result.value - function.exact_value) <= tol
    record["converged"] = result.error_bound <= tol and record.get("within_tol", True)
    _emit_json(config, {"result": record})
    print(
        f"{function.name}\t\tvalue: {result.value:.12g}\t\t"
        f"error bound: {result.error_bound:.3g}\t\tmode: {result.mode}"
    )
    if not record["converged"]:
        logger.error(f"Tolerance {tol} not met: error bound {result.error_bound:.3g}.")
        return 2
    return 0


def run_gram(config: RunConfig) -> int:
    """Build the Gram matrix and the orthonormal basis of a cube system."""
    p = config.params
    normalization = p.get("normalization", CORRECTED)
    system = enumerate_cubes(p.get("d", 1), p.get("kmax", 8), p.get("mode", GEOMETRIC))
    gram = gram_matrix(system, normalization)
    check = gram.check()
    basis = gram_schmidt_onb(system, normalization)
    onb = {
        "size": basis.size,
        "dropped": basis.dropped,
        "certificate_error": basis.certificate_error,
        "float_residual": basis.float_residual,
        "exact_certificate": basis.exact_certificate,
    }
    _emit_json(config, {"gram": gram.to_dict(), "check": check.to_dict(), "onb": onb})
    if config.writes_csv:
        gram.to_dataframe().to_csv(config.path("csv"), index=False)
    check.report()
    print(f"ONB size: {basis.size}\t\tcertificate error: {basis.certificate_error:.3g}")
    return 0


def _kernel_and_basis(config: RunConfig):
    p = config.params
    name = p.get("kernel", "random_psd8")
    d, mode = p.get("d", 1), p.get("mode", GEOMETRIC)
    if name == RANDOM_KERNEL:
        A = random_symmetric_kernel(p.get("kmax", 8), np.random.default_rng(config.seed))
        return A, gram_schmidt_onb(enumerate_cubes(d, A.size, mode)), None
    if name.endswith(".json"):
        spec, name = read_json(name), Path(name).stem
        if not isinstance(spec, dict):
            raise ValueError(f"A kernel spec must be a JSON object, got {type(spec).__name__}.")
    else:
        spec = load_kernel_fixture(name)
    if spec.get("type") == "callable-name":
        basis = gram_schmidt_onb(enumerate_cubes(d, p.get("kmax", 8), mode))
        return KernelCoefficients.from_spec(spec, basis, name), basis, None
    A = KernelCoefficients.from_spec(spec, name=name)
    model = DecayModel(**spec["model"]) if "model" in spec else None
    return A, gram_schmidt_onb(enumerate_cubes(d, A.size, mode)), model


def run_operator(config: RunConfig) -> int:
    """Run the operator checks on a kernel fixture or a seeded random kernel."""
    A, basis, _ = _kernel_and_basis(config)
    report = operator_batch(A, basis, config.params.get("trials", 64), config.seed)
    _emit_json(config, {"operator": report.to_dict()})
    report.report()
    return 0


def run_mercer(config: RunConfig) -> int:
    """Decompose a kernel fixture and run the Mercer and RKHS checks."""
    A, basis, model = _kernel_and_basis(config)
    report = mercer_batch(A, basis, config.seed, config.params.get("points", 32))
    payload = {"mercer": report.to_dict()}
    if model is not None:
        payload["iota"] = iota_norm_bound(eigendecompose(A), model).to_dict()
    _emit_json(config, payload)
    report.report()
    return 0


def run_covering(config: RunConfig) -> int:
    """Scan covering bounds over the dyadic grid eps = 2^-p."""
    p = config.params
    model = DecayModel(p.get("d", 1), p.get("c", 1.0), p.get("a", 1.0))
    powers = range(p.get("eps_pow_min", 6), p.get("eps_pow_max", 24) + 1)
    report = asymptotic_scan(model, [2.0**-k for k in powers], p.get("grid_factor", 1.0))
    _emit_json(config, {"covering": report.to_dict()})
    if config.writes_csv:
        report.to_csv(config.path("csv"))
    ratios = report.terminal_ratios()
    print(
        f"records: {len(report.records)}\t\tratio_upper: {ratios['ratio_upper']:.4f}"
        f"\t\tratio_lower: {ratios['ratio_lower']:.4f}"
    )
    return 0


COMMANDS = {
    "integrate": run_integrate,
    "gram": run_gram,
    "operator": run_operator,
    "mercer": run_mercer,
    "covering": run_covering,
}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ks2lab", description="KS2 Hilbert space laboratory.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="Seed recorded in every output.")
    common.add_argument("--emit", choices=EMIT_FORMATS, default="json", help="Output format.")
    common.add_argument("--output", default=None, help=f"Output directory (default ${OUTPUT_ENV} or .).")
    common.add_argument("--log-level", default="WARNING", help="Log level of the stderr sink.")
    sub = parser.add_subparsers(dest="command", required=True)

    integrate = sub.add_parser("integrate", parents=[common], help="Integrate a corpus function.")
    integrate.add_argument("--function", required=True, help="Name in the function corpus.")
    integrate.add_argument("--mode", default=None, help="gauge, hake or series (default: preferred).")
    integrate.add_argument("--domain", type=float, nargs=2, default=None, help="Interval a b.")
    integrate.add_argument("--tol", type=float, default=None, help="Target tolerance.")
    integrate.add_argument("--n-terms", type=int, default=None, help="Series terms.")

    gram = sub.add_parser("gram", parents=[common], help="Gram matrix and orthonormal basis.")
    gram.add_argument("--normalization", choices=NORMALIZATIONS, default=None)

    operator = sub.add_parser("operator", parents=[common], help="Integral operator checks.")
    operator.add_argument(
        "--kernel", default=None, help=f"Kernel fixture, kernel spec .json file or '{RANDOM_KERNEL}'."
    )
    operator.add_argument("--trials", type=int, default=None, help="Random unit elements.")

    mercer = sub.add_parser("mercer", parents=[common], help="Mercer and RKHS checks.")
    mercer.add_argument("--kernel", default=None, help="Kernel fixture or kernel spec .json file.")
    mercer.add_argument("--points", type=int, default=None, help="Random test points.")

    covering = sub.add_parser("covering", parents=[common], help="Covering-number scan.")
    covering.add_argument("--d", type=int, default=None)
    covering.add_argument("--c", type=float, default=None)
    covering.add_argument("--a", type=float, default=None)
    covering.add_argument("--eps-pow-min", type=int, default=None)
    covering.add_argument("--eps-pow-max", type=int, default=None)
    covering.add_argument("--grid-factor", type=float, default=None)

    for cubes in (gram, operator, mercer):
        cubes.add_argument("--d", type=int, default=None, help="Dimension.")
        cubes.add_argument("--kmax", type=int, default=None, help="Number of cubes.")
        cubes.add_argument("--mode", choices=CUBE_MODES, default=None, help="Cube mode.")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, run the command and map failures to exit codes."""
    try:
        args = _parser().parse_args(argv)
    except SystemExit as e:
        # argparse exits with 2 on usage errors
        return 0 if e.code == 0 else 1
    logger.remove()
    logger.add(sys.stderr, level=args.log_level.upper())
    try:
        config = RunConfig.from_namespace(args)
        return COMMANDS[config.command](config)
    except ConvergenceError as e:
        logger.error(f"Numerical failure: {e}")
        return 2
    except (ValueError, KeyError, TypeError, OSError) as e:
        # malformed kernel spec files surface as KeyError or TypeError
        logger.error(f"Invalid input: {e!r}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
