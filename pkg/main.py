"""
Command-line runner for the ontological spin-chain experiments.

Every subcommand writes a CSV and/or JSON report into the output directory
and exits with 0 when all checks pass, 1 on a verification failure and 2 on
a usage or configuration error.
"""

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, field_validator, model_validator

from config import Config
from data_structures.sparse_state import QState
from data_structures.spin_chain import (
    ChainConfig,
    OntState,
    brute_force_census,
    orbit_census,
    trajectory,
    zero_modes,
)
from errors import OntologyError
from services.chain_hamiltonian import bell_demo, perturbation_scan, verify_bch
from services.cogwheel import CogwheelSpec, power_identity_deviation, verify_generator
from services.hybrid import ClassicalState, run_hybrid_experiment, scan_two_branch
from utils.reporting import write_csv, write_report

logger = logging.getLogger(__name__)

EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

COMMANDS = ("cogwheel-verify", "chain-report", "bch-verify", "bell-demo", "hybrid",
            "perturbation-scan")


# Pydantic models for experiment files
class BranchConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    label: str
    re: float = 1.0
    im: float = 0.0

    @property
    def amplitude(self) -> complex:
        return complex(self.re, self.im)


class ClassicalMemberConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    label: str
    probability: float = 1.0


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    command: Optional[Literal[COMMANDS]] = None
    num_spins: int = 8
    classical_num_spins: Optional[int] = None
    timestep: float = 1.0

    # cogwheel-verify
    n_min: int = 2
    n_max: int = 12
    random_phases: bool = False
    inject_fault: float = 0.0

    # chain-report / bell-demo / perturbation-scan
    steps: int = 0
    state: Optional[str] = None
    even_site: Optional[int] = None
    epsilons: List[float] = [0.0, 1e-3, 1e-2, 1e-1]
    seed: int = 0
    jitter_seed: Optional[int] = None

    # bch-verify
    mode: Literal["auto", "exhaustive", "sampled"] = "auto"
    samples: int = Config.SAMPLED_ORBITS

    # hybrid
    schedule: Tuple[int, int] = Config.DEFAULT_SCHEDULE
    sites: Tuple[int, int] = Config.DEFAULT_SITES
    interact: bool = True
    quantum: List[BranchConfig] = []
    normalize: bool = False
    classical: List[ClassicalMemberConfig] = []
    scan: bool = False

    output_dir: Optional[str] = None
    tolerance: float = Config.VERIFY_TOLERANCE
    threads: int = Config.DEFAULT_THREADS
    format: Literal["csv", "json", "both"] = "both"

    @field_validator("timestep", "tolerance")
    @classmethod
    def _positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("must be positive")
        return value

    @field_validator("threads", "samples")
    @classmethod
    def _at_least_one(cls, value: int) -> int:
        if value < 1:
            raise ValueError("must be at least 1")
        return value

    @field_validator("steps")
    @classmethod
    def _non_negative(cls, value: int) -> int:
        if value < 0:
            raise ValueError("must be non-negative")
        return value

    @field_validator("schedule")
    @classmethod
    def _check_schedule(cls, value: Tuple[int, int]) -> Tuple[int, int]:
        if min(value) < 0:
            raise ValueError("update counts must be non-negative")
        return value

    @model_validator(mode="after")
    def _check_consistency(self) -> "ExperimentConfig":
        if not 2 <= self.n_min <= self.n_max <= Config.MAX_COGWHEEL_STATES:
            raise ValueError(
                f"cogwheel range must satisfy 2 <= n_min <= n_max <= {Config.MAX_COGWHEEL_STATES}"
            )
        for branch in self.quantum:
            if len(branch.label) != self.num_spins:
                raise ValueError(f"quantum branch {branch.label!r} does not have {self.num_spins} spins")
        second = self.classical_num_spins or self.num_spins
        for member in self.classical:
            if len(member.label) != second:
                raise ValueError(f"classical member {member.label!r} does not have {second} spins")
        return self

    def chain(self) -> ChainConfig:
        return ChainConfig(num_spins=self.num_spins, timestep=self.timestep)


class UsageError(Exception):
    """Invalid command line or experiment file; maps to exit code 2."""


def load_experiment_config(path: Optional[str]) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    try:
        with open(path) as f:
            text = f.read()
    except OSError as e:
        raise UsageError(f"cannot read config {path}: {e}")
    return ExperimentConfig.model_validate_json(text)


def describe_validation_error(error: ValidationError) -> List[str]:
    """One diagnostic per error: field path (or JSON position) and message."""
    lines = []
    for detail in error.errors():
        location = ".".join(str(part) for part in detail["loc"]) or "<document>"
        lines.append(f"{location}: {detail['msg']}")
    return lines


def setup_logging(level: str = Config.LOG_LEVEL) -> None:
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
        stream=sys.stderr,
    )


def parallel_map(function: Callable, items: Sequence, threads: int) -> List:
    """Ordered map over a thread pool; sequential for a single thread."""
    if threads <= 1:
        return [function(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(function, items))


def _echo(config: ExperimentConfig, *fields: str) -> Dict[str, Any]:
    return {name: getattr(config, name) for name in ("num_spins", "timestep", "tolerance") + fields}


def _emit(config: ExperimentConfig, out_dir: str, command: str, rows: List[Dict[str, Any]],
          echo: Dict[str, Any], passed: bool, sort_by: Optional[List[str]] = None,
          results: Optional[List[Dict[str, Any]]] = None) -> int:
    paths = write_report(out_dir, command, rows, echo, passed, config.format, sort_by, results)
    for path in paths:
        print(f"  wrote {path}")
    print(f"{command}: {'PASS' if passed else 'FAIL'}")
    return EXIT_PASS if passed else EXIT_FAIL


def cmd_cogwheel_verify(config: ExperimentConfig, out_dir: str) -> int:
    """exp(-i H T) = U for every N in [n_min, n_max]."""
    rng = np.random.default_rng(config.seed)
    specs = []
    for n in range(config.n_min, config.n_max + 1):
        phases = tuple(rng.uniform(-np.pi, np.pi, n)) if config.random_phases else ()
        specs.append(CogwheelSpec(n_states=n, timestep=config.timestep, phases=phases))

    def check(spec: CogwheelSpec) -> Dict[str, Any]:
        report = verify_generator(spec, config.tolerance, config.inject_fault)
        row = report.model_dump()
        row["power_identity_deviation"] = power_identity_deviation(spec)
        return row

    rows = parallel_map(check, specs, config.threads)
    passed = all(row["passed"] for row in rows)
    echo = _echo(config, "n_min", "n_max", "random_phases", "seed", "inject_fault")
    echo.pop("num_spins")
    return _emit(config, out_dir, "cogwheel-verify", rows, echo, passed, ["n_states"])


def cmd_chain_report(config: ExperimentConfig, out_dir: str) -> int:
    """Orbit census, zero modes and an optional trajectory."""
    chain = config.chain()
    if chain.num_spins > Config.CENSUS_MAX_SPINS:
        raise UsageError(f"orbit census limited to 2S <= {Config.CENSUS_MAX_SPINS}")
    census = orbit_census(chain)
    passed = True
    if chain.num_spins <= Config.EXHAUSTIVE_BCH_MAX_SPINS:
        passed = brute_force_census(chain) == census
    rows = [{"orbit_length": length, "orbit_count": count, "state_count": length * count}
            for length, count in census.items()]
    modes = zero_modes(chain)
    print(f"orbit census for 2S={chain.num_spins}: {census}")
    print("zero modes: " + ", ".join(str(mode) for mode in modes))

    path_rows = []
    if config.steps:
        start = (OntState.from_label(config.state) if config.state
                 else OntState(index=chain.dimension - 2, num_spins=chain.num_spins))
        for step, state in enumerate(trajectory(start, chain, config.steps)):
            path_rows.append({"step": step, "index": state.index, "label": state.label})
            print(f"  t={step:3d}  {state}")
        if config.format in ("csv", "both"):
            write_csv(os.path.join(out_dir, "chain_report_trajectory.csv"), path_rows, ["step"])

    results = [{"census": census, "zero_modes": [mode.label for mode in modes],
                "trajectory": [row["label"] for row in path_rows]}]
    return _emit(config, out_dir, "chain-report", rows, _echo(config, "steps", "state"),
                 passed, ["orbit_length"], results)


def cmd_bch_verify(config: ExperimentConfig, out_dir: str) -> int:
    report = verify_bch(config.chain(), config.tolerance, config.mode, config.samples,
                        config.seed, config.threads)
    print(f"{report.orbit_count} orbits checked ({report.mode}), "
          f"{report.failures} failures, max deviation {report.max_deviation:.3e}")
    rows = [row.model_dump() for row in report.rows]
    results = [report.model_dump(exclude={"rows"})] + rows
    return _emit(config, out_dir, "bch-verify", rows, _echo(config, "mode", "samples", "seed"),
                 report.passed, ["orbit_min_index"], results)


def _marked(state: OntState) -> Tuple[str, str]:
    spins = "".join(f"{'u' if s > 0 else 'd':>3}" for s in state.spins)
    marks = "".join(f"{'^' if s < 0 else '':>3}" for s in state.spins)
    return spins, marks


def cmd_bell_demo(config: ExperimentConfig, out_dir: str) -> int:
    """(U - U^dagger) and the leading-order Hamiltonian on the down-spin pair."""
    chain = config.chain()
    result = bell_demo(chain, config.even_site)
    ruler = "".join(f"{k:>3}" for k in range(1, chain.num_spins + 1))
    print(f"{'site':>10} {ruler}")
    for name, state in (("|psi>", result.initial), ("+1", result.forward_branch),
                        ("-1", result.backward_branch)):
        spins, marks = _marked(state)
        print(f"{name:>10} {spins}")
        print(f"{'':>10} {marks}")

    rows = []
    for name, vector in (("difference", result.difference), ("hamiltonian", result.image)):
        for index, amplitude in vector.items():
            rows.append({"vector": name, "index": index,
                         "label": OntState(index=index, num_spins=chain.num_spins).label,
                         "re": amplitude.real, "im": amplitude.imag})
    echo = _echo(config, "even_site")
    echo["even_site"] = result.even_site
    return _emit(config, out_dir, "bell-demo", rows, echo, result.matches, ["vector", "index"])


def _quantum_state(config: ExperimentConfig) -> QState:
    if not config.quantum:
        raise UsageError("hybrid experiments need at least one quantum branch")
    branches = [(OntState.from_label(b.label), b.amplitude) for b in config.quantum]
    return QState.from_branches(branches, normalize=config.normalize)


def _classical_state(config: ExperimentConfig) -> ClassicalState:
    if not config.classical:
        size = config.classical_num_spins or config.num_spins
        return ClassicalState.sharp(OntState(index=(1 << size) - 1, num_spins=size))
    return ClassicalState(distribution=tuple(
        (m.probability, OntState.from_label(m.label)) for m in config.classical
    ))


def cmd_hybrid(config: ExperimentConfig, out_dir: str) -> int:
    if config.scan:
        summary = scan_two_branch(config.chain(), config.sites, config.schedule, config.interact)
        print(f"{summary.experiments} experiments: {summary.counts}, {summary.mismatches} mismatches")
        rows = [{"classification": k, "count": v} for k, v in summary.counts.items()]
        return _emit(config, out_dir, "hybrid-scan", rows,
                     _echo(config, "schedule", "sites", "interact"), summary.passed,
                     ["classification"], [summary.model_dump()])

    report = run_hybrid_experiment(_quantum_state(config), _classical_state(config),
                                   config.schedule, config.sites, config.interact,
                                   config.threads, config.chain())
    rows = []
    for member in report.members:
        rows.append({"member_index": member.member_index, "probability": member.probability,
                     "schmidt_rank": member.verdict.schmidt_rank,
                     "entropy_bits": member.verdict.entropy_bits,
                     "classification": member.verdict.classification})
        print(f"  member {member.member_index} (p={member.probability:g}): "
              f"{member.verdict.classification}, rank {member.verdict.schmidt_rank}, "
              f"{member.verdict.entropy_bits:.6f} bits")
    echo = _echo(config, "classical_num_spins", "schedule", "sites", "interact", "normalize")
    echo["quantum"] = [b.model_dump() for b in config.quantum]
    echo["classical"] = [m.model_dump() for m in config.classical]
    return _emit(config, out_dir, "hybrid", rows, echo, report.consistent, ["member_index"],
                 [report.model_dump()])


def cmd_perturbation_scan(config: ExperimentConfig, out_dir: str) -> int:
    chain = config.chain()
    state = OntState.from_label(config.state) if config.state else None
    scan = perturbation_scan(chain, config.epsilons, state, config.jitter_seed)
    rows = [row.model_dump() for row in scan]
    passed = all(abs(r["fidelity"] - 1.0) < config.tolerance for r in rows if r["epsilon"] == 0)
    for row in rows:
        print(f"  eps={row['epsilon']:<8g} fidelity={row['fidelity']:.12f} support={row['support_size']}")
    echo = _echo(config, "epsilons", "state", "jitter_seed")
    return _emit(config, out_dir, "perturbation-scan", rows, echo, passed, ["epsilon"])


HANDLERS = {
    "cogwheel-verify": cmd_cogwheel_verify,
    "chain-report": cmd_chain_report,
    "bch-verify": cmd_bch_verify,
    "bell-demo": cmd_bell_demo,
    "hybrid": cmd_hybrid,
    "perturbation-scan": cmd_perturbation_scan,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment file")
    common.add_argument("--out", help=f"output directory (default {Config.OUTPUT_DIR})")
    common.add_argument("--tol", type=float, dest="tolerance", help="verification tolerance")
    common.add_argument("--threads", type=int, help="worker threads")
    common.add_argument("--format", choices=["csv", "json", "both"], help="report format")
    common.add_argument("--timestep", type=float, help="update period T")

    parser = argparse.ArgumentParser(
        description="Ontological cellular automaton experiments on Ising spin chains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cogwheel-verify", parents=[common], help="check exp(-iHT) = U for N-state cogwheels")
    p.add_argument("--n-min", type=int, dest="n_min")
    p.add_argument("--n-max", type=int, dest="n_max")
    p.add_argument("--random-phases", action="store_const", const=True, dest="random_phases")
    p.add_argument("--seed", type=int)
    p.add_argument("--inject-fault", type=float, dest="inject_fault",
                   help="add this value to H[0,0] (exercises the failure path)")

    p = sub.add_parser("chain-report", parents=[common], help="orbit census, zero modes, trajectory")
    p.add_argument("--num-spins", type=int, dest="num_spins")
    p.add_argument("--steps", type=int)
    p.add_argument("--state", help="start state as a u/d literal")

    p = sub.add_parser("bch-verify", parents=[common], help="orbit-wise check of the chain Hamiltonian")
    p.add_argument("--num-spins", type=int, dest="num_spins")
    p.add_argument("--mode", choices=["auto", "exhaustive", "sampled"])
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)

    p = sub.add_parser("bell-demo", parents=[common], help="leading-order Hamiltonian on a down-spin pair")
    p.add_argument("--num-spins", type=int, dest="num_spins")
    p.add_argument("--even-site", type=int, dest="even_site")

    p = sub.add_parser("hybrid", parents=[common], help="quantum/classical two-chain experiment")
    p.add_argument("--scan", action="store_const", const=True,
                   help="exhaustive two-branch scan instead of the configured state")
    p.add_argument("--no-interaction", action="store_const", const=False, dest="interact")

    p = sub.add_parser("perturbation-scan", parents=[common], help="detuned Hamiltonian evolution")
    p.add_argument("--num-spins", type=int, dest="num_spins")
    p.add_argument("--epsilons", type=float, nargs="+")
    p.add_argument("--state", help="u/d literal (default: down-spin pair)")
    p.add_argument("--jitter-seed", type=int, dest="jitter_seed",
                   help="add seeded self-adjoint jitter instead of scaling by 1 + epsilon")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Experiment file first, then command-line overrides; validated as a whole."""
    base = load_experiment_config(args.config)
    if base.command is not None and base.command != args.command:
        raise UsageError(f"config is for {base.command!r}, not {args.command!r}")
    overrides = {
        key: value for key, value in vars(args).items()
        if key not in ("config", "out", "command") and value is not None
    }
    if args.command == "bell-demo" and "num_spins" not in overrides and "num_spins" not in base.model_fields_set:
        overrides["num_spins"] = Config.BELL_DEMO_SPINS
    merged = base.model_dump(exclude_unset=True)
    merged.update(overrides)
    merged["command"] = args.command
    return ExperimentConfig.model_validate(merged)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_PASS
    setup_logging()

    try:
        config = resolve_config(args)
        out_dir = args.out or config.output_dir or Config.OUTPUT_DIR
        logger.info("running %s", args.command)
        return HANDLERS[args.command](config, out_dir)
    except ValidationError as e:
        for line in describe_validation_error(e):
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, OntologyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
