"""Command-line front end.

Exit codes: 0 success, 1 an internal cross-check failed, 2 bad arguments or
configuration, 3 I/O failure.

CSV columns
  prepare / simulate state:  index, bits, real, imag, probability
  simulate --shots:          index, bits, count, probability
  demo-grover:               iteration, prior_success, uniform_success, closed_form
  demo-interference:         index, bits, p, q, q_reference
  demo-fourier:              k, magnitude, reference
Bits are most-significant-qubit first.  CSV files start with ``#`` lines
holding the format version and the resolved configuration.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import applications as apps
from .distributions import (Distribution, check_log_concavity, distribution_from_dict,
                            load_distribution)
from .errors import DegenerateInputError, DomainError, IntegrationError
from .integration import METHODS, IntegrationBackend
from .preparation import (decompose_circuit, discretize, exact_masses, gate_count_report,
                          synthesize)
from .serialization import (FORMAT_VERSION, circuit_to_text, report_to_json, state_to_csv,
                            state_to_dict, table_to_csv, write_atomic)
from .statevector import (MAX_QUBITS, Statevector, apply_circuit, fidelity, measure_histogram,
                          total_variation)

COMMANDS = ("prepare", "synthesize", "simulate", "demo-grover", "demo-interference",
            "demo-fourier", "check-logconcave")
OUTPUT_DIR_ENV = "BISECTPREP_OUTPUT_DIR"
PATH_FIDELITY_GAP = 1e-9
INTERFERENCE_TOLERANCE = 1e-12
FOURIER_TOLERANCE = 1e-9
GROVER_TOLERANCE = 1e-9


class ConfigError(Exception):
    """Invalid configuration; the message names the offending flag or key."""


@dataclass
class RunConfig:
    command: str
    dist_spec: dict = field(default_factory=dict)
    n: int = 6
    backend: str = "analytic-cdf"
    tolerance: float = 1e-12
    samples: int = 4096
    seed: int = 0
    output: str | None = None
    format: str = "json"
    shots: int | None = None
    marked: list | None = None
    iterations: int | None = None
    k: int = 0
    grid_points: int = 101

    def integration_backend(self) -> IntegrationBackend:
        return IntegrationBackend(self.backend, self.tolerance, self.samples, self.seed)

    def distribution(self) -> Distribution:
        return distribution_from_dict(self.dist_spec)

    def to_dict(self) -> dict:
        return asdict(self)


# flag dest -> config-file key; file keys use the same names
_FILE_KEYS = {f.name for f in fields(RunConfig)} | {"family", "mean", "stddev", "rate", "support"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bisectprep", description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON file with defaults; flags override it")
    dist = parser.add_argument_group("distribution")
    dist.add_argument("--dist-spec", dest="dist_spec",
                      help="inline JSON or a path, e.g. '{\"family\": \"gaussian\", ...}'")
    dist.add_argument("--family", choices=("uniform", "exponential", "gaussian",
                                           "truncated-gaussian", "mixture", "tabulated"))
    dist.add_argument("--mean", type=float)
    dist.add_argument("--stddev", type=float)
    dist.add_argument("--rate", type=float)
    dist.add_argument("--support", type=float, nargs=2, metavar=("A", "B"))
    run = parser.add_argument_group("run")
    run.add_argument("--n", type=int, help=f"number of qubits, 1..{MAX_QUBITS}")
    run.add_argument("--backend", choices=METHODS)
    run.add_argument("--tolerance", type=float, help="absolute mass tolerance")
    run.add_argument("--samples", type=int, help="Monte Carlo samples per integral")
    run.add_argument("--seed", type=int)
    run.add_argument("--output", help=f"output path prefix (default: ${OUTPUT_DIR_ENV}/<command>, "
                                      "else stdout)")
    run.add_argument("--format", choices=("json", "csv"))
    run.add_argument("--shots", type=int)
    run.add_argument("--marked", type=lambda s: [int(v) for v in s.split(",") if v],
                     help="comma-separated marked indices (demo-grover)")
    run.add_argument("--iterations", type=int)
    run.add_argument("--k", type=int, help="Fourier component (demo-fourier)")
    run.add_argument("--grid-points", dest="grid_points", type=int)
    return parser


def _family_spec(values: dict) -> dict:
    family = values.get("family")
    params = {k: values[k] for k in ("mean", "stddev", "rate") if values.get(k) is not None}
    spec = {"family": family, "params": params}
    if values.get("support") is not None:
        spec["support"] = list(values["support"])
    return spec


def parse_config(argv=None) -> RunConfig:
    """Resolve defaults < config file < flags into a validated ``RunConfig``."""
    args = vars(build_parser().parse_args(argv))
    merged: dict = {}
    if args.get("config"):
        try:
            with open(args["config"]) as fh:
                file_values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"--config: cannot read {args['config']}: {exc}")
        if not isinstance(file_values, dict):
            raise ConfigError("--config: file must hold a JSON object")
        unknown = sorted(set(file_values) - _FILE_KEYS)
        if unknown:
            raise ConfigError(f"--config: unknown key {unknown[0]!r}")
        merged.update(file_values)
    merged.update({k: v for k, v in args.items() if v is not None and k != "config"})

    spec = merged.pop("dist_spec", None)
    family_keys = {k: merged.pop(k) for k in ("family", "mean", "stddev", "rate", "support")
                   if k in merged}
    if family_keys.get("family"):
        if family_keys["family"] in ("mixture", "tabulated"):
            raise ConfigError(f"--family {family_keys['family']}: use --dist-spec for this family")
        spec = _family_spec(family_keys)
    elif family_keys:
        raise ConfigError(f"--{next(iter(family_keys))}: given without --family")
    elif isinstance(spec, str):
        try:
            spec = load_distribution(spec).to_dict()
        except (OSError, DomainError) as exc:
            raise ConfigError(f"--dist-spec: {exc}")
    if spec is None:
        raise ConfigError("--family/--dist-spec: no distribution given")
    merged["dist_spec"] = spec

    config = RunConfig(**merged)
    if not 1 <= config.n <= MAX_QUBITS:
        raise ConfigError(f"--n: {config.n} is outside 1..{MAX_QUBITS} (dense simulation cap)")
    if config.shots is not None and config.shots < 1:
        raise ConfigError("--shots: must be >= 1")
    try:
        config.integration_backend()
    except DomainError as exc:
        raise ConfigError(f"--backend/--tolerance/--samples/--seed: {exc}")
    try:
        config.distribution()
    except DomainError as exc:
        raise ConfigError(f"--family/--dist-spec: {exc}")
    return config


def _masses_check(dist, n, backend, masses) -> dict:
    """TV against closed-form masses, with the allowance the backend warrants."""
    if not dist.cdf_available:
        return {}
    tv = total_variation(masses.masses, exact_masses(dist, n))
    if backend.method == "monte-carlo":
        limit = 5.0 * masses.standard_error_budget()
    elif backend.method == "adaptive-quadrature":
        limit = max(1e-9, 2 ** n * backend.tolerance)
    else:
        limit = 1e-9
    return {"tv_vs_exact": {"value": tv, "limit": limit, "pass": tv <= limit}}


def _cmd_prepare(cfg, dist, backend):
    masses = discretize(dist, cfg.n, backend)
    state = Statevector(cfg.n, np.sqrt(masses.masses).astype(complex))
    checks = _masses_check(dist, cfg.n, backend, masses)
    report = {"state": state_to_dict(state, masses.masses),
              "standard_error_budget": masses.standard_error_budget()}
    return report, checks, {"": state_to_csv(state, masses.masses)}


def _cmd_synthesize(cfg, dist, backend):
    masses, table = discretize(dist, cfg.n, backend, with_angles=True)
    circuit = synthesize(table)
    report = {"angles": {str(m): level for m, level in enumerate(table.levels)},
              "gate_counts": {"multiplexed": gate_count_report(circuit, decomposed=False),
                              "decomposed": gate_count_report(circuit, decomposed=True)}}
    counts = report["gate_counts"]["decomposed"]
    checks = {"decomposed_counts": {"value": [counts["ry"], counts["cnot"]],
                                    "expected": [2 ** cfg.n - 1, 2 ** cfg.n - 2],
                                    "pass": counts["ry"] == 2 ** cfg.n - 1
                                    and counts["cnot"] == 2 ** cfg.n - 2}}
    extra = {".circuit.txt": circuit_to_text(circuit), ".angles.json": table.to_json() + "\n"}
    return report, checks, extra


def _cmd_simulate(cfg, dist, backend):
    masses, table = discretize(dist, cfg.n, backend, with_angles=True)
    direct = Statevector(cfg.n, np.sqrt(masses.masses).astype(complex))
    circuit = synthesize(table)
    zero = Statevector.zero(cfg.n)
    simulated = apply_circuit(zero, circuit)
    lowered = apply_circuit(zero, decompose_circuit(circuit))
    f_mux, f_dec = fidelity(simulated, direct), fidelity(lowered, direct)
    checks = {
        "fidelity_multiplexed": {"value": f_mux, "limit": 1 - PATH_FIDELITY_GAP,
                                 "pass": f_mux >= 1 - PATH_FIDELITY_GAP},
        "fidelity_decomposed": {"value": f_dec, "limit": 1 - PATH_FIDELITY_GAP,
                                "pass": f_dec >= 1 - PATH_FIDELITY_GAP},
    }
    checks.update(_masses_check(dist, cfg.n, backend, masses))
    report = {"fidelity": {"multiplexed": f_mux, "decomposed": f_dec},
              "gate_counts": gate_count_report(circuit, decomposed=True)}
    outputs = {"": state_to_csv(simulated)}
    if cfg.shots:
        counts = measure_histogram(simulated, cfg.shots, cfg.seed)
        probs = simulated.probabilities()
        report["histogram"] = {"shots": cfg.shots, "seed": cfg.seed, "counts": counts,
                               "tv_vs_probabilities": total_variation(counts / cfg.shots, probs)}
        outputs[".histogram.csv"] = table_to_csv(
            ("index", "bits", "count", "probability"),
            [(i, format(i, f"0{cfg.n}b"), int(c), float(p))
             for i, (c, p) in enumerate(zip(counts, probs))])
    else:
        report["state"] = state_to_dict(simulated)
    return report, checks, outputs


def _cmd_grover(cfg, dist, backend):
    prior = Statevector(cfg.n, np.sqrt(discretize(dist, cfg.n, backend).masses).astype(complex))
    marked = cfg.marked or [int(np.argmax(prior.probabilities()))]
    iterations = cfg.iterations if cfg.iterations is not None else 2 * math.ceil(math.sqrt(2 ** cfg.n))
    uniform = Statevector.uniform(cfg.n)
    run_prior = apps.grover_search(prior, marked, iterations)
    run_uniform = apps.grover_search(uniform, marked, iterations)
    closed = apps.uniform_success_closed_form(len(set(marked)), 2 ** cfg.n, np.arange(iterations + 1))
    err = float(np.max(np.abs(run_uniform.success_trace - closed)))
    checks = {"uniform_closed_form": {"value": err, "limit": GROVER_TOLERANCE,
                                      "pass": err <= GROVER_TOLERANCE}}
    report = {"marked": sorted(set(marked)), "iterations": iterations,
              "prior_trace": run_prior.success_trace, "uniform_trace": run_uniform.success_trace,
              "prior_first_reaching_0.99": run_prior.first_reaching(0.99),
              "uniform_first_reaching_0.99": run_uniform.first_reaching(0.99)}
    rows = [(t, float(a), float(b), float(c)) for t, (a, b, c) in
            enumerate(zip(run_prior.success_trace, run_uniform.success_trace, closed))]
    return report, checks, {"": table_to_csv(
        ("iteration", "prior_success", "uniform_success", "closed_form"), rows)}


def _cmd_interference(cfg, dist, backend):
    if cfg.n > 12:
        raise ConfigError("--n: demo-interference is limited to n <= 12")
    p = discretize(dist, cfg.n, backend).masses
    q = apps.interference_distribution(dist, cfg.n, backend)
    ref = apps.interference_reference(p)
    err = float(np.max(np.abs(q - ref)))
    checks = {"brute_force_agreement": {"value": err, "limit": INTERFERENCE_TOLERANCE,
                                        "pass": err <= INTERFERENCE_TOLERANCE}}
    report = {"q": q, "sum_q": float(q.sum())}
    try:
        report["input_log_concavity"] = check_log_concavity(dist, cfg.grid_points).to_dict()
    except DegenerateInputError as exc:
        report["input_log_concavity"] = {"error": str(exc)}
    if cfg.n >= 2:
        try:
            report["q_log_concavity"] = apps.interference_log_concavity(q).to_dict()
        except DegenerateInputError as exc:
            report["q_log_concavity"] = {"error": str(exc)}
    rows = [(j, format(j, f"0{cfg.n}b"), float(p[j]), float(q[j]), float(ref[j]))
            for j in range(q.size)]
    return report, checks, {"": table_to_csv(("index", "bits", "p", "q", "q_reference"), rows)}


def _cmd_fourier(cfg, dist, backend):
    if not 0 <= cfg.k < 2 ** cfg.n:
        raise ConfigError(f"--k: {cfg.k} is outside 0..{2 ** cfg.n - 1}")
    result = apps.fourier_component_demo(dist, cfg.n, cfg.k, backend)
    checks = {"direct_sum_agreement": {"value": result.discrepancy, "limit": FOURIER_TOLERANCE,
                                       "pass": result.discrepancy <= FOURIER_TOLERANCE}}
    report = {"k": cfg.k, "magnitude": result.magnitude, "reference": result.reference}
    return report, checks, {"": table_to_csv(("k", "magnitude", "reference"),
                                             [(cfg.k, result.magnitude, result.reference)])}


def _cmd_logconcave(cfg, dist, backend):
    try:
        result = check_log_concavity(dist, cfg.grid_points).to_dict()
    except DegenerateInputError as exc:
        raise ConfigError(f"--grid-points/--dist-spec: {exc}")
    report = {"log_concavity": result}
    rows = [(result["passes"], result["worst_point"], result["worst_value"],
             result["evaluated"], result["skipped"], result["gaps"])]
    return report, {}, {"": table_to_csv(
        ("passes", "worst_point", "worst_value", "evaluated", "skipped", "gaps"), rows)}


_HANDLERS = {
    "prepare": _cmd_prepare, "synthesize": _cmd_synthesize, "simulate": _cmd_simulate,
    "demo-grover": _cmd_grover, "demo-interference": _cmd_interference,
    "demo-fourier": _cmd_fourier, "check-logconcave": _cmd_logconcave,
}


def _csv_header(config: RunConfig) -> str:
    return (f"# format={FORMAT_VERSION}\n"
            f"# config={json.dumps(config.to_dict(), sort_keys=True)}\n")


def _output_prefix(config: RunConfig) -> str | None:
    if config.output:
        return config.output
    directory = os.environ.get(OUTPUT_DIR_ENV)
    return os.path.join(directory, config.command) if directory else None


def run(config: RunConfig, stdout=None) -> int:
    """Execute one command; return the process exit code."""
    stdout = stdout or sys.stdout
    dist = config.distribution()
    backend = config.integration_backend()
    try:
        body, checks, tables = _HANDLERS[config.command](config, dist, backend)
    except IntegrationError as exc:
        print(f"error: integration failed: {exc} (error estimate {exc.error_estimate:g})",
              file=sys.stderr)
        return 1
    passed = all(c["pass"] for c in checks.values())
    report = {"format": FORMAT_VERSION, "config": config.to_dict(),
              "checks": checks, "passed": passed, "result": body}
    report_text = report_to_json(report)

    prefix = _output_prefix(config)
    try:
        if prefix is None:
            if config.format == "csv" and "" in tables:
                stdout.write(_csv_header(config) + tables[""])
            else:
                stdout.write(report_text)
        else:
            write_atomic(prefix + ".json", report_text)
            written = [prefix + ".json"]
            for suffix, text in tables.items():
                if suffix == "":
                    if config.format != "csv":
                        continue
                    suffix = ".csv"
                if suffix.endswith(".csv"):
                    text = _csv_header(config) + text
                write_atomic(prefix + suffix, text)
                written.append(prefix + suffix)
            print(f"{config.command}: wrote {', '.join(written)}", file=stdout)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 3

    for name, check in checks.items():
        if not check["pass"]:
            print(f"check failed: {name} = {check['value']!r} (limit {check.get('limit', check.get('expected'))!r})",
                  file=sys.stderr)
    return 0 if passed else 1


def main(argv=None) -> int:
    try:
        config = parse_config(argv)
    except ConfigError as exc:
        print(f"bisectprep: error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return run(config)
    except ConfigError as exc:
        print(f"bisectprep: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
