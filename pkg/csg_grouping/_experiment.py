import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as _np
import pandas as pd

from csg_grouping._constants import (
    BMS_FUNCTION_IDS,
    METHOD_CSG,
    METHOD_DG,
    METHOD_RDG_LIKE,
    METHOD_DDG,
    METHOD_RANDOM,
    DECOMPOSITION_METHODS,
    OPTIMIZATION_METHODS,
    DECOMPOSITION_COLUMNS,
    OPTIMIZATION_COLUMNS,
    SUMMARY_COLUMNS,
    CSV_FLOAT_FORMAT,
    DEFAULT_SUBCOMPONENT_CAP,
    DEFAULT_POPULATION_SIZE
)
from csg_grouping._debug import debug_print, debug_timer
from csg_grouping._problem import FeLedger
from csg_grouping._metrics import AccuracyReport
from csg_grouping.benchmarks import build_bms
from csg_grouping.decomposers import (
    CsgConfig,
    csg_decompose,
    dg_pairwise,
    rdg_like_decompose,
    ddg_decompose
)
from csg_grouping.optimizers import (
    SansdeConfig,
    partition_separables,
    random_subcomponents,
    cc_optimize
)

logger = logging.getLogger(__name__)


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class ProblemSpec:
    function_id: int
    dimension: int
    seed: int = None

    @property
    def label(self):
        return f"f{self.function_id}_d{self.dimension}"

    def sort_key(self):
        return (self.function_id, self.dimension, -1 if self.seed is None else self.seed)


@dataclass
class OptimizationSettings:
    budget: int
    runs: int = 1
    checkpoints: list = field(default_factory=list)
    subcomponent_cap: int = DEFAULT_SUBCOMPONENT_CAP
    population_size: int = DEFAULT_POPULATION_SIZE


@dataclass
class ExperimentManifest:
    """
    A batch of problems and methods. `decomposition_config` overrides
    CsgConfig fields; `seed` is the base seed of optimization runs.
    """

    problems: list
    methods: list
    decomposition_config: dict = field(default_factory=dict)
    optimization: OptimizationSettings = None
    output_dir: str = "results"
    seed: int = 0

    def csg_config(self):
        return CsgConfig.from_dict(self.decomposition_config)

    def validate(self):
        """
        :raises ManifestError: On any invalid entry
        """

        if len(self.methods) == 0:
            raise ManifestError("The manifest lists no methods")

        unknown = [m for m in self.methods if m not in OPTIMIZATION_METHODS]
        if unknown:
            raise ManifestError(
                f"Unknown methods {unknown}; expected a subset of {list(OPTIMIZATION_METHODS)}"
            )
        elif len(set(self.methods)) != len(self.methods):
            raise ManifestError(f"Methods are repeated in {self.methods}")

        if len(self.problems) == 0:
            raise ManifestError("The manifest lists no problems")

        for spec in self.problems:
            if spec.function_id not in BMS_FUNCTION_IDS:
                raise ManifestError(f"Unknown function_id {spec.function_id}")
            elif spec.dimension < 20 or spec.dimension % 20 != 0:
                raise ManifestError(
                    f"dimension must be a positive multiple of 20; {spec.dimension} provided"
                )

            elif spec.seed is not None and spec.seed < 0:
                raise ManifestError(f"Problem seeds must be non-negative; {spec.seed} provided")

        if len(set(self.problems)) != len(self.problems):
            raise ManifestError("Problems are repeated in the manifest")
        elif self.seed < 0:
            raise ManifestError(f"seed must be non-negative; {self.seed} provided")

        try:
            self.csg_config()
        except (TypeError, ValueError) as err:
            raise ManifestError(f"Invalid decomposition_config: {err}") from err

        opt = self.optimization

        if opt is not None:
            if opt.budget < 1:
                raise ManifestError(f"budget must be positive; {opt.budget} provided")
            elif opt.runs < 1:
                raise ManifestError(f"runs must be at least 1; {opt.runs} provided")
            elif opt.subcomponent_cap < 1 or opt.population_size < 4:
                raise ManifestError("subcomponent_cap must be >= 1 and population_size >= 4")

            cps = list(opt.checkpoints)
            if any(b <= a for a, b in zip(cps, cps[1:])):
                raise ManifestError(f"checkpoints must be strictly increasing; {cps} provided")
            elif cps and (cps[0] < 1 or cps[-1] > opt.budget):
                raise ManifestError(
                    f"checkpoints must lie in [1, budget={opt.budget}]; {cps} provided"
                )

        return True


def _reject_unknown(data, known, where):
    unknown = sorted(set(data) - set(known))
    if unknown:
        raise ManifestError(f"Unknown keys {unknown} in {where}")


def manifest_from_dict(data):
    """
    Build and validate a manifest from parsed JSON

    :param data: Parsed manifest
    :type data: dict
    :return: Validated manifest
    :rtype: ExperimentManifest
    """

    if not isinstance(data, dict):
        raise ManifestError("A manifest must be a JSON object")

    _reject_unknown(data, [f.name for f in fields(ExperimentManifest)], "the manifest")

    try:
        problems = [
            ProblemSpec(
                function_id=int(p["function_id"]),
                dimension=int(p["dimension"]),
                seed=None if p.get("seed") is None else int(p["seed"])
            )
            for p in data.get("problems", [])
        ]
    except (KeyError, TypeError, ValueError) as err:
        raise ManifestError(f"Invalid problem entry: {err}") from err

    for p in data.get("problems", []):
        _reject_unknown(p, ["function_id", "dimension", "seed"], "a problem entry")

    optimization = data.get("optimization", None)

    if optimization is not None:
        _reject_unknown(
            optimization,
            [f.name for f in fields(OptimizationSettings)],
            "optimization"
        )

        if "budget" not in optimization:
            raise ManifestError("optimization needs a budget")

        optimization = OptimizationSettings(
            budget=int(optimization["budget"]),
            runs=int(optimization.get("runs", 1)),
            checkpoints=[int(c) for c in optimization.get("checkpoints", [])],
            subcomponent_cap=int(optimization.get("subcomponent_cap", DEFAULT_SUBCOMPONENT_CAP)),
            population_size=int(optimization.get("population_size", DEFAULT_POPULATION_SIZE))
        )

    manifest = ExperimentManifest(
        problems=problems,
        methods=list(data.get("methods", [])),
        decomposition_config=dict(data.get("decomposition_config", {})),
        optimization=optimization,
        output_dir=str(data.get("output_dir", "results")),
        seed=int(data.get("seed", 0))
    )

    manifest.validate()
    return manifest


def load_manifest(path):
    """
    Read a JSON manifest

    :param path: Manifest file
    :type path: str or Path
    :return: Validated manifest
    :rtype: ExperimentManifest
    """

    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as err:
            raise ManifestError(f"{path} is not valid JSON: {err}") from err

    return manifest_from_dict(data)


@dataclass
class SuiteOutput:
    table: pd.DataFrame
    failures: list
    files: list


def decompose(method, problem, config=None):
    """
    Run one decomposition method on `problem`

    :return: Grouping and the problem's ledger
    :rtype: tuple(GroupingResult, FeLedger)
    """

    if method == METHOD_CSG:
        return csg_decompose(problem, config)
    elif method == METHOD_DG:
        _, grouping = dg_pairwise(problem)
        return grouping, problem.ledger
    elif method == METHOD_RDG_LIKE:
        return rdg_like_decompose(problem)
    elif method == METHOD_DDG:
        return ddg_decompose(problem)
    else:
        raise ValueError(
            f"Unknown decomposition method {method!r}; expected one of {list(DECOMPOSITION_METHODS)}"
        )


def _failure(err, **cell):
    logger.warning(f"Cell {cell} failed: {type(err).__name__}: {err}")
    return dict(cell, error_type=type(err).__name__, message=str(err))


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, frame):
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, na_rep="", lineterminator="\n")


def _map_cells(func, cells, threads):
    if threads <= 1:
        return [func(c) for c in cells]

    with ThreadPoolExecutor(max_workers=threads) as executor:
        return list(executor.map(func, cells))


def _build_instances(problems):
    instances, failures = {}, []

    for spec in problems:
        try:
            instances[spec] = build_bms(spec.function_id, spec.dimension, spec.seed)
        except ValueError as err:
            failures.append(_failure(
                err,
                function_id=spec.function_id,
                dimension=spec.dimension,
                seed=spec.seed
            ))

    return instances, failures


def run_decomposition_suite(manifest, output_dir=None, threads=1):
    """
    Decompose every problem with every decomposition method and write
    decomposition.csv, decomposition.json and decomposition_failures.json.
    The `random` method has no decomposition and is skipped.

    :param manifest: Validated manifest
    :type manifest: ExperimentManifest
    :param output_dir: Output directory, defaults to manifest.output_dir
    :type output_dir: str, optional
    :param threads: Cells run in parallel, defaults to 1
    :type threads: int, optional
    :return: Result table, failures, and written files
    :rtype: SuiteOutput
    """

    manifest.validate()
    out = Path(manifest.output_dir if output_dir is None else output_dir)
    out.mkdir(parents=True, exist_ok=True)

    config = manifest.csg_config()
    instances, failures = _build_instances(manifest.problems)

    methods = [m for m in manifest.methods if m in DECOMPOSITION_METHODS]
    cells = [
        (method, spec)
        for spec in sorted(instances, key=ProblemSpec.sort_key)
        for method in methods
    ]

    def run_cell(cell):
        method, spec = cell
        instance = instances[spec]
        problem = instance.problem.with_ledger(FeLedger())
        t0 = debug_timer()

        try:
            grouping, ledger = decompose(method, problem, config)
        except Exception as err:
            return None, _failure(
                err,
                method=method,
                function_id=spec.function_id,
                dimension=spec.dimension,
                seed=spec.seed
            )

        report = AccuracyReport.from_results(instance.ground_truth, grouping, ledger)
        debug_timer(f"{method} on {spec.label}: SA={report.sa} NA={report.na}", t0)

        row = dict(method=method, function_id=spec.function_id, dimension=spec.dimension, seed=spec.seed)
        row.update(report.to_row())

        record = dict(row)
        record["grouping"] = grouping.to_dict(ledger)

        return (row, record), None

    results = _map_cells(run_cell, cells, threads)

    rows, records = [], []
    for result, failure in results:
        if failure is not None:
            failures.append(failure)
        else:
            rows.append(result[0])
            records.append(result[1])

    table = pd.DataFrame(rows, columns=DECOMPOSITION_COLUMNS)
    table["seed"] = table["seed"].astype("Int64")

    files = [out / "decomposition.csv", out / "decomposition.json", out / "decomposition_failures.json"]

    _write_csv(files[0], table)
    _write_json(files[1], records)
    _write_json(files[2], failures)

    return SuiteOutput(table, failures, files)


def _run_seeds(base_seed, spec, run):
    entropy = [int(base_seed), spec.function_id, spec.dimension, -1 if spec.seed is None else spec.seed]
    grouping_seq, cc_seq = _np.random.SeedSequence([e + 1 for e in entropy] + [run]).spawn(2)
    return grouping_seq, cc_seq


def run_optimization_suite(manifest, output_dir=None, threads=1):
    """
    Optimize every problem with every method's grouping for
    `optimization.runs` seeded runs. Decomposition evaluations are
    charged against the same budget.

    Writes optimization.csv (one row per checkpoint and a final row at
    the budget), optimization_summary.csv (mean, median and std across
    runs), optimization.json, optimization_failures.json, and one
    convergence CSV per run.

    :param manifest: Validated manifest with an optimization section
    :type manifest: ExperimentManifest
    :param output_dir: Output directory, defaults to manifest.output_dir
    :type output_dir: str, optional
    :param threads: Cells run in parallel, defaults to 1
    :type threads: int, optional
    :return: Per-run table, failures, and written files
    :rtype: SuiteOutput
    """

    manifest.validate()
    opt = manifest.optimization

    if opt is None:
        raise ManifestError("The manifest has no optimization section")

    labels = [(spec.function_id, spec.dimension) for spec in manifest.problems]
    if len(set(labels)) != len(labels):
        raise ManifestError("Optimization needs distinct (function_id, dimension) problems")

    out = Path(manifest.output_dir if output_dir is None else output_dir)
    (out / "convergence").mkdir(parents=True, exist_ok=True)

    config = manifest.csg_config()
    sansde = SansdeConfig(population_size=opt.population_size)
    instances, failures = _build_instances(manifest.problems)

    checkpoints = list(opt.checkpoints)
    recorded = checkpoints if opt.budget in checkpoints else checkpoints + [opt.budget]

    cells = [
        (method, spec, run)
        for spec in sorted(instances, key=ProblemSpec.sort_key)
        for method in manifest.methods
        for run in range(opt.runs)
    ]

    def run_cell(cell):
        method, spec, run = cell
        instance = instances[spec]
        problem = instance.problem.with_ledger(FeLedger(budget=opt.budget))
        grouping_seed, cc_seed = _run_seeds(manifest.seed, spec, run)
        t0 = debug_timer()

        try:
            if method == METHOD_RANDOM:
                sizes = [len(s) for s in partition_separables(instance.ground_truth, opt.subcomponent_cap)]
                subcomponents = random_subcomponents(spec.dimension, sizes, grouping_seed)
            else:
                grouping, _ = decompose(method, problem, config)
                subcomponents = partition_separables(grouping, opt.subcomponent_cap)

            decomposition_fe = problem.ledger.total

            state = cc_optimize(
                problem,
                subcomponents,
                opt.budget,
                seed=cc_seed,
                config=sansde,
                checkpoints=checkpoints
            )
        except Exception as err:
            return None, _failure(
                err,
                method=method,
                function_id=spec.function_id,
                dimension=spec.dimension,
                run=run
            )

        debug_timer(f"{method} on {spec.label} run {run}: best {state.best_fitness:.6e}", t0)

        rows = [
            dict(
                method=method,
                function_id=spec.function_id,
                dimension=spec.dimension,
                run=run,
                checkpoint_fe=cp,
                best_fitness=state.checkpoints.get(cp, state.best_fitness)
            )
            for cp in recorded
        ]

        record = dict(
            method=method,
            function_id=spec.function_id,
            dimension=spec.dimension,
            seed=spec.seed,
            run=run,
            final_best_fitness=state.best_fitness,
            decomposition_fe=decomposition_fe,
            subcomponent_sizes=[len(s) for s in subcomponents],
            cycles=state.cycles,
            generations=state.generations,
            ledger=problem.ledger.to_dict()
        )

        return (rows, record, state.trace_frame()), None

    results = _map_cells(run_cell, cells, threads)

    rows, records, files = [], [], []

    for cell, (result, failure) in zip(cells, results):
        if failure is not None:
            failures.append(failure)
            continue

        cell_rows, record, trace = result
        rows.extend(cell_rows)
        records.append(record)

        method, spec, run = cell
        path = out / "convergence" / f"{method}_f{spec.function_id}_d{spec.dimension}_run{run}.csv"
        _write_csv(path, trace)
        files.append(path)

    table = pd.DataFrame(rows, columns=OPTIMIZATION_COLUMNS)

    summary = (
        table.groupby(["method", "function_id", "dimension", "checkpoint_fe"], sort=True)["best_fitness"]
        .agg(["mean", "median", "std"])
        .reset_index()
    )
    summary = summary[SUMMARY_COLUMNS]

    main_files = [
        out / "optimization.csv",
        out / "optimization_summary.csv",
        out / "optimization.json",
        out / "optimization_failures.json"
    ]

    _write_csv(main_files[0], table)
    _write_csv(main_files[1], summary)
    _write_json(main_files[2], records)
    _write_json(main_files[3], failures)

    return SuiteOutput(table, failures, main_files + files)
