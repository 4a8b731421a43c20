"""
Command line interface - every operation as a command printing a canonical
JSON report on standard output

Exit codes: 0 success / feasible / holds, 1 verified negative, 2 usage error
or refusal (size limit, exhausted budget).
"""

import logging
from contextlib import contextmanager
from pathlib import Path
from typing import Dict, Iterator, List, Optional

import numpy as np
import typer

from .audit import (
    ChainViolationReport,
    audit_counting_bounds,
    check_bijections,
    classify_messages,
    compute_signal_sets,
    information_rows,
    rows_as_dicts,
)
from .cli_io import (
    canonical_json,
    code_to_document,
    counterexample_to_dict,
    instance_to_document,
    load_code,
    load_instance,
    plain,
    serialize_code,
    serialize_instance,
    write_text,
)
from .config import configure_logging, get_settings
from .errors import (
    BijectionChainViolation,
    CodeMismatchError,
    DocumentError,
    ExhaustiveCheckTooLarge,
    PremiseViolation,
    UsageError,
)
from .infotools import (
    BoundParams,
    edge_joint_distribution,
    entropy,
    mutual_information,
    random_joint_distribution,
    rate_bound,
    triangle_bound_check,
)
from .netcode_engine import check_unicast_zero_error, check_zero_error, failing_terminals
from .network_model import NECInstance, UnicastInstance, min_cut, unicast_cut_check
from .oracle import EXHAUSTED, SearchBudget, search_nec, search_unicast
from .pipeline import ExperimentPipeline
from .reduction import extract_code, lift_code, reduce
from .report_generator import ReportGenerator

logger = logging.getLogger(__name__)

app = typer.Typer(
    help="Reduce multiple-unicast network coding to network error correction and check it.",
    add_completion=False,
    no_args_is_help=True,
)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2

INSTANCE = typer.Option(..., "--instance", help="Instance JSON file")
CODE = typer.Option(..., "--code", help="Code JSON file")
OUT = typer.Option(None, "--out", help="Write the produced document here")
JOBS = typer.Option(None, "--jobs", min=1, help="Worker count (default NETREDUCE_JOBS)")
LEVEL = typer.Option(2, "--l", min=1, help="Level-set parameter l")


@app.callback()
def main(
    ctx: typer.Context,
    verbose: bool = typer.Option(False, "--verbose", help="Debug logging"),
    quiet: bool = typer.Option(False, "--quiet", help="Warnings and errors only"),
    summary: bool = typer.Option(False, "--summary", help="Print a table summary on standard error"),
    report_dir: Optional[Path] = typer.Option(None, "--report-dir", help="Save a text report here"),
):
    """Configure logging and reporting for every command"""
    configure_logging("DEBUG" if verbose else "WARNING" if quiet else None)
    ctx.obj = {"summary": summary, "report_dir": report_dir}


def _jobs(jobs: Optional[int]) -> int:
    return jobs if jobs is not None else get_settings().jobs


def _emit(ctx: typer.Context, command: str, report: Dict, code: int = EXIT_OK) -> None:
    report = plain({"command": command, **report})
    typer.echo(canonical_json(report), nl=False)
    options = ctx.obj or {}
    if options.get("summary") or options.get("report_dir"):
        generator = ReportGenerator(report, command)
        if options.get("summary"):
            generator.print_summary()
        if options.get("report_dir"):
            generator.save_report(str(options["report_dir"]))
    raise typer.Exit(code=code)


@contextmanager
def _refusals(ctx: typer.Context, command: str) -> Iterator[None]:
    """Turn usage problems and size refusals into exit code 2"""
    try:
        yield
    except (DocumentError, CodeMismatchError, ExhaustiveCheckTooLarge, FileNotFoundError, UsageError) as exc:
        logger.error(f"{command} refused: {exc}")
        _emit(ctx, command, {"status": "error", "error": str(exc)}, EXIT_USAGE)


@contextmanager
def _as_usage() -> Iterator[None]:
    """Argument checks done by the library become usage errors"""
    try:
        yield
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _need(inst, kind, command: str, reduced: bool = False):
    if not isinstance(inst, kind):
        raise UsageError(f"{command} needs a {kind.kind} instance, got {inst.kind}")
    if reduced and not inst.roles:
        raise UsageError(f"{command} needs a reduced instance with branch roles")
    return inst


def _write_or_embed(report: Dict, key: str, out: Optional[Path], text: str, document: Dict) -> None:
    if out is not None:
        write_text(out, text)
        report["out"] = str(out)
    else:
        report[key] = document


@app.command("reduce")
def reduce_command(ctx: typer.Context, instance: Path = INSTANCE, out: Optional[Path] = OUT):
    """Build the error-correction gadget for a unicast instance"""
    with _refusals(ctx, "reduce"):
        inst = _need(load_instance(instance), UnicastInstance, "reduce")
        reduced = reduce(inst)
        report = {
            "status": "ok",
            "nodes": len(reduced.graph.nodes),
            "edges": len(reduced.graph.edges),
            "adversary_sets": len(reduced.adversary),
            "min_cut": min_cut(reduced.graph, reduced.source, reduced.terminal).value,
        }
        _write_or_embed(report, "instance", out, serialize_instance(reduced), instance_to_document(reduced))
    _emit(ctx, "reduce", report)


@app.command("lift")
def lift_command(
    ctx: typer.Context,
    instance: Path = INSTANCE,
    code: Path = CODE,
    out: Optional[Path] = OUT,
    force: bool = typer.Option(False, "--force", help="Lift even if the code is not zero-error"),
    jobs: Optional[int] = JOBS,
):
    """Lift a unit-rate unicast code into the reduced instance"""
    with _refusals(ctx, "lift"):
        inst = _need(load_instance(instance), UnicastInstance, "lift")
        ucode = load_code(code, inst)
        try:
            result = lift_code(ucode, inst, force=force, jobs=_jobs(jobs))
        except PremiseViolation as exc:
            _emit(ctx, "lift", {
                "status": "premise-violated",
                "error": str(exc),
                "counterexample": counterexample_to_dict(exc.counterexample),
            }, EXIT_NEGATIVE)
        report = {"status": "ok" if result.premise_holds else "forced", "premise_holds": result.premise_holds}
        _write_or_embed(report, "code", out, serialize_code(result.code), code_to_document(result.code))
    _emit(ctx, "lift", report, EXIT_OK if result.premise_holds else EXIT_NEGATIVE)


@app.command("extract")
def extract_command(
    ctx: typer.Context,
    instance: Path = INSTANCE,
    code: Path = CODE,
    out: Optional[Path] = OUT,
    jobs: Optional[int] = JOBS,
):
    """Extract a unicast code from a zero-error code on a reduced instance"""
    with _refusals(ctx, "extract"):
        inst = _need(load_instance(instance), NECInstance, "extract", reduced=True)
        ncode = load_code(code, inst)
        try:
            ucode, chain = extract_code(ncode, inst, jobs=_jobs(jobs))
        except PremiseViolation as exc:
            report = {"status": "premise-violated", "error": str(exc)}
            if exc.counterexample is not None:
                report["counterexample"] = counterexample_to_dict(exc.counterexample)
            _emit(ctx, "extract", report, EXIT_NEGATIVE)
        except BijectionChainViolation as exc:
            _emit(ctx, "extract", {
                "status": "chain-violated",
                "branch": exc.branch,
                "relation": exc.relation,
                "values": exc.values,
                "messages": exc.messages,
            }, EXIT_NEGATIVE)
        report = {"status": "ok", "chain": chain.maps, "normalized": chain.normalized}
        _write_or_embed(report, "code", out, serialize_code(ucode), code_to_document(ucode))
    _emit(ctx, "extract", report)


@app.command("verify")
def verify_command(
    ctx: typer.Context,
    instance: Path = INSTANCE,
    code: Path = CODE,
    jobs: Optional[int] = JOBS,
):
    """Exhaustive zero-error check"""
    with _refusals(ctx, "verify"):
        inst = load_instance(instance)
        ncode = load_code(code, inst)
        if isinstance(inst, UnicastInstance):
            result = check_unicast_zero_error(ncode, inst, jobs=_jobs(jobs))
        else:
            result = check_zero_error(ncode, inst, jobs=_jobs(jobs))
        report = {"status": "zero-error" if result.ok else "counterexample", "evaluations": result.evaluations}
        if not result.ok:
            report["counterexample"] = counterexample_to_dict(result.counterexample)
            if isinstance(inst, UnicastInstance):
                report["failing_terminals"] = failing_terminals(inst, result.counterexample)
    _emit(ctx, "verify", report, EXIT_OK if result.ok else EXIT_NEGATIVE)


@app.command("classify")
def classify_command(
    ctx: typer.Context,
    instance: Path = INSTANCE,
    code: Path = CODE,
    jobs: Optional[int] = JOBS,
):
    """Good / bad / poor message classification"""
    with _refusals(ctx, "classify"):
        inst = _need(load_instance(instance), NECInstance, "classify", reduced=True)
        classification = classify_messages(load_code(code, inst), inst, jobs=_jobs(jobs))
        report = {
            "status": "ok",
            "total": classification.total,
            "epsilon": classification.epsilon,
            "epsilon_prime": classification.epsilon_prime,
            "good": classification.good,
            "bad": classification.bad,
            "poor": classification.poor,
            "circle": classification.circle,
        }
    _emit(ctx, "classify", report)


@app.command("audit")
def audit_command(
    ctx: typer.Context,
    instance: Path = INSTANCE,
    code: Path = CODE,
    level: int = LEVEL,
    information: bool = typer.Option(False, "--information", help="Add entropy rows under M°"),
    jobs: Optional[int] = JOBS,
):
    """Counting-bound audit of a code on a reduced instance"""
    with _refusals(ctx, "audit"):
        inst = _need(load_instance(instance), NECInstance, "audit", reduced=True)
        ncode = load_code(code, inst)
        workers = _jobs(jobs)
        classification = classify_messages(ncode, inst, jobs=workers)
        signal_sets = compute_signal_sets(ncode, inst, classification, level, jobs=workers)
        audit = audit_counting_bounds(classification, signal_sets, level)
        chain = check_bijections(ncode, inst, jobs=workers)
        report = {
            "status": "holds" if audit.holds else "violated",
            "epsilon": classification.epsilon,
            "rows": rows_as_dicts(audit.rows),
            "bijections": (
                {"verified": False, **rows_as_dicts([chain])[0]}
                if isinstance(chain, ChainViolationReport)
                else {"verified": True, "maps": chain.maps}
            ),
        }
        if information:
            report["information"] = rows_as_dicts(information_rows(ncode, inst, classification, level))
    _emit(ctx, "audit", report, EXIT_OK if audit.holds else EXIT_NEGATIVE)


@app.command("oracle")
def oracle_command(
    ctx: typer.Context,
    instance: Path = INSTANCE,
    n: int = typer.Option(1, "--n", min=1, help="Block length"),
    rate_bits: Optional[int] = typer.Option(None, "--rate-bits", min=0, help="NEC message bits (default: n times min-cut)"),
    budget: Optional[int] = typer.Option(None, "--budget", min=1, help="Normalized candidate cap"),
    hint: Optional[Path] = typer.Option(None, "--code", help="Candidate witness to verify first (NEC only)"),
    out: Optional[Path] = OUT,
    jobs: Optional[int] = JOBS,
):
    """Exhaustive feasibility search at block length n"""
    with _refusals(ctx, "oracle"):
        inst = load_instance(instance)
        defaults = SearchBudget.default(n)
        with _as_usage():
            limits = SearchBudget(budget or defaults.max_codes, defaults.max_seconds, n)
        if isinstance(inst, UnicastInstance):
            verdict = search_unicast(inst, n, limits, jobs=_jobs(jobs))
        else:
            bits = rate_bits if rate_bits is not None else n * min_cut(inst.graph, inst.source, inst.terminal).value
            start = load_code(hint, inst) if hint is not None else None
            verdict = search_nec(inst, bits, n, limits, jobs=_jobs(jobs), hint=start)
        report = verdict.as_dict()
        if verdict.witness is not None:
            _write_or_embed(report, "witness", out, serialize_code(verdict.witness), code_to_document(verdict.witness))
    if verdict.status == EXHAUSTED:
        code = EXIT_USAGE
    else:
        code = EXIT_OK if verdict.feasible else EXIT_NEGATIVE
    _emit(ctx, "oracle", report, code)


def _split(names: Optional[str]) -> List[str]:
    return [name.strip() for name in (names or "").split(",") if name.strip()]


@app.command("info")
def info_command(
    ctx: typer.Context,
    instance: Optional[Path] = typer.Option(None, "--instance", help="Instance JSON file"),
    code: Optional[Path] = typer.Option(None, "--code", help="Code JSON file"),
    edges: Optional[str] = typer.Option(None, "--edges", help="Comma-separated edge ids"),
    against: Optional[str] = typer.Option(None, "--against", help="Second edge group for mutual information"),
    mode: str = typer.Option("uniform", "--mode", help="uniform | circle | uniform_a"),
    samples: int = typer.Option(0, "--samples", min=0, help="Random pmfs for the three-variable inequality"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed for --samples"),
    jobs: Optional[int] = JOBS,
):
    """Entropy and mutual information of edge signals, or a random inequality sweep"""
    with _refusals(ctx, "info"):
        if samples > 0:
            rng = np.random.default_rng(seed if seed is not None else get_settings().seed)
            failures = 0
            for _ in range(samples):
                shape = [int(size) for size in rng.integers(2, 5, size=3)]
                if not triangle_bound_check(random_joint_distribution(shape, rng))[2]:
                    failures += 1
            report = {"status": "holds" if failures == 0 else "violated", "samples": samples, "failures": failures}
            result = EXIT_OK if failures == 0 else EXIT_NEGATIVE
        else:
            if instance is None or code is None or not edges:
                raise UsageError("info needs --instance, --code and --edges (or --samples)")
            inst = load_instance(instance)
            ncode = load_code(code, inst)
            first, second = _split(edges), _split(against)
            messages = None
            if mode == "circle":
                inst = _need(inst, NECInstance, "info --mode circle")
                messages = sorted(classify_messages(ncode, inst, jobs=_jobs(jobs)).circle)
                if not messages:
                    raise UsageError("M° is empty; nothing to average over")
            with _as_usage():
                dist = edge_joint_distribution(
                    ncode, inst, first + second,
                    mode="subset" if mode == "circle" else mode,
                    messages=messages,
                    jobs=_jobs(jobs),
                )
                report = {"status": "ok", "mode": mode, "entropy": entropy(dist, first), "distribution": dist.as_dict()}
                if second:
                    report["entropy_against"] = entropy(dist, second)
                    report["mutual_information"] = mutual_information(dist, first, second)
            result = EXIT_OK
    _emit(ctx, "info", report, result)


@app.command("bound")
def bound_command(
    ctx: typer.Context,
    n: int = typer.Option(..., "--n", min=1, help="Block length"),
    eps: float = typer.Option(..., "--eps", help="Error probability"),
    level: int = LEVEL,
    k: int = typer.Option(2, "--k", min=1, help="Number of unicast pairs"),
    uniform_a: bool = typer.Option(False, "--uniform-a", help="Scale by (1 - 4 eps)"),
):
    """Evaluate the per-branch information bound"""
    with _refusals(ctx, "bound"):
        with _as_usage():
            params = BoundParams(n=n, eps=eps, l=level, k=k, uniform_a=uniform_a)
        bound = rate_bound(params)
        report = {"status": "vacuous" if bound.vacuous else "ok", **bound.as_dict()}
    _emit(ctx, "bound", report, EXIT_NEGATIVE if bound.vacuous else EXIT_OK)


@app.command("mincut")
def mincut_command(
    ctx: typer.Context,
    instance: Path = INSTANCE,
    source: Optional[str] = typer.Option(None, "--from", help="Cut source (default: instance endpoints)"),
    target: Optional[str] = typer.Option(None, "--to", help="Cut sink"),
):
    """Min-cut values with witness cuts"""
    with _refusals(ctx, "mincut"):
        inst = load_instance(instance)
        if source and target:
            pairs = [(source, target)]
        elif isinstance(inst, UnicastInstance):
            pairs = list(inst.pairs)
        else:
            pairs = [(inst.source, inst.terminal)]
        cuts = []
        for src, dst in pairs:
            with _as_usage():
                cut = min_cut(inst.graph, src, dst)
            cuts.append({"from": src, "to": dst, "value": cut.value, "cut_edges": sorted(cut.cut_edges)})
        report = {"status": "ok", "cuts": cuts}
        if isinstance(inst, UnicastInstance) and not (source and target):
            report["per_pair"] = unicast_cut_check(inst)
        blocked = any(cut["value"] == 0 for cut in cuts)
        if blocked:
            report["status"] = "disconnected"
    _emit(ctx, "mincut", report, EXIT_NEGATIVE if blocked else EXIT_OK)


@app.command("experiment")
def experiment_command(
    ctx: typer.Context,
    seed: Optional[int] = typer.Option(None, "--seed", help="Corpus seed (default NETREDUCE_SEED)"),
    samples: int = typer.Option(14, "--samples", min=0, help="Number of random instances"),
    budget: Optional[int] = typer.Option(None, "--budget", min=1, help="Normalized candidate cap per search"),
    level: int = LEVEL,
    out: Optional[Path] = typer.Option(None, "--out", help="Directory for experiment.csv and summary"),
    jobs: Optional[int] = JOBS,
):
    """Unicast vs reduced-instance feasibility over the corpus at n=1"""
    with _refusals(ctx, "experiment"):
        defaults = SearchBudget.default()
        pipeline = ExperimentPipeline(
            budget=SearchBudget(budget or defaults.max_codes, defaults.max_seconds),
            jobs=_jobs(jobs),
            level=level,
        )
        summary = pipeline.run(
            seed if seed is not None else get_settings().seed,
            random_count=samples,
            output_dir=str(out) if out else None,
        )
        results = summary.pop("results")
        clean = summary["disagreements"] == 0 and not (
            summary["lift_failures"] or summary["extract_failures"] or summary["audit_failures"]
        )
        report = {
            "status": "agree" if clean else "disagree",
            **summary,
            "rows": results.astype(object).where(results.notna(), None).to_dict(orient="records"),
        }
    _emit(ctx, "experiment", report, EXIT_OK if clean else EXIT_NEGATIVE)
