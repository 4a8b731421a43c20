"""
Experiment Pipeline - corpus-wide equivalence runs: unicast search, search on
the reduced instance, lift/extract cross-validation and counting audits
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import pandas as pd

from .audit import audit_counting_bounds, classify_messages, compute_signal_sets
from .corpus import default_corpus
from .errors import ExhaustiveCheckTooLarge
from .netcode_engine import check_unicast_zero_error, check_zero_error
from .network_model import UnicastInstance, unicast_cut_check
from .oracle import EXHAUSTED, SearchBudget, search_nec, search_unicast
from .reduction import extract_code, lift_code, reduce

logger = logging.getLogger(__name__)

COLUMNS = [
    "instance", "k", "edges", "min_cuts",
    "unicast_status", "nec_status", "agree",
    "lift_ok", "extract_ok", "audit_holds", "epsilon",
    "unicast_candidates", "nec_candidates", "seconds",
]


class ExperimentPipeline:
    """Run the n=1 equivalence experiment over a corpus of unicast instances"""

    def __init__(
        self,
        budget: Optional[SearchBudget] = None,
        jobs: int = 1,
        level: int = 2,
        use_hints: bool = False,
    ):
        """
        Initialize pipeline

        Args:
            budget: Search budget per instance and side
            jobs: Worker count forwarded to searches and checks
            level: Level-set parameter l for the audits
            use_hints: Let the reduced search start from the lifted witness
        """
        self.budget = budget or SearchBudget.default()
        self.jobs = jobs
        self.level = level
        self.use_hints = use_hints

    def extract(self, seed: int, random_count: int = 14) -> List[Tuple[str, UnicastInstance]]:
        """
        Build the corpus

        Args:
            seed: Seed for the random part
            random_count: Number of random instances

        Returns:
            List of (name, instance)
        """
        corpus = default_corpus(seed, random_count)
        logger.info(f"Extracted corpus of {len(corpus)} instances")
        return corpus

    def _run_one(self, name: str, inst: UnicastInstance) -> Dict:
        reduced = reduce(inst)
        row = {
            "instance": name,
            "k": inst.k,
            "edges": len(inst.graph.edges),
            "min_cuts": str(unicast_cut_check(inst)),
            "lift_ok": None,
            "extract_ok": None,
            "audit_holds": None,
            "epsilon": None,
        }

        unicast = search_unicast(inst, 1, self.budget, jobs=self.jobs)
        lifted = None
        if unicast.feasible:
            lifted = lift_code(unicast.witness, inst, reduced, jobs=self.jobs).code
            row["lift_ok"] = check_zero_error(lifted, reduced, jobs=self.jobs).ok

        hint = lifted if self.use_hints else None
        nec = search_nec(reduced, inst.k, 1, self.budget, jobs=self.jobs, hint=hint)
        if nec.feasible:
            extracted, _ = extract_code(nec.witness, reduced, jobs=self.jobs)
            row["extract_ok"] = check_unicast_zero_error(extracted, inst, jobs=self.jobs).ok
            classification = classify_messages(nec.witness, reduced, jobs=self.jobs)
            signal_sets = compute_signal_sets(nec.witness, reduced, classification, self.level, jobs=self.jobs)
            report = audit_counting_bounds(classification, signal_sets, self.level)
            row["audit_holds"] = report.holds
            row["epsilon"] = str(classification.epsilon)

        decided = EXHAUSTED not in (unicast.status, nec.status)
        row.update({
            "unicast_status": unicast.status,
            "nec_status": nec.status,
            "agree": decided and unicast.feasible == nec.feasible,
            "unicast_candidates": unicast.candidates,
            "nec_candidates": nec.candidates,
            "seconds": round(unicast.elapsed + nec.elapsed, 3),
        })
        return row

    def transform(self, corpus: List[Tuple[str, UnicastInstance]]) -> Tuple[pd.DataFrame, List[str]]:
        """
        Run every instance

        Args:
            corpus: List of (name, instance)

        Returns:
            (results DataFrame, list of per-instance errors)
        """
        logger.info("Running equivalence experiment at n=1")
        rows, errors = [], []
        for name, inst in corpus:
            try:
                rows.append(self._run_one(name, inst))
            except ExhaustiveCheckTooLarge as exc:
                logger.warning(f"{name}: {exc}")
                errors.append(f"{name}: {exc}")
        results = pd.DataFrame(rows, columns=COLUMNS)
        logger.info(f"Experiment complete: {len(results)}/{len(corpus)} instances decided")
        return results, errors

    def load(self, results: pd.DataFrame, output_dir: str, errors: Optional[List[str]] = None) -> Path:
        """
        Save results as CSV plus a JSON summary

        Args:
            results: Results DataFrame
            output_dir: Target directory
            errors: Per-instance errors for the summary

        Returns:
            Path to the CSV file
        """
        output_path = Path(output_dir)
        output_path.mkdir(parents=True, exist_ok=True)
        csv_path = output_path / "experiment.csv"
        try:
            results.to_csv(csv_path, index=False)
            (output_path / "experiment_summary.json").write_text(
                json.dumps(self.summarize(results, errors or []), sort_keys=True, indent=2) + "\n",
                encoding="utf-8",
            )
        except OSError as e:
            logger.error(f"Error saving results: {e}")
            raise
        logger.info(f"💾 Results saved to {csv_path}")
        return csv_path

    @staticmethod
    def summarize(results: pd.DataFrame, errors: List[str]) -> Dict:
        total = len(results)
        agreed = int(results["agree"].sum()) if total else 0
        return {
            "instances": total,
            "agreements": agreed,
            "disagreements": int(total - agreed),
            "feasible": int((results["unicast_status"] == "feasible").sum()) if total else 0,
            "agreement_rate": (agreed / total * 100) if total else 0,
            "lift_failures": int(results["lift_ok"].eq(False).sum()) if total else 0,
            "extract_failures": int(results["extract_ok"].eq(False).sum()) if total else 0,
            "audit_failures": int(results["audit_holds"].eq(False).sum()) if total else 0,
            "errors": errors,
        }

    def run(self, seed: int, random_count: int = 14, output_dir: Optional[str] = None) -> Dict:
        """
        Execute the full experiment

        Args:
            seed: Corpus seed
            random_count: Number of random instances
            output_dir: Save results here when given

        Returns:
            Summary dict with the results DataFrame under "results"
        """
        logger.info("=" * 60)
        logger.info("STARTING EQUIVALENCE EXPERIMENT")
        logger.info("=" * 60)

        try:
            corpus = self.extract(seed, random_count)
            results, errors = self.transform(corpus)
            if output_dir:
                self.load(results, output_dir, errors)
        except Exception as e:
            logger.error(f"Experiment failed: {e}")
            raise

        summary = self.summarize(results, errors)
        summary["results"] = results
        logger.info("Experiment execution complete!")
        return summary
