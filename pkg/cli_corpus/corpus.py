"""
Example corpus: load entries, run them through the toolkit, diff against expected verdicts
"""
import fnmatch
import json
import time
import traceback
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional

import pandas as pd

from certifier import CertificateVerifier
from lyapunov_synth import (
    LyapunovSynthesizer, PowerCertificateSearch, PreconditionError, as_system, gradient_system,
)
from poly_core import lie_derivative, parse_polynomial
from sdp_solver import DimensionCapError, SolveStatus
from sos_compiler import SosCompilationError
from toolkit_config import ROOT_DIR, load_config_section
from .models import (
    CheckResult, Corpus, CorpusEntry, CorpusFilterError, CorpusReport, CorpusSettings, CorpusTask,
    EntryReport, Expectation, Expected,
)


def _matches(expected: Expected, actual: SolveStatus) -> bool:
    return expected.value == actual.value


class CorpusRunner:
    """Runs corpus entries and compares every verdict with its expectation"""

    def __init__(self, config_file: Optional[str] = None, corpus_file: Optional[str] = None):
        self.config_file = config_file
        self.settings = CorpusSettings(**load_config_section("corpus", config_file))
        self.synthesizer = LyapunovSynthesizer(config_file)
        self.power_search = PowerCertificateSearch(config_file, self.synthesizer)
        self.verifier = CertificateVerifier(config_file)
        self.corpus = self.load_corpus(corpus_file or self.settings.corpus_file)

        self.log_callback = None
        self.run_id = None

    @staticmethod
    def load_corpus(corpus_file: str) -> Corpus:
        path = Path(corpus_file)
        if not path.is_absolute() and not path.exists():
            path = ROOT_DIR / path
        with open(path, "r") as f:
            return Corpus.model_validate(json.load(f))

    def _log(self, details: dict):
        if self.log_callback and self.run_id:
            self.log_callback(self.run_id, "corpus", details)

    def _attach(self):
        for engine in (self.synthesizer, self.power_search, self.verifier):
            engine.log_callback = self.log_callback
            engine.run_id = self.run_id

    def select(self, pattern: Optional[str] = None, include_slow: bool = True) -> List[CorpusEntry]:
        """
        Entries whose name matches any comma-separated glob in `pattern`.

        Raises:
            CorpusFilterError: a pattern matches nothing; carries a fuzzy suggestion when one is close
        """
        entries = [e for e in self.corpus.entries if include_slow or not e.slow]
        if not pattern:
            return entries
        selected = []
        for part in (p.strip() for p in pattern.split(",") if p.strip()):
            hits = [e for e in entries if fnmatch.fnmatchcase(e.name, part) or e.name == part]
            if not hits:
                raise CorpusFilterError(part, self.corpus.suggest(part, self.settings.suggestion_threshold))
            selected.extend(e for e in hits if e not in selected)
        return [e for e in entries if e in selected]

    def list_entries(self) -> pd.DataFrame:
        return pd.DataFrame([{
            "name": e.name, "task": e.task.value, "mode": e.mode.value,
            "checks": len(e.expectations), "slow": e.slow, "description": e.description,
        } for e in self.corpus.entries])

    # ---- per task -------------------------------------------------------

    def _check_sos(self, entry: CorpusEntry, expectation: Expectation) -> CheckResult:
        p = parse_polynomial(entry.polynomial, entry.variables)
        result = self.synthesizer.check_sos(p, homogeneous=entry.homogeneous)
        return CheckResult(expected=expectation.outcome, actual=result.status,
                           matched=_matches(expectation.outcome, result.status), note=result.note)

    def _gradient_decrease(self, entry: CorpusEntry, expectation: Expectation) -> CheckResult:
        V = parse_polynomial(entry.polynomial, entry.variables)
        decrease = -lie_derivative(V, gradient_system(V))
        result = self.synthesizer.check_sos(decrease, homogeneous=entry.homogeneous)
        return CheckResult(expected=expectation.outcome, actual=result.status,
                           matched=_matches(expectation.outcome, result.status), note=result.note)

    def _lyapunov(self, entry: CorpusEntry, expectation: Expectation) -> CheckResult:
        system = as_system(entry.system.to_system())
        outcome = self.synthesizer.search_lyapunov(system, expectation.degree, entry.mode)
        return CheckResult(degree=expectation.degree, expected=expectation.outcome, actual=outcome.status,
                           matched=_matches(expectation.outcome, outcome.status), note=outcome.note)

    def _power(self, entry: CorpusEntry, expectation: Expectation) -> CheckResult:
        system = entry.system.to_system()
        V = parse_polynomial(entry.polynomial, system.n_vars)
        if entry.task == CorpusTask.PLANAR_POWER:
            certificate, outcomes = self.power_search.search_planar_power_certificate(
                V, system.vector_fields()[0], expectation.k_max)
        else:
            certificate, outcomes = self.power_search.search_power_certificate(V, system, expectation.k_max)

        if certificate is None:
            indeterminate = any(o.status == SolveStatus.INDETERMINATE for o in outcomes)
            actual = SolveStatus.INDETERMINATE if indeterminate else SolveStatus.INFEASIBLE
            return CheckResult(expected=expectation.outcome, actual=actual,
                               matched=_matches(expectation.outcome, actual), note="k_max exhausted")

        report = self.verifier.verify_certificate(certificate)
        if not report.verified:
            return CheckResult(k=certificate.k, expected=expectation.outcome, actual=SolveStatus.INDETERMINATE,
                               matched=False, note="certificate rejected: " + "; ".join(report.reasons))
        matched = _matches(expectation.outcome, SolveStatus.FEASIBLE)
        note = f"k = {certificate.k}"
        if expectation.k is not None and expectation.k != certificate.k:
            matched = False
            note += f", expected k = {expectation.k}"
        return CheckResult(k=certificate.k, expected=expectation.outcome, actual=SolveStatus.FEASIBLE,
                           matched=matched, note=note)

    def run_entry(self, entry: CorpusEntry) -> EntryReport:
        """Check every expectation of one entry; failures are recorded, never raised."""
        report = EntryReport(name=entry.name, task=entry.task)
        handler = {
            CorpusTask.CHECK_SOS: self._check_sos,
            CorpusTask.GRADIENT_DECREASE: self._gradient_decrease,
            CorpusTask.LYAPUNOV: self._lyapunov,
            CorpusTask.COMMON_LYAPUNOV: self._lyapunov,
            CorpusTask.POWER: self._power,
            CorpusTask.PLANAR_POWER: self._power,
        }[entry.task]
        for expectation in entry.expectations:
            started = time.perf_counter()
            try:
                result = handler(entry, expectation)
            except (DimensionCapError, SosCompilationError, PreconditionError, ValueError) as e:
                report.add_error(f"{type(e).__name__}: {e}")
                continue
            except Exception as e:
                report.add_error(f"unexpected {type(e).__name__}: {e}")
                self._log({"stage": "entry", "entry": entry.name, "traceback": traceback.format_exc()})
                continue
            result.seconds = time.perf_counter() - started
            report.results.append(result)
            self._log({"stage": "expectation", "entry": entry.name, "degree": result.degree,
                       "expected": result.expected.value, "status": result.actual.value,
                       "matched": result.matched, "note": result.note})
        return report

    def run(self, pattern: Optional[str] = None, jobs: Optional[int] = None,
            include_slow: bool = True) -> CorpusReport:
        """Run the selected entries; reports come back in corpus order whatever the completion order."""
        self._attach()
        entries = self.select(pattern, include_slow)
        jobs = jobs or self.settings.jobs
        if jobs > 1 and len(entries) > 1:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                reports = list(pool.map(self.run_entry, entries))
        else:
            reports = [self.run_entry(e) for e in entries]
        report = CorpusReport(entries=reports)
        self._log({"stage": "corpus", "entries": len(reports), "mismatches": report.mismatches,
                   "indeterminate": report.indeterminate})
        return report

    @staticmethod
    def to_frame(report: CorpusReport) -> pd.DataFrame:
        rows = []
        for entry in report.entries:
            for r in entry.results:
                rows.append({
                    "entry": entry.name, "degree": r.degree, "k": r.k,
                    "expected": r.expected.value.upper(), "actual": r.actual.value.upper(),
                    "ok": "yes" if r.matched else "NO", "seconds": round(r.seconds, 2), "note": r.note,
                })
            for error in entry.errors:
                rows.append({"entry": entry.name, "degree": None, "k": None, "expected": "", "actual": "ERROR",
                             "ok": "NO", "seconds": 0.0, "note": error})
        return pd.DataFrame(rows)
