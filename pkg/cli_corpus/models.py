"""
Data models for the example corpus and the command-line reports
"""
from enum import Enum
from typing import Dict, List, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from lyapunov_synth.models import CertificateModel, SearchMode
from poly_core import SystemDescription
from sdp_solver import SolveStatus

try:
    from fuzzywuzzy import process
    FUZZY_AVAILABLE = True
except ImportError:
    FUZZY_AVAILABLE = False


class CorpusFilterError(ValueError):
    """No corpus entry matches the requested name"""

    def __init__(self, pattern: str, suggestion: Optional[str] = None):
        message = f"no corpus entry matches '{pattern}'"
        if suggestion:
            message += f"; did you mean '{suggestion}'?"
        super().__init__(message)
        self.pattern = pattern
        self.suggestion = suggestion


class Provenance(str, Enum):
    PUBLISHED = "published"   # reported in the literature the entry comes from
    TRIVIAL = "trivial"       # follows by inspection
    DERIVED = "derived"       # established by running the toolkit


class CorpusTask(str, Enum):
    CHECK_SOS = "check-sos"
    GRADIENT_DECREASE = "gradient-decrease"   # -Vdot sos for xdot = -grad V
    LYAPUNOV = "lyapunov"
    COMMON_LYAPUNOV = "common-lyapunov"
    POWER = "power"
    PLANAR_POWER = "planar-power"


class Expected(str, Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"


class CorpusSettings(BaseModel):
    corpus_file: str = Field("data/corpus.json", description="Corpus JSON, relative to the project root")
    jobs: int = Field(1, ge=1, description="Entries run concurrently")
    suggestion_threshold: int = Field(60, ge=0, le=100, description="Fuzzy score needed for a 'did you mean'")


class Expectation(BaseModel):
    degree: Optional[int] = Field(None, description="Template degree for Lyapunov tasks")
    k_max: Optional[int] = Field(None, description="Largest k tried for power tasks")
    outcome: Expected
    k: Optional[int] = Field(None, description="Expected k of a power certificate, when known")
    provenance: Provenance
    reference: str = Field("", description="Where the expected verdict comes from")


class CorpusEntry(BaseModel):
    name: str
    description: str = ""
    task: CorpusTask
    polynomial: Optional[str] = Field(None, description="Polynomial for check-sos and gradient tasks, V for power tasks")
    variables: Optional[int] = None
    system: Optional[SystemDescription] = None
    mode: SearchMode = SearchMode.V_SOS
    homogeneous: Optional[bool] = None
    slow: bool = Field(False, description="Takes more than a few seconds")
    expectations: List[Expectation] = Field(default_factory=list)

    @field_validator("expectations")
    @classmethod
    def _not_empty(cls, value):
        if not value:
            raise ValueError("a corpus entry needs at least one expectation")
        return value

    @model_validator(mode="after")
    def _inputs_present(self):
        needs_polynomial = self.task in (CorpusTask.CHECK_SOS, CorpusTask.GRADIENT_DECREASE,
                                         CorpusTask.POWER, CorpusTask.PLANAR_POWER)
        needs_system = self.task in (CorpusTask.LYAPUNOV, CorpusTask.COMMON_LYAPUNOV,
                                     CorpusTask.POWER, CorpusTask.PLANAR_POWER)
        if needs_polynomial and not self.polynomial:
            raise ValueError(f"entry '{self.name}' ({self.task.value}) needs a polynomial")
        if needs_system and self.system is None:
            raise ValueError(f"entry '{self.name}' ({self.task.value}) needs a system")
        if self.task in (CorpusTask.LYAPUNOV, CorpusTask.COMMON_LYAPUNOV):
            for expectation in self.expectations:
                if expectation.degree is None:
                    raise ValueError(f"entry '{self.name}' has an expectation without a degree")
        return self


class Corpus(BaseModel):
    entries: List[CorpusEntry] = Field(default_factory=list)

    @model_validator(mode="after")
    def _unique_names(self):
        names = [e.name for e in self.entries]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise ValueError(f"duplicate corpus entries: {duplicates}")
        return self

    def names(self) -> List[str]:
        return [e.name for e in self.entries]

    def suggest(self, name: str, threshold: int = 60) -> Optional[str]:
        if not FUZZY_AVAILABLE:
            # Fallback to prefix matching if fuzzywuzzy not available
            matches = [n for n in self.names() if n.startswith(name[:3])]
            return matches[0] if matches else None
        best = process.extractOne(name, self.names())
        if best and best[1] >= threshold:
            return best[0]
        return None


class CheckResult(BaseModel):
    """One expectation checked against the toolkit"""
    degree: Optional[int] = None
    k: Optional[int] = None
    expected: Expected
    actual: SolveStatus
    matched: bool
    note: str = ""
    seconds: float = 0.0


class EntryReport(BaseModel):
    name: str
    task: CorpusTask
    results: List[CheckResult] = Field(default_factory=list)
    errors: List[str] = Field(default_factory=list)

    def add_error(self, error: str):
        self.errors.append(error)

    @property
    def mismatches(self) -> int:
        return sum(1 for r in self.results if not r.matched and r.actual != SolveStatus.INDETERMINATE) + len(self.errors)

    @property
    def indeterminate(self) -> int:
        return sum(1 for r in self.results if r.actual == SolveStatus.INDETERMINATE)


class CorpusReport(BaseModel):
    entries: List[EntryReport] = Field(default_factory=list)

    @property
    def mismatches(self) -> int:
        return sum(e.mismatches for e in self.entries)

    @property
    def indeterminate(self) -> int:
        return sum(e.indeterminate for e in self.entries)

    @property
    def exit_code(self) -> int:
        if self.mismatches:
            return 1
        if self.indeterminate:
            return 3
        return 0


# ---- CLI JSON reports ---------------------------------------------------------


class DegreeRow(BaseModel):
    degree: int
    status: SolveStatus
    margin: Optional[float] = None
    seconds: float = 0.0
    note: str = ""


class SosCheckReport(BaseModel):
    polynomial: str
    status: SolveStatus
    strict: bool = False
    margin: Optional[float] = None
    basis: List[str] = Field(default_factory=list)
    gram: List[List[float]] = Field(default_factory=list)
    note: str = ""


class SweepReport(BaseModel):
    mode: SearchMode
    outcomes: List[DegreeRow] = Field(default_factory=list)
    minimal_degree: Optional[int] = None
    certificate: Optional[CertificateModel] = None
    errors: List[str] = Field(default_factory=list)


class KRow(BaseModel):
    mode: int
    k: int
    status: SolveStatus
    margin: Optional[float] = None
    note: str = ""


class PowerReport(BaseModel):
    planar: bool = False
    k: Optional[int] = None
    outcomes: List[KRow] = Field(default_factory=list)
    certificate: Optional[CertificateModel] = None


class SavingsReport(BaseModel):
    n: int
    d: int
    vars_saved: int
    eqs_saved: int
    table: List[Dict[str, Union[int, bool]]] = Field(default_factory=list)
