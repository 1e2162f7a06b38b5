"""
Data models for the embedded SDP solver
"""
from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field, field_validator


class SolveStatus(str, Enum):
    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"
    INDETERMINATE = "indeterminate"


class DimensionCapError(ValueError):
    def __init__(self, total_dimension: int, cap: int):
        super().__init__(f"total matrix dimension {total_dimension} exceeds the cap of {cap}")
        self.total_dimension = total_dimension
        self.cap = cap


class SolverSettings(BaseModel):
    """Tolerances and limits for margin-maximizing feasibility solves"""
    eq_tol: float = Field(1e-7, gt=0, description="Max absolute equality violation of a Feasible point")
    psd_tol: float = Field(1e-8, gt=0, description="Allowed negative eigenvalue, relative to block trace")
    margin_tol: float = Field(1e-7, gt=0, description="Margin separating Feasible from Infeasible")
    max_iterations: int = Field(200, ge=1)
    trace_cap: float = Field(1e4, gt=0, description="Bound on the summed Gram traces")
    dimension_cap: int = Field(200, ge=1, description="Bound on the summed block dimensions")
    ipm_tol: float = Field(1e-9, gt=0, description="Relative gap and infeasibility target of the interior point method")
    step_fraction: float = Field(0.95, gt=0, lt=1)
    early_stop_margin: Optional[float] = Field(1e-4, description="Stop once a primal feasible point has this margin")

    @field_validator("early_stop_margin")
    @classmethod
    def _positive_or_none(cls, value):
        if value is not None and value <= 0:
            raise ValueError("early_stop_margin must be positive or null")
        return value


class SdpSolution(BaseModel):
    """Outcome of one solve; Gram blocks as row-major nested lists"""
    status: SolveStatus
    strict: bool = Field(False, description="Feasible with margin above margin_tol")
    margin: Optional[float] = Field(None, description="Smallest Gram eigenvalue of the returned point, null without blocks")
    margin_bound: Optional[float] = Field(None, description="Upper bound on the optimal margin from the dual point")
    block_values: List[List[List[float]]] = Field(default_factory=list)
    free_values: List[float] = Field(default_factory=list)
    max_eq_violation: float = 0.0
    min_eigenvalue: Optional[float] = None
    objective_value: Optional[float] = None
    iterations: int = 0
    trace_cap: float = 0.0
    dual_point: List[float] = Field(default_factory=list, description="Raw dual vector backing an Infeasible verdict")
    note: str = ""

    @property
    def is_feasible(self) -> bool:
        return self.status == SolveStatus.FEASIBLE

    def gram(self, block: int) -> np.ndarray:
        values = self.block_values[block]
        return np.array(values, dtype=float).reshape(len(values), len(values))

    def grams(self) -> List[np.ndarray]:
        return [self.gram(b) for b in range(len(self.block_values))]
