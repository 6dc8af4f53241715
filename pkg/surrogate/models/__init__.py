from .bootstrap import BootstrapResult, Interval
from .fit import ArmMeans, LinearFit, PhiMatrix, SmleFit, SupportSet
from .kernel import KernelKind, KernelSpec, OverlapReport
from .simulation import MetricsRow, MissingSummary, StudyResult
from .trial import EstimandSet, PatientRecord, TrialData
from .weights import MissingnessKind, MissingnessModel, Term, WeightSet

__all__ = [
    "ArmMeans",
    "BootstrapResult",
    "EstimandSet",
    "Interval",
    "KernelKind",
    "KernelSpec",
    "LinearFit",
    "MetricsRow",
    "MissingSummary",
    "MissingnessKind",
    "MissingnessModel",
    "OverlapReport",
    "PatientRecord",
    "PhiMatrix",
    "SmleFit",
    "StudyResult",
    "SupportSet",
    "Term",
    "TrialData",
    "WeightSet",
]
