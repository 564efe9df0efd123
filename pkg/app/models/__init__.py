# Pydantic Models
from app.models.shape import RadialPerturbation, StarShape
from app.models.region import AnnulusRegion, Rectangle, RectangleRegion, RegionSpec
from app.models.experiment import (
    Bump,
    BumpStrength,
    ConstantStrength,
    CsvStrength,
    ExperimentConfig,
    InversionConfig,
    InversionMode,
    MeasurementSpec,
    SamplingSpec,
    SourceSpec,
    StrengthSpec,
)
from app.models.record import IterationRecord, RunRecord

__all__ = [
    # Shape models
    "StarShape",
    "RadialPerturbation",
    # Region models
    "Rectangle",
    "RectangleRegion",
    "AnnulusRegion",
    "RegionSpec",
    # Experiment models
    "InversionMode",
    "InversionConfig",
    "Bump",
    "ConstantStrength",
    "CsvStrength",
    "BumpStrength",
    "StrengthSpec",
    "MeasurementSpec",
    "SamplingSpec",
    "SourceSpec",
    "ExperimentConfig",
    # Record models
    "IterationRecord",
    "RunRecord",
]
