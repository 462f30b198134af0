"""Floor-plan registration for LiDAR occupancy maps, plus a deterministic
2D rescue-mission simulator built on top of it.

The package splits into small layers:

* :mod:`planreg.geometry` -- polygon math and contour extraction
* :mod:`planreg.raster` -- binary mask operations (fill, crop, resize, D4)
* :mod:`planreg.pgm` -- PGM image and occupancy-grid file I/O
* :mod:`planreg.floorplan` -- plan schema, room-subset variants, rendering
* :mod:`planreg.registration` -- scan-to-plan matching and its metrics
* :mod:`planreg.simulator` -- worlds, sensing, motion, missions
* :mod:`planreg.datagen` -- synthetic plans, scan masks, and worlds
* :mod:`planreg.cli` -- the ``planreg`` command line tool
"""

from .errors import (
    EmptyMaskError,
    EmptyStructureError,
    InvalidPolygonError,
    InvalidPoseError,
    LocalizationError,
    NoMatchError,
    PlanRegError,
    SchemaError,
    ShapeMismatchError,
    UnreachableGoalError,
    VariantLimitError,
)
from .floorplan import FloorPlan, PlanVariant, Room, load_plan, save_plan
from .raster import ComponentFilterConfig, IoUResult, apply_d4, mask_iou
from .registration import (
    MATCH_SIZE,
    RegistrationResult,
    TransformParams,
    evaluate,
    preprocess_lidar,
    register,
)
from .simulator import (
    MissionLog,
    MotionConfig,
    Pose,
    Scenario,
    World,
    load_world,
    run_frontier_baseline,
    run_plan_slam,
)

__version__ = "0.1.0"

__all__ = [
    "ComponentFilterConfig",
    "EmptyMaskError",
    "EmptyStructureError",
    "FloorPlan",
    "InvalidPolygonError",
    "InvalidPoseError",
    "IoUResult",
    "LocalizationError",
    "MATCH_SIZE",
    "MissionLog",
    "MotionConfig",
    "NoMatchError",
    "PlanRegError",
    "PlanVariant",
    "Pose",
    "RegistrationResult",
    "Room",
    "Scenario",
    "SchemaError",
    "ShapeMismatchError",
    "TransformParams",
    "UnreachableGoalError",
    "VariantLimitError",
    "World",
    "apply_d4",
    "evaluate",
    "load_plan",
    "load_world",
    "mask_iou",
    "preprocess_lidar",
    "register",
    "run_frontier_baseline",
    "run_plan_slam",
    "save_plan",
    "__version__",
]
