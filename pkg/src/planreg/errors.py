"""Exception types shared across the package."""


class PlanRegError(Exception):
    """Base class for all errors raised by this package."""


class InvalidPolygonError(PlanRegError):
    """Polygon input is degenerate (fewer than 3 vertices, NaN, ...)."""


class EmptyMaskError(PlanRegError):
    """An operation that needs occupied cells received an all-zero mask."""


class ShapeMismatchError(PlanRegError):
    """Two masks that must share a shape do not."""


class SchemaError(PlanRegError):
    """A JSON document does not match the expected schema."""


class VariantLimitError(PlanRegError):
    """Plan has too many rooms for exhaustive subset enumeration."""


class EmptyStructureError(PlanRegError):
    """No structure survives binarization and component filtering."""


class NoMatchError(PlanRegError):
    """Registration found no candidate with non-zero overlap."""


class InvalidPoseError(PlanRegError):
    """A pose lies outside the grid or inside a blocked cell."""


class LocalizationError(PlanRegError):
    """Local structure could not be matched against the motion map."""


class UnreachableGoalError(PlanRegError):
    """Path planning found no route between the requested cells."""
