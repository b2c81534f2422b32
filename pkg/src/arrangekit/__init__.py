"""arrangekit: spatial-relation graphs grounded into 2D object poses."""

from .geometry import (
    BoundingBox,
    Container,
    Feature,
    ObjectSpec,
    Pose,
    Rect,
    Scene,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "Container",
    "Feature",
    "ObjectSpec",
    "Pose",
    "Rect",
    "Scene",
    "ValidationError",
    "__version__",
]
