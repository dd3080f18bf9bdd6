from .detections import Detection, DetectionInterval, coalesce
from .engine import Engine
from .window_kernel import window_aggregate, numba_enabled

__all__ = ["Detection", "DetectionInterval", "coalesce", "Engine",
           "window_aggregate", "numba_enabled"]
