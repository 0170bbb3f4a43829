"""URDF and SDFormat text I/O."""

from .common import EmitOptions, MODEL_URI, RELATIVE, fmt_float
from .sdf import emit_model_config, emit_sdf, parse_sdf
from .urdf import emit_urdf, parse_urdf

__all__ = [
    "EmitOptions",
    "MODEL_URI",
    "RELATIVE",
    "fmt_float",
    "emit_model_config",
    "emit_sdf",
    "emit_urdf",
    "parse_sdf",
    "parse_urdf",
]
