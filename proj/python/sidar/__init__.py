"""Signal-bound disturbance attenuation regulator (SiDAR) workbench."""

from ._sidar import *  # noqa: F401,F403
from ._sidar import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
__doc__ = _core_doc
