"""Adaptive integration of the chart Hamiltonian flows and numeric return times.

The Dormand-Prince inner loop lives in a compiled extension (``_kernel``);
if it is missing, or ``FOCUSFOCUS_PURE_PYTHON`` is set, the pure-Python
twin ``_kernel_py`` is used instead.  ``active_kernel()`` names the active one
and ``select_kernel`` switches it.
"""

from ._backend import select as select_kernel
from .integrator import (
    Q1_FIELD,
    Q2_FIELD,
    EventSpec,
    LinearField,
    Trajectory,
    integrate_adaptive,
    locate_event,
)
from .returns import (
    default_section_radius,
    inner_transit_time,
    numeric_inner_transit,
    numeric_return_times,
    numeric_segment_times,
    numeric_transit,
)



def active_kernel() -> str:
    from . import _backend

    return _backend.KERNEL


__all__ = [
    "active_kernel",
    "select_kernel",
    "default_section_radius",
    "Q1_FIELD",
    "Q2_FIELD",
    "EventSpec",
    "LinearField",
    "Trajectory",
    "integrate_adaptive",
    "locate_event",
    "inner_transit_time",
    "numeric_inner_transit",
    "numeric_return_times",
    "numeric_segment_times",
    "numeric_transit",
]
