"""Kernel selection: the compiled extension if importable, else the pure-Python twin."""

import os

if os.environ.get("FOCUSFOCUS_PURE_PYTHON", "") not in ("", "0"):
    from . import _kernel_py as kernel

    KERNEL = "python"
else:
    try:
        from . import _kernel as kernel

        KERNEL = "compiled"
    except ImportError:  # extension not built
        from . import _kernel_py as kernel

        KERNEL = "python"


def select(name: str) -> None:
    """Switch the active kernel at runtime (``"compiled"`` or ``"python"``)."""
    global kernel, KERNEL
    if name == "python":
        from . import _kernel_py as impl
    elif name == "compiled":
        from . import _kernel as impl
    else:
        raise ValueError(f"unknown kernel {name!r}")
    kernel, KERNEL = impl, name
