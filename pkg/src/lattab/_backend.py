"""Select the compiled kernels when available, else the numpy fallback.

Set ``LATTAB_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("LATTAB_PURE_PYTHON", "") not in ("", "0"):
    from lattab import _kernels_py as _impl

    NAME = "python"
else:
    try:
        from lattab import _kernels as _impl

        NAME = "compiled"
    except ImportError:
        from lattab import _kernels_py as _impl

        NAME = "python"

ball_points = _impl.ball_points
quad_values = _impl.quad_values
compensated_sum = _impl.compensated_sum
compensated_dot = _impl.compensated_dot
jet_sums = _impl.jet_sums


def threads() -> int:
    """Worker cap from ``LATTAB_THREADS`` (default: CPU count)."""
    raw = os.environ.get("LATTAB_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1
