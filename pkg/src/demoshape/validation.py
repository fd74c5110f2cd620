"""Input checks shared by the estimators and the CLI."""
import numpy as np
from sklearn.utils import check_array

from .demos import Demonstration
from .env import GridSpec


def _int_array(X, name, n_cols):
    arr = check_array(X, dtype="numeric", ensure_2d=True, input_name=name)
    if arr.shape[1] not in n_cols:
        raise ValueError(f"{name} must have {' or '.join(map(str, n_cols))} columns, got {arr.shape[1]}")
    if not np.all(arr == np.round(arr)):
        raise ValueError(f"{name} must hold integer coordinates")
    return arr.astype(np.int64)


def check_demo(X, spec: GridSpec) -> Demonstration:
    """Accept a Demonstration or an array of ``(x, y)`` / ``(t, x, y)`` rows."""
    if isinstance(X, Demonstration):
        demo = X
    else:
        arr = _int_array(X, "demo", (2, 3))
        if arr.shape[1] == 3:
            if not np.array_equal(arr[:, 0], np.arange(len(arr))):
                raise ValueError("demo time column must read 0, 1, 2, ...")
            arr = arr[:, 1:]
        demo = Demonstration.from_positions(arr)
    pos = demo.positions()
    if np.any(pos < 0) or np.any(pos >= spec.side):
        raise ValueError(f"demo leaves the {spec.side}x{spec.side} grid")
    if tuple(pos[0]) != spec.start:
        raise ValueError(f"demo starts at {tuple(pos[0])}, the task starts at {spec.start}")
    return demo


def check_states(X, spec: GridSpec) -> np.ndarray:
    """Validate ``(x, y)`` or ``(x, y, t)`` rows; returns an (n, 3) array with t filled in."""
    arr = _int_array(X, "X", (2, 3))
    if arr.shape[1] == 2:
        arr = np.column_stack([arr, np.zeros(len(arr), np.int64)])
    if np.any(arr[:, :2] < 0) or np.any(arr[:, :2] >= spec.side):
        raise ValueError(f"state outside the {spec.side}x{spec.side} grid")
    if np.any(arr[:, 2] < 0) or np.any(arr[:, 2] >= spec.horizon):
        raise ValueError(f"time must lie in [0, {spec.horizon})")
    return arr
