"""Hot loops behind a single interface.

The Cython extension ``_ckernels`` is used when it has been built; otherwise the
pure-Python module ``_pykernels`` with identical signatures is selected.

Kernels
-------
trajectory_costs(E, cc, cd, eta_c, eta_d, s, gc, gd)
    Exact nonconvex horizon cost for a batch of trajectories (rows of ``gc``/``gd``)
    plus the final SoC of each. No feasibility checks are made.
enumerate_min(actions, offsets, counts, sched_cost, gen_table, n_choices)
    Minimum over the product of per-storage schedule lists of schedule cost plus
    tabulated generator cost per interval.
"""

from __future__ import annotations

from types import ModuleType

import numpy as np

from . import _pykernels

try:
    from . import _ckernels  # type: ignore[attr-defined]
except ImportError:  # extension not built
    _ckernels = None

BACKEND = "compiled" if _ckernels is not None else "python"


def available_backends() -> list[str]:
    return ["compiled", "python"] if _ckernels is not None else ["python"]


def get_backend(name: str | None = None) -> ModuleType:
    """Kernel module by name; ``None`` selects the default picked at import."""
    name = name or BACKEND
    if name == "python":
        return _pykernels
    if name == "compiled":
        if _ckernels is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def trajectory_costs(E, cc, cd, eta_c, eta_d, s, gc, gd, *, backend: str | None = None):
    impl = get_backend(backend)
    return impl.trajectory_costs(
        np.ascontiguousarray(E, dtype=np.float64),
        np.ascontiguousarray(cc, dtype=np.float64),
        np.ascontiguousarray(cd, dtype=np.float64),
        float(eta_c),
        float(eta_d),
        float(s),
        np.ascontiguousarray(np.atleast_2d(gc), dtype=np.float64),
        np.ascontiguousarray(np.atleast_2d(gd), dtype=np.float64),
    )


def enumerate_min(actions, offsets, counts, sched_cost, gen_table, n_choices, *, backend: str | None = None):
    impl = get_backend(backend)
    best, idx = impl.enumerate_min(
        np.ascontiguousarray(actions, dtype=np.int64),
        np.ascontiguousarray(offsets, dtype=np.int64),
        np.ascontiguousarray(counts, dtype=np.int64),
        np.ascontiguousarray(sched_cost, dtype=np.float64),
        np.ascontiguousarray(gen_table, dtype=np.float64),
        int(n_choices),
    )
    return float(best), np.asarray(idx, dtype=np.int64)
