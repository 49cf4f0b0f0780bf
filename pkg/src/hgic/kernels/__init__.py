"""Pairwise-interaction kernels with backend selection at import.

The compiled Cython kernel is preferred; the pure-Python twin is used when
the extension is missing or when HGIC_PURE_PYTHON is set. Both produce
bit-identical output.
"""

from __future__ import annotations

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if not os.environ.get("HGIC_PURE_PYTHON"):
    try:
        from . import _ckernels  # type: ignore[attr-defined]

        _impl = _ckernels
        BACKEND = "cython"
    except ImportError:
        pass


def flock_terms(positions, velocities, ids, group_ids, params, *,
                coh_same_group=True, align_same_group=True):
    """Batch separation/cohesion/alignment/repulsion for the whole swarm.

    Thin dispatch over the active backend; `params` is a FlockParams.
    """
    return _impl.flock_terms(
        positions,
        velocities,
        ids,
        group_ids,
        params.r_sep,
        params.c_sep,
        params.r_coh,
        params.c_coh,
        params.r_align,
        params.c_align,
        params.r_rep,
        params.p_rep,
        coh_same_group,
        align_same_group,
    )
