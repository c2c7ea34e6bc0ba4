"""Efficiency indices for comparing operations.

``R`` is the conditional return ``(PE - RE) / RE``; it ignores how long an
operation takes.  ``F`` divides the open flow accumulated over one unit
interval after completion by the magnitude of the closed flow integrated over
the operation, so shorter operations with the same totals score higher.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ModelError, UndefinedIndexError
from .operation_model import DeployedModel, SimplifiedModel
from .signal_core import integrate_interval

CONSISTENCY_TOL = 1e-9


@dataclass(frozen=True)
class OperationSummary:
    PE: float
    RE: float
    Top: float
    R: float
    F: float
    unit_interval: float = 1.0

    @property
    def theta(self) -> tuple[float, float, float]:
        return (self.PE, self.RE, self.Top)


def conditional_return(PE: float, RE: float) -> float:
    if not RE > 0:
        raise UndefinedIndexError(f"conditional return needs RE > 0, got RE={RE}")
    return (PE - RE) / RE


def efficiency_f(dep: DeployedModel, unit_interval: float = 1.0) -> float:
    if not unit_interval > 0:
        raise ValueError(f"unit_interval must be > 0, got {unit_interval}")
    target = integrate_interval(dep.ide, dep.t_f, dep.t_f + unit_interval)
    closed = abs(integrate_interval(dep.ibe, dep.t_s, dep.t_f))
    if closed == 0:
        raise UndefinedIndexError("closed flow integrates to zero; F is undefined")
    return target / closed


def _close(a: float, b: float) -> bool:
    return math.isclose(a, b, rel_tol=CONSISTENCY_TOL, abs_tol=CONSISTENCY_TOL)


def summarize(dep: DeployedModel, simp: SimplifiedModel, unit_interval: float = 1.0) -> OperationSummary:
    """Bundle ``theta``, ``R`` and ``F`` after checking both models describe one operation."""
    if not (_close(dep.t_s, simp.t_s) and _close(dep.t_f, simp.t_f)):
        raise ModelError("deployed and simplified models have different operation bounds")
    settled = dep.ide.final()
    if not _close(settled, simp.PE - simp.RE):
        raise ModelError(
            f"deployed surplus {settled!r} disagrees with PE - RE = {simp.PE - simp.RE!r}"
        )
    return OperationSummary(
        PE=simp.PE,
        RE=simp.RE,
        Top=simp.top,
        R=conditional_return(simp.PE, simp.RE),
        F=efficiency_f(dep, unit_interval),
        unit_interval=unit_interval,
    )
