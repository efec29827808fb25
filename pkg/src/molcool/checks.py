"""Streaming invariant checks over a ``run_process`` sample stream."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .engine import Sample, State
from .entropy import araki_lieb_check


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass
class Diagnostics:
    """Feed samples in order with :meth:`update`; call :meth:`results` at the end."""

    trace_tol: float = 1e-6
    overdraft_budget: float = 0.02
    al_tol: float = 1e-9
    substep_tol: float = 1e-12

    n: int = 0
    max_trace_excess: float = 0.0       # |trace - 1| - overdraft
    max_overdraft: float = 0.0
    al_failures: int = 0
    al_worst: float = np.inf
    stot_variation: float = 0.0
    substep_s_i: float = 0.0
    empty_violations: int = 0
    boundary_scm: list = field(default_factory=list)
    _stot_ref: float | None = None
    _sub_start: float | None = None
    overdraft_increase_outside_step1: float = 0.0
    _last_od: float = 0.0

    def update(self, s: Sample):
        r = s.record
        self.n += 1
        self.max_trace_excess = max(self.max_trace_excess, abs(s.trace - 1.0) - s.overdraft)
        self.max_overdraft = max(self.max_overdraft, s.overdraft)
        if s.step != 1:
            self.overdraft_increase_outside_step1 = max(
                self.overdraft_increase_outside_step1, s.overdraft - self._last_od)
        self._last_od = s.overdraft

        al = araki_lieb_check(r, self.al_tol)
        self.al_worst = min(self.al_worst, al.lower_margin, al.upper_margin) if s.step else self.al_worst
        self.al_failures += not al.passed

        # total entropy is frozen through steps 1-2 of each cycle
        if s.step in (0, 3):
            self._stot_ref = r.S_tot if s.step_end else None
        elif self._stot_ref is not None:
            self.stot_variation = max(self.stot_variation, abs(r.S_tot - self._stot_ref))

        if s.step == 2:
            if s.t_local == 0.0:
                self._sub_start = r.S_I
            elif s.segment_end:
                self.substep_s_i = max(self.substep_s_i, abs(r.S_I - self._sub_start))

        pops = s.field.populations
        if pops[State.E].any():
            self.empty_violations += 1
        if s.step != 3 and pops[State.D].any():
            self.empty_violations += 1
        if (s.step == 0 or (s.step == 1 and s.t_local == 0.0)) and s.field.raman_mass() > 0:
            self.empty_violations += 1

        if (s.step in (0, 3)) and s.step_end:
            self.boundary_scm.append(r.S_cm)

    def results(self) -> list[CheckResult]:
        inc = np.diff(self.boundary_scm) if len(self.boundary_scm) > 1 else np.zeros(1)
        return [
            CheckResult("trace", self.max_trace_excess <= self.trace_tol,
                        f"max |trace-1|-overdraft = {self.max_trace_excess:.3g}"),
            CheckResult("overdraft", self.max_overdraft < self.overdraft_budget
                        and self.overdraft_increase_outside_step1 <= 0.0,
                        f"max overdraft = {self.max_overdraft:.4g}"),
            CheckResult("araki_lieb", self.al_failures == 0,
                        f"{self.al_failures} violations, worst margin {self.al_worst:.3g}"),
            CheckResult("s_tot_frozen", self.stot_variation == 0.0,
                        f"max S_tot change in steps 1-2 = {self.stot_variation:.3g}"),
            CheckResult("s_i_substep", self.substep_s_i <= self.substep_tol,
                        f"max |S_I(end)-S_I(start)| per inversion = {self.substep_s_i:.3g}"),
            CheckResult("s_cm_boundaries", bool(np.all(inc <= 0.0)),
                        f"max S_cm increase between cycle boundaries = {inc.max():.3g}"),
            CheckResult("empty_states", self.empty_violations == 0,
                        f"{self.empty_violations} samples with E, D or Raman states misplaced"),
        ]

