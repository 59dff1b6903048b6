"""Kernel-width learning: gradient descent on gamma of the maximized dual.

The trainer alternates two moves: maximize the dual over the multipliers
at the current gamma (the solver module), then take one descent step on
gamma using the closed-form gradient of the dual. The learning rate
follows a bold-driver schedule: grow by zeta_plus after every productive
step, cut to zeta_minus of its value after an overshoot (the dual went
up) or a nonpositive gamma proposal.

Termination: an overshoot landing within epsilon of the reference gamma
(converged); a proposal above gamma_max (runaway width); ws_limit
consecutive steps with an unchanged dual (plateau); or the step cap.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .dataset import Dataset
from .kernel import DistanceMatrix, KernelCache, rbf_kernel_matrix, squared_distance_matrix
from .solver import SolverConfig, SvmModel, dual_objective, solve_dual

TERMINATION_REASONS = ("converged", "gamma_exceeded", "stagnated", "step_cap")

TRACE_EVENTS = (
    "init",
    "accepted",
    "overshoot",
    "stagnation",
    "rejected_nonpositive",
    "gamma_exceeded",
)


@dataclass(frozen=True)
class OksvmConfig:
    """Control parameters of the gamma-descent loop."""

    gamma0: float = 1.0
    eta0: float = 0.01
    zeta_plus: float = 1.01
    zeta_minus: float = 0.1
    gamma_max: float = 1000.0
    epsilon: float = 0.01
    ws_limit: int = 5
    max_outer_steps: int = 500
    warm_start: bool = True
    # Relative tolerance under which two dual values count as "unchanged".
    # Exact equality is fragile across re-solves; recorded as a deviation.
    stagnation_rtol: float = 1e-12

    def __post_init__(self) -> None:
        if self.gamma0 <= 0 or self.eta0 <= 0 or self.gamma_max <= 0 or self.epsilon <= 0:
            raise ValueError("gamma0, eta0, gamma_max, epsilon must be positive")
        if not (self.zeta_plus > 1.0 > self.zeta_minus > 0.0):
            raise ValueError("need zeta_plus > 1 > zeta_minus > 0")
        if self.gamma0 > self.gamma_max:
            raise ValueError(f"gamma0={self.gamma0} exceeds gamma_max={self.gamma_max}")
        if self.ws_limit < 1 or self.max_outer_steps < 0 or self.stagnation_rtol < 0:
            raise ValueError("ws_limit must be >= 1; caps and tolerances nonnegative")


@dataclass(frozen=True)
class TraceRecord:
    """One outer step: the retained gamma, the observed dual, and the
    learning rate and stagnation counter after the event was applied.

    Overshoot rows record the rejected solve's dual (the value that
    triggered the rejection); the retained dual is in the previous
    accepted row.
    """

    t: int
    gamma: float
    dual_value: float
    eta: float
    ws: int
    event: str


@dataclass(frozen=True)
class OptimizerState:
    """Final state of one training run plus the full step trace."""

    t: int
    gamma_t: float
    gamma_f: float
    eta: float
    ws: int
    trace: tuple[TraceRecord, ...]
    terminated_by: str

    def __post_init__(self) -> None:
        if self.terminated_by not in TERMINATION_REASONS:
            raise ValueError(f"unknown termination reason {self.terminated_by!r}")

    def accepted_duals(self) -> list[float]:
        return [r.dual_value for r in self.trace if r.event == "accepted"]


def dual_gamma_gradient(
    alphas: np.ndarray,
    labels: np.ndarray,
    d2: DistanceMatrix,
    kernel: KernelCache,
) -> float:
    """d(dual)/d(gamma) = 1/2 * sum_ij a_i a_j y_i y_j d2_ij k_ij.

    Diagonal terms vanish (zero distance), so only cross terms count.
    """
    v = np.asarray(alphas, dtype=np.float64) * np.asarray(labels, dtype=np.float64)
    return float(0.5 * (v @ (d2.d2 * kernel.k) @ v))


def gamma_step(gamma_t: float, eta: float, gradient: float) -> float:
    """One descent proposal. May be nonpositive; the caller rejects those."""
    return gamma_t - eta * gradient


def train_oksvm(
    train: Dataset,
    c: float,
    config: OksvmConfig | None = None,
    solver_config: SolverConfig | None = None,
) -> tuple[SvmModel, OptimizerState]:
    """Learn gamma and the multipliers jointly; see the module docstring.

    Every outer step appends exactly one TraceRecord. Re-solves reuse the
    cached distance matrix and, unless warm starts are disabled, start
    from the previous multipliers (the feasible set does not depend on
    gamma, so they are always a legal start).
    """
    if config is None:
        config = OksvmConfig()
    if solver_config is None:
        solver_config = SolverConfig()

    d2 = squared_distance_matrix(train.features)
    gamma = config.gamma0
    gamma_f = config.gamma0
    eta = config.eta0
    ws = 0

    kernel = rbf_kernel_matrix(d2, gamma)
    model = solve_dual(kernel, train.labels, c, solver_config, features=train.features)
    dual = dual_objective(model.alphas, train.labels, kernel)
    trace = [TraceRecord(0, gamma, dual, eta, ws, "init")]
    terminated_by = "step_cap"
    t = 0

    for t in range(1, config.max_outer_steps + 1):
        gradient = dual_gamma_gradient(model.alphas, train.labels, d2, kernel)
        proposal = gamma_step(gamma, eta, gradient)

        if proposal <= 0.0:
            gamma_f = gamma
            eta = config.zeta_minus * eta
            trace.append(TraceRecord(t, gamma, dual, eta, ws, "rejected_nonpositive"))
            continue

        if proposal > config.gamma_max:
            trace.append(TraceRecord(t, gamma, dual, eta, ws, "gamma_exceeded"))
            terminated_by = "gamma_exceeded"
            break

        new_kernel = kernel.at_gamma(proposal)
        warm = model.alphas if config.warm_start else None
        new_model = solve_dual(
            new_kernel, train.labels, c, solver_config, warm, features=train.features
        )
        new_dual = dual_objective(new_model.alphas, train.labels, new_kernel)
        unchanged = abs(new_dual - dual) <= config.stagnation_rtol * max(
            abs(new_dual), abs(dual), 1.0
        )

        if unchanged:
            # gamma moved but the objective did not; count toward the
            # plateau guard and keep walking
            gamma = proposal
            kernel, model, dual = new_kernel, new_model, new_dual
            ws += 1
            trace.append(TraceRecord(t, gamma, dual, eta, ws, "stagnation"))
            if ws >= config.ws_limit:
                terminated_by = "stagnated"
                break
        elif new_dual > dual:
            # overshot the minimum of the outer objective: discard the
            # solve and decide between convergence and a rate cut
            if abs(gamma - gamma_f) < config.epsilon:
                trace.append(TraceRecord(t, gamma, new_dual, eta, ws, "overshoot"))
                terminated_by = "converged"
                break
            gamma_f = gamma
            eta = config.zeta_minus * eta
            trace.append(TraceRecord(t, gamma, new_dual, eta, ws, "overshoot"))
        else:
            gamma = proposal
            kernel, model, dual = new_kernel, new_model, new_dual
            eta = config.zeta_plus * eta
            ws = 0
            trace.append(TraceRecord(t, gamma, dual, eta, ws, "accepted"))

    state = OptimizerState(
        t=t,
        gamma_t=gamma,
        gamma_f=gamma_f,
        eta=eta,
        ws=ws,
        trace=tuple(trace),
        terminated_by=terminated_by,
    )
    return model, state


def train_svm_baseline(
    train: Dataset,
    c: float,
    gamma: float,
    solver_config: SolverConfig | None = None,
) -> SvmModel:
    """One dual solve at fixed (C, gamma); the comparison baseline."""
    kernel = rbf_kernel_matrix(squared_distance_matrix(train.features), gamma)
    return solve_dual(
        kernel, train.labels, c, solver_config or SolverConfig(), features=train.features
    )


def export_trace_csv(trace: Iterable[TraceRecord], path: str | Path) -> None:
    """Write a step trace as CSV (columns t,gamma,dual_value,eta,ws,event)."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "gamma", "dual_value", "eta", "ws", "event"])
        for r in trace:
            writer.writerow([r.t, repr(r.gamma), repr(r.dual_value), repr(r.eta), r.ws, r.event])
