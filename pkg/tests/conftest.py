"""Shared fixtures: benchmark CSVs in the canonical on-disk format.

iris and wdbc are materialized from scikit-learn's bundled copies so the
real-data code paths run without network access. banknote has no bundled
copy; tests that need it look for a local file and skip with download
instructions when it is absent.
"""

from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest

_REPO_ROOT = Path(__file__).resolve().parent.parent

BANKNOTE_HINT = (
    "banknote.csv not found; fetch it with "
    "`python scripts/fetch_datasets.py --only banknote` "
    "(writes data/banknote.csv) or set OKSVM_DATA_DIR"
)


def _write_csv(path: Path, features: np.ndarray, labels: list[str]) -> None:
    n_features = features.shape[1]
    lines = [",".join([f"f{i}" for i in range(n_features)] + ["label"])]
    for row, label in zip(features, labels):
        lines.append(",".join([repr(float(v)) for v in row] + [label]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


@pytest.fixture(scope="session")
def bench_dir(tmp_path_factory) -> Path:
    """Directory holding iris.csv and wdbc.csv in canonical form."""
    from sklearn.datasets import load_breast_cancer, load_iris

    root = tmp_path_factory.mktemp("bench")

    iris = load_iris()
    species = [str(iris.target_names[t]) for t in iris.target]
    _write_csv(root / "iris.csv", np.asarray(iris.data, dtype=np.float64), species)

    # sklearn's copy encodes malignant as target 0
    wdbc = load_breast_cancer()
    diagnosis = ["M" if t == 0 else "B" for t in wdbc.target]
    _write_csv(root / "wdbc.csv", np.asarray(wdbc.data, dtype=np.float64), diagnosis)

    return root


def find_banknote() -> Path | None:
    candidates = []
    env = os.environ.get("OKSVM_DATA_DIR")
    if env:
        candidates.append(Path(env) / "banknote.csv")
    candidates.append(_REPO_ROOT / "data" / "banknote.csv")
    candidates.append(Path(__file__).parent / "data" / "banknote.csv")
    for path in candidates:
        if path.exists():
            return path
    return None


@pytest.fixture(scope="session")
def banknote_csv() -> Path:
    path = find_banknote()
    if path is None:
        pytest.skip(BANKNOTE_HINT)
    return path


def assert_trace_invariants(state, config) -> None:
    """Walk one training trace and re-check every bookkeeping rule.

    The learning-rate side is asserted with exact float equality: each
    event's eta must be the literal product of the previous eta and the
    documented factor, recomputed here bit-for-bit.
    """
    from oksvm.optimizer import TERMINATION_REASONS, TRACE_EVENTS

    trace = state.trace
    assert state.terminated_by in TERMINATION_REASONS
    assert trace[0].event == "init"
    assert trace[0].eta == config.eta0
    assert trace[0].gamma == config.gamma0
    assert trace[0].ws == 0

    # dual at the gamma the loop is standing on; overshoot rows record the
    # rejected solve instead and leave this untouched
    retained_dual = trace[0].dual_value
    for pos, record in enumerate(trace):
        assert record.event in TRACE_EVENTS
        assert 0.0 < record.gamma <= config.gamma_max
        if pos == 0:
            continue
        prev = trace[pos - 1]
        assert record.t == prev.t + 1
        terminal = pos == len(trace) - 1
        if record.event == "accepted":
            assert record.eta == config.zeta_plus * prev.eta
            assert record.ws == 0
        elif record.event == "stagnation":
            assert record.eta == prev.eta
            assert record.ws == prev.ws + 1
            assert record.ws <= config.ws_limit
        elif record.event == "rejected_nonpositive":
            assert record.eta == config.zeta_minus * prev.eta
            assert record.gamma == prev.gamma
            assert record.ws == prev.ws
            assert record.dual_value == retained_dual
        elif record.event == "overshoot":
            # the terminal overshoot converges without touching eta;
            # every other overshoot cuts the rate
            if terminal and state.terminated_by == "converged":
                assert record.eta == prev.eta
            else:
                assert record.eta == config.zeta_minus * prev.eta
            assert record.gamma == prev.gamma
            assert record.ws == prev.ws
            assert record.dual_value > retained_dual
        elif record.event == "gamma_exceeded":
            assert terminal and state.terminated_by == "gamma_exceeded"
            assert record.eta == prev.eta
            assert record.gamma == prev.gamma
            assert record.dual_value == retained_dual
        if record.event != "overshoot":
            retained_dual = record.dual_value

    # accepted-step duals are non-increasing; stagnation steps may drift
    # the objective by <= ws_limit * stagnation_rtol between accepts
    accepted = state.accepted_duals()
    for earlier, later in zip(accepted, accepted[1:]):
        assert later <= earlier + 1e-9 * max(1.0, abs(earlier))
