"""Exception types shared across the package."""


class DataError(ValueError):
    """Input data violates a documented precondition.

    Covers CSV schema problems (missing label column, non-numeric feature
    cells), degenerate class counts for splits and folds, and single-class
    label vectors handed to the solver.  The CLI maps this to exit code 2.
    """


class NonConvergenceError(RuntimeError):
    """A training run failed to converge and strict mode is active.

    Only raised at the CLI boundary (exit code 3); library calls return
    flagged models instead of failing.
    """
