"""Global numeric knobs shared across the package.

All linear positivity and normalization checks (probability signs, CPTP
margins, triangle inequalities, integral bounds) use one absolute
tolerance.  The conditions are linear in their inputs, so a single
absolute tolerance is adequate and keeps verdicts comparable across
modules.
"""

POSITIVITY_TOL = 1e-10

# Seed used for random probe directions when the caller does not supply one.
# Echoed in reports so runs are reproducible.
DEFAULT_PROBE_SEED = 735901


def set_positivity_tol(value: float) -> None:
    """Override the global positivity tolerance (absolute)."""
    global POSITIVITY_TOL
    if not value > 0:
        raise ValueError("tolerance must be positive")
    POSITIVITY_TOL = float(value)


def positivity_tol() -> float:
    return POSITIVITY_TOL
