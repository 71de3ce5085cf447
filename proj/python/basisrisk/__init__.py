"""Batch evaluation of area-based (index) crop insurance.

The heavy lifting lives in the compiled _core module; this package re-exports
its public surface.
"""

from ._core import (  # noqa: F401
    CountySeries,
    FieldSeries,
    Panel,
    RegressionFit,
    __version__,
    archetype_panel,
    certainty_equivalent,
    cpt_value,
    evaluate_field_series,
    fair_premium_area,
    fair_premium_farm,
    fit_regression,
    generate_panel,
    load_panel,
    run,
    save_panel,
    simulate,
    sweep,
)

__all__ = [
    "CountySeries",
    "FieldSeries",
    "Panel",
    "RegressionFit",
    "__version__",
    "archetype_panel",
    "certainty_equivalent",
    "cpt_value",
    "evaluate_field_series",
    "fair_premium_area",
    "fair_premium_farm",
    "fit_regression",
    "generate_panel",
    "load_panel",
    "run",
    "save_panel",
    "simulate",
    "sweep",
]
