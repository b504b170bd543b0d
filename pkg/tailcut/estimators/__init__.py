from tailcut.estimators.core import (
    SelectionResult,
    SortedSample,
    TailTrace,
    devries,
    hill,
    jackknife,
    second_moment,
    trace,
    weissman_quantile,
)
from tailcut.estimators.ihs import (
    BiasSign,
    IhsCurve,
    IhsSelection,
    Variant,
    detect_bias_sign,
    ihs_selector,
    select_ihs,
    select_sihs,
)
from tailcut.estimators.samsee import (
    BiasCurve,
    SamseeDiagnostics,
    samsee_selector,
    select_K_star,
    select_samsee,
)

__all__ = [
    "BiasCurve",
    "BiasSign",
    "IhsCurve",
    "IhsSelection",
    "SamseeDiagnostics",
    "SelectionResult",
    "SortedSample",
    "TailTrace",
    "Variant",
    "detect_bias_sign",
    "devries",
    "hill",
    "ihs_selector",
    "jackknife",
    "samsee_selector",
    "second_moment",
    "select_K_star",
    "select_ihs",
    "select_samsee",
    "select_sihs",
    "trace",
    "weissman_quantile",
]
