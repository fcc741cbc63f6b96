"""This module contains the report classes of the ks2lab package."""
from .covering_results import CoveringReport  # noqa
from .mercer_results import (  # noqa
    DiagDominationReport,
    IotaNormReport,
    MercerReport,
    PointwiseBoundReport,
)
from .operator_results import (  # noqa
    CoefficientBoundReport,
    OperatorNormReport,
    OperatorReport,
)
from .theorem_checks import EmbeddingReport, GramReport  # noqa
