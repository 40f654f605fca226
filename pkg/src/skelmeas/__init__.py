"""skelmeas: exact skeleta, weight functions and residual measures for
weighted dual complexes of degenerating one-parameter families."""

__version__ = "0.1.0"

from .exactcore import CountPoly, Interval, QExpSum, Rat, as_rat, eval_count_poly, qexp_eval

__all__ = [
    "CountPoly",
    "Interval",
    "QExpSum",
    "Rat",
    "as_rat",
    "eval_count_poly",
    "qexp_eval",
    "__version__",
]
