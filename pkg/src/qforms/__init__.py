"""Exact and certified computation with generalized q-logarithms.

Rational arithmetic (``fractions.Fraction``) throughout; real values are
returned as :class:`Enclosure` balls with exact rational centre and radius.
"""

from .enclosure import Enclosure, as_rat, parse_eps
from .errors import (
    DivergenceError,
    DomainError,
    InsufficientTruncation,
    NoCertifiedConvergence,
    NonInvertibleError,
    PoleError,
    PrecisionExhausted,
    QFormsError,
)
from .functions import (
    EvalRequest,
    eval_Eq,
    eval_F,
    eval_Lambda,
    eval_Lcal,
    eval_Lq,
    eval_ell,
    eval_pi_q,
    eval_zeta_q,
    evaluate,
)
from .hankel import (
    certify,
    decay_fit,
    hankel_numeric,
    hankel_order_check,
    hankel_series,
    lemma1_check,
    shift_difference,
    vprime,
)
from .pade import coeffs, integrality_check, linear_form, remainder_enclosure, remainder_series
from .qnotation import multi_pochhammer, phi_rs, pochhammer, pochhammer_infinite, qbinom
from .identities import REGISTRY, check, run_suite
from .series import QSeries

__version__ = "0.1.0"

__all__ = [
    "Enclosure",
    "as_rat",
    "parse_eps",
    "DivergenceError",
    "DomainError",
    "InsufficientTruncation",
    "NoCertifiedConvergence",
    "NonInvertibleError",
    "PoleError",
    "PrecisionExhausted",
    "QFormsError",
    "EvalRequest",
    "eval_Eq",
    "eval_F",
    "eval_Lambda",
    "eval_Lcal",
    "eval_Lq",
    "eval_ell",
    "eval_pi_q",
    "eval_zeta_q",
    "evaluate",
    "certify",
    "decay_fit",
    "hankel_numeric",
    "hankel_order_check",
    "hankel_series",
    "lemma1_check",
    "shift_difference",
    "vprime",
    "coeffs",
    "integrality_check",
    "linear_form",
    "remainder_enclosure",
    "remainder_series",
    "multi_pochhammer",
    "phi_rs",
    "pochhammer",
    "pochhammer_infinite",
    "qbinom",
    "REGISTRY",
    "check",
    "run_suite",
    "QSeries",
]
