"""p-adic analytic tools around Iwasawa modules: series, phi/psi, Mellin, elementary divisors."""

from .divisors import DivisorChain, exponent_of, snf_exact, snf_numeric
from .factored import FactoredElement
from .iwasawa import DeltaChar, GroupRingElem, e_delta, ell_group, mellin, mellin_action_check
from .padic import ExtScalar, PadicError, PadicScalar, PrecisionError
from .phipsi import LogSeries, log_valuation, o_phi_estimate, phi, phi_components, psi, psi_log, theta_k_approx
from .series import (
    RadiusExp,
    SeriesContext,
    TruncatedSeries,
    chi_u_eval,
    ell,
    is_unit_on_circle,
    newton_polygon,
    norm_at_radius,
    omega,
    ord_at_factor,
    pi_factor,
    twist,
    xi,
)
from .structure import (
    FilteredPhiNModule,
    chain_from_determinant,
    hodge_data,
    predicted_annihilator,
    predicted_chain,
    predicted_determinant,
    synthetic_verify,
    twist_shift_identity,
)

__version__ = "0.1.0"
