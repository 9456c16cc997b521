"""Arbitrage detection, super-hedging prices and maxingale checks on finite event trees."""

__version__ = "0.1.0"

from .prob_space import (AdaptedProcess, Atom, FilteredSpace, ModelError, NEG_INF, POS_INF,
                         RandomVariable, atom_of, is_measurable, is_stopping_time)
from .cond_calc import (HullResult, LinearProgram, LpOutcome, cond_essinf, cond_esssup,
                        cond_support, in_convex_hull, solve_lp, verify_outcome)
from .market import (IdExtension, MarketModel, PortfolioMenu, SimpleStrategy, is_admissible,
                     menu_id_entries, portfolio_value)
from .arbitrage import (ArbitrageWitness, EmmWitness, check_aip, check_aip_stopping, check_na,
                        check_nupbr, find_emm)
from .pricing import (PriceProcess, PriceSetDescription, closed_price_invariance,
                      menu_price_membership, menu_price_set, superhedge_dp)
from .topology import (ProcessSequenceSpec, SequenceSpec, converges, fatou_check, is_cauchy,
                       is_limit, pdist, pdist_hat, process_pdist)
from .maxingale import (StoppedSigmaAlgebra, StoppingTime, cond_esssup_at, dyadic_refine,
                        is_strong_sub_maxingale, is_sub_maxingale, sigma_at)
