from .lp import INFEASIBLE, OPTIMAL, UNBOUNDED, LPError, LPResult, linprog, simplex
from .models import (
    MomentEstimates,
    OptimizationError,
    ScenarioSet,
    Weights,
    naive_weights,
    omega_ratio,
    ridge,
    ru_cvar,
    solve_gmv,
    solve_mcvar,
    solve_mv,
    solve_omega,
    solve_sharpe_random,
    solve_starr,
    solve_tda_ipo,
    solve_tda_po,
)
from .qp import QPError, kkt_residual, qp_solve

MODEL_NAMES = ("tda-po", "tda-ipo", "gmv", "mv", "mcvar", "sharpe", "starr", "omega", "naive")
