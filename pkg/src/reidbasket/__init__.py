"""reidbasket: exact arithmetic for Reid baskets of terminal 3-fold singularities.

The package computes plurigenera and canonical volumes of weighted baskets
via orbifold Riemann-Roch, searches packing closures under exact filters,
synthesizes initial baskets from plurigenus data, runs the numeric
birationality-bound calculus, and chains everything into classification
scenarios.  All arithmetic is exact rational; no floats enter the engine.
"""

__version__ = "0.1.0"

from .basket import (
    Basket,
    BasketError,
    Pair,
    ValidityReport,
    WeightedBasket,
    cartier_index,
    k3,
    l_pair,
    normalize_pair,
    parse_basket,
    plurigenus,
    validate,
)
from .packing import (
    DescendantFilter,
    PackingStep,
    descendants,
    k3_drop,
    mediant,
    one_step_packings,
    packing_closure,
    packing_dag,
    to_dot,
)
from .b5 import (
    B5Coefficients,
    B5Result,
    EnumerationReport,
    InfeasibleDataError,
    PlurigenusData,
    b5_coefficients,
    enumerate_b5,
    sigma5_bound,
)
from .bounds import (
    RefineResult,
    RefineStep,
    RefinementState,
    X1Level,
    X1Update,
    alpha,
    birational_level,
    initial_xi,
    k1_ratio,
    k3_lower,
    kawamata_ratio,
    level_assumptions,
    quantize_up,
    refine_xi,
    separation_threshold,
    surface_pm_12,
    x1_birational_n,
    x1_update,
    x1_update_nonpencil,
    x2_threshold,
)
from .classify import (
    ClassificationResult,
    ScenarioConfig,
    check_superadditivity,
    default_pg3_config,
    pg1_subcase_configs,
    pm_upper_bound,
    revalidate_raw,
    run_pg1,
    run_pg3,
    run_scenario,
)

__all__ = [name for name in dir() if not name.startswith("_")]
