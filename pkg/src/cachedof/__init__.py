"""Cache-aided interference networks: DoF calculus, coded-caching network layer,
interference-alignment physical layer, and end-to-end separation runs."""

from .core import (
    PiecewiseLinear,
    SystemParams,
    as_fraction,
    lower_convex_envelope,
    subsets_of_size,
)
from .dofcalc import (
    compound_dof,
    cutset_bound,
    cutset_terms,
    dof_2x2_baseline,
    dof_2x2_curve,
    dof_curve,
    gain_decomposition,
    gap_scan,
    gap_scan_sample,
    net2x2_achievable_load,
    net2x2_lower_bound,
    partition_gains,
    phy_dof_optimal,
    phy_sum_dof,
    reciprocal_corner,
)
from .endtoend import run_end_to_end, run_end_to_end_2x2
from .netlayer import Library, decode, deliver, min_file_bits, place, scheme_2x2
from .phylayer import (
    AlignmentPlan,
    ChannelRealization,
    build_plan,
    build_plan_2x2,
    build_psi,
    decode_2x2,
    decode_at,
    transmit_receive,
    verify_alignment,
)

__version__ = "0.1.0"
