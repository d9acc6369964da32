"""Coded-caching delivery design and DoF analysis for asymmetric MIMO downlinks."""

from .analytics import (
    GroupingPlan,
    MinGPlan,
    PhantomCounts,
    PhantomDesign,
    dof_grouping,
    dof_min_g,
    dof_phantom,
    phantom_counts,
    phantom_design,
    render_dof,
    round_dof,
    weighted_dof,
)
from .errors import (
    AsymCCError,
    ConfigError,
    DomainError,
    FeasibilityError,
    ScheduleSizeError,
    SchedulingError,
    SeedError,
)
from .model import GroupProfile, SubpacketId, SystemConfig, binomial, enumerate_subsets, validate_config
from .optimizer import SymmetricDesign, is_feasible, solve_phantom, solve_symmetric

__version__ = "0.1.0"
