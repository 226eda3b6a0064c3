"""Joint quasi-probability distributions for Bell scenarios, in exact arithmetic."""

from .boxes import (
    correlation_box,
    cloned_isotropic,
    deterministic,
    isotropic,
    make_box,
    pr_box,
    pr_n_box,
    pr_n_sign_matrix,
    uniform,
)
from .cloning import clone_report, pr_clone_signalling_witness
from .inequalities import (
    ChshFacet,
    Inn22Facet,
    chsh,
    mass_bound_residual,
    facet_decomposition,
    inn22_table,
    inn22_value,
)
from .mass import (
    MassResult,
    SignallingError,
    correlation_mass,
    has_jqpd,
    min_mass,
    verify_witness,
)
from .polytope import (
    CGVector,
    HRep,
    VertexClassification,
    classify_vertices,
    enumerate_vertices,
    from_cg,
    nn22_scan,
    ns_hrep,
    to_cg,
)
from .scenario import (
    Behavior,
    NoSignallingReport,
    QuasiDistribution,
    Scenario,
    marginals,
    no_signalling_report,
)

__version__ = "0.1.0"
