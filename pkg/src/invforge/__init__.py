"""Second-order differential invariants of the classical point-symmetry
algebras, with a numerical verification engine and a small expression
language."""

__version__ = "0.1.0"

from .dual import Dual, EvaluationError
from .verify import DualScalar
from .exprlang import (ParseError, SourceSpan, bind,
                       bind_scalar_function, parse, to_text)
from .invcat import (
    BasisFamily,
    JetSpace,
    ScalarJetFunction,
    TensorBuilder,
    basis,
    covariant_tensor,
    covariant_tensor_components,
    equation_function,
    equation_residual,
    galilei_mu0_determinant_family,
    rotation_dilation_family,
    rotation_pair_family,
    two_matrix_trace_family,
    mixed_power_trace,
    power_form,
    power_trace,
)
from .jetspace import (
    COMPLEX,
    REAL,
    FieldKind,
    JetCoordinateId,
    JetPoint,
    Metric,
    base_coord,
    contract,
    coord_count,
    d1_coord,
    d2_coord,
    enumerate_coords,
    euclidean,
    field_coord,
    from_log_jets,
    minkowski,
    sample_generic,
    to_log_jets,
)
from .liealg import (
    AlgebraSpec,
    ProlongedOperator,
    VectorField,
    apply_operator,
    catalog,
    generic_rank,
    make_sampler,
    make_spec,
    prolong2,
)
from .verify import (
    CompletenessReport,
    CovarianceReport,
    InvarianceRecord,
    InvarianceReport,
    RankReport,
    check_absolute,
    check_covariance,
    check_on_manifold,
    completeness,
    independence_rank,
    newton_project,
)

__all__ = [name for name in dir() if not name.startswith("_")]
