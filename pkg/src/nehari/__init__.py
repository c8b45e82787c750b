"""Best and superoptimal analytic approximation of matrix functions on the circle.

Matrix trigonometric polynomials, truncated Hankel/Toeplitz operators,
thematic/balanced/canonical factorizations, and certificates for badly and
very badly approximable symbols.
"""

from .certify import (
    Certificate,
    SchmidtSubspaceFamily,
    badly_approximable,
    condition_c,
    isometry_uniqueness,
    schmidt_family,
    uniqueness_hint,
)
from .errors import (
    CannotDetermineError,
    ConfigurationError,
    DegenerateInputError,
    FactorizationError,
    NehariError,
    SymbolFormatError,
)
from .factorize import (
    BalancedCompletion,
    associated_vector,
    balanced_completion,
    stacked_inner_factor,
    transpose_outer_residual,
)
from .hankel import (
    SchmidtPair,
    TruncatedHankel,
    TruncatedToeplitz,
    essential_norm_estimate,
    hankel_norm_and_schmidt,
    maximizing_subspace,
    toeplitz_kernel,
)
from .hardy import (
    ScalarFactorization,
    column_inner_outer,
    outer_factor,
    riesz_project,
    winding_number,
)
from .superopt import (
    MembershipReport,
    SuperoptReport,
    ThematicBlock,
    superopt_factorize,
    thematic_step,
    verify_superoptimal_membership,
)
from .symbol import (
    CircleGrid,
    MatrixSymbol,
    adjoint_symbol,
    block_diag,
    conj_symbol,
    dumps_symbol,
    evaluate,
    fit_from_samples,
    hcat,
    linf_norm,
    load_symbol,
    loads_symbol,
    multiply,
    pointwise_svd,
    save_symbol,
    symbol_from_dict,
    symbol_to_dict,
    transpose_symbol,
    vcat,
)

__version__ = "0.1.0"
