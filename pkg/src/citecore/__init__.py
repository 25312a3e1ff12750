"""Journal citation indicators from the mean and standard deviation of
citation counts, under a log-normal model of (citations + 1)."""
from citecore.errors import (
    CitecoreError,
    DegenerateComparisonError,
    DomainError,
    DuplicateKeyError,
    InvariantError,
    NegativeCitationError,
    ParseError,
    RecordError,
    SchemaError,
)
from citecore.lognormal import (
    ArithMoments,
    GroupMoments,
    LogMoments,
    arith_to_log,
    group_moments,
    log_to_arith,
    lognormal_ccdf,
    lognormal_pdf,
    std_normal_cdf,
)
from citecore.estimated import (
    JournalRecord,
    KappaResult,
    RankTable,
    average_rank,
    csi,
    estimate_h_index,
    group_csi,
    impact_factor,
    min_representative_size,
)
from citecore.empirical import (
    empirical_average_rank,
    empirical_csi,
    empirical_group_csi,
    empirical_h_index,
    empirical_kappa,
    empirical_moments,
)

__version__ = "0.1.0"
