"""PALM: curriculum-map learning analytics.

Layered, immutable map snapshots over a digitized curriculum map
(relevance lines, individual and cohort engagement shading, grade pins)
plus a reusable pre/post survey statistics pipeline.
"""

from .composer import MapSnapshot, MapView, SnapshotConfig, compose, view
from .engagement import (
    CohortFilter,
    DisplaySettings,
    EngagementComposite,
    HoverCard,
    cohort_composite,
    hover_payload,
    individual_composite,
)
from .ingestion import (
    Course,
    CurriculumLayout,
    EngagementRecord,
    GradeRecord,
    GradeScale,
    ParseError,
    SurveyResponseSet,
    parse_engagement_csv,
    parse_grade_scale,
    parse_grades_csv,
    parse_layout,
    parse_survey_csv,
    serialize_layout,
)
from .relevance import (
    DocumentVector,
    RelevanceEdge,
    RelevanceGraph,
    RenderPolicy,
    build_graph,
    build_tfidf,
    cosine_similarity,
    thickness_for,
    tokenize,
)
from .stats import (
    EffectSize,
    InstrumentDefinition,
    LADS_INSTRUMENT,
    PairedSample,
    TestReport,
    TPB_INSTRUMENT,
    effect_size_dd,
    factor_scores,
    paired_t_test,
    run_comparison,
    shapiro_wilk,
    wilcoxon_signed_rank,
)
from .store import SnapshotStore

__version__ = "0.1.0"

__all__ = [
    "CohortFilter",
    "Course",
    "CurriculumLayout",
    "DisplaySettings",
    "DocumentVector",
    "EffectSize",
    "EngagementComposite",
    "EngagementRecord",
    "GradeRecord",
    "GradeScale",
    "HoverCard",
    "InstrumentDefinition",
    "LADS_INSTRUMENT",
    "MapSnapshot",
    "MapView",
    "PairedSample",
    "ParseError",
    "RelevanceEdge",
    "RelevanceGraph",
    "RenderPolicy",
    "SnapshotConfig",
    "SnapshotStore",
    "SurveyResponseSet",
    "TPB_INSTRUMENT",
    "TestReport",
    "build_graph",
    "build_tfidf",
    "cohort_composite",
    "compose",
    "cosine_similarity",
    "effect_size_dd",
    "factor_scores",
    "hover_payload",
    "individual_composite",
    "paired_t_test",
    "parse_engagement_csv",
    "parse_grade_scale",
    "parse_grades_csv",
    "parse_layout",
    "parse_survey_csv",
    "run_comparison",
    "serialize_layout",
    "shapiro_wilk",
    "thickness_for",
    "tokenize",
    "view",
    "wilcoxon_signed_rank",
]
