"""Dataset-side tooling for long-tailed object-detection work: manifest and
label parsing, class-distribution analysis, seeded sampling plans, hybrid
real/synthetic balancing, label-space augmentation plans, box remapping, and
file-based detection / generative-quality metrics."""

from longtail.augment import (
    MixupPlan,
    MosaicPlan,
    draw_mixup_lambda,
    mixup_labels,
    mosaic_labels,
)
from longtail.dataset import (
    Annotation,
    DatasetManifest,
    ImageEntry,
    NormBox,
    ValidationReport,
    load_manifest,
    load_manifest_file,
    parse_label_file,
    save_manifest,
    validate_manifest,
)
from longtail.errors import (
    ConfigurationError,
    EmptyDatasetError,
    LongtailError,
    NumericalError,
    ParseError,
    ShortfallError,
    ValidationError,
)
from longtail.eval_det import (
    Detection,
    DetEvalReport,
    average_precision,
    map_range,
    match_detections,
)
from longtail.eval_gen import (
    GaussianStats,
    clip_score,
    fid,
    gaussian_stats,
    inception_score,
)
from longtail.geometry import PixelRect, iou, remap_crop, resize_invariance_check
from longtail.hybrid import (
    BalanceTargets,
    FixedPerClass,
    Manual,
    MatchMax,
    balance_targets,
    mix,
    provenance_summary,
)
from longtail.rng import SplitMix64
from longtail.sampling import (
    EpochPlan,
    RepeatFactorTable,
    baseline_plan,
    cas_plan,
    repeat_factor,
    repeat_factor_table,
    rfs_plan,
)
from longtail.stats import ClassDistribution, class_distribution, imbalance_report

__version__ = "0.1.0"
