"""Driver-behavior estimation: Gaussian-mixture HMM metastates composed into a
dynamically reconfigurable discrete state system, scored online by windowed
forward-likelihood comparison and reconfigured by roadway context changes."""

from .dss import (
    CONTINUE,
    CONTEXT_METASTATES,
    EVENT_CLASSES,
    ContextState,
    DssConfiguration,
    Ecs,
    Metastate,
    ModificationEvent,
    ModificationKind,
    Rcs,
    Tcs,
    apply_context_change,
    dss_for_context,
    graft,
    prune,
)
from .estimator import (
    EstimateRecord,
    EstimatorSession,
    read_records_csv,
    run_offline,
    write_records_csv,
)
from .evaluation import EvalReport, evaluate
from .features import (
    FEATURE_ORDER,
    LogLikelihood,
    ObservationVector,
    as_feature_matrix,
)
from .geomap import (
    MapModel,
    PositionFix,
    context_timeline,
    load_map,
    resolve_context,
)
from .gmm import GaussianComponent, GaussianMixture, diagonal_mixture, gmm_log_pdf
from .hmm import (
    AbsorptionAnalysis,
    HiddenMarkovModel,
    analyze_absorption,
    forward_log_likelihood,
    viterbi_decode,
)
from .serialization import MetastateRegistry, load_model, save_model
from .train import TrainConfig, TrainResult, baum_welch_train
from .trajectory import (
    EventTemplate,
    LabeledSequence,
    RouteScript,
    default_template,
    generate_event,
    generate_route,
)

__version__ = "0.1.0"
