"""Seeded simulator and risk estimators for HIV transmission over
person-venue affiliation networks."""

from .baselines import (
    FollowUpRecord,
    LogisticFit,
    NewtonLogistic,
    PairedComparison,
    auc,
    fit_logistic,
    incidence_rate,
    paired_comparison,
    predict_logistic,
)
from .encounters import (
    RngStream,
    pair_encounters,
    sample_encounter_counts,
    sample_encounter_times,
    self_pair_probability,
)
from .errors import (
    DegenerateStudyError,
    InputError,
    MissingShareError,
    UndefinedAUCError,
    UndefinedRatioError,
    VenueRiskError,
)
from .estimator import (
    RiskScores,
    VenueRiskEstimator,
    estimate_q,
    estimate_risk,
    recode_frequency,
    scale_survey_counts,
)
from .harness import (
    PREDICTOR_NAMES,
    CalibrationPoint,
    ReplicationResult,
    StudyConfig,
    StudySummary,
    calibrate_pi,
    draw_population,
    run_replication,
    run_replications,
    run_study,
    summarize,
)
from .io import (
    ParticipantData,
    ParticipantRecord,
    load_config,
    load_participants,
    write_calibration,
    write_participants,
    write_results,
)
from .network import build_affiliation_network, project_venue_graph, total_encounters
from .scenarios import (
    SCENARIO_KINDS,
    ScenarioData,
    ScenarioSpec,
    TwoClusterSpec,
    apply_scenario,
    build_two_cluster,
)
from .synth import make_synthetic_base, make_synthetic_participants
from .transmission import (
    InfectionOutcome,
    TransmissionConfig,
    simulate_transmission,
    true_risk,
    venue_positive_share,
)
from .types import (
    AffiliationNetwork,
    EncounterLog,
    ParameterVector,
    PartnershipList,
    SampleData,
    VenueGraph,
    VenueShares,
)

__version__ = "0.1.0"
