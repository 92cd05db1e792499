//! Likeability, emotional figure profiles and BIG5 personality scores for
//! named entities, computed from pretrained word embeddings by bipolar
//! lexicon scoring, plus the statistics used to validate them against human
//! rating norms.
//!
//! The pipeline is: load an [`EmbeddingTable`], load lexicons and a
//! [`PersonRoster`], score a [`ProfileBatch`] per model, then run the
//! studies in [`analysis`].

pub mod analysis;
pub mod embedding_io;
pub mod lexicons;
pub mod numerics;
pub mod scoring;

pub use analysis::{
    cross_model_correlation, domain_group_study, intra_profile_correlation, validate_against_norms,
    AnalysisError, Correlation, GroupStudyResult, ScoreKind, ValidationPoint, ValidationResult,
};
pub use embedding_io::{
    parse_vec_file, parse_vec_reader, write_interchange, AllowList, CaseMode, EmbeddingError,
    EmbeddingTable, ParseReport, SkipReason,
};
pub use lexicons::{
    bundled, coverage_check, load_lexicon, load_norms, load_roster, Big5Lexicons, CoverageReport,
    Domain, Lexicon, LexiconError, LexiconSet, NormsFormat, NormsTable, PersonRoster, Pole,
    RosterEntry, Substitution,
};
pub use numerics::{AnovaResult, Ddof, GroupSample, NumericsError};
pub use scoring::{
    average_batches, average_models, batch_profiles, big5, bipolar_score, efp, likeability,
    Big5Dimension, Big5Record, BipolarScore, EfpRecord, EpInputs, EpOrder, OovPolicy,
    PreparedLexicon, ProfileBatch, ProfileRecord, ScoreField, ScoringError, ScoringFailure,
    ScoringOptions, ZScores,
};
