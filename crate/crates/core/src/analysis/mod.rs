//! Evaluation suite: rater agreement, correlation matrices, agreement
//! between CARE and human labels, and annotation statistics.

mod agreement;
mod raters;
mod tables;

pub use agreement::{annotation_stats, care_agreement, AgreementRow, AnnotationStats, ChoiceStats, Threshold};
pub use raters::{interrater_correlation, InterraterReport, RaterMatrix};
pub use tables::{
    engagement_table, feeling_table, human_label_table, pearson, pearson_matrix, CorrelationMatrix, LabelTable,
    ENGAGEMENT_GROUPS,
};

#[derive(Debug, thiserror::Error)]
pub enum AnalysisError {
    #[error("tables share no post ids")]
    NoOverlap,
    #[error("every rater has an undefined correlation ({0} raters)")]
    AllRatersUndefined(usize),
    #[error("no annotations")]
    NoAnnotations,
    #[error("row for `{post}` has {got} values, table has {expected} columns")]
    RowWidth { post: String, got: usize, expected: usize },
}
