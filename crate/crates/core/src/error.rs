use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown variable '{name}' at position {pos}")]
    UnknownVariable { pos: usize, name: String },
}

impl ParseError {
    pub fn position(&self) -> usize {
        match self {
            ParseError::Syntax { pos, .. } | ParseError::UnknownVariable { pos, .. } => *pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("variable context must not be empty")]
    EmptyContext,
    #[error("'{0}' is not a valid variable name")]
    BadName(String),
    #[error("duplicate variable name '{0}'")]
    DuplicateName(String),
    #[error("polynomial context does not match")]
    ContextMismatch,
}

/// Errors raised by the ideal and resolution machinery. Every variant that
/// can occur mid-run names where it happened so a partial trace can point at
/// it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("resource limit exceeded: {what} (budget {budget})")]
    ResourceLimit { what: String, budget: u64 },
    #[error("center is not a coordinate subscheme in chart {chart} at stage {stage}: {ideal}")]
    CenterNotCoordinate { chart: usize, stage: usize, ideal: String },
    #[error("no generator is linear with unit coefficient in a free variable (chart {chart}, stage {stage})")]
    NoUnitLinearVariable { chart: usize, stage: usize },
    #[error("bound {b} exceeds the factorial cap {cap}")]
    FactorialBlowup { b: u64, cap: u64 },
    #[error("coefficient ideal is zero in chart {chart} at stage {stage}")]
    ZeroCoefficientIdeal { chart: usize, stage: usize },
    #[error("inexact division in chart {chart} at stage {stage}: {detail}")]
    InexactDivision { chart: usize, stage: usize, detail: String },
    #[error("point is not in the singular locus")]
    NotInSing,
    #[error("invalid center: {0}")]
    BadCenter(String),
    #[error("invariant violated in chart {chart} at stage {stage}: {detail}")]
    Consistency { chart: usize, stage: usize, detail: String },
    #[error("the smooth value was never reached before the singular locus emptied")]
    NotDesingularized,
    #[error("point is outside the chart domain: {0}")]
    OutsideChart(String),
    #[error("{0}")]
    Poly(#[from] PolyError),
}

impl ResolveError {
    /// Fill in the chart and stage of errors raised by chart-local helpers.
    pub fn located(self, at_chart: usize, at_stage: usize) -> ResolveError {
        use ResolveError::*;
        match self {
            CenterNotCoordinate { ideal, .. } => CenterNotCoordinate { chart: at_chart, stage: at_stage, ideal },
            NoUnitLinearVariable { .. } => NoUnitLinearVariable { chart: at_chart, stage: at_stage },
            ZeroCoefficientIdeal { .. } => ZeroCoefficientIdeal { chart: at_chart, stage: at_stage },
            InexactDivision { chart, detail, .. } => InexactDivision { chart, stage: at_stage, detail },
            Consistency { chart, detail, .. } => Consistency { chart, stage: at_stage, detail },
            other => other,
        }
    }
}
