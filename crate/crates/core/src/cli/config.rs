use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::axioms::AxiomCounts;
use crate::engine::{decimal_ladder, EngineConfig};
use crate::expr::{parse_expr, ExprError};
use crate::mnc::{GeomTerm, MncError, TailBox, TailForm, DEFAULT_HORIZON};
use crate::operators::{DiagonalAffineOperator, OperatorError, OperatorSpec, WITNESS_HORIZON};
use crate::scenarios::{BOUND_TABLE_N, PAPER_PHI, PAPER_PHI_SEQ, PAPER_PSI, PAPER_PSI_SEQ};
use crate::shifting::{dyadic_ladder, FunctionSequencePair, SampleGrid, ShiftingError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("invalid config JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{field}: {source}")]
    Expr { field: &'static str, source: ExprError },
    #[error("{field}: {source}")]
    Mnc { field: &'static str, source: MncError },
    #[error("operator: {0}")]
    Operator(#[from] OperatorError),
    #[error("grid: {0}")]
    Grid(#[from] ShiftingError),
    #[error("{0}")]
    Invalid(String),
}

/// Complete run configuration. Every field has a default; the defaults
/// describe the built-in worked example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct RunConfig {
    pub space: SpaceConfig,
    pub set: BoxConfig,
    pub operator: OperatorConfig,
    pub pair: PairConfig,
    pub grid: GridConfig,
    pub tol: f64,
    pub max_iter: u64,
    pub n_ladder: Vec<u64>,
    /// Threshold for the uniform-convergence check at the last ladder index.
    pub convergence_tol: f64,
    /// Run the iteration even when pair checks fail, recording warnings.
    pub allow_failed_pair_checks: bool,
    pub classic_k: f64,
    /// `n` values for the worked-example bound table.
    pub bound_n: Vec<u64>,
    pub axioms: AxiomCounts,
    pub oracle: OracleConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            space: SpaceConfig::default(),
            set: BoxConfig::default(),
            operator: OperatorConfig::Scaling { scaling: 0.5 },
            pair: PairConfig::default(),
            grid: GridConfig::default(),
            tol: 1e-9,
            max_iter: 10_000,
            n_ladder: decimal_ladder(),
            convergence_tol: 1e-5,
            allow_failed_pair_checks: false,
            classic_k: 0.5,
            bound_n: BOUND_TABLE_N.to_vec(),
            axioms: AxiomCounts::default(),
            oracle: OracleConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct SpaceConfig {
    /// Minimum number of explicit head coordinates for the input set.
    pub head_length: usize,
    /// Index horizon for exact sign and inclusion decisions.
    pub horizon: u64,
}

impl Default for SpaceConfig {
    fn default() -> Self {
        SpaceConfig { head_length: 0, horizon: DEFAULT_HORIZON }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub alpha: f64,
    pub rho: f64,
}

/// `Σ alpha·rho^i + beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FormConfig {
    pub terms: Vec<TermConfig>,
    pub beta: f64,
}

impl Default for FormConfig {
    fn default() -> Self {
        FormConfig::constant(0.0)
    }
}

impl FormConfig {
    pub fn constant(beta: f64) -> Self {
        FormConfig { terms: Vec::new(), beta }
    }

    fn build(&self, field: &'static str) -> Result<TailForm<f64>, ConfigError> {
        let terms = self.terms.iter().map(|t| GeomTerm { alpha: t.alpha, rho: t.rho }).collect();
        TailForm::new(terms, self.beta).map_err(|source| ConfigError::Mnc { field, source })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct BoxConfig {
    pub head_lo: Vec<f64>,
    pub head_hi: Vec<f64>,
    pub tail_lo: FormConfig,
    pub tail_hi: FormConfig,
}

impl Default for BoxConfig {
    fn default() -> Self {
        BoxConfig {
            head_lo: Vec::new(),
            head_hi: Vec::new(),
            tail_lo: FormConfig::constant(-1.0),
            tail_hi: FormConfig::constant(1.0),
        }
    }
}

impl BoxConfig {
    fn build(&self, head_length: usize) -> Result<TailBox<f64>, ConfigError> {
        let b = TailBox::new(
            self.head_lo.clone(),
            self.head_hi.clone(),
            self.tail_lo.build("set.tailLo")?,
            self.tail_hi.build("set.tailHi")?,
        )
        .map_err(|source| ConfigError::Mnc { field: "set", source })?;
        Ok(if head_length > b.head_len() { b.with_head_len(head_length) } else { b })
    }
}

/// `x_i ↦ d_i x_i + e_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct AffineConfig {
    pub d_head: Vec<f64>,
    pub d_tail: FormConfig,
    pub e_head: Vec<f64>,
    pub e_tail: FormConfig,
}

impl Default for AffineConfig {
    fn default() -> Self {
        AffineConfig {
            d_head: Vec::new(),
            d_tail: FormConfig::constant(1.0),
            e_head: Vec::new(),
            e_tail: FormConfig::constant(0.0),
        }
    }
}

impl AffineConfig {
    fn build(&self) -> Result<DiagonalAffineOperator<f64>, ConfigError> {
        Ok(DiagonalAffineOperator::new(
            self.d_head.clone(),
            self.d_tail.build("operator.dTail")?,
            self.e_head.clone(),
            self.e_tail.build("operator.eTail")?,
        )?)
    }
}

/// `{"scaling": c}`, `{"compose": [...]}` (first entry applied first), or a
/// single affine operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorConfig {
    Scaling { scaling: f64 },
    Compose { compose: Vec<AffineConfig> },
    Affine(AffineConfig),
}

impl OperatorConfig {
    fn build(&self) -> Result<OperatorSpec<f64>, ConfigError> {
        Ok(match self {
            OperatorConfig::Scaling { scaling } => DiagonalAffineOperator::scaling(*scaling).into(),
            OperatorConfig::Compose { compose } => {
                OperatorSpec::Compose(compose.iter().map(AffineConfig::build).collect::<Result<_, _>>()?)
            }
            OperatorConfig::Affine(a) => a.build()?.into(),
        })
    }
}

/// Expression strings; limits absent from a given pair are estimated
/// numerically, never inherited from the default pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct PairConfig {
    pub psi_seq: String,
    pub phi_seq: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi_limit: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_limit: Option<String>,
}

impl Default for PairConfig {
    fn default() -> Self {
        PairConfig {
            psi_seq: PAPER_PSI_SEQ.into(),
            phi_seq: PAPER_PHI_SEQ.into(),
            psi_limit: Some(PAPER_PSI.into()),
            phi_limit: Some(PAPER_PHI.into()),
        }
    }
}

impl PairConfig {
    fn build(&self) -> Result<FunctionSequencePair, ConfigError> {
        let parse = |field: &'static str, text: &str| {
            parse_expr(text).map_err(|source| ConfigError::Expr { field, source })
        };
        Ok(FunctionSequencePair {
            psi_seq: parse("pair.psiSeq", &self.psi_seq)?,
            phi_seq: parse("pair.phiSeq", &self.phi_seq)?,
            psi_limit: self.psi_limit.as_deref().map(|s| parse("pair.psiLimit", s)).transpose()?,
            phi_limit: self.phi_limit.as_deref().map(|s| parse("pair.phiLimit", s)).transpose()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct GridConfig {
    pub t_max: f64,
    pub step: f64,
    pub n_ladder: Vec<u64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { t_max: 100.0, step: 0.1, n_ladder: dyadic_ladder(20) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default, deny_unknown_fields)]
pub struct OracleConfig {
    pub boxes: u64,
    pub truncation: u64,
    pub tolerance: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { boxes: 100, truncation: 1_000_000, tolerance: 1e-6 }
    }
}

/// A validated configuration with every descriptor built.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub set: TailBox<f64>,
    pub operator: OperatorSpec<f64>,
    pub pair: FunctionSequencePair,
    pub engine: EngineConfig<f64>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    /// Validates everything before any run starts.
    pub fn resolve(&self) -> Result<Resolved, ConfigError> {
        let positive = |name: &str, x: f64| {
            if x.is_finite() && x > 0.0 {
                Ok(())
            } else {
                Err(ConfigError::Invalid(format!("{name} must be positive, got {x}")))
            }
        };
        positive("tol", self.tol)?;
        positive("convergenceTol", self.convergence_tol)?;
        if self.n_ladder.is_empty() || self.n_ladder.contains(&0) {
            return Err(ConfigError::Invalid("nLadder must be a nonempty list of positive integers".into()));
        }
        if self.bound_n.contains(&0) {
            return Err(ConfigError::Invalid("boundN entries must be positive".into()));
        }
        let grid = SampleGrid::new(self.grid.t_max, self.grid.step, self.grid.n_ladder.clone())?;
        Ok(Resolved {
            set: self.set.build(self.space.head_length)?,
            operator: self.operator.build()?,
            pair: self.pair.build()?,
            engine: EngineConfig {
                tol: self.tol,
                max_iter: self.max_iter,
                n_ladder: self.n_ladder.clone(),
                grid,
                convergence_tol: self.convergence_tol,
                enforce_pair_checks: !self.allow_failed_pair_checks,
                witness_horizon: WITNESS_HORIZON,
                horizon: self.space.horizon,
            },
        })
    }
}
