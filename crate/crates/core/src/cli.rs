//! Command-line surface.
//!
//! Exit codes: 0 on success, 1 on usage errors, 2 on data errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evaluation::{run_hybrid_eval, run_regression_eval, EvalConfig};
use crate::hybrid::{DecisionRule, DistanceKind, FeatureEncoding, HybridConfig, Neighborhood, DEFAULT_K};
use crate::ingest::{build_cohort, load_records, save_records, scan_rescuable, CohortFilter, RescuableCase};
use crate::model::TargetIndex;
use crate::regression::{self, DEFAULT_GATE};
use crate::report::{self, error_table, render, rescue_rows, rescue_table, scan_table, ErrorRow, Format, RunManifest};
use crate::rescue::{cohort_for, predict_case, rescue_all, Engine, RescueOutcome, RescueParams};
use crate::sampling::{SplitConfig, DEFAULT_TRAIN_FRACTION};
use crate::synth::{generate, GenConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "catchup", version, about = "Pass/fail rulings for students who missed one core exam", arg_required_else_help = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// Generate a synthetic exam population.
    Gen(GenArgs),
    /// List students with exactly one missing grade.
    Scan(ScanArgs),
    /// Monte Carlo error rates of the regression imputer.
    EvalRegression(EvalRegressionArgs),
    /// Monte Carlo error rates of the hybrid nearest-neighbor imputer.
    EvalHybrid(EvalHybridArgs),
    /// Majority-vote ruling for one student.
    Predict(PredictArgs),
    /// Majority-vote rulings for every valid rescuable student.
    RescueAll(RescueAllArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Gen(_) => "gen",
            Command::Scan(_) => "scan",
            Command::EvalRegression(_) => "eval-regression",
            Command::EvalHybrid(_) => "eval-hybrid",
            Command::Predict(_) => "predict",
            Command::RescueAll(_) => "rescue-all",
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleArg {
    Avg,
    Mode,
}

impl From<RuleArg> for DecisionRule {
    fn from(r: RuleArg) -> Self {
        match r {
            RuleArg::Avg => DecisionRule::Average,
            RuleArg::Mode => DecisionRule::MostFrequent,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineArg {
    Reg,
    Hybrid,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceArg {
    Euclid2,
    Chebyshev,
}

#[derive(Debug, Args, Serialize)]
pub struct OutputArgs {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
pub struct SliceArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Grade position being imputed (1-4).
    #[arg(long, default_value_t = 4)]
    pub target: i64,
    #[arg(long)]
    pub year: Option<i32>,
    #[arg(long)]
    pub region: Option<u8>,
    #[arg(long)]
    pub gender: Option<u8>,
}

impl SliceArgs {
    fn filter(&self) -> Result<CohortFilter> {
        let f = CohortFilter {
            year: self.year,
            region: self.region,
            gender: self.gender,
            complete_only: true,
        };
        f.validate()?;
        Ok(f)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct RunArgs {
    /// Monte Carlo repetitions.
    #[arg(long = "reps", default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Target training fraction.
    #[arg(long = "train-frac", default_value_t = DEFAULT_TRAIN_FRACTION)]
    pub train_frac: f64,
    /// Use the fixed draw budget instead of a target fraction.
    #[arg(long = "paper-split")]
    pub paper_split: bool,
}

impl RunArgs {
    fn split(&self) -> SplitConfig {
        if self.paper_split {
            SplitConfig::Paper
        } else {
            SplitConfig::Fraction(self.train_frac)
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct HybridArgs {
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    /// Use every training case within this distance instead of the hybrid class.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Compare Credit/Pass/Fail bands instead of raw grades.
    #[arg(long)]
    pub bands: bool,
    #[arg(long, value_enum, default_value_t = DistanceArg::Euclid2)]
    pub distance: DistanceArg,
}

impl HybridArgs {
    fn config(&self) -> HybridConfig {
        HybridConfig {
            neighborhood: match self.epsilon {
                Some(epsilon) => Neighborhood::EpsilonBall { epsilon },
                None => Neighborhood::Hybrid { k: self.k },
            },
            distance: match self.distance {
                DistanceArg::Euclid2 => DistanceKind::Euclid2,
                DistanceArg::Chebyshev => DistanceKind::Chebyshev,
            },
            encoding: if self.bands { FeatureEncoding::Bands } else { FeatureEncoding::Raw },
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct GenArgs {
    #[arg(long = "n", default_value_t = 1000)]
    pub n: usize,
    #[arg(long = "missing-rate", default_value_t = 0.05)]
    pub missing_rate: f64,
    /// Per-subject noise standard deviation.
    #[arg(long = "noise", default_value_t = 1.0)]
    pub noise: f64,
    #[arg(long = "ability-mean", default_value_t = 5.0)]
    pub ability_mean: f64,
    #[arg(long = "ability-spread", default_value_t = 2.0)]
    pub ability_spread: f64,
    #[arg(long, value_delimiter = ',', default_values_t = [2012, 2013, 2014, 2015, 2016, 2017])]
    pub years: Vec<i32>,
    #[arg(long, value_delimiter = ',', default_values_t = [1u8, 2, 3, 4, 5, 6])]
    pub regions: Vec<u8>,
    /// Fraction of female students.
    #[arg(long = "gender-split", default_value_t = 0.5)]
    pub gender_split: f64,
    #[arg(long, default_value_t = 4)]
    pub target: i64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    #[command(flatten)]
    pub slice: SliceArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalRegressionArgs {
    #[command(flatten)]
    pub slice: SliceArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Adjusted R² acceptance threshold.
    #[arg(long, default_value_t = DEFAULT_GATE)]
    pub threshold: f64,
    /// Also report error counts normalized by group size.
    #[arg(long = "paper-normalization")]
    pub paper_normalization: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalHybridArgs {
    #[command(flatten)]
    pub slice: SliceArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub hybrid: HybridArgs,
    /// Only report models using this decision rule.
    #[arg(long, value_enum)]
    pub rule: Option<RuleArg>,
    #[arg(long = "paper-normalization")]
    pub paper_normalization: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct PredictArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long = "case")]
    pub case_id: u64,
    #[arg(long, default_value_t = 4)]
    pub target: i64,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct RescueAllArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub target: i64,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct EngineArgs {
    #[arg(long, value_enum, default_value_t = EngineArg::Reg)]
    pub engine: EngineArg,
    /// Force one decision rule for the hybrid engine.
    #[arg(long, value_enum)]
    pub rule: Option<RuleArg>,
    #[command(flatten)]
    pub hybrid: HybridArgs,
    /// Restrict the cohort to the student's gender.
    #[arg(long = "same-gender")]
    pub same_gender: bool,
}

impl EngineArgs {
    fn engine(&self) -> Engine {
        match (self.engine, self.rule) {
            (EngineArg::Reg, _) => Engine::Regression,
            (EngineArg::Hybrid, None) => Engine::HybridRecommended,
            (EngineArg::Hybrid, Some(RuleArg::Avg)) => Engine::HybridAverage,
            (EngineArg::Hybrid, Some(RuleArg::Mode)) => Engine::HybridMostFrequent,
        }
    }

    fn params(&self, run: &RunArgs) -> RescueParams {
        RescueParams {
            reps: run.reps,
            seed: run.seed,
            split: run.split(),
            hybrid: self.hybrid.config(),
            same_gender: self.same_gender,
        }
    }
}

fn eval_config(run: &RunArgs, paper_normalization: bool) -> EvalConfig {
    EvalConfig {
        reps: run.reps,
        seed: run.seed,
        split: run.split(),
        paper_normalization,
    }
}

/// Execute a parsed command and return the rendered report.
pub fn execute(cli: &Cli) -> Result<String> {
    let cmd = &cli.command;
    let name = cmd.name();
    match cmd {
        Command::Gen(a) => {
            let config = GenConfig {
                n_records: a.n,
                years: a.years.clone(),
                regions: a.regions.clone(),
                gender_split: a.gender_split,
                ability_mean: a.ability_mean,
                ability_spread: a.ability_spread,
                noise_spread: a.noise,
                missing_rate: a.missing_rate,
                target: TargetIndex::new(a.target)?,
                seed: a.seed,
                first_case_id: 1,
            };
            let records = generate(&config)?;
            save_records(&a.out, &records)?;
            let rescuable = scan_rescuable(&records, config.target);
            let manifest = RunManifest::new(name, cmd, Some(a.seed), None)?;
            let digest = report::sha256_file(&a.out)?;
            #[derive(Serialize)]
            struct GenSummary {
                records: usize,
                rescuable: usize,
                valid_rescuable: usize,
                output_sha256: String,
            }
            let body = GenSummary {
                records: records.len(),
                rescuable: rescuable.len(),
                valid_rescuable: rescuable.iter().filter(|c| c.valid).count(),
                output_sha256: digest,
            };
            let text = format!(
                "records: {}\nrescuable: {} valid: {}\noutput-sha256: {}\n",
                body.records, body.rescuable, body.valid_rescuable, body.output_sha256
            );
            Ok(render(&manifest, a.output.format, &text, &body))
        }
        Command::Scan(a) => {
            let records = load_records(&a.slice.input)?;
            let target = TargetIndex::new(a.slice.target)?;
            let filter = CohortFilter {
                complete_only: false,
                ..a.slice.filter()?
            };
            let cohort = build_cohort(&records, filter, target);
            let cases = scan_rescuable(&cohort.records, target);
            let manifest = RunManifest::new(name, cmd, None, Some(&a.slice.input))?;
            Ok(render(&manifest, a.output.format, &scan_table(&cases), &cases))
        }
        Command::EvalRegression(a) => {
            let records = load_records(&a.slice.input)?;
            let target = TargetIndex::new(a.slice.target)?;
            let cohort = build_cohort(&records, a.slice.filter()?, target);
            let report = run_regression_eval(&cohort, &eval_config(&a.run, a.paper_normalization))?;
            let full = regression::fit(&cohort.observations())?;
            let manifest = RunManifest::new(name, cmd, Some(a.run.seed), Some(&a.slice.input))?;
            #[derive(Serialize)]
            struct Body {
                models: Vec<ErrorRow>,
                full_fit: regression::RegressionModel,
                gate_threshold: f64,
                gate_accepted: bool,
            }
            let body = Body {
                models: vec![ErrorRow::from(&report)],
                gate_accepted: regression::gate(&full, a.threshold),
                gate_threshold: a.threshold,
                full_fit: full,
            };
            let text = format!(
                "cohort: {} complete records\n{}{}",
                cohort.observations().len(),
                report::model_summary(&body.full_fit, a.threshold),
                error_table(&[&report])
            );
            Ok(render(&manifest, a.output.format, &text, &body))
        }
        Command::EvalHybrid(a) => {
            let records = load_records(&a.slice.input)?;
            let target = TargetIndex::new(a.slice.target)?;
            let cohort = build_cohort(&records, a.slice.filter()?, target);
            let report = run_hybrid_eval(&cohort, &eval_config(&a.run, a.paper_normalization), &a.hybrid.config())?;
            let keep = |model: &str| match a.rule {
                None => true,
                Some(RuleArg::Avg) => model.ends_with('a') || model.ends_with("avg"),
                Some(RuleArg::Mode) => model.ends_with('b') || model.ends_with("mode"),
            };
            let shown: Vec<_> = report.models.iter().filter(|m| keep(&m.model)).collect();
            let manifest = RunManifest::new(name, cmd, Some(a.run.seed), Some(&a.slice.input))?;
            #[derive(Serialize)]
            struct Body {
                models: Vec<ErrorRow>,
                no_neighbor_cases: usize,
            }
            let body = Body {
                models: shown.iter().map(|m| ErrorRow::from(*m)).collect(),
                no_neighbor_cases: report.no_neighbor_cases,
            };
            let text = format!(
                "cohort: {} complete records\n{}no-neighbor cases: {}\n",
                cohort.observations().len(),
                error_table(&shown),
                report.no_neighbor_cases
            );
            Ok(render(&manifest, a.output.format, &text, &body))
        }
        Command::Predict(a) => {
            let records = load_records(&a.input)?;
            let target = TargetIndex::new(a.target)?;
            let record = records
                .iter()
                .find(|r| r.case_id == a.case_id)
                .ok_or(Error::UnknownCase(a.case_id))?;
            let case = RescuableCase::from_record(record, target).ok_or_else(|| Error::Refused {
                case_id: a.case_id,
                reason: format!("grade {target} is not the only missing grade"),
            })?;
            let params = a.engine.params(&a.run);
            let cohort = cohort_for(&records, &case, params.same_gender);
            let engine = a.engine.engine();
            let decision = predict_case(&case, &cohort, engine, &params)?;
            let rows = rescue_rows(&[RescueOutcome::Decided(decision)], &engine.to_string());
            let manifest = RunManifest::new(name, cmd, Some(a.run.seed), Some(&a.input))?;
            Ok(render(&manifest, a.output.format, &rescue_table(&rows), &rows))
        }
        Command::RescueAll(a) => {
            let records = load_records(&a.input)?;
            let target = TargetIndex::new(a.target)?;
            let params = a.engine.params(&a.run);
            params.split.validate()?;
            let engine = a.engine.engine();
            let outcomes = rescue_all(&records, target, engine, &params);
            let rows = rescue_rows(&outcomes, &engine.to_string());
            let manifest = RunManifest::new(name, cmd, Some(a.run.seed), Some(&a.input))?;
            let text = format!("{}decisions: {}\n", rescue_table(&rows), rows.len());
            Ok(render(&manifest, a.output.format, &text, &rows))
        }
    }
}

/// Parse `argv`, run, and write the report or diagnostics. Returns the exit
/// code.
pub fn run<I, T>(argv: I, out: &mut impl Write, err: &mut impl Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    match execute(&cli) {
        Ok(report) => {
            let _ = out.write_all(report.as_bytes());
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_DATA
        }
    }
}
