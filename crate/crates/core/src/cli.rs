//! Command-line front end: argument parsing, run configuration, the four
//! commands, and record/human rendering.

use std::io::Write;
use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::checks::{
    anticoncentration_check, concentration_grid, ensemble_experiment, gaussian_invariance_gap,
    hypercontractivity_check, influence_decay_check, parseval_check, regular_anticoncentration,
    restriction_average_check, CheckReport,
};
use crate::constants::TheoryConstants;
use crate::error::{invalid, Error, Result};
use crate::low_weight::{approximate, CertificateStatus};
use crate::measure::stream_seed;
use crate::poly::{fwht_synthesize, MultilinearPolynomial, TruthTable};
use crate::tree::{audit_tree, build_tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CommandName {
    Decompose,
    Approximate,
    Verify,
    Ensemble,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Human,
    #[default]
    Records,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InputSource {
    File { path: PathBuf },
    Generate { n: usize, d: usize, seed: u64 },
}

impl InputSource {
    /// Parses the `n:d:seed` generator spec.
    pub fn parse_generator(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let [n, d, seed] = parts.as_slice() else {
            return Err(invalid(format!("generator '{spec}' is not of the form n:d:seed")));
        };
        let num = |s: &str| s.trim().parse::<u64>().map_err(|_| invalid(format!("generator '{spec}': '{s}' is not a number")));
        Ok(InputSource::Generate { n: num(n)? as usize, d: num(d)? as usize, seed: num(seed)? })
    }

    pub fn load(&self) -> Result<MultilinearPolynomial> {
        match self {
            InputSource::File { path } => {
                let text = std::fs::read_to_string(path)?;
                MultilinearPolynomial::from_json(&text)
            }
            InputSource::Generate { n, d, seed } => MultilinearPolynomial::random_gaussian(*n, *d, *seed),
        }
    }
}

/// Everything that determines a run's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandName,
    pub input: Option<InputSource>,
    pub tau: Option<f64>,
    pub epsilon: Option<f64>,
    pub degree: Option<usize>,
    pub vars: Option<usize>,
    pub members: Option<usize>,
    pub checks: Vec<String>,
    pub constant_overrides: Vec<(String, String)>,
    /// Constants after overrides; the values every computation used.
    pub constants: TheoryConstants,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub seed: u64,
}

impl RunConfig {
    pub fn new(command: CommandName) -> Self {
        Self {
            command,
            input: None,
            tau: None,
            epsilon: None,
            degree: None,
            vars: None,
            members: None,
            checks: Vec::new(),
            constant_overrides: Vec::new(),
            constants: TheoryConstants::default(),
            format: OutputFormat::Records,
            out: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ptfkit", version, about = "Regularity decompositions and low-weight approximators for polynomial threshold functions")]
pub struct Args {
    /// Command to run
    #[arg(value_enum)]
    pub command: CommandName,
    /// Polynomial document to read
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Random Gaussian polynomial `n:d:seed` instead of a file
    #[arg(long, conflicts_with = "input")]
    pub generate: Option<String>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Override a theory constant, NAME=VALUE (repeatable)
    #[arg(long = "const", value_name = "NAME=VALUE")]
    pub constants: Vec<String>,
    /// Master seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Records)]
    pub format: OutputFormat,
    /// Write output here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Restrict `verify` to the named check (repeatable)
    #[arg(long = "check", value_name = "NAME")]
    pub checks: Vec<String>,
    /// Ensemble size, or corpus size for `verify`
    #[arg(long)]
    pub members: Option<usize>,
    /// Variable count for generated corpora
    #[arg(long)]
    pub vars: Option<usize>,
    /// Degree for generated corpora
    #[arg(long)]
    pub degree: Option<usize>,
}

impl Args {
    pub fn into_config(self) -> Result<RunConfig> {
        let mut constants = TheoryConstants::from_env()?;
        let mut overrides = Vec::new();
        for spec in &self.constants {
            let (name, value) = spec
                .split_once('=')
                .ok_or_else(|| invalid(format!("--const '{spec}' is not NAME=VALUE")))?;
            constants.set(name.trim(), value.trim())?;
            overrides.push((name.trim().to_string(), value.trim().to_string()));
        }
        let input = match (self.input, self.generate) {
            (Some(path), _) => Some(InputSource::File { path }),
            (None, Some(spec)) => Some(InputSource::parse_generator(&spec)?),
            (None, None) => None,
        };
        Ok(RunConfig {
            command: self.command,
            input,
            tau: self.tau,
            epsilon: self.epsilon,
            degree: self.degree,
            vars: self.vars,
            members: self.members,
            checks: self.checks,
            constant_overrides: overrides,
            constants,
            format: self.format,
            out: self.out,
            seed: self.seed,
        })
    }
}

/// Records produced by a command, plus its exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    pub records: Vec<Value>,
    pub summary: Vec<String>,
}

pub const CHECK_NAMES: [&str; 9] = [
    "hypercontractivity",
    "concentration",
    "anticoncentration",
    "regular_anticoncentration",
    "invariance",
    "parseval",
    "sign_parseval",
    "restriction_average",
    "influence_decay",
];

fn require_input(cfg: &RunConfig) -> Result<MultilinearPolynomial> {
    cfg.input
        .as_ref()
        .ok_or_else(|| invalid("an input is required: pass --input FILE or --generate n:d:seed"))?
        .load()
}

fn record(kind: &str, body: impl Serialize) -> Value {
    let mut v = serde_json::to_value(body).expect("records are serializable");
    match v {
        Value::Object(ref mut map) => {
            map.insert("record".into(), json!(kind));
            v
        }
        other => json!({ "record": kind, "value": other }),
    }
}

fn cmd_decompose(cfg: &RunConfig) -> Result<Outcome> {
    let p = require_input(cfg)?;
    let tau = cfg.tau.unwrap_or(0.1);
    let tree = build_tree(&p, tau, &cfg.constants)?;
    let mass = tree.path_mass();
    let mut records = vec![record("tree", &tree), record("path_mass", &mass)];
    let mut summary = vec![
        format!("leaves: {} regular, {} close to constant, {} bad", mass.regular_leaves, mass.close_leaves, mass.bad_leaves),
        format!("max depth {}, derived budget {}", mass.max_depth, tree.params.total_budget),
        format!("good mass {:.6} (target >= {:.6})", mass.good_mass, 1.0 - tau),
    ];
    if p.n() <= cfg.constants.enumeration_limit {
        let audit = audit_tree(&tree, &p)?;
        summary.push(format!("audit: {} label failures, {} sign mismatches", audit.label_failures, audit.sign_mismatches));
        records.push(record("audit", &audit));
    }
    let ok = mass.good_mass >= 1.0 - tau;
    Ok(Outcome { exit_code: i32::from(!ok), records, summary })
}

fn cmd_approximate(cfg: &RunConfig) -> Result<Outcome> {
    let p = require_input(cfg)?;
    let eps = cfg.epsilon.unwrap_or(0.2);
    let cert = approximate(&p, eps, &cfg.constants)?;
    let summary = vec![
        format!("distance {:.6} (epsilon {eps})", cert.distance),
        format!("weight {} (ln {:.3}), degree {}", cert.weight, cert.ln_weight, cert.degree),
        format!("tree depth {}, bad mass {:.6}, status {:?}", cert.tree_depth, cert.path_mass.bad_mass, cert.status),
    ];
    let ok = cert.within_epsilon() && cert.status != CertificateStatus::DistanceExceeded;
    Ok(Outcome { exit_code: i32::from(!ok), records: vec![record("certificate", &cert)], summary })
}

fn run_checks(p: &MultilinearPolynomial, label: &str, selected: &[&str], cfg: &RunConfig) -> Result<Vec<CheckReport>> {
    let k = &cfg.constants;
    let mut out = Vec::new();
    let wants = |name: &str| selected.contains(&name);
    let centered = {
        let c = MultilinearPolynomial::constant(p.n(), -p.constant_term())?;
        crate::poly::linear_combine(&[(1.0, p), (1.0, &c)])?
    };
    if wants("hypercontractivity") {
        out.push(hypercontractivity_check(p, k)?);
    }
    if wants("concentration") && p.variance() > 0.0 {
        let d = p.degree().max(1) as f64;
        let base = d.exp();
        out.push(concentration_grid(p, &[base + 0.1, base + 1.0, 2.0 * base, 4.0 * base], k)?);
    }
    if wants("anticoncentration") && centered.variance() > 0.0 {
        out.push(anticoncentration_check(&centered, k)?);
    }
    if p.variance() > 0.0 && (wants("regular_anticoncentration") || wants("invariance")) {
        let unit = p.normalize_variance()?;
        if wants("regular_anticoncentration") {
            out.push(regular_anticoncentration(&unit, cfg.tau.unwrap_or(0.1), k)?);
        }
        if wants("invariance") {
            let seed = stream_seed(cfg.seed, "gaussian", fnv_label(label));
            out.push(gaussian_invariance_gap(&unit, k.mc_samples, seed, k)?);
        }
    }
    if wants("parseval") {
        out.push(parseval_check(&fwht_synthesize(p, k.enumeration_limit)?));
    }
    if wants("sign_parseval") {
        let signs: Vec<f64> = fwht_synthesize(p, k.enumeration_limit)?.signs().iter().map(|&s| s as f64).collect();
        let mut r = parseval_check(&TruthTable::new(p.n(), signs)?);
        r.check = "sign_parseval".into();
        out.push(r);
    }
    if wants("restriction_average") {
        for head in 1..=p.n().min(4) {
            out.push(restriction_average_check(p, head)?);
        }
    }
    if wants("influence_decay") && p.variance() > 0.0 {
        for tau in [0.05, 0.1, 0.3] {
            out.push(influence_decay_check(p, tau)?);
        }
    }
    Ok(out)
}

fn fnv_label(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3))
}

fn cmd_verify(cfg: &RunConfig) -> Result<Outcome> {
    let selected: Vec<&str> = if cfg.checks.is_empty() {
        CHECK_NAMES.to_vec()
    } else {
        for name in &cfg.checks {
            if !CHECK_NAMES.contains(&name.as_str()) {
                return Err(invalid(format!("unknown check '{name}'; known: {}", CHECK_NAMES.join(", "))));
            }
        }
        cfg.checks.iter().map(String::as_str).collect()
    };
    let corpus: Vec<(String, MultilinearPolynomial)> = match &cfg.input {
        Some(src) => vec![("input".into(), src.load()?)],
        None => {
            let n = cfg.vars.unwrap_or(10);
            let d = cfg.degree.unwrap_or(3);
            (0..cfg.members.unwrap_or(10) as u64)
                .map(|i| {
                    let seed = stream_seed(cfg.seed, "corpus", i);
                    MultilinearPolynomial::random_gaussian(n, d, seed).map(|p| (format!("corpus-{i}"), p))
                })
                .collect::<Result<_>>()?
        }
    };
    let mut records = Vec::new();
    let (mut hard, mut failed, mut informational, mut skipped) = (0, 0, 0, 0);
    for (label, p) in &corpus {
        for report in run_checks(p, label, &selected, cfg)? {
            use crate::checks::CheckStatus::*;
            match report.status {
                Pass => hard += 1,
                Fail => {
                    hard += 1;
                    failed += 1;
                }
                Informational => informational += 1,
                NotApplicable => skipped += 1,
            }
            let mut v = record("check", &report);
            v["subject"] = json!(label);
            records.push(v);
        }
    }
    let summary = vec![format!(
        "{} subjects: {hard} hard checks ({failed} failed), {informational} informational, {skipped} not applicable",
        corpus.len()
    )];
    Ok(Outcome { exit_code: i32::from(failed > 0), records, summary })
}

fn cmd_ensemble(cfg: &RunConfig) -> Result<Outcome> {
    let m = cfg.members.unwrap_or(32);
    let n = cfg.vars.unwrap_or(12);
    let d = cfg.degree.unwrap_or(2);
    let result = ensemble_experiment(m, n, d, cfg.seed, &cfg.constants)?;
    let ok = result.min_off_diagonal.is_none_or(|v| v > 0.0);
    let summary = vec![
        format!("{m} members, n = {n}, d = {d}, {} pairs", result.pairs.len()),
        format!(
            "min off-diagonal distance {} (C^-d = {:.6})",
            result.min_off_diagonal.map_or("n/a".into(), |v| format!("{v:.6}")),
            result.distance_bound
        ),
        format!(
            "small-bias fraction {:.3}, large-variance fraction {:.3}",
            result.small_bias_fraction, result.large_variance_fraction
        ),
    ];
    Ok(Outcome { exit_code: i32::from(!ok), records: vec![record("ensemble", &result)], summary })
}

/// Runs the configured command.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    cfg.constants.validate()?;
    if let Some(eps) = cfg.epsilon {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(invalid(format!("epsilon = {eps} outside (0, 1)")));
        }
    }
    match cfg.command {
        CommandName::Decompose => cmd_decompose(cfg),
        CommandName::Approximate => cmd_approximate(cfg),
        CommandName::Verify => cmd_verify(cfg),
        CommandName::Ensemble => cmd_ensemble(cfg),
    }
}

/// The header line; its `timestamp` is the only time-dependent field.
pub fn header_record(cfg: &RunConfig) -> Value {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    json!({
        "record": "header",
        "tool": "ptfkit",
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp": secs,
        "config": cfg,
    })
}

/// Renders an outcome in the configured format.
pub fn render(cfg: &RunConfig, outcome: &Outcome) -> String {
    let mut text = String::new();
    match cfg.format {
        OutputFormat::Records => {
            text.push_str(&header_record(cfg).to_string());
            text.push('\n');
            for r in &outcome.records {
                text.push_str(&r.to_string());
                text.push('\n');
            }
            text.push_str(&json!({ "record": "exit", "code": outcome.exit_code }).to_string());
            text.push('\n');
        }
        OutputFormat::Human => {
            text.push_str(&format!("ptfkit {:?}\n", cfg.command).to_lowercase());
            text.push_str(&format!("  constants: {}\n", serde_json::to_string(&cfg.constants).expect("constants serialize")));
            for line in &outcome.summary {
                text.push_str("  ");
                text.push_str(line);
                text.push('\n');
            }
            text.push_str(&format!("exit {}\n", outcome.exit_code));
        }
    }
    text
}

fn write_output(cfg: &RunConfig, text: &str) -> Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(Error::from),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Parses `args`, runs, writes output, and returns the process exit code:
/// 0 success, 1 the command's criterion failed, 2 error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = args.into_config().and_then(|cfg| {
        let outcome = execute(&cfg)?;
        write_output(&cfg, &render(&cfg, &outcome))?;
        Ok(outcome.exit_code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("ptfkit: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(command: CommandName) -> RunConfig {
        RunConfig::new(command)
    }

    #[test]
    fn generator_spec_parsing() {
        assert_eq!(InputSource::parse_generator("12:2:7").unwrap(), InputSource::Generate { n: 12, d: 2, seed: 7 });
        assert!(InputSource::parse_generator("12:2").is_err());
        assert!(InputSource::parse_generator("a:2:1").is_err());
    }

    #[test]
    fn const_overrides_are_applied_and_recorded() {
        let args = Args::try_parse_from(["ptfkit", "decompose", "--generate", "4:1:0", "--const", "c0=4", "--const", "theta=2"]).unwrap();
        let c = args.into_config().unwrap();
        assert_eq!(c.constants.c, 16.0);
        assert_eq!(c.constants.theta, 2.0);
        assert_eq!(c.constant_overrides.len(), 2);
        let bad = Args::try_parse_from(["ptfkit", "verify", "--const", "nope"]).unwrap();
        assert!(bad.into_config().is_err());
    }

    #[test]
    fn decompose_regular_majority() {
        let mut c = cfg(CommandName::Decompose);
        c.input = Some(InputSource::Generate { n: 3, d: 1, seed: 0 });
        let maj = MultilinearPolynomial::from_terms(3, 1, &[(&[0], 1.0), (&[1], 1.0), (&[2], 1.0)]).unwrap();
        let dir = std::env::temp_dir().join(format!("ptfkit-cli-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("maj3.json");
        std::fs::write(&path, maj.to_json()).unwrap();
        c.input = Some(InputSource::File { path });
        c.tau = Some(0.5);
        let out = execute(&c).unwrap();
        assert_eq!(out.exit_code, 0);
        assert_eq!(out.records[1]["regular_leaves"], json!(1));
    }

    #[test]
    fn zero_budget_fails_decompose() {
        let mut c = cfg(CommandName::Decompose);
        c.input = Some(InputSource::Generate { n: 6, d: 2, seed: 1 });
        c.constants.depth_budget_override = Some(0);
        c.tau = Some(0.05);
        let out = execute(&c).unwrap();
        assert_eq!(out.records[1]["bad_mass"], json!(1.0));
        assert_eq!(out.exit_code, 1);
    }

    #[test]
    fn approximate_rejects_bad_epsilon() {
        let mut c = cfg(CommandName::Approximate);
        c.input = Some(InputSource::Generate { n: 3, d: 1, seed: 0 });
        c.epsilon = Some(1.5);
        assert!(matches!(execute(&c), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn verify_single_check_and_unknown_check() {
        let mut c = cfg(CommandName::Verify);
        c.members = Some(1);
        c.vars = Some(6);
        c.checks = vec!["hypercontractivity".into()];
        let out = execute(&c).unwrap();
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.exit_code, 0);
        c.checks = vec!["nope".into()];
        assert!(execute(&c).is_err());
    }

    #[test]
    fn verify_marks_parseval_not_applicable_on_real_tables() {
        let mut c = cfg(CommandName::Verify);
        c.input = Some(InputSource::Generate { n: 5, d: 2, seed: 3 });
        c.checks = vec!["parseval".into()];
        let out = execute(&c).unwrap();
        assert_eq!(out.records[0]["status"], json!("not_applicable"));
        assert_eq!(out.exit_code, 0);
    }

    #[test]
    fn ensemble_edge_cases() {
        let mut c = cfg(CommandName::Ensemble);
        c.members = Some(1);
        c.vars = Some(6);
        assert_eq!(execute(&c).unwrap().exit_code, 0);
        c.vars = Some(31);
        assert!(matches!(execute(&c), Err(Error::Resource(_))));
    }

    #[test]
    fn records_are_deterministic_apart_from_the_header() {
        let mut c = cfg(CommandName::Approximate);
        c.input = Some(InputSource::Generate { n: 8, d: 2, seed: 5 });
        let a = render(&c, &execute(&c).unwrap());
        let b = render(&c, &execute(&c).unwrap());
        let body = |s: &str| s.lines().skip(1).map(String::from).collect::<Vec<_>>();
        assert_eq!(body(&a), body(&b));
        let header: Value = serde_json::from_str(a.lines().next().unwrap()).unwrap();
        assert_eq!(header["config"]["constants"]["theta"], json!(20.0));
    }
}
