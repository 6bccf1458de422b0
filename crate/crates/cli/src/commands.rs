//! Subcommand bodies. Each returns the complete CSV text so callers decide
//! where it goes.

use std::fmt::Write as _;

use sqr_core::constraints::{run_verification, VerifyOptions};
use sqr_core::overhead::{bound_escape_prob, exact_escape_prob, montecarlo_escape_with, required_overhead};
use sqr_core::rng::{stream, Subsystem};
use sqr_core::security::figure2_curve;
use sqr_core::simulation::{run_simulation, SimulationConfig};

use crate::error::CliError;
use crate::format::{opt, sig9};

pub struct Figure2Params {
    pub gamma: f64,
    pub mu: f64,
    pub loss_min: f64,
    pub loss_max: f64,
    pub steps: usize,
}

pub fn figure2(p: &Figure2Params) -> Result<String, CliError> {
    for (key, v) in [("gamma", p.gamma), ("mu", p.mu)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(CliError::Config {
                key: key.into(),
                message: format!("must lie in [0, 1], got {v}"),
            });
        }
    }
    if !(p.loss_min >= 0.0) || !(p.loss_max >= p.loss_min) || !p.loss_max.is_finite() {
        return Err(CliError::Usage(format!(
            "invalid loss range [{}, {}] dB",
            p.loss_min, p.loss_max
        )));
    }
    if p.steps < 2 {
        return Err(CliError::Usage(format!("--steps must be at least 2, got {}", p.steps)));
    }
    let curve = figure2_curve(p.gamma, p.mu, p.loss_min, p.loss_max, p.steps)?;
    let mut out = String::from("loss_db,T,D,e,h_e,g\n");
    for pt in curve {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            sig9(pt.loss_db),
            sig9(pt.transmissivity),
            sig9(pt.disturbance),
            sig9(pt.message_error),
            sig9(pt.entropy),
            sig9(pt.leaked)
        )
        .unwrap();
    }
    Ok(out)
}

pub fn simulate(config: &SimulationConfig) -> Result<String, CliError> {
    let report = run_simulation(config)?;
    let mut out = String::from(
        "pair,type2_trials,type2_errors,D2_hat,type3_trials,type3_errors,D3_hat,eve_learned_fraction,detected\n",
    );
    let (mut slots, mut learned) = (0u64, 0u64);
    for p in &report.pairs {
        let est = p.estimate();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            p.pair,
            p.stats.type2_trials,
            p.stats.type2_errors,
            opt(est.d2),
            p.stats.type3_trials,
            p.stats.type3_errors,
            opt(est.d3),
            opt(p.learned_fraction()),
            p.detected
        )
        .unwrap();
        slots += p.type1_slots;
        learned += p.type1_learned;
    }
    let s = &report.summary;
    let pooled = sqr_core::protocol::estimate_disturbance(&s.stats);
    writeln!(
        out,
        "total,{},{},{},{},{},{},{},{}",
        s.stats.type2_trials,
        s.stats.type2_errors,
        opt(pooled.d2),
        s.stats.type3_trials,
        s.stats.type3_errors,
        opt(pooled.d3),
        opt((slots > 0).then(|| learned as f64 / slots as f64)),
        s.detected
    )
    .unwrap();
    out.push_str("\ndetected,inferred_eta,leaked_fraction_bound,eve_learned_fraction\n");
    writeln!(
        out,
        "{},{},{},{}",
        s.detected,
        opt(s.inferred_eta),
        opt(s.leaked_fraction_bound),
        opt(s.eve_learned_fraction)
    )
    .unwrap();
    Ok(out)
}

pub struct OverheadParams {
    pub seed: u64,
    pub k: u64,
    pub h3: u64,
    pub etas: Vec<f64>,
    pub trials: u64,
    pub epsilon: f64,
    pub eta_max: f64,
}

pub fn overhead(p: &OverheadParams) -> Result<String, CliError> {
    if p.k == 0 || p.h3 > p.k {
        return Err(CliError::Usage(format!("need 1 <= K and H3 <= K, got K = {}, H3 = {}", p.k, p.h3)));
    }
    if let Some(eta) = p.etas.iter().find(|e| !(0.0..=1.0).contains(*e)) {
        return Err(CliError::Usage(format!("--eta values must lie in [0, 1], got {eta}")));
    }
    let mut rng = stream(p.seed, Subsystem::MonteCarlo);
    let mut out = String::from("K,H3,m,exact,bound_S8,mc_estimate,mc_stderr\n");
    for &eta in &p.etas {
        let m = ((p.k as f64) * eta).round() as u64;
        let exact = exact_escape_prob(p.k, p.h3, m)?;
        let bound = bound_escape_prob(p.k, p.h3, eta).ok();
        let (mc, se) = if p.trials > 0 {
            let est = montecarlo_escape_with(p.k, p.h3, m, p.trials, &mut rng)?.finish();
            (Some(est.estimate), Some(est.std_error))
        } else {
            (None, None)
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.k,
            p.h3,
            m,
            sig9(exact),
            opt(bound),
            opt(mc),
            opt(se)
        )
        .unwrap();
    }

    let sizing = required_overhead(p.k, p.epsilon, p.eta_max)?;
    out.push_str("\nepsilon,eta_max,alpha,beta,g1,H_sum,H_paper_constant\n");
    writeln!(
        out,
        "{},{},{},{},{},{},{}",
        sig9(sizing.epsilon),
        sig9(sizing.eta_max),
        sizing.alpha,
        sizing.beta,
        sizing.g1,
        sizing.h_sum,
        sizing.h_printed
    )
    .unwrap();
    out.push_str("\nconstant_term_component_sum,constant_term_printed,beta_quarter_detection\n");
    writeln!(
        out,
        "{},{},{}",
        sizing.g0_component_sum, sizing.g0_printed, sizing.beta_quarter
    )
    .unwrap();
    Ok(out)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Returns the report text and whether every check passed.
pub fn verify(opts: &VerifyOptions) -> Result<(String, bool), CliError> {
    if opts.dim < 2 {
        return Err(CliError::Usage(format!("--d must be at least 2, got {}", opts.dim)));
    }
    if opts.samples == 0 || opts.scatter_samples == 0 {
        return Err(CliError::Usage("--samples and --scatter-samples must be at least 1".into()));
    }
    let report = run_verification(opts)?;
    let mut out = String::from("invariant,status,detail\n");
    for c in &report.checks {
        writeln!(
            out,
            "{},{},{}",
            c.name,
            if c.passed { "PASS" } else { "FAIL" },
            csv_field(&c.detail)
        )
        .unwrap();
    }
    out.push_str("\ndisturbance,indistinguishability\n");
    for s in &report.scatter {
        writeln!(out, "{},{}", sig9(s.disturbance), sig9(s.indistinguishability)).unwrap();
    }
    Ok((out, report.all_passed()))
}
