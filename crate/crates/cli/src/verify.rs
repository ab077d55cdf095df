use clap::Args;
use ellipse_contact::oracle::{random_configuration, stratified_configurations, Stratum};
use ellipse_contact::{closest_approach, oracle_distance, OracleSettings};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use crate::CliError;

#[derive(Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Largest accepted relative error
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// One of near-parallel, near-perpendicular, near-circular, uniform,
    /// circles; all but circles in rotation when omitted
    #[arg(long)]
    stratum: Option<String>,
    #[arg(long, default_value_t = 20.0)]
    max_aspect: f64,
    /// Oracle bisection tolerance; tighter by default for circles
    #[arg(long)]
    bisection_tol: Option<f64>,
    #[arg(long)]
    json: bool,
}

struct Trial {
    stratum: Stratum,
    cfg: ellipse_contact::PairConfiguration,
    analytic: Result<f64, String>,
    oracle: Result<f64, String>,
}

impl Trial {
    fn error(&self) -> Option<f64> {
        match (&self.analytic, &self.oracle) {
            (Ok(a), Ok(o)) => Some((a - o).abs() / o),
            _ => None,
        }
    }
}

pub fn run(args: &VerifyArgs) -> Result<(), CliError> {
    if args.tol.is_nan() || args.tol < 0.0 {
        return Err(CliError::Input("--tol must be non-negative".into()));
    }
    let fixed = match args.stratum.as_deref() {
        None => None,
        Some(s) => Some(Stratum::parse(s).ok_or_else(|| CliError::Input(format!("unknown stratum {s:?}")))?),
    };
    let mut settings = OracleSettings::default();
    if fixed == Some(Stratum::Circles) {
        settings.bisection_tol = 1e-14;
    }
    if let Some(t) = args.bisection_tol {
        settings.bisection_tol = t;
    }
    settings.validate()?;

    let cases = match fixed {
        Some(st) => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            (0..args.trials)
                .map(|_| (st, random_configuration(&mut rng, st, args.max_aspect)))
                .collect()
        }
        None => stratified_configurations(args.trials, args.seed, args.max_aspect),
    };
    let trials: Vec<Trial> = cases
        .into_par_iter()
        .map(|(stratum, cfg)| Trial {
            stratum,
            cfg,
            analytic: closest_approach(&cfg).map(|s| s.d).map_err(|e| e.to_string()),
            oracle: oracle_distance(&cfg, &settings).map_err(|e| e.to_string()),
        })
        .collect();

    let errors: Vec<f64> = trials.iter().filter_map(Trial::error).collect();
    let max = errors.iter().copied().fold(0.0, f64::max);
    let mean = if errors.is_empty() {
        0.0
    } else {
        errors.iter().sum::<f64>() / errors.len() as f64
    };
    let failures: Vec<(usize, &Trial)> = trials
        .iter()
        .enumerate()
        .filter(|(_, t)| t.error().is_none_or(|e| e > args.tol))
        .collect();

    if args.json {
        let list: Vec<_> = failures
            .iter()
            .map(|(i, t)| {
                json!({
                    "trial": i,
                    "stratum": t.stratum.name(),
                    "a1": t.cfg.shape1.a(), "b1": t.cfg.shape1.b(),
                    "a2": t.cfg.shape2.a(), "b2": t.cfg.shape2.b(),
                    "theta1": t.cfg.k1.angle().to_degrees(),
                    "theta2": t.cfg.k2.angle().to_degrees(),
                    "theta_d": t.cfg.dhat.angle().to_degrees(),
                    "analytic": t.analytic.as_ref().ok(),
                    "oracle": t.oracle.as_ref().ok(),
                    "error": t.error(),
                })
            })
            .collect();
        println!(
            "{}",
            json!({"trials": trials.len(), "max_rel_err": max, "mean_rel_err": mean,
                   "tol": args.tol, "failures": list})
        );
    } else {
        println!("trials       {}", trials.len());
        println!("max rel err  {max:e}");
        println!("mean rel err {mean:e}");
        println!("failures     {}", failures.len());
        for (i, t) in &failures {
            println!(
                "  #{i} {} a1={} b1={} a2={} b2={} theta1={} theta2={} theta_d={} analytic={:?} oracle={:?}",
                t.stratum.name(),
                t.cfg.shape1.a(),
                t.cfg.shape1.b(),
                t.cfg.shape2.a(),
                t.cfg.shape2.b(),
                t.cfg.k1.angle().to_degrees(),
                t.cfg.k2.angle().to_degrees(),
                t.cfg.dhat.angle().to_degrees(),
                t.analytic,
                t.oracle
            );
        }
    }
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!(
            "{} of {} trials beyond tolerance {:e}",
            failures.len(),
            trials.len(),
            args.tol
        )))
    }
}
