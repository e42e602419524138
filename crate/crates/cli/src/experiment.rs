use std::f64::consts::TAU;

use anyhow::{bail, ensure, Context, Result};
use ldl_core::finite_eps::{convergence_sweep, delta_lemma_check};
use ldl_core::partitions::{bell, classify, enumerate_pair_diagrams, enumerate_set_partitions, surviving_diagram, touchard};
use ldl_core::spectral::{free_moment, limit_truncated_coefficient, limit_truncated_smeared, make_model};
use ldl_core::statistics::{
    full_from_truncated, independence_probe, moments_from_cumulants, poisson_cumulants, poisson_model, POISSON_VECTOR,
};
use ldl_core::wn_symbolic::{evaluate_symbolic, vacuum_expectation, ReorderTrace, ScalarMode, VacuumSymbol};
use ldl_core::{
    Complex64, ConvergenceReport, CorrelationFamily, CumulantTable, DensityProfile, EnergyGrid, FrequencyIndex,
    NumberSymbol, ShellAmplitude, SpectralModel, TestFunction,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{Experiment, ExperimentConfig};
use crate::output::{num, re_im, Check, Report};

const FREE_CHECK_TOL: f64 = 1e-12;
const POISSON_TOL: f64 = 1e-12;
const INDEPENDENCE_RATIO: f64 = 1e-3;
const WN_CONNECTED_TOL: f64 = 1e-10;
const WN_FULL_TOL: f64 = 1e-9;
const DELTA_LEMMA_TOL: f64 = 0.05;

pub fn run(experiment: &Experiment, config: &ExperimentConfig) -> Result<Report> {
    config.validate()?;
    match experiment {
        Experiment::Limit => limit(config),
        Experiment::Sweep => sweep(config),
        Experiment::FreeCheck { trials } => free_check(config, *trials),
        Experiment::Poisson {
            lambda,
            orders,
            omega_index,
            grid_bins,
            e_max,
        } => poisson(*lambda, *orders, *omega_index, *grid_bins, e_max.unwrap_or(2.0 * lambda)),
        Experiment::Independence { separation } => independence(config, *separation),
        Experiment::WnExpect {
            order,
            show_steps,
            connected_only,
        } => wn_expect(config, *order, *show_steps, *connected_only),
        Experiment::Diagrams { n } => diagrams(*n),
        Experiment::Bell { n } => bell_table(*n),
        Experiment::DeltaLemma { sigma_x, sigma_t } => delta_lemma(config, *sigma_x, *sigma_t),
    }
}

fn require_symbols(config: &ExperimentConfig, min: usize) -> Result<&[NumberSymbol]> {
    let s = &config.symbols;
    ensure!(s.len() >= min, "field `symbols`: need at least {min} symbol(s), got {}", s.len());
    Ok(s)
}

fn limit(config: &ExperimentConfig) -> Result<Report> {
    let model = config.require_model()?;
    let symbols = require_symbols(config, 1)?;
    let kernels = symbols.iter().map(|s| s.kernel(&model)).collect::<Result<Vec<_>, _>>()?;
    let freqs: Vec<_> = symbols.iter().map(|s| s.omega).collect();
    let coeff = limit_truncated_coefficient(&model, &kernels, &freqs).context("limit coefficient")?;
    let smeared = limit_truncated_smeared(&model, symbols).context("smeared limit")?;
    let [cr, ci] = re_im(coeff.value);
    let [sr, si] = re_im(smeared);
    Ok(Report {
        columns: vec!["n", "coefficient_re", "coefficient_im", "delta_order", "smeared_re", "smeared_im"],
        rows: vec![vec![symbols.len().to_string(), cr, ci, coeff.delta_order.to_string(), sr, si]],
        json: json!({
            "n": symbols.len(),
            "coefficient": coeff.value,
            "delta_order": coeff.delta_order,
            "smeared": smeared,
        }),
        check: None,
    })
}

fn convergence_rows(report: &ConvergenceReport) -> Vec<Vec<String>> {
    report
        .rows
        .iter()
        .map(|r| {
            let [vr, vi] = re_im(r.value);
            let [lr, li] = re_im(r.limit);
            vec![num(r.epsilon), r.n.to_string(), vr, vi, lr, li, num(r.abs_err), num(r.rel_err), r.warnings_text()]
        })
        .collect()
}

const CONVERGENCE_COLUMNS: [&str; 9] =
    ["epsilon", "n", "value_re", "value_im", "limit_re", "limit_im", "abs_err", "rel_err", "warnings"];

fn decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn convergence_report(report: ConvergenceReport, check: Check) -> Result<Report> {
    Ok(Report {
        columns: CONVERGENCE_COLUMNS.to_vec(),
        rows: convergence_rows(&report),
        json: serde_json::to_value(&report)?,
        check: Some(check),
    })
}

fn sweep(config: &ExperimentConfig) -> Result<Report> {
    let model = config.require_model()?;
    let symbols = require_symbols(config, 1)?;
    let report = convergence_sweep(&model, symbols, &config.epsilons()).context("sweep")?;
    let errs = report.rel_errors();
    let check = Check::new(
        decreasing(&errs),
        format!("relative errors strictly decreasing over epsilon: {errs:?}"),
    );
    convergence_report(report, check)
}

fn random_model(rng: &mut ChaCha8Rng, names: &[&str]) -> Result<SpectralModel> {
    let grid = EnergyGrid::new(0.0, 2.0, 96)?;
    let vectors = names
        .iter()
        .map(|n| {
            let (c, w, p) = (rng.gen_range(0.5..1.5), rng.gen_range(0.15..0.4), rng.gen_range(-1.0..1.0));
            ShellAmplitude::from_fn(*n, &grid, |e: f64| {
                Complex64::from_polar((-(e - c).powi(2) / (2.0 * w * w)).exp(), p * e)
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let density = (0..grid.bins()).map(|_| rng.gen_range(0.2..1.5)).collect();
    Ok(make_model(grid, DensityProfile::new(density)?, vectors)?)
}

fn random_symbols(rng: &mut ChaCha8Rng, names: &[&str], n: usize) -> Result<Vec<NumberSymbol>> {
    (0..n)
        .map(|_| {
            let f = names[rng.gen_range(0..names.len())];
            let g = names[rng.gen_range(0..names.len())];
            let phi = TestFunction::gaussian(rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5), rng.gen_range(0.5..1.5))?;
            Ok(NumberSymbol::new(f, g, 0, phi))
        })
        .collect()
}

/// Compares the limiting truncated function with the free moment, on the
/// configured symbols or on `trials` random configurations.
fn free_check(config: &ExperimentConfig, trials: usize) -> Result<Report> {
    let cases: Vec<(SpectralModel, Vec<NumberSymbol>)> = if config.symbols.is_empty() {
        ensure!(trials > 0, "free-check needs symbols or a positive trial count");
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let names = ["a", "b", "c"];
        (0..trials)
            .map(|t| Ok((random_model(&mut rng, &names)?, random_symbols(&mut rng, &names, 2 + t % 2)?)))
            .collect::<Result<_>>()?
    } else {
        vec![(config.require_model()?, config.symbols.clone())]
    };
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut worst = 0.0f64;
    for (i, (model, symbols)) in cases.iter().enumerate() {
        let lhs = limit_truncated_smeared(model, symbols).context("limit side")?;
        let rhs = free_moment(model, symbols).context("free moment side")?;
        let diff = (lhs - rhs).norm();
        worst = worst.max(diff);
        let [lr, li] = re_im(lhs);
        let [fr, fi] = re_im(rhs);
        rows.push(vec![i.to_string(), symbols.len().to_string(), lr, li, fr, fi, num(diff)]);
        entries.push(json!({"trial": i, "n": symbols.len(), "limit": lhs, "free_moment": rhs, "abs_diff": diff}));
    }
    Ok(Report {
        columns: vec!["trial", "n", "limit_re", "limit_im", "free_re", "free_im", "abs_diff"],
        rows,
        json: json!({ "rows": entries, "max_abs_diff": worst }),
        check: Some(Check::new(
            worst <= FREE_CHECK_TOL,
            format!("max |limit - free moment| = {worst:e} (tolerance {FREE_CHECK_TOL:e})"),
        )),
    })
}

fn poisson(lambda: f64, orders: usize, omega_index: i64, bins: usize, e_max: f64) -> Result<Report> {
    let grid = EnergyGrid::new(0.0, e_max, bins)?;
    let omega = FrequencyIndex(omega_index);
    let kappa = poisson_cumulants(lambda, orders, grid, omega).context("Poisson cumulants")?;
    let table = CumulantTable::new(CorrelationFamily::from_fn(orders, |s| kappa[s.len() - 1])?);
    let moments = moments_from_cumulants(&table);
    let gated = omega_index != 0;
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut passed = true;
    for l in 1..=orders {
        let k = kappa[l - 1];
        let m = *moments.get(&(0..l).collect::<Vec<_>>()).expect("prefix subset");
        let (ek, em) = if gated { (0.0, 0.0) } else { (lambda, touchard(l, lambda)?) };
        passed &= if gated {
            k == 0.0 && m == 0.0
        } else {
            (k - ek).abs() <= POISSON_TOL && (m - em).abs() <= POISSON_TOL * em.abs().max(1.0)
        };
        rows.push(vec![l.to_string(), num(k), num(m), num(ek), num(em)]);
        entries.push(json!({"order": l, "cumulant": k, "moment": m, "expected_cumulant": ek, "expected_moment": em}));
    }
    let model = poisson_model(lambda, grid)?;
    let support = model.vector(POISSON_VECTOR)?.values().iter().filter(|v| v.norm() > 0.0).count();
    Ok(Report {
        columns: vec!["order", "cumulant", "moment", "expected_cumulant", "expected_moment"],
        rows,
        json: json!({ "lambda": lambda, "omega_index": omega_index, "support_bins": support, "rows": entries }),
        check: Some(Check::new(
            passed,
            if gated {
                format!("omega_index {omega_index}: all cumulants exactly zero")
            } else {
                format!("cumulants equal lambda = {lambda} and moments match Touchard to {POISSON_TOL:e}")
            },
        )),
    })
}

/// Each symbol forms its own group; symbol `i` is shifted by `i * separation`
/// and compared with the unshifted (co-located) configuration.
fn independence(config: &ExperimentConfig, separation: f64) -> Result<Report> {
    let model = config.require_model()?;
    let symbols = require_symbols(config, 2)?;
    let eps = config.epsilons();
    let groups = |shift: f64| -> Vec<Vec<NumberSymbol>> {
        symbols
            .iter()
            .enumerate()
            .map(|(i, s)| vec![s.with_phi(s.phi.shifted(i as f64 * shift))])
            .collect()
    };
    let mixed = independence_probe(&model, &groups(separation), &eps).context("separated probe")?;
    let control = independence_probe(&model, &groups(0.0), &eps).context("co-located probe")?;
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut last_ratio = f64::NAN;
    for (m, c) in mixed.rows.iter().zip(&control.rows) {
        let ratio = m.value.norm() / c.value.norm();
        last_ratio = ratio;
        let [mr, mi] = re_im(m.value);
        let [cr, ci] = re_im(c.value);
        rows.push(vec![num(m.epsilon), mr, mi, cr, ci, num(ratio), m.warnings_text()]);
        entries.push(json!({
            "epsilon": m.epsilon, "separated": m.value, "co_located": c.value, "ratio": ratio, "warnings": m.warnings,
        }));
    }
    Ok(Report {
        columns: vec!["epsilon", "separated_re", "separated_im", "co_located_re", "co_located_im", "ratio", "warnings"],
        rows,
        json: json!({ "separation": separation, "rows": entries }),
        check: Some(Check::new(
            last_ratio <= INDEPENDENCE_RATIO,
            format!("|separated| / |co-located| = {last_ratio:e} at the smallest epsilon (threshold {INDEPENDENCE_RATIO:e})"),
        )),
    })
}

fn wn_expect(config: &ExperimentConfig, order: Option<usize>, show_steps: bool, connected_only: bool) -> Result<Report> {
    let symbols = require_symbols(config, 1)?;
    let k = order.unwrap_or(symbols.len());
    ensure!(
        (1..=symbols.len()).contains(&k),
        "order {k} needs between 1 and {} configured symbols",
        symbols.len()
    );
    let symbols = &symbols[..k];
    let vs: Vec<_> = symbols.iter().map(|s| VacuumSymbol::new(&s.f, &s.g)).collect();
    let mode = if connected_only { ScalarMode::Bare } else { ScalarMode::Augmented };
    let mut trace = ReorderTrace::default();
    let result = vacuum_expectation(&vs, mode, show_steps.then_some(&mut trace)).context("vacuum expectation")?;
    if show_steps {
        for (i, step) in trace.rounds.iter().enumerate() {
            eprintln!("round {i}: {} terms", step.len());
            for t in step.terms() {
                eprintln!("  {t}");
            }
        }
    }
    let model = config.build_model()?;
    let evaluated = model.as_ref().map(|m| evaluate_symbolic(&result, m)).transpose()?;
    let mut rows = Vec::new();
    let mut parts = Vec::new();
    for (partition, expr) in result.by_partition() {
        let value = evaluated.as_ref().and_then(|e| e.get(&partition)).map(|p| p.value);
        let terms: Vec<String> = expr.terms().iter().map(ToString::to_string).collect();
        let [vr, vi] = value.map_or([String::new(), String::new()], re_im);
        rows.push(vec![partition.to_string(), (k - partition.len()).to_string(), terms.join(" "), vr, vi]);
        parts.push(json!({
            "partition": partition.to_string(),
            "delta_order": k - partition.len(),
            "terms": terms,
            "value": value,
        }));
    }
    let mut json = json!({
        "k": k,
        "mode": mode,
        "rewrite_rounds": show_steps.then_some(trace.rounds.len()),
        "partitions": parts,
    });
    let check = match (&model, &evaluated) {
        (Some(m), Some(e)) => {
            let kernels = symbols.iter().map(|s| s.kernel(m)).collect::<Result<Vec<_>, _>>()?;
            let limit = limit_truncated_coefficient(m, &kernels, &vec![FrequencyIndex(0); k])?.value;
            let conn_err = (e.connected() - limit).norm() / limit.norm().max(1.0);
            json["connected"] = json!({"symbolic": e.connected(), "limit": limit, "rel_err": conn_err});
            let mut passed = conn_err <= WN_CONNECTED_TOL;
            let mut summary = format!("connected part vs limit coefficient: {conn_err:e}");
            if mode == ScalarMode::Augmented {
                let symbolic = e.smeared(&symbols.iter().map(|s| s.phi.clone()).collect::<Vec<_>>())?;
                let zero_freq: Vec<_> = symbols.iter().map(|s| NumberSymbol { omega: FrequencyIndex(0), ..s.clone() }).collect();
                let trunc = CorrelationFamily::try_from_fn(k, |sub| {
                    limit_truncated_smeared(m, &sub.iter().map(|&i| zero_freq[i].clone()).collect::<Vec<_>>())
                })?;
                let full = *full_from_truncated(&trunc).full();
                let full_err = (symbolic - full).norm() / full.norm().max(1.0);
                json["full"] = json!({"symbolic": symbolic, "reconstructed": full, "rel_err": full_err});
                passed &= full_err <= WN_FULL_TOL;
                summary.push_str(&format!("; smeared full correlation vs reconstruction: {full_err:e}"));
            }
            Some(Check::new(passed, summary))
        }
        _ => None,
    };
    Ok(Report {
        columns: vec!["partition", "delta_order", "terms", "value_re", "value_im"],
        rows,
        json,
        check,
    })
}

fn diagrams(n: usize) -> Result<Report> {
    let all = enumerate_pair_diagrams(n)?;
    let surviving = surviving_diagram(n)?;
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut irreducible = 0usize;
    for d in &all {
        let c = classify(d);
        irreducible += usize::from(c.irreducible);
        let comps: Vec<String> = c
            .components
            .iter()
            .map(|b| format!("{{{}}}", b.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        let is_surv = *d == surviving;
        rows.push(vec![d.to_string(), c.irreducible.to_string(), d.k().to_string(), comps.join(""), is_surv.to_string()]);
        entries.push(json!({
            "diagram": d.to_string(), "sigma": d.sigma(), "irreducible": c.irreducible, "k": d.k(),
            "components": c.components, "surviving": is_surv,
        }));
    }
    let factorial: usize = (1..n).product();
    Ok(Report {
        columns: vec!["diagram", "irreducible", "k", "components", "surviving"],
        rows,
        json: json!({ "n": n, "irreducible": irreducible, "diagrams": entries }),
        check: Some(Check::new(
            irreducible == factorial,
            format!("{irreducible} irreducible diagrams, (n-1)! = {factorial}"),
        )),
    })
}

/// Enumeration is used as an independent count up to this size.
const MAX_ENUMERATED_BELL: usize = 10;

fn bell_table(n: usize) -> Result<Report> {
    if n == 0 {
        bail!("bell needs n >= 1");
    }
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    let mut passed = true;
    for i in 1..=n {
        let b = bell(i)?;
        let counted = if i <= MAX_ENUMERATED_BELL {
            Some(enumerate_set_partitions(i)?.len() as u128)
        } else {
            None
        };
        passed &= counted.map_or(true, |c| c == b);
        rows.push(vec![i.to_string(), b.to_string(), counted.map_or(String::new(), |c| c.to_string())]);
        entries.push(json!({"n": i, "bell": b.to_string(), "enumerated": counted.map(|c| c.to_string())}));
    }
    Ok(Report {
        columns: vec!["n", "bell", "enumerated"],
        rows,
        json: json!({ "rows": entries }),
        check: Some(Check::new(passed, format!("Bell numbers agree with enumeration up to n = {}", n.min(MAX_ENUMERATED_BELL)))),
    })
}

fn delta_lemma(config: &ExperimentConfig, sigma_x: f64, sigma_t: f64) -> Result<Report> {
    let f = TestFunction::unit_gaussian(0.0, sigma_x)?;
    let phi = TestFunction::unit_gaussian(0.0, sigma_t)?;
    let eps = if config.epsilons.is_empty() {
        vec![0.4, 0.2, 0.1, 0.05, 0.02, 0.01]
    } else {
        config.epsilons.clone()
    };
    let report = delta_lemma_check(&f, &phi, &eps)?;
    let errs = report.rel_errors();
    let last = *errs.last().expect("nonempty epsilons");
    let target = TAU * phi.eval(0.0) * f.eval(0.0);
    let check = Check::new(
        decreasing(&errs) && last <= DELTA_LEMMA_TOL,
        format!("target 2 pi phi(0) f(0) = {target}; final relative error {last:e}, decreasing: {}", decreasing(&errs)),
    );
    convergence_report(report, check)
}
