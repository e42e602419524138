//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use ldl_core::finite_eps::{delta_lemma_check, truncated_smeared, SmearedEvaluator};
use ldl_core::partitions::{classify, enumerate_pair_diagrams, enumerate_set_partitions, surviving_diagram};
use ldl_core::spectral::{free_moment, limit_truncated_coefficient, limit_truncated_smeared, make_model};
use ldl_core::statistics::{
    cumulants_from_moments, full_from_truncated, independence_probe, moments_from_cumulants, poisson_cumulants,
    poisson_moments, truncated_from_full,
};
use ldl_core::wn_symbolic::{evaluate_symbolic, vacuum_expectation, ScalarMode, VacuumSymbol};
use ldl_core::{
    Complex64, CorrelationFamily, CumulantTable, DensityProfile, EnergyGrid, FrequencyIndex, NumberSymbol, PairDiagram,
    ShellAmplitude, SpectralModel, TestFunction,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn gaussian_shell(name: &str, grid: &EnergyGrid, center: f64, width: f64, phase: f64) -> ShellAmplitude {
    ShellAmplitude::from_fn(name, grid, |e| {
        Complex64::from_polar((-(e - center).powi(2) / (2.0 * width * width)).exp(), phase * e)
    })
    .unwrap()
}

/// Flat unit density on [0, 4]; `f` centered at 1 with width 0.5, `g` a
/// narrower shell with an energy-dependent phase.
fn reference_model(bins: usize) -> SpectralModel {
    let grid = EnergyGrid::new(0.0, 4.0, bins).unwrap();
    let f = gaussian_shell("f", &grid, 1.0, 0.5, 0.0);
    let g = gaussian_shell("g", &grid, 1.3, 0.4, 0.4);
    make_model(grid, DensityProfile::flat(1.0, bins).unwrap(), [f, g]).unwrap()
}

fn random_model(rng: &mut ChaCha8Rng, bins: usize, names: &[&str]) -> SpectralModel {
    let grid = EnergyGrid::new(0.0, 2.0, bins).unwrap();
    let vectors: Vec<_> = names
        .iter()
        .map(|n| {
            let (c, w, p, amp) = (
                rng.gen_range(0.5..1.5),
                rng.gen_range(0.15..0.4),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0.5..1.5),
            );
            let v = gaussian_shell(n, &grid, c, w, p);
            ShellAmplitude::new(*n, v.values().iter().map(|x| x * amp).collect()).unwrap()
        })
        .collect();
    let density = (0..bins).map(|_| rng.gen_range(0.2..1.5)).collect();
    make_model(grid, DensityProfile::new(density).unwrap(), vectors).unwrap()
}

fn random_phi(rng: &mut ChaCha8Rng) -> TestFunction {
    TestFunction::gaussian(rng.gen_range(0.5..1.5), rng.gen_range(-0.5..0.5), rng.gen_range(0.5..1.5)).unwrap()
}

fn random_symbols(rng: &mut ChaCha8Rng, names: &[&str], n: usize) -> Vec<NumberSymbol> {
    (0..n)
        .map(|_| {
            let f = names[rng.gen_range(0..names.len())];
            let g = names[rng.gen_range(0..names.len())];
            NumberSymbol::new(f, g, 0, random_phi(rng))
        })
        .collect()
}

fn list(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", items.join(", "))
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn within(limit: Duration, start: Instant) -> Result<(), String> {
    let t = start.elapsed();
    if t <= limit {
        Ok(())
    } else {
        Err(format!("took {t:.2?}, budget {limit:?}"))
    }
}

fn check(ok: bool, msg: String) -> Outcome {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c01_one_point_exact() -> Outcome {
    let start = Instant::now();
    let m = reference_model(256);
    let phi = TestFunction::gaussian(0.7, 0.2, 0.8).unwrap();
    let s = NumberSymbol::new("f", "g", 0, phi.clone());
    let expected = m.state_expectation(&m.rank_one("f", "g").unwrap()).unwrap() * phi.integral();
    let mut worst = 0.0f64;
    for eps in [0.2, 0.1, 0.05] {
        let v = SmearedEvaluator::new(&m, &[s.clone()], eps).unwrap().correlation().unwrap();
        worst = worst.max((v - expected).norm());
    }
    within(Duration::from_secs(1), start)?;
    check(worst <= 1e-12, format!("max |W - int phi Tr(nT)| = {worst:.2e}"))
}

fn c02_two_point_convergence() -> Outcome {
    let start = Instant::now();
    let m = reference_model(256);
    let s = NumberSymbol::new("f", "f", 0, TestFunction::unit_gaussian(0.0, 1.0).unwrap());
    let syms = [s.clone(), s];
    let limit = limit_truncated_smeared(&m, &syms).unwrap();
    let errs: Vec<f64> = [0.2, 0.1, 0.05]
        .iter()
        .map(|&eps| (truncated_smeared(&m, &syms, eps).unwrap() - limit).norm() / limit.norm())
        .collect();
    within(Duration::from_secs(10), start)?;
    let ratio = errs[2] / errs[0];
    check(
        strictly_decreasing(&errs) && ratio <= 0.5,
        format!("rel errs {}, err(0.05)/err(0.2) = {ratio:.3}", list(&errs)),
    )
}

fn c03_three_point_surviving() -> Outcome {
    let start = Instant::now();
    let m = reference_model(128);
    let phi = TestFunction::unit_gaussian(0.0, 1.0).unwrap();
    let syms = [
        NumberSymbol::new("f", "g", 0, phi.clone()),
        NumberSymbol::new("g", "f", 0, phi.shifted(0.3)),
        NumberSymbol::new("f", "f", 0, phi.shifted(-0.2)),
    ];
    let surviving = surviving_diagram(3).unwrap();
    let other = PairDiagram::new(vec![1, 2, 0]).unwrap();
    let mut ratios = Vec::new();
    let mut others = Vec::new();
    for eps in [0.2, 0.1, 0.05] {
        let ev = SmearedEvaluator::new(&m, &syms, eps).unwrap();
        let s = ev.pairing_term(&surviving).unwrap().value.norm();
        let o = ev.pairing_term(&other).unwrap().value.norm();
        ratios.push(o / s);
        others.push(o);
    }
    within(Duration::from_secs(60), start)?;
    check(
        ratios[2] <= 0.1 && strictly_decreasing(&others),
        format!("|other|/|surviving| = {}, |other| = {}", list(&ratios), list(&others)),
    )
}

fn c04_frequency_gate() -> Outcome {
    let m = reference_model(256);
    let phi = TestFunction::unit_gaussian(0.0, 1.0).unwrap();
    let syms = [NumberSymbol::new("f", "f", 4, phi.clone()), NumberSymbol::new("f", "f", 0, phi)];
    let kernels: Vec<_> = syms.iter().map(|s| s.kernel(&m).unwrap()).collect();
    let coeff = limit_truncated_coefficient(&m, &kernels, &[FrequencyIndex(4), FrequencyIndex(0)]).unwrap();
    let smeared = limit_truncated_smeared(&m, &syms).unwrap();
    let values: Vec<f64> = [0.2, 0.1, 0.05, 0.025]
        .iter()
        .map(|&eps| truncated_smeared(&m, &syms, eps).unwrap().norm())
        .collect();
    let zero = Complex64::new(0.0, 0.0);
    check(
        coeff.value == zero && smeared == zero && strictly_decreasing(&values),
        format!("limit = {}, |W^T| = {}", coeff.value, list(&values)),
    )
}

fn c05_free_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let names = ["a", "b", "c"];
    let mut worst = 0.0f64;
    for trial in 0..20 {
        let m = random_model(&mut rng, 96, &names);
        let syms = random_symbols(&mut rng, &names, 2 + trial % 2);
        let lhs = limit_truncated_smeared(&m, &syms).unwrap();
        let rhs = free_moment(&m, &syms).unwrap();
        worst = worst.max((lhs - rhs).norm());
    }
    check(worst <= 1e-12, format!("max |limit - free moment| = {worst:.2e} over 20 configurations"))
}

fn c06_poisson_cumulants() -> Outcome {
    let mut worst = 0.0f64;
    let mut gate = true;
    for lambda in [0.5, 1.0, 2.0] {
        let grid = EnergyGrid::new(0.0, 2.0 * lambda, 64).unwrap();
        let k = poisson_cumulants(lambda, 6, grid, FrequencyIndex(0)).unwrap();
        worst = worst.max(k.iter().map(|x| (x - lambda).abs()).fold(0.0, f64::max));
        gate &= poisson_cumulants(lambda, 6, grid, FrequencyIndex(3)).unwrap().iter().all(|&x| x == 0.0);
    }
    check(worst <= 1e-12 && gate, format!("max |kappa_l - lambda| = {worst:.2e}, omega != 0 zeros: {gate}"))
}

/// `sum_k S(n, k) lambda^k` with `S` from the triangle recurrence.
fn touchard_oracle(n: usize, lambda: f64) -> f64 {
    let mut s = vec![vec![0.0f64; n + 1]; n + 1];
    s[0][0] = 1.0;
    for i in 1..=n {
        for k in 1..=i {
            s[i][k] = k as f64 * s[i - 1][k] + s[i - 1][k - 1];
        }
    }
    (1..=n).map(|k| s[n][k] * lambda.powi(k as i32)).sum()
}

fn c07_poisson_moments() -> Outcome {
    let grid = EnergyGrid::new(0.0, 2.0, 64).unwrap();
    let kappa = poisson_cumulants(1.0, 6, grid, FrequencyIndex(0)).unwrap();
    let table = CumulantTable::new(CorrelationFamily::from_fn(6, |s| Complex64::new(kappa[s.len() - 1], 0.0)).unwrap());
    let moments = moments_from_cumulants(&table);
    let limit: Vec<f64> = (1..=6).map(|n| moments.get(&(0..n).collect::<Vec<_>>()).unwrap().re).collect();
    let bell: Vec<f64> = (1..=6).map(|n| enumerate_set_partitions(n).unwrap().len() as f64).collect();
    let bell_ok = bell == [1.0, 2.0, 5.0, 15.0, 52.0, 203.0]
        && limit.iter().zip(&bell).all(|(a, b)| (a - b).abs() <= 1e-12 * b);
    let mut worst = 0.0f64;
    for lambda in [0.3, 0.5, 2.0, 3.7] {
        let m = poisson_moments(lambda, 6).unwrap();
        for (n, v) in m.iter().enumerate() {
            let t = touchard_oracle(n + 1, lambda);
            worst = worst.max((v - t).abs() / t.abs());
        }
    }
    check(
        bell_ok && worst <= 1e-12,
        format!("lambda=1 moments {limit:?}, max rel dev from Touchard {worst:.2e}"),
    )
}

fn c08_truncation_is_cyclic() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let names = ["a", "b"];
    let mut worst = 0.0f64;
    for n in 2..=4 {
        for _ in 0..2 {
            let m = random_model(&mut rng, 40, &names);
            let syms = random_symbols(&mut rng, &names, n);
            let ev = SmearedEvaluator::new(&m, &syms, 0.1).unwrap();
            let cyclic = ev.truncated().unwrap();
            let recursive = ev.truncated_by_recursion().unwrap();
            worst = worst.max((cyclic - recursive).norm() / cyclic.norm());
        }
    }
    check(worst <= 1e-9, format!("max rel |recursive - cyclic| = {worst:.2e}"))
}

fn c09_diagram_census() -> Outcome {
    let mut counts = Vec::new();
    let mut factorial = 1usize;
    let mut ok = true;
    for n in 1..=6 {
        if n > 1 {
            factorial *= n - 1;
        }
        let c = enumerate_pair_diagrams(n).unwrap().iter().filter(|d| classify(d).irreducible).count();
        ok &= c == factorial;
        counts.push(c);
    }
    let names = |n: usize| -> Vec<String> {
        enumerate_pair_diagrams(n)
            .unwrap()
            .into_iter()
            .filter(|d| classify(d).irreducible)
            .map(|d| d.to_string())
            .collect()
    };
    let two = names(2);
    let three = names(3);
    ok &= two == ["[1->2 2->1]"];
    ok &= three == ["[1->2 2->3 3->1]", "[1->3 2->1 3->2]"];
    ok &= surviving_diagram(3).unwrap().to_string() == "[1->3 2->1 3->2]";
    check(ok, format!("irreducible counts {counts:?}; n=2 {two:?}; n=3 {three:?}"))
}

/// Two sectors with disjoint energy supports, [0, 2) and [2, 4].
fn orthogonal_sector_model() -> SpectralModel {
    let grid = EnergyGrid::new(0.0, 4.0, 128).unwrap();
    let sector = |name: &str, c: f64, w: f64, p: f64, lo: f64, hi: f64| {
        let v = gaussian_shell(name, &grid, c, w, p);
        let vals = grid
            .centers()
            .zip(v.values())
            .map(|(e, x)| if (lo..hi).contains(&e) { *x } else { Complex64::new(0.0, 0.0) })
            .collect();
        ShellAmplitude::new(name, vals).unwrap()
    };
    let density = (0..128).map(|a| 0.5 + 0.5 * (a as f64 / 30.0).sin().abs()).collect();
    make_model(
        grid,
        DensityProfile::new(density).unwrap(),
        [
            sector("f0", 1.0, 0.4, 0.5, 0.0, 2.0),
            sector("g0", 1.2, 0.3, -0.3, 0.0, 2.0),
            sector("f1", 3.0, 0.4, 0.8, 2.0, 4.0),
            sector("g1", 2.8, 0.5, 0.0, 2.0, 4.0),
        ],
    )
    .unwrap()
}

fn c10_white_noise_engine() -> Outcome {
    let m = orthogonal_sector_model();
    let chains: [&[(&str, &str)]; 3] = [
        &[("f0", "g0"), ("g0", "f0"), ("f0", "f0"), ("g0", "g0")],
        &[("f1", "g1"), ("g1", "g1"), ("g1", "f1"), ("f1", "f1")],
        &[("f0", "g1"), ("f1", "g0"), ("g0", "f0"), ("g1", "f1")],
    ];
    let phis = [
        TestFunction::unit_gaussian(0.0, 0.6).unwrap(),
        TestFunction::unit_gaussian(0.2, 0.8).unwrap(),
        TestFunction::unit_gaussian(-0.3, 0.5).unwrap(),
        TestFunction::unit_gaussian(0.1, 0.7).unwrap(),
    ];
    let (mut conn_err, mut full_err) = (0.0f64, 0.0f64);
    for chain in chains {
        for k in 2..=4 {
            let vs: Vec<_> = chain[..k].iter().map(|(f, g)| VacuumSymbol::new(*f, *g)).collect();
            let kernels: Vec<_> = vs.iter().map(|s| m.rank_one(&s.f, &s.g).unwrap()).collect();
            let limit = limit_truncated_coefficient(&m, &kernels, &vec![FrequencyIndex(0); k]).unwrap().value;
            let bare = evaluate_symbolic(&vacuum_expectation(&vs, ScalarMode::Bare, None).unwrap(), &m).unwrap();
            conn_err = conn_err.max((bare.connected() - limit).norm() / limit.norm().max(1.0));

            let aug = vacuum_expectation(&vs, ScalarMode::Augmented, None).unwrap();
            let symbolic = evaluate_symbolic(&aug, &m).unwrap().smeared(&phis[..k]).unwrap();
            let syms: Vec<_> = (0..k)
                .map(|l| NumberSymbol::new(&vs[l].f, &vs[l].g, 0, phis[l].clone()))
                .collect();
            let trunc = CorrelationFamily::try_from_fn(k, |sub| {
                limit_truncated_smeared(&m, &sub.iter().map(|&i| syms[i].clone()).collect::<Vec<_>>())
            })
            .unwrap();
            let full = *full_from_truncated(&trunc).full();
            full_err = full_err.max((symbolic - full).norm() / full.norm().max(1.0));
        }
    }
    check(
        conn_err <= 1e-10 && full_err <= 1e-9,
        format!("connected vs limit {conn_err:.2e}, augmented full vs reconstruction {full_err:.2e}"),
    )
}

fn c11_delta_lemma() -> Outcome {
    let start = Instant::now();
    let f = TestFunction::unit_gaussian(0.0, 1.0).unwrap();
    let phi = TestFunction::unit_gaussian(0.0, 1.0).unwrap();
    let report = delta_lemma_check(&f, &phi, &[0.4, 0.2, 0.1, 0.05, 0.02, 0.01]).unwrap();
    let errs = report.rel_errors();
    within(Duration::from_secs(5), start)?;
    let last = *errs.last().unwrap();
    check(
        last <= 0.05 && strictly_decreasing(&errs),
        format!("target {:.6}, rel errs {}", report.rows[0].limit.re, list(&errs)),
    )
}

fn random_family(rng: &mut ChaCha8Rng, n: usize) -> CorrelationFamily<Complex64> {
    CorrelationFamily::from_fn(n, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unwrap()
}

fn max_diff(a: &CorrelationFamily<Complex64>, b: &CorrelationFamily<Complex64>) -> f64 {
    a.entries().zip(b.entries()).map(|((_, x), (_, y))| (x - y).norm()).fold(0.0, f64::max)
}

fn c12_transform_roundtrips() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0.0f64;
    for n in 1..=6 {
        for _ in 0..5 {
            let fam = random_family(&mut rng, n);
            worst = worst.max(max_diff(&full_from_truncated(&truncated_from_full(&fam)), &fam));
            worst = worst.max(max_diff(&truncated_from_full(&full_from_truncated(&fam)), &fam));
            let table = cumulants_from_moments(&fam);
            worst = worst.max(max_diff(&moments_from_cumulants(&table), &fam));
        }
    }
    check(worst <= 1e-12, format!("max roundtrip deviation {worst:.2e}"))
}

fn c13_independence() -> Outcome {
    let m = reference_model(256);
    let a = TestFunction::unit_gaussian(0.0, 0.1).unwrap();
    let first = vec![NumberSymbol::new("f", "f", 0, a.clone())];
    let separated = vec![NumberSymbol::new("g", "g", 0, a.shifted(2.0))];
    let colocated = vec![NumberSymbol::new("g", "g", 0, a)];
    let eps = [0.2, 0.1, 0.05];
    let mixed = independence_probe(&m, &[first.clone(), separated], &eps).unwrap();
    let control = independence_probe(&m, &[first, colocated], &eps).unwrap();
    let (x, c) = (mixed.rows[2].value.norm(), control.rows[2].value.norm());
    check(
        x <= 1e-3 * c && !mixed.has_warnings(),
        format!("eps=0.05: separated {x:.3e}, co-located {c:.3e}, ratio {:.2e}", x / c),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("1 n=1 exactness", c01_one_point_exact),
        ("2 n=2 convergence", c02_two_point_convergence),
        ("3 n=3 surviving diagram", c03_three_point_surviving),
        ("4 frequency gate", c04_frequency_gate),
        ("5 free-algebra equality", c05_free_algebra),
        ("6 Poisson cumulants", c06_poisson_cumulants),
        ("7 Poisson moments", c07_poisson_moments),
        ("8 truncation = cyclic diagrams", c08_truncation_is_cyclic),
        ("9 diagram census", c09_diagram_census),
        ("10 white-noise engine", c10_white_noise_engine),
        ("11 delta lemma", c11_delta_lemma),
        ("12 transform roundtrips", c12_transform_roundtrips),
        ("13 asymptotic independence", c13_independence),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let t = start.elapsed();
        match outcome {
            Ok(msg) => println!("PASS [{name}] {msg} ({t:.2?})"),
            Err(msg) => {
                failed += 1;
                println!("FAIL [{name}] {msg} ({t:.2?})");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
