//! Acceptance suite: one PASS/FAIL line per criterion, each at its stated
//! tolerance. Runs as a plain binary so the lines reach stdout; exits
//! nonzero when any criterion fails.

use num_complex::Complex64;
use rfh_core::distributions::{compute_hf_profile, hf_by_quadrature, MomentumDistribution, RadialProfile};
use rfh_core::dynamics::*;
use rfh_core::fields::*;
use rfh_core::quadrature::QuadConfig;
use rfh_core::response::*;
use rfh_core::special::gamma;
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: usize, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let pass = out.pass && in_time;
    let budget = limit.map_or(String::new(), |l| format!(" budget {:.0}s", l.as_secs_f64()));
    println!("criterion {id}: {} | {} | runtime {:.1}s{budget}", if pass { "PASS" } else { "FAIL" }, out.detail, elapsed.as_secs_f64());
    pass
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn fermi_ball_closed_form(r: f64) -> f64 {
    (2.0 / PI).sqrt() * r.powi(-2) * (r.sin() / r - r.cos())
}

fn closed_form_transform() -> Outcome {
    let dist = MomentumDistribution::fermi_zero(1.0, 3).unwrap();
    let cfg = QuadConfig::tight();
    let mut worst: f64 = 0.0;
    let mut at = 0.0;
    for j in 0..200 {
        let r = 0.1 * 500f64.powf(j as f64 / 199.0);
        let q = hf_by_quadrature(&dist, r, &cfg).unwrap().value;
        let e = rel(q, fermi_ball_closed_form(r));
        if e > worst {
            worst = e;
            at = r;
        }
    }
    Outcome { pass: worst <= 1e-8, detail: format!("max relative error {worst:.2e} (at r = {at:.3}) over 200 log-spaced r in [0.1, 50], tolerance 1e-8") }
}

fn decay_law() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for d in [2usize, 3, 4] {
        let dist = MomentumDistribution::fermi_zero(1.0, d).unwrap();
        let p = compute_hf_profile(&dist, 200.0, 8000, &QuadConfig::default()).unwrap();
        let need = (d as f64 + 1.0) / 2.0 - 0.1;
        let got = p.tail().exponent;
        pass &= got >= need;
        parts.push(format!("d={d}: exponent {got:.3} (need ≥ {need:.2})"));
    }
    Outcome { pass, detail: parts.join(", ") }
}

struct Sups {
    residual: f64,
    corrected: f64,
    modulus: f64,
    real: f64,
    points: usize,
    flagged: usize,
}

/// Level ℓ: n_k = 10·2^ℓ log-spaced k ∈ [0.05, 2], n_τ = 20·2^ℓ + 1 uniform
/// τ ∈ [0, 4], plus per k the points τ = k(2 ± ε) for ε ∈ {0.3, 0.1, ...}
/// down to 10^{-(ℓ+1)}.
fn symbol_sups(engine: &ResponseEngine, level: u32) -> Sups {
    let nk = 10 * 2usize.pow(level);
    let nt = 20 * 2usize.pow(level) + 1;
    let ks: Vec<f64> = (0..nk).map(|i| 0.05 * 40f64.powf(i as f64 / (nk - 1) as f64)).collect();
    let mut eps = Vec::new();
    let mut e = 0.3;
    while e >= 10f64.powi(-(level as i32 + 1)) * 0.999 {
        eps.push(e);
        e /= if eps.len() % 2 == 1 { 3.0 } else { 10.0 / 3.0 };
    }
    let mut s = Sups { residual: 0.0, corrected: 0.0, modulus: 0.0, real: f64::NEG_INFINITY, points: 0, flagged: 0 };
    for &k in &ks {
        let mut taus: Vec<f64> = (0..nt).map(|j| 4.0 * j as f64 / (nt - 1) as f64).collect();
        for &e in &eps {
            for t in [k * (2.0 - e), k * (2.0 + e)] {
                if (0.0..=4.0).contains(&t) {
                    taus.push(t);
                }
            }
        }
        for tau in taus {
            let m = engine.symbol(tau, k).unwrap();
            let lt = log_term_3d(tau, k).unwrap();
            s.residual = s.residual.max((m.value - lt).norm());
            s.corrected = s.corrected.max((m.value + lt).norm());
            s.modulus = s.modulus.max(m.value.norm());
            s.real = s.real.max(m.value.re);
            s.points += 1;
            s.flagged += m.flagged as usize;
        }
    }
    s
}

fn log_decomposition() -> Outcome {
    let dist = MomentumDistribution::fermi_zero(1.0, 3).unwrap();
    let engine = ResponseEngine::for_distribution(&dist, SymbolConfig::default(), 4.0 / 0.1 + 1.0).unwrap();
    let levels: Vec<Sups> = (0..3).map(|l| symbol_sups(&engine, l)).collect();
    for (l, s) in levels.iter().enumerate() {
        println!(
            "    level {l}: {} points ({} flagged) sup|m_f - log| {:.5} sup|m_f + log| {:.5} sup|m_f| {:.5} sup Re m_f {:.5}",
            s.points, s.flagged, s.residual, s.corrected, s.modulus, s.real
        );
    }
    let (a, b) = (&levels[1], &levels[2]);
    let residual_change = rel(b.residual, a.residual);
    let modulus_growth = b.modulus / a.modulus - 1.0;
    let real_change = rel(b.real, a.real);
    let ok_a = residual_change < 0.05;
    let ok_b = modulus_growth > 0.5;
    let ok_c = b.real.is_finite() && real_change < 0.05;
    Outcome {
        pass: ok_a && ok_b && ok_c,
        detail: format!(
            "last refinement: sup|m_f - log_term| change {:.2}% (< 5%: {ok_a}); sup|m_f| growth {:.1}% (> 50%: {ok_b}); sup Re m_f {:.4} change {:.2}% (< 5%: {ok_c}); sign-corrected sup|m_f + log_term| change {:.2}%",
            100.0 * residual_change,
            100.0 * modulus_growth,
            b.real,
            100.0 * real_change,
            100.0 * rel(b.corrected, a.corrected)
        ),
    }
}

fn a_theta_checks() -> Outcome {
    let g = RadialProfile::from_fn(|r| (-r * r).exp(), 8.0, 4000).unwrap();
    let got = a_theta(&g, 0.25).unwrap();
    let want = (PI / 2.0).powf(0.25) * gamma(0.625);
    let gauss_err = rel(got, want);
    let dist = MomentumDistribution::fermi_zero(1.0, 3).unwrap();
    let coarse = a_theta(&compute_hf_profile(&dist, 100.0, 4000, &QuadConfig::default()).unwrap(), 0.25).unwrap();
    let fine = a_theta(&compute_hf_profile(&dist, 200.0, 8000, &QuadConfig::default()).unwrap(), 0.25).unwrap();
    let change = rel(fine, coarse);
    Outcome {
        pass: gauss_err <= 1e-6 && fine.is_finite() && change <= 0.01,
        detail: format!("Gaussian: {got:.12} vs {want:.12} (rel {gauss_err:.1e}, tol 1e-6); Fermi ball: A_1/4 {coarse:.6} -> {fine:.6} under refinement (change {:.3}%, tol 1%)", 100.0 * change),
    }
}

fn l_paths() -> Outcome {
    // Boltzmann T = 0.1, μ = 0: its Gaussian H_f keeps periodic images
    // negligible on the box, which the lattice mode sum requires.
    let grid = SpectralGrid::new(3, 8.0 * PI, 16).unwrap();
    let dist = MomentumDistribution::boltzmann(0.1, 0.0, 3).unwrap();
    let w = Potential::point_mass(1.0).unwrap();
    let bg = Background::new(grid.clone(), build_mode_set(&dist, &grid, 1.25).unwrap(), &w).unwrap();
    let window = 4.0;
    let mut errors = Vec::new();
    for m in [16usize, 32, 64] {
        let dt = window / m as f64;
        let mut u: Vec<Vec<f64>> = (0..=m)
            .map(|n| {
                let t = n as f64 * dt;
                (0..grid.len()).map(|i| (0.5 * grid.position(i)[0]).cos() * t.cos()).collect()
            })
            .collect();
        raised_cosine_taper(&mut u);
        let direct = apply_l_direct(&u, dt, &bg, &w, DuhamelRule::Trapezoid).unwrap();
        let len = (64.0 / dt).round() as usize;
        let symbol = lattice_symbol(&dist, dt, len, vec![0.5], SymbolConfig::default()).unwrap();
        let multiplier = apply_l_multiplier(&u, dt, &grid, &symbol, &w, &MultiplierOptions { padded_len: Some(len), taper: false }).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for (a, b) in direct.iter().flatten().zip(multiplier.iter().flatten()) {
            num += (a - b) * (a - b);
            den += b * b;
        }
        errors.push((num / den).sqrt());
    }
    let decreasing = errors.windows(2).all(|p| p[1] < p[0]);
    let finest = *errors.last().unwrap();
    Outcome {
        pass: decreasing && finest <= 1e-3,
        detail: format!("relative error at 16/32/64 steps: {:.3e} / {:.3e} / {:.3e} (finest ≤ 1e-3, decreasing: {decreasing})", errors[0], errors[1], errors[2]),
    }
}

struct FermiSetup {
    grid: SpectralGrid,
    dist: MomentumDistribution,
    w: Potential,
    background: Background,
}

fn fermi_setup() -> FermiSetup {
    let grid = SpectralGrid::new(3, 8.0 * PI, 16).unwrap();
    let dist = MomentumDistribution::fermi_zero(1.0, 3).unwrap();
    let w = Potential::point_mass(-0.05 / (2.0 * PI).powf(1.5)).unwrap();
    let background = Background::new(grid.clone(), build_mode_set(&dist, &grid, 1.0).unwrap(), &w).unwrap();
    FermiSetup { grid, dist, w, background }
}

/// Two wave packets on independent directions.
fn packets(grid: &SpectralGrid, amplitude: f64) -> Vec<Vec<Complex64>> {
    let l = grid.length();
    [([0.5 * l; 3], [0.5, 0.0, 0.0]), ([0.25 * l, 0.4 * l, 0.55 * l], [0.0, -0.5, 0.25])]
        .iter()
        .map(|(c, p)| PerturbationShape::WavePacket { center: *c, width: 2.0, momentum: *p, amplitude }.sample(grid).unwrap())
        .collect()
}

fn unitarity() -> Outcome {
    let s = fermi_setup();
    let cfg = EvolutionConfig { dt: 0.05, t_end: 10.0, sample_every: 20, ..Default::default() };
    let perturbed = RandomFieldState::new(s.background.clone(), 0.0, None, packets(&s.grid, 0.1)).unwrap();
    let run = run_ivp(perturbed, &s.w, &cfg).unwrap();
    let drift = run.mass_drift.iter().fold(0.0f64, |m, d| m.max(*d));
    let steady = run_ivp(RandomFieldState::steady(s.background.clone(), 0.0), &s.w, &cfg).unwrap();
    let sup = steady.path.sup_density();
    let modes = s.background.mode_count();
    Outcome {
        pass: drift <= 1e-9 && sup <= 1e-12 && run.status == RunStatus::Completed,
        detail: format!("{modes} modes + 2 packets, t ∈ [0, 10]: max per-mode mass drift {drift:.2e} (≤ 1e-9); Z₀ = 0: sup|ρ| {sup:.2e} (≤ 1e-12)"),
    }
}

struct ContractionRun {
    amplitude: f64,
    ratio: f64,
    report: FixedPointReport,
}

fn contraction_runs() -> Vec<ContractionRun> {
    let s = fermi_setup();
    let cfg = FixedPointConfig {
        dt: 0.25,
        steps: 40,
        multiplier: MultiplierOptions { padded_len: Some(128), taper: false },
        scatter_every: 8,
        max_iter: 20,
        ..Default::default()
    };
    let symbol = lattice_symbol(&s.dist, cfg.dt, 128, lattice_shells(&s.grid), SymbolConfig::default()).unwrap();
    let gap = symbol_gap(&ResponseSymbol { flagged: vec![false; symbol.values.len()], ..symbol.clone() }, &s.w, cfg.gap_margin).unwrap();
    println!("    symbol: {} entries, {} above the error tolerance, gap inf|1 - ŵ m_f| = {:.4}", symbol.values.len(), symbol.flagged.iter().filter(|f| **f).count(), gap.value);
    let ctx = PhiContext::new(s.background, s.w, Arc::new(symbol), cfg).unwrap();
    [0.05, 0.1, 0.2]
        .iter()
        .map(|&amplitude| {
            let z0 = InitialPerturbation::independent(packets(&s.grid, amplitude));
            let a = apply_phi(&ctx.zero_path(), &z0, &ctx).unwrap().rho;
            let b: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|x| 0.5 * x).collect()).collect();
            let fa = apply_phi(&a, &z0, &ctx).unwrap().rho;
            let fb = apply_phi(&b, &z0, &ctx).unwrap().rho;
            let diff = |p: &[Vec<f64>], q: &[Vec<f64>]| -> Vec<Vec<f64>> { p.iter().zip(q).map(|(x, y)| x.iter().zip(y).map(|(u, v)| u - v).collect()).collect() };
            let ratio = ctx.norm(&diff(&fa, &fb)) / ctx.norm(&diff(&a, &b));
            let report = solve_fixed_point(&z0, &ctx).unwrap();
            println!(
                "    amplitude {amplitude}: Lipschitz ratio {ratio:.3e}; {:?} after {} iterations, residuals {:?}",
                report.status,
                report.residuals.len(),
                report.residuals.iter().map(|r| format!("{r:.2e}")).collect::<Vec<_>>()
            );
            ContractionRun { amplitude, ratio, report }
        })
        .collect()
}

fn contraction(runs: &[ContractionRun]) -> Outcome {
    let small = &runs[0];
    let geometric = small.report.ratios.iter().all(|q| *q < 1.0);
    let converged = small.report.status == FixedPointStatus::Converged && small.report.residuals.len() <= 20;
    let largest_ok = runs.iter().filter(|r| r.ratio <= 0.5 && r.report.status == FixedPointStatus::Converged).map(|r| r.amplitude).fold(0.0, f64::max);
    Outcome {
        pass: small.ratio <= 0.5 && geometric && converged,
        detail: format!(
            "amplitude {}: ‖Φ[ρ₁] - Φ[ρ₂]‖/‖ρ₁ - ρ₂‖ = {:.3e} (≤ 0.5), converged in {} iterations with ratios < 1: {geometric}; largest contracting amplitude tested {largest_ok}",
            small.amplitude,
            small.ratio,
            small.report.residuals.len()
        ),
    }
}

fn scattering(runs: &[ContractionRun]) -> Outcome {
    let diag = runs[0].report.scatter.as_ref().expect("scattering samples recorded");
    let windows = [0.0, 2.0, 4.0, 6.0, 8.0];
    let tails: Vec<f64> = windows.iter().map(|t| diag.tail_sup(*t).unwrap()).collect();
    let decreasing = tails.windows(2).all(|p| p[1] < p[0]);
    Outcome {
        pass: decreasing && windows.len() >= 3,
        detail: format!(
            "sup of ‖W(t_i) - W(t_j)‖ in L²_ω H^1/4 over min(t_i, t_j) ≥ T for T = 0, 2, 4, 6, 8: {}",
            tails.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    }
}

fn splitting_order() -> Outcome {
    let grid = SpectralGrid::new(1, 8.0 * PI, 64).unwrap();
    let t_end = 2.0;
    let potential = |t: f64| -> Vec<f64> { (0..64).map(|i| 2.0 * grid.position(i)[0].cos() * (1.0 + 0.5 * (3.0 * t).sin())).collect() };
    let initial: Vec<Complex64> = (0..64)
        .map(|i| {
            let x = grid.position(i)[0] - 4.0 * PI;
            Complex64::from_polar((-x * x / 8.0).exp(), x)
        })
        .collect();
    let solve = |dt: f64| -> Vec<Complex64> {
        let prop = FreePropagator::new(&grid, 0.0, dt, false).unwrap();
        let steps = (t_end / dt).round() as usize;
        let mut u = initial.clone();
        for n in 0..steps {
            sv_step(&mut u, &potential(n as f64 * dt), &potential((n + 1) as f64 * dt), &prop).unwrap();
        }
        u
    };
    let dts = [0.08, 0.04, 0.02, 0.01];
    let reference = solve(dts[3] / 8.0);
    let errors: Vec<f64> = dts
        .iter()
        .map(|&dt| {
            let u = solve(dt);
            grid.l2_norm(&u.iter().zip(&reference).map(|(a, b)| a - b).collect::<Vec<_>>())
        })
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = dts.iter().zip(&errors).map(|(d, e)| (d.ln(), e.ln())).unzip();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    Outcome {
        pass: (1.8..=2.2).contains(&slope),
        detail: format!("global errors {} at dt = 0.08..0.01; fitted order {slope:.3} (in [1.8, 2.2])", errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(", ")),
    }
}

fn main() {
    let min = |m: u64| Some(Duration::from_secs(60 * m));
    let mut all = true;
    all &= report(1, Some(Duration::from_secs(10)), closed_form_transform);
    all &= report(2, Some(Duration::from_secs(30)), decay_law);
    all &= report(3, min(10), log_decomposition);
    all &= report(4, None, a_theta_checks);
    all &= report(5, min(5), l_paths);
    all &= report(6, min(2), unitarity);
    let mut runs = Vec::new();
    all &= report(7, min(15), || {
        runs = contraction_runs();
        contraction(&runs)
    });
    all &= report(8, None, || scattering(&runs));
    all &= report(9, min(1), splitting_order);
    println!("acceptance: {}", if all { "all criteria PASS" } else { "at least one criterion FAILED" });
    if !all {
        std::process::exit(1);
    }
}
