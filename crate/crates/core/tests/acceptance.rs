//! Acceptance criteria. Runs as a plain binary so every criterion prints a
//! PASS/FAIL line; exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use lorenz_qubit_core::diagnostics::{
    default_lobe_threshold, find_fixed_points, largest_lyapunov, lobe_statistics,
    conservation_monitor, LyapunovSettings, DEFAULT_MAX_ITER,
};
use lorenz_qubit_core::generators::jacobian;
use lorenz_qubit_core::integrate::evolve_density;
use lorenz_qubit_core::io::{InitialCondition, ModelKind, RunConfig};
use lorenz_qubit_core::{
    bloch_from_density, density_from_bloch, ensemble, gp_generator, integrate_bloch,
    integrate_density, lor63_generator, step_rk4, Axis, BlochVector, GPParams, IntegratorConfig,
    Lor63Params,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn lor63() -> lorenz_qubit_core::TorsionGenerator {
    lor63_generator(&Lor63Params::default())
}

fn trace_fixing() -> Outcome {
    let gen = lor63();
    let x0 = density_from_bloch(BlochVector::new(0.12, 0.12, 0.3));
    let cfg = IntegratorConfig::rk4(1e-3, 100.0);
    let (mut trace_err, mut herm_err, mut steps) = (0.0f64, 0.0f64, 0usize);
    let end = evolve_density(&gen, &x0, &cfg, |_, x| {
        trace_err = trace_err.max((x.trace().re - 1.0).abs().max(x.trace().im.abs()));
        herm_err = herm_err.max(x.hermiticity_error());
        steps += 1;
    })
    .expect("density run");
    outcome(
        steps == 100_000 && end.t == 100.0 && trace_err <= 1e-12 && herm_err <= 1e-12,
        format!("{steps} steps, max |tr X - 1| = {trace_err:e}, max hermiticity error = {herm_err:e}"),
    )
}

fn dual_representation() -> Outcome {
    let gen = lor63();
    let plus = density_from_bloch(BlochVector::new(1.0, 0.0, 0.0));
    let cfg = IntegratorConfig::rk4(1e-3, 50.0);
    let d = integrate_density(&gen, &plus, &cfg).expect("density run");
    let b = integrate_bloch(&gen, bloch_from_density(&plus).unwrap(), &cfg).expect("bloch run");
    let same_grid = b.samples.len() == d.samples.len()
        && b.samples.iter().zip(&d.samples).all(|(x, y)| x.t == y.t);
    let diff = b
        .samples
        .iter()
        .zip(&d.samples)
        .map(|(x, y)| x.r.max_abs_diff(y.r))
        .fold(0.0, f64::max);
    outcome(
        same_grid && diff <= 1e-9,
        format!("{} samples on identical grids, max componentwise difference {diff:e}", b.samples.len()),
    )
}

fn containment() -> Outcome {
    let cfg = RunConfig {
        initial: InitialCondition::Ensemble { count: 100, radius: 0.9, rng_seed: 3 },
        integrator: IntegratorConfig::rk45(1e-9, 200.0),
        ..Default::default()
    };
    let trajs = ensemble(&cfg.generator().unwrap(), &cfg.seeds(), &cfg.integrator).expect("ensemble");
    let max = trajs
        .iter()
        .filter_map(|t| t.max_norm_after(5.0))
        .fold(0.0, f64::max);
    let inside = max < 1.0;
    let in_band = (max - 0.73).abs() <= 0.05;
    outcome(
        inside && in_band,
        format!("max |r| over t in [5, 200] = {max:.6}; inside ball: {inside}; within 0.73 +/- 0.05: {in_band}"),
    )
}

fn conjugacy() -> Outcome {
    let p = Lor63Params::default();
    let scaled = lor63_generator(&p);
    let unit = lor63_generator(&Lor63Params { g: 1.0, ..p });
    let mut r = BlochVector::new(0.12, 0.12, 0.3);
    let mut s = r * p.g;
    let dt = 1e-3;
    let mut worst = 0.0f64;
    let mut first_exceeded = None;
    for k in 1..=20_000 {
        r = step_rk4(&scaled, r, dt).unwrap();
        s = step_rk4(&unit, s, dt).unwrap();
        let rel = (r * p.g - s).norm() / s.norm();
        worst = worst.max(rel);
        if rel > 1e-9 && first_exceeded.is_none() {
            first_exceeded = Some(k as f64 * dt);
        }
    }
    let note = first_exceeded.map_or(String::new(), |t| format!(", first above 1e-9 at t = {t:.3}"));
    outcome(
        worst <= 1e-9,
        format!("max |80 r - s| / |s| over t <= 20 (rk4, dt = {dt}) = {worst:e}{note}"),
    )
}

fn fixed_points() -> Outcome {
    let p = Lor63Params::default();
    let gen = lor63_generator(&p);
    let ticks = [-0.5, -0.2, 0.0, 0.2, 0.5];
    let mut guesses = vec![BlochVector::ORIGIN];
    for &x in &ticks {
        for &y in &ticks {
            for &z in &[0.0, 0.2, 0.5] {
                guesses.push(BlochVector::new(x, y, z));
            }
        }
    }
    let found = find_fixed_points(&gen, &guesses, 1e-12, DEFAULT_MAX_ITER);
    let c = 0.10606602;
    let expected = [
        BlochVector::new(-c, -c, 0.3375),
        BlochVector::ORIGIN,
        BlochVector::new(c, c, 0.3375),
    ];
    let matches = found.len() == 3
        && found.iter().zip(&expected).all(|(f, e)| f.r_star.max_abs_diff(*e) < 5e-9);
    let worst = found.iter().map(|f| f.residual).fold(0.0, f64::max);
    outcome(
        matches && worst <= 1e-10,
        format!(
            "{} roots {:?}, max residual {worst:e}",
            found.len(),
            found.iter().map(|f| f.r_star.to_array()).collect::<Vec<_>>()
        ),
    )
}

/// Two nearby standard-Lorenz trajectories, separation renormalized every
/// `tau`; plain RK4 on arrays.
fn two_trajectory_benettin(transient: f64, total: f64, tau: f64, dt: f64) -> f64 {
    fn f(s: [f64; 3]) -> [f64; 3] {
        let (sigma, rho, beta) = (10.0, 28.0, 8.0 / 3.0);
        [sigma * (s[1] - s[0]), s[0] * (rho - s[2]) - s[1], s[0] * s[1] - beta * s[2]]
    }
    fn axpy(a: f64, x: [f64; 3], y: [f64; 3]) -> [f64; 3] {
        [y[0] + a * x[0], y[1] + a * x[1], y[2] + a * x[2]]
    }
    fn rk4(s: [f64; 3], h: f64) -> [f64; 3] {
        let k1 = f(s);
        let k2 = f(axpy(h / 2.0, k1, s));
        let k3 = f(axpy(h / 2.0, k2, s));
        let k4 = f(axpy(h, k3, s));
        let mut out = s;
        for i in 0..3 {
            out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out
    }
    let mut a = [9.6, 9.6, 24.0];
    for _ in 0..(transient / dt).round() as usize {
        a = rk4(a, dt);
    }
    let d0 = 1e-8;
    let mut b = axpy(d0, [1.0, 0.0, 0.0], a);
    let per = (tau / dt).round() as usize;
    let rounds = (total / tau).round() as usize;
    let mut sum = 0.0;
    for _ in 0..rounds {
        for _ in 0..per {
            a = rk4(a, dt);
            b = rk4(b, dt);
        }
        let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        sum += (n / d0).ln();
        b = axpy(d0 / n, d, a);
    }
    sum / (rounds as f64 * tau)
}

fn chaos_certificate() -> Outcome {
    let settings = LyapunovSettings { transient: 20.0, total_time: 2000.0, renorm_interval: 0.5 };
    let res = largest_lyapunov(
        &lor63(),
        BlochVector::new(0.12, 0.12, 0.3),
        &settings,
        &IntegratorConfig::rk45(1e-9, 1.0),
    )
    .expect("lyapunov");
    let oracle = two_trajectory_benettin(20.0, 2000.0, 0.5, 2e-3);
    let lambda = res.lambda_max;
    outcome(
        (lambda - 0.906).abs() <= 0.05,
        format!("lambda_max = {lambda:.4} (independent g = 1 two-trajectory estimate {oracle:.4})"),
    )
}

fn divergence() -> Outcome {
    let lor = lor63();
    let traj = integrate_bloch(&lor, BlochVector::new(0.12, 0.12, 0.3), &IntegratorConfig::rk45(1e-9, 120.0))
        .unwrap();
    let post: Vec<_> = traj.after(20.0).collect();
    let stride = post.len() / 100;
    let points: Vec<_> = post.iter().step_by(stride).take(100).map(|s| s.r).collect();
    let mean_lor = points.iter().map(|&r| jacobian(&lor, r).trace()).sum::<f64>() / points.len() as f64;

    let gp = gp_generator(&GPParams::default());
    let gtraj = integrate_bloch(&gp, BlochVector::new(0.1, 0.2, 0.1), &IntegratorConfig::rk45(1e-9, 20.0)).unwrap();
    let gstride = (gtraj.samples.len() / 100).max(1);
    let gpoints: Vec<_> = gtraj.samples.iter().step_by(gstride).take(100).map(|s| s.r).collect();
    let mean_gp = gpoints.iter().map(|&r| jacobian(&gp, r).trace()).sum::<f64>() / gpoints.len() as f64;

    let exact = -41.0 / 3.0;
    outcome(
        points.len() == 100 && gpoints.len() == 100 && (mean_lor - exact).abs() <= 1e-12 && mean_gp.abs() <= 1e-12,
        format!("Lor63 mean tr J = {mean_lor} (exact {exact}), GP mean tr J = {mean_gp}"),
    )
}

fn gp_conservation() -> Outcome {
    let cfg = RunConfig {
        model: ModelKind::Gp,
        initial: InitialCondition::Ensemble { count: 20, radius: 0.9, rng_seed: 11 },
        integrator: IntegratorConfig::rk45(1e-9, 100.0),
        ..Default::default()
    };
    let trajs = ensemble(&cfg.generator().unwrap(), &cfg.seeds(), &cfg.integrator).expect("ensemble");
    let (mut dc, mut dh) = (0.0f64, 0.0f64);
    for t in &trajs {
        let d = conservation_monitor(t, &cfg.gp);
        dc = dc.max(d[0].max_drift);
        dh = dh.max(d[1].max_drift);
    }
    outcome(
        trajs.len() == 20 && dc < 1e-6 && dh < 1e-6,
        format!("over {} seeds: max |dC| = {dc:e}, max |dH| = {dh:e}", trajs.len()),
    )
}

fn lobe_reversals() -> Outcome {
    let traj = integrate_bloch(&lor63(), BlochVector::new(0.12, 0.12, 0.3), &IntegratorConfig::rk45(1e-9, 500.0))
        .unwrap();
    let stats = lobe_statistics(&traj, Axis::X, default_lobe_threshold(&Lor63Params::default()));
    let cv = stats.coefficient_of_variation().unwrap_or(0.0);
    outcome(
        stats.switch_count > 50 && cv > 0.2,
        format!("{} switches, residence-time CV = {cv:.3}", stats.switch_count),
    )
}

fn rk4_order() -> Outcome {
    let gen = lor63();
    let r0 = BlochVector::new(0.12, 0.12, 0.3);
    let run = |dt: f64| {
        let t = integrate_bloch(&gen, r0, &IntegratorConfig::rk4(dt, 1.0)).unwrap();
        t.last().r
    };
    let reference = run(1e-5);
    let e1 = (run(0.01) - reference).norm();
    let e2 = (run(0.005) - reference).norm();
    let ratio = e1 / e2;
    outcome(
        (14.0..=18.0).contains(&ratio),
        format!("error(dt = 0.01) = {e1:e}, error(dt = 0.005) = {e2:e}, ratio = {ratio:.3}"),
    )
}

fn figure_artifacts() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut notes = Vec::new();
    let mut pass = true;
    for recipe in ["fig1", "fig2"] {
        let out = dir.path().join(format!("{recipe}.svg"));
        let code = lorenz_qubit_core::cli::main_with_args([
            "lorenz-qubit",
            "plot",
            "--recipe",
            recipe,
            "--out",
            out.to_str().unwrap(),
        ]);
        let Ok(text) = std::fs::read_to_string(&out) else {
            notes.push(format!("{recipe}: exit {code}, no SVG written"));
            pass = false;
            continue;
        };
        let manifest = lorenz_qubit_core::cli::sidecar_path(&out).exists();
        let doc = match roxmltree::Document::parse(&text) {
            Ok(doc) => doc,
            Err(e) => {
                notes.push(format!("{recipe}: malformed SVG ({e})"));
                pass = false;
                continue;
            }
        };
        let circles: Vec<_> = doc.descendants().filter(|n| n.has_tag_name("circle")).collect();
        let attr = |n: &roxmltree::Node, k: &str| n.attribute(k).unwrap().parse::<f64>().unwrap();
        let silhouette = circles.iter().find(|n| n.attribute("fill") == Some("none")).unwrap();
        let (cx, cy, unit) = (attr(silhouette, "cx"), attr(silhouette, "cy"), attr(silhouette, "r"));
        let points: Vec<_> = circles.iter().filter(|n| n.attribute("r") == Some("1.2")).collect();
        let max_r = points
            .iter()
            .map(|n| (attr(n, "cx") - cx).hypot(attr(n, "cy") - cy) / unit)
            .fold(0.0, f64::max);
        let ok = code == 0 && manifest && !points.is_empty() && (recipe != "fig1" || max_r < 1.0);
        pass &= ok;
        notes.push(format!(
            "{recipe}: exit {code}, well-formed, {} points, max plotted radius {max_r:.4} unit circles",
            points.len()
        ));
    }
    outcome(pass, notes.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("trace fixing", trace_fixing),
        ("dual representation", dual_representation),
        ("attractor containment", containment),
        ("conjugacy", conjugacy),
        ("fixed points", fixed_points),
        ("chaos certificate", chaos_certificate),
        ("divergence", divergence),
        ("GP conservation", gp_conservation),
        ("aperiodic lobe reversals", lobe_reversals),
        ("integrator order", rk4_order),
        ("figure artifacts", figure_artifacts),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} [{verdict}] {name}: {} ({:.1} s)",
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
