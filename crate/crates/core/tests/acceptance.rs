use affineflow::exact::{self, static_example};
use affineflow::harness::*;
use affineflow::model1d::*;
use affineflow::nonlinearity::{a_minus, a_plus, affine_a};
use affineflow::time_integration::{euler_step, Stopwatch};
use affineflow::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria expected to fail, with the reason. A listed criterion that
/// passes is reported as a mismatch too, so the list cannot go stale.
const KNOWN_FAILURES: &[(u8, &str)] = &[(
    1,
    "the filtered solve of (a) on N=256 converges (115159 iterations, uncapped) to error 5.688e-5, \
     matching the reference value 5.678e-5 for the same scheme; the 1e-5 bound holds for every other row",
)];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn within_factor(x: f64, reference: f64, factor: f64) -> bool {
    x <= reference * factor && x >= reference / factor
}

fn errors(rows: &[ConvergenceRow], v: SchemeVariant) -> Vec<f64> {
    rows.iter().filter(|r| r.variant == v).map(|r| r.error_linf).collect()
}

fn fmt(xs: &[f64]) -> String {
    xs.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ")
}

const STATIC_NS: [usize; 4] = [32, 64, 128, 256];

/// Iteration cap for the slowest steady solve below (filtered, N = 256).
const QUADRATIC_MAX_ITERS: u64 = 20_000;

fn quadratic() -> Verdict {
    let p = static_example('a').unwrap();
    let opts = SteadyOptions { max_iters: QUADRATIC_MAX_ITERS, ..Default::default() };
    let vs = [SchemeVariant::Standard, SchemeVariant::FilteredRegularized];
    let rows = cmd_convergence(&p, &vs, &STATIC_NS, &opts).unwrap();
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| !(r.status == SolveStatus::Converged && r.error_linf <= 1e-5))
        .map(|r| format!("{} N={} {:.3e} {:?} after {} iterations", r.variant, r.n, r.error_linf, r.status, r.iterations))
        .collect();
    let detail = format!(
        "standard {} | filtered {}{}",
        fmt(&errors(&rows, vs[0])),
        fmt(&errors(&rows, vs[1])),
        if bad.is_empty() { String::new() } else { format!(" | over: {}", bad.join(", ")) }
    );
    verdict(bad.is_empty(), detail)
}

fn standard_c() -> Verdict {
    let reference = [1.129e-2, 4.625e-3, 1.859e-3, 7.426e-4];
    let rows = cmd_convergence(&static_example('c').unwrap(), &[SchemeVariant::Standard], &STATIC_NS, &SteadyOptions::default()).unwrap();
    let errs = errors(&rows, SchemeVariant::Standard);
    let orders: Vec<f64> = rows.iter().filter_map(|r| r.observed_order).collect();
    let pass = rows.iter().all(|r| r.status == SolveStatus::Converged)
        && errs.iter().zip(reference).all(|(&e, r)| within_factor(e, r, 2.0))
        && orders.len() == 3
        && orders.iter().all(|&o| o >= 0.9);
    let orders: Vec<String> = orders.iter().map(|o| format!("{o:.2}")).collect();
    verdict(pass, format!("errors {} orders {}", fmt(&errs), orders.join(" ")))
}

fn instability() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for demo in [InstabilityDemo::Sin1D, InstabilityDemo::StaticD] {
        for run in cmd_instability(demo).unwrap() {
            let ok = if run.expect_divergence {
                run.diverged
            } else {
                !run.diverged && run.report.converged() && run.report.final_residual < 1e-5
            };
            pass &= ok;
            parts.push(format!(
                "{}/{} {} (residual {:.1e}, departure {:.1e})",
                demo.name(),
                run.label,
                if run.diverged { "diverged" } else { "converged" },
                run.report.final_residual,
                run.departure
            ));
        }
    }
    verdict(pass, parts.join("; "))
}

fn filtered_d() -> Verdict {
    let v = SchemeVariant::FilteredRegularized;
    let rows = cmd_convergence(&static_example('d').unwrap(), &[v], &STATIC_NS, &SteadyOptions::default()).unwrap();
    let errs = errors(&rows, v);
    let pass = rows.iter().all(|r| r.status == SolveStatus::Converged)
        && errs.windows(2).all(|w| w[1] < w[0])
        && errs[3] <= 5e-3;
    verdict(pass, format!("errors {}", fmt(&errs)))
}

fn field_1d(r: &mut ChaCha8Rng, n: usize, h: f64) -> GridFn1 {
    let scale = 10f64.powf(r.gen_range(-3.0..3.0));
    let values = (0..n).map(|_| scale * r.gen_range(-1.0..1.0)).collect();
    GridFn::from_values(Grid1D::new(n, h, 0.0).unwrap(), values).unwrap()
}

fn boundary(r: &mut ChaCha8Rng, width: usize) -> BoundaryCondition {
    if r.gen_bool(0.5) {
        BoundaryCondition::NeumannReflect
    } else {
        BoundaryCondition::dirichlet(width, LayerData::Initial).unwrap()
    }
}

fn max_principle() -> Verdict {
    let mut r = rng(5);
    let mut violations = 0;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = r.gen_range(3..64);
        let h = 10f64.powf(r.gen_range(-3.0..0.0));
        let u = field_1d(&mut r, n, h);
        let bc = boundary(&mut r, 1);
        let config = Scheme1DConfig::defaults(Scheme1D::Elliptic, h).unwrap();
        let next = euler_step_1d(&u, None, &config, &bc, max_principle_dt(h)).unwrap();
        let ulps = 8.0 * f64::EPSILON * u.min().abs().max(u.max().abs());
        let over = (next.max() - u.max()).max(u.min() - next.min());
        if over > ulps {
            violations += 1;
        }
        worst = worst.max(over / u.max().abs().max(u.min().abs()));
    }
    verdict(violations == 0, format!("{violations} violations in 1000 fields; worst relative overshoot {worst:.1e}"))
}

fn monotone_map() -> Verdict {
    let mut r = rng(6);
    let mut violations = 0;
    for k in 0..1000 {
        let h = 10f64.powf(r.gen_range(-3.0..0.0));
        let gap_scale = 10f64.powf(r.gen_range(-6.0..0.0));
        let ordered = if k % 2 == 0 {
            let n = r.gen_range(3..64);
            let u = field_1d(&mut r, n, h);
            let v: Vec<f64> = u.values().iter().map(|a| a + gap_scale * r.gen_range(0.0..1.0)).collect();
            let v = GridFn::from_values(*u.grid(), v).unwrap();
            let config = Scheme1DConfig::defaults(Scheme1D::EllipticRegularized, h).unwrap();
            let dt = config.resolve_dt(h).unwrap();
            let bc = boundary(&mut r, 1);
            let a = euler_step_1d(&u, None, &config, &bc, dt).unwrap();
            let b = euler_step_1d(&v, None, &config, &bc, dt).unwrap();
            a.values().iter().zip(b.values()).all(|(x, y)| x <= y)
        } else {
            let n = r.gen_range(8..24);
            let g = Grid2D::new(n, n, h, 0.0, 0.0).unwrap();
            let scale = 10f64.powf(r.gen_range(-3.0..3.0));
            let u: Vec<f64> = (0..n * n).map(|_| scale * r.gen_range(-1.0..1.0)).collect();
            let v: Vec<f64> = u.iter().map(|a| a + gap_scale * r.gen_range(0.0..1.0)).collect();
            let (u, v) = (GridFn::from_values(g, u).unwrap(), GridFn::from_values(g, v).unwrap());
            let config = SchemeConfig::defaults(SchemeVariant::EllipticRegularized, h).unwrap();
            let dt = TimeStepPolicy::LipschitzCfl.resolve(h, &config).unwrap();
            let bc = boundary(&mut r, 3);
            let a = euler_step(&u, None, &config, &bc, dt).unwrap();
            let b = euler_step(&v, None, &config, &bc, dt).unwrap();
            a.values().iter().zip(b.values()).all(|(x, y)| x <= y)
        };
        if !ordered {
            violations += 1;
        }
    }
    verdict(violations == 0, format!("{violations} violations in 1000 pairs (500 one-dimensional, 500 planar)"))
}

fn sample_arg(r: &mut ChaCha8Rng) -> f64 {
    if r.gen_ratio(1, 20) {
        return 0.0;
    }
    let m = 10f64.powf(r.gen_range(-6.0..6.0));
    if r.gen_bool(0.5) {
        m
    } else {
        -m
    }
}

fn identities() -> Verdict {
    let mut r = rng(7);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-14 * a.abs().max(b.abs());
    let (mut split, mut split_reg, mut lip) = (0, 0, 0);
    for _ in 0..100_000 {
        let (p, q, p2, q2) = (sample_arg(&mut r), sample_arg(&mut r), sample_arg(&mut r), sample_arg(&mut r));
        let reg = RegularizationParams::new(10f64.powf(r.gen_range(0.0..4.0)), 10f64.powf(r.gen_range(0.0..6.0))).unwrap();
        if !close(-affine_a(p, q), a_plus(p.abs(), -q) + a_minus(-p.abs(), -q)) {
            split += 1;
        }
        if !close(-reg.apply(p, q), reg.plus(p.abs(), -q) + reg.minus(-p.abs(), -q)) {
            split_reg += 1;
        }
        let diff = (reg.apply(p, q) - reg.apply(p2, q2)).abs();
        let bound = reg.k * (p - p2).abs() + reg.l * (q - q2).abs();
        if diff > bound * (1.0 + 4.0 * f64::EPSILON) {
            lip += 1;
        }
    }
    verdict(
        split + split_reg + lip == 0,
        format!("1e5 samples: splitting {split}, regularized splitting {split_reg}, Lipschitz {lip} violations"),
    )
}

fn ellipse() -> Verdict {
    let reference = [1.985e-2, 1.279e-2, 5.566e-3, 2.442e-3, 1.036e-3];
    let ns = [32, 64, 128, 256, 512];
    let p = exact::ellipse_time_problem(false);
    let vs = [SchemeVariant::Standard, SchemeVariant::FilteredRegularized];
    let rows = cmd_time_table(&p, &vs, &ns).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for v in vs {
        let errs = errors(&rows, v);
        pass &= errs.len() == 5 && errs.iter().zip(reference).all(|(&e, r)| within_factor(e, r, 2.0));
        parts.push(format!("{v} {}", fmt(&errs)));
    }
    let n_default = exact::evolution_ic("ellipse").unwrap().default_n;
    let mut diffs = Vec::new();
    for n in [32, 64, n_default] {
        let c = compare_regularization(n).unwrap();
        if n == n_default {
            pass &= c.max_difference <= 1e-5;
        }
        diffs.push(format!("N={n} {:.2e}", c.max_difference));
    }
    parts.push(format!("elliptic regularized vs plain, judged at N={n_default}: {}", diffs.join(", ")));
    verdict(pass, parts.join(" | "))
}

fn rot90() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for v in [SchemeVariant::Standard, SchemeVariant::EllipticRegularized, SchemeVariant::FilteredRegularized] {
        let row = rot90_invariance(v, 128, 1.0).unwrap();
        worst = worst.max(row.difference);
        parts.push(format!("{v} {:.1e}", row.difference));
    }
    verdict(worst <= 1e-9, format!("N=128 t=1: {}", parts.join(", ")))
}

fn morphology_exp() -> Verdict {
    let ns = [32, 64, 128, 256, 512];
    let rows = cmd_invariance(InvarianceTest::MorphologyExp, &[SchemeVariant::Standard], &ns, Some(1.0)).unwrap();
    let d: Vec<f64> = rows.iter().map(|r| r.difference).collect();
    let pass = d.len() == 5 && d.windows(2).all(|w| w[1] < w[0]) && d[4] <= 1e-3;
    verdict(pass, format!("differences {}", fmt(&d)))
}

type Criterion = (u8, &'static str, fn() -> Verdict);

const CRITERIA: &[Criterion] = &[
    (1, "quadratic near-exactness", quadratic),
    (2, "standard convergence on (c)", standard_c),
    (3, "instability reproduction", instability),
    (4, "filtered scheme on (d)", filtered_d),
    (5, "maximum principle", max_principle),
    (6, "monotone Euler map", monotone_map),
    (7, "nonlinearity identities", identities),
    (8, "ellipse evolution", ellipse),
    (9, "lattice rotation invariance", rot90),
    (10, "morphology", morphology_exp),
];

fn main() {
    let only: Option<Vec<u8>> =
        std::env::var("ACCEPTANCE_ONLY").ok().map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let mut mismatches = Vec::new();
    for &(id, name, check) in CRITERIA {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let clock = Stopwatch::start();
        let v = check();
        let known = KNOWN_FAILURES.iter().find(|(k, _)| *k == id).map(|(_, why)| *why);
        let tag = match (v.pass, known) {
            (true, None) => "PASS",
            (false, Some(_)) => "FAIL (known)",
            (false, None) => "FAIL",
            (true, Some(_)) => "PASS (listed as known failure)",
        };
        println!("[{tag}] {id:>2} {name}: {} [{:.0} s]", v.detail, clock.seconds());
        if let (false, Some(why)) = (v.pass, known) {
            println!("         {why}");
        }
        if v.pass == known.is_some() {
            mismatches.push(id);
        }
    }
    if !mismatches.is_empty() {
        eprintln!("unexpected outcome for criteria {mismatches:?}");
        std::process::exit(1);
    }
}
