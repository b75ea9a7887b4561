use affineflow::exact::{ellipse_solution, problem_by_name, static_example};
use affineflow::time_integration::apply_scheme;
use affineflow::{BoundaryCondition, Grid2D, SchemeConfig, SchemeVariant};
use proptest::prelude::*;

/// `(u_xx u_y² - 2 u_x u_y u_xy + u_yy u_x²)^{1/3}` from fourth-order
/// finite differences of a closed form.
fn operator(u: impl Fn(f64, f64) -> f64, x: f64, y: f64) -> f64 {
    let d = 1e-3;
    let dx = |x: f64, y: f64| (-u(x + 2.0 * d, y) + 8.0 * u(x + d, y) - 8.0 * u(x - d, y) + u(x - 2.0 * d, y)) / (12.0 * d);
    let dy = |x: f64, y: f64| (-u(x, y + 2.0 * d) + 8.0 * u(x, y + d) - 8.0 * u(x, y - d) + u(x, y - 2.0 * d)) / (12.0 * d);
    let second = |f: &dyn Fn(f64) -> f64| (-f(2.0 * d) + 16.0 * f(d) - 30.0 * f(0.0) + 16.0 * f(-d) - f(-2.0 * d)) / (12.0 * d * d);
    let ux = dx(x, y);
    let uy = dy(x, y);
    let uxx = second(&|s| u(x + s, y));
    let uyy = second(&|s| u(x, y + s));
    let uxy = (dy(x + d, y) - dy(x - d, y)) / (2.0 * d);
    (uxx * uy * uy - 2.0 * ux * uy * uxy + uyy * ux * ux).cbrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn static_sources_match_the_operator(tag in prop::sample::select(vec!['a', 'b', 'c', 'd']), x in -0.9f64..0.9, y in -0.9f64..0.9) {
        let p = static_example(tag).unwrap();
        let u = p.u_exact.clone().unwrap();
        let f = p.f_rhs.clone().unwrap();
        let fx = f(x, y);
        prop_assume!(x.hypot(y) > 0.1 && fx.abs() > 0.05);
        let got = operator(|a, b| u(a, b, 0.0), x, y);
        prop_assert!((got - fx).abs() <= 1e-4 * fx.abs().max(1.0), "({x}, {y}): {got} vs {fx}");
    }

    #[test]
    fn ellipses_solve_the_evolution(a in 0.5f64..3.0, b in 0.5f64..3.0, x in -2.0f64..2.0, y in -2.0f64..2.0, t in 0.0f64..1.0) {
        prop_assume!(x.hypot(y) > 0.2);
        let u = |x, y| ellipse_solution(a, b, x, y, t);
        let dt = 1e-4;
        let ut = (ellipse_solution(a, b, x, y, t + dt) - ellipse_solution(a, b, x, y, t - dt)) / (2.0 * dt);
        prop_assert!((ut - 1.0).abs() < 1e-9);
        prop_assert!((operator(u, x, y) - 1.0).abs() < 1e-5, "{}", operator(u, x, y));
    }

    #[test]
    fn relabelling_by_exp(x in -0.9f64..0.9, y in -0.9f64..0.9) {
        let a = static_example('a').unwrap();
        let b = static_example('b').unwrap();
        let s = x * x + y * y;
        let lhs = b.f_rhs.as_ref().unwrap()(x, y);
        let rhs = s.exp() * a.f_rhs.as_ref().unwrap()(x, y);
        prop_assert!((lhs - rhs).abs() <= 1e-13 * rhs.abs().max(1e-300));
    }

    #[test]
    fn rescaling(s in 0.25f64..4.0, x in -0.9f64..0.9, y in -0.9f64..0.9) {
        prop_assume!(x.hypot(y) > 0.1);
        let a = static_example('a').unwrap();
        let u = a.u_exact.clone().unwrap();
        let f = a.f_rhs.clone().unwrap();
        let v = |p: f64, q: f64| u(p / s, q / s, 0.0);
        let want = s.powf(-4.0 / 3.0) * f(x / s, y / s);
        prop_assert!((operator(v, x, y) - want).abs() <= 1e-6 * want.abs().max(1.0));
    }
}

#[test]
fn standard_scheme_reproduces_smooth_sources() {
    for tag in ['a', 'b'] {
        let p = static_example(tag).unwrap();
        let errors: Vec<f64> = [32, 64, 128]
            .iter()
            .map(|&n| {
                let g: Grid2D = p.grid(n).unwrap();
                let u = p.exact(g, 0.0).unwrap();
                let f = p.rhs(g).unwrap();
                let config = SchemeConfig::defaults(SchemeVariant::Standard, g.h).unwrap();
                let fu = apply_scheme(&u, &config, &BoundaryCondition::NeumannReflect).unwrap();
                let mut worst = 0.0f64;
                for j in 0..n {
                    for i in 0..n {
                        let (x, y) = (g.x(i), g.y(j));
                        if x.abs().max(y.abs()) < 0.8 && x.hypot(y) > 0.2 {
                            worst = worst.max((fu.at(i, j) - f.at(i, j)).abs());
                        }
                    }
                }
                worst
            })
            .collect();
        assert!(errors[2] < 1e-3 && (errors[2] <= errors[0] || errors[0] < 1e-10), "{tag}: {errors:?}");
    }
}

#[test]
fn registry_names_resolve() {
    for name in affineflow::exact::problem_names() {
        let p = problem_by_name(name).unwrap();
        assert_eq!(p.name, name);
        let g = p.grid(8);
        if p.dimension == 2 {
            let u = p.initial(g.unwrap());
            assert!(u.values().iter().all(|v| v.is_finite()));
        }
    }
    assert!(problem_by_name("static-z").is_err());
}
