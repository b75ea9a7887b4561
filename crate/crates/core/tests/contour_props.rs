use affineflow::contour::{self, Polyline};
use affineflow::harness::cmd_evolution;
use affineflow::{exact, Grid2D, GridFn2, SchemeVariant};
use proptest::prelude::*;

fn on_boundary(g: &Grid2D, (x, y): (f64, f64)) -> bool {
    let tol = 1e-9 * g.h;
    (x - g.x0).abs() < tol || (x - g.x_max()).abs() < tol || (y - g.y0).abs() < tol || (y - g.y_max()).abs() < tol
}

fn well_formed(g: &Grid2D, line: &Polyline) -> bool {
    if line.closed {
        return line.len() >= 3;
    }
    on_boundary(g, line.points[0]) && on_boundary(g, *line.points.last().unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn contours_close_or_end_on_the_boundary(
        coef in prop::collection::vec(-1.0f64..1.0, 6),
        level in -0.5f64..0.5,
        n in 12usize..40,
    ) {
        let g = Grid2D::square(-1.0, 1.0, n).unwrap();
        let u = GridFn2::sample(g.clone(), |x, y| {
            coef[0] * (2.0 * x).sin() + coef[1] * (3.0 * y).cos() + coef[2] * x * y
                + coef[3] * (x * x - y) + coef[4] * (4.0 * x + y).sin() + coef[5] * y * y * y
        });
        for line in contour::marching_squares(&u, level) {
            prop_assert!(well_formed(&g, &line), "{line:?}");
        }
    }

    #[test]
    fn convex_level_sets_give_simple_closed_curves(
        a in 0.2f64..0.9,
        b in 0.2f64..0.9,
        angle in 0.0f64..std::f64::consts::PI,
        cx in -0.1f64..0.1,
        cy in -0.1f64..0.1,
        power in 0.5f64..3.0,
        n in 10usize..64,
    ) {
        let (s, c) = angle.sin_cos();
        let g = Grid2D::square(-1.0, 1.0, n).unwrap();
        let u = GridFn2::sample(g, |x, y| {
            let (x, y) = (x - cx, y - cy);
            let (p, q) = ((c * x + s * y) / a, (-s * x + c * y) / b);
            (p * p + q * q).powf(power) - 0.5
        });
        let lines = contour::marching_squares(&u, 0.0);
        prop_assert_eq!(lines.len(), 1);
        prop_assert!(lines[0].closed);
        prop_assert!(contour::is_simple(&lines[0]));
        prop_assert!(contour::convexity(&lines[0]).unwrap() > 0.97);
    }
}

#[test]
fn ellipse_keeps_its_eccentricity() {
    let p = exact::problem_by_name("evolution-ellipse").unwrap();
    let r = cmd_evolution(&p, SchemeVariant::FilteredRegularized, 128, None, None).unwrap();
    let s0 = (0.75f64 * 2f64.powf(2.0 / 3.0)).recip();
    assert!(r.frames.len() >= 5);
    for f in &r.frames {
        assert_eq!(f.contours.len(), 1, "t={}", f.t);
        assert!(f.contours[0].closed && contour::is_simple(&f.contours[0]));
        let ratio = f.axis_ratio.unwrap();
        assert!((ratio / 2.0 - 1.0).abs() < 0.05, "t={} ratio={ratio}", f.t);
        let scale = (1.0 - f.t * s0).powf(0.75);
        let area = 2.0 * std::f64::consts::PI * scale * scale;
        assert!((f.area.unwrap() / area - 1.0).abs() < 0.05, "t={} area={:?} vs {area}", f.t, f.area);
    }
}

#[test]
fn fan_convexifies() {
    let p = exact::problem_by_name("evolution-fan").unwrap();
    let r = cmd_evolution(&p, SchemeVariant::FilteredRegularized, 64, None, None).unwrap();
    let cv: Vec<f64> = r.frames.iter().map(|f| f.convexity.unwrap()).collect();
    assert!(cv[0] < 0.85, "{cv:?}");
    assert!(cv.windows(2).all(|w| w[1] > w[0]), "{cv:?}");
    assert!(*cv.last().unwrap() > 0.99, "{cv:?}");
    let areas: Vec<f64> = r.frames.iter().map(|f| f.area.unwrap()).collect();
    assert!(areas.windows(2).all(|w| w[1] < w[0]), "{areas:?}");
}

#[test]
fn diamond_stays_convex_and_shrinks() {
    let p = exact::problem_by_name("evolution-diamond").unwrap();
    let r = cmd_evolution(&p, SchemeVariant::FilteredRegularized, 64, None, None).unwrap();
    for w in r.frames.windows(2) {
        assert!(w[1].area.unwrap() < w[0].area.unwrap());
    }
    for f in &r.frames {
        assert!(f.convexity.unwrap() > 1.0 - 1e-9, "t={} {:?}", f.t, f.convexity);
        assert!((f.axis_ratio.unwrap() - 1.0).abs() < 1e-3);
    }
}
