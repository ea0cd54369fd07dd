use std::f64::consts::{PI, TAU};

use converse_core::hill::{
    integrate_frame, monodromy, monodromy_jacobian, recover_diffeo, rotation_exp, sl2_log, solve_tan_equation,
    PlaneCurve, Sl2, StepPotential, StretchPerturbation,
};
use converse_core::{
    cell_map, count_sign_changes, moment_map, psi_alpha, solve_converse_shk, AlphaFamily, ChebyshevSystem,
    CircleDiffeo, CircleFunction, Expression, QuadratureRule, SHKProblem, SignedPartition, StepFunction,
};
use proptest::prelude::*;

fn diffeo_strategy() -> impl Strategy<Value = CircleDiffeo> {
    (2usize..7)
        .prop_flat_map(|m| {
            (
                prop::collection::vec(0.05f64..1.0, m),
                prop::collection::vec(0.05f64..1.0, m),
                0.0f64..TAU,
            )
        })
        .prop_map(|(dx, dy, shift)| {
            let sx: f64 = dx.iter().sum();
            let sy: f64 = dy.iter().sum();
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            let (mut x, mut y) = (0.0, shift);
            for (a, b) in dx.iter().zip(&dy) {
                xs.push(x);
                ys.push(y);
                x += a / sx * TAU;
                y += b / sy * TAU;
            }
            CircleDiffeo::from_breakpoints(TAU, xs, ys).unwrap()
        })
}

fn trig_text(coeffs: &[f64], first: usize) -> String {
    coeffs
        .chunks(2)
        .enumerate()
        .map(|(i, c)| format!("({})*cos({m}*x)+({})*sin({m}*x)", c[0], c[1], m = first + i))
        .collect::<Vec<_>>()
        .join("+")
}

fn lengths_strategy(min: usize, max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..1.0, min..=max).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.iter().map(|x| x / s).collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauss_panels_integrate_degree_fifteen_exactly(
        coeffs in prop::collection::vec(-1.0f64..1.0, 16),
        a in -2.0f64..2.0,
        width in 0.1f64..3.0,
    ) {
        let b = a + width;
        let rule = QuadratureRule::default();
        let mut acc = [0.0];
        rule.fixed(a, b, 1, &mut acc, &mut |x, out: &mut [f64]| {
            out[0] = coeffs.iter().rev().fold(0.0, |s, c| s * x + c);
        });
        let antider = |x: f64| coeffs.iter().enumerate().map(|(k, c)| c * x.powi(k as i32 + 1) / (k as f64 + 1.0)).sum::<f64>();
        let scale = coeffs.iter().enumerate().map(|(k, c)| c.abs() * (b.abs().max(a.abs())).powi(k as i32 + 1)).sum::<f64>();
        prop_assert!((acc[0] - (antider(b) - antider(a))).abs() <= 1e-13 * scale.max(1.0));
    }

    #[test]
    fn sign_changes_survive_reparametrization(
        coeffs in prop::collection::vec(-1.0f64..1.0, 6),
        phi in diffeo_strategy(),
    ) {
        let f = CircleFunction::parse(&trig_text(&coeffs, 1), TAU).unwrap();
        let before = count_sign_changes(&f, 0.0).unwrap().count;
        let after = count_sign_changes(&f.pullback(&phi).unwrap(), 0.0).unwrap().count;
        prop_assert_eq!(before, after);
    }

    #[test]
    fn symbolic_derivatives_match_differences(
        a in 0.2f64..2.0,
        b in -1.0f64..1.0,
        x in -3.0f64..3.0,
        which in 0usize..4,
    ) {
        let text = [
            format!("{a}*sin({b}*x)+x^3/7"),
            format!("exp({b}*x)*cos({a}*x)"),
            format!("exp(sin(x))*{a}"),
            format!("1/(1+{a}*x^2)-tan({b}*x/4)"),
        ][which].clone();
        let e = Expression::parse(&text).unwrap();
        let h = 1e-5;
        for order in 1..=3 {
            let fd = (e.eval_derivative(order - 1, x + h) - e.eval_derivative(order - 1, x - h)) / (2.0 * h);
            let exact = e.eval_derivative(order, x);
            prop_assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{text} order {order}");
        }
    }

    #[test]
    fn diffeos_increase(phi in diffeo_strategy()) {
        prop_assert!(phi.min_slope(4096) > 0.0);
        prop_assert!(phi.invert().min_slope(4096) > 0.0);
    }

    #[test]
    fn composition_is_associative(a in diffeo_strategy(), b in diffeo_strategy(), c in diffeo_strategy()) {
        let left = a.compose(&b).unwrap().compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        prop_assert!(left.sup_distance(&right, 2048) < 1e-9);
        let id = CircleDiffeo::identity(TAU);
        prop_assert!(a.compose(&id).unwrap().sup_distance(&a, 2048) < 1e-9);
        prop_assert!(id.compose(&a).unwrap().sup_distance(&a, 2048) < 1e-9);
    }

    #[test]
    fn psi_stays_near_identity(
        gaps in lengths_strategy(2, 6),
        frac in prop::collection::vec(-1.0f64..1.0, 6),
    ) {
        let mut xs = Vec::new();
        let mut x = 0.0;
        for g in &gaps[..gaps.len() - 1] {
            x += g * TAU;
            xs.push(x);
        }
        let family = AlphaFamily::new(TAU, xs).unwrap();
        let alpha: Vec<f64> = frac[..family.dimension()].iter().map(|f| f * 0.9 * family.radius()).collect();
        let psi = psi_alpha(&family, &alpha).unwrap();
        let amax = alpha.iter().fold(0.0f64, |m, a| m.max(a.abs()));
        let min_gap = gaps.iter().fold(f64::INFINITY, |m, g| m.min(g * TAU));
        let bound = amax * (1.0 + TAU / min_gap);
        prop_assert!(psi.min_slope(4096) > 0.0);
        prop_assert!(psi.sup_distance(&CircleDiffeo::identity(TAU), 4096) <= bound + 1e-12);
    }

    #[test]
    fn residuals_are_linear(
        c1 in prop::collection::vec(-1.0f64..1.0, 6),
        c2 in prop::collection::vec(-1.0f64..1.0, 6),
        a in -2.0f64..2.0,
        b in -2.0f64..2.0,
    ) {
        let v = ChebyshevSystem::trig(2);
        let f1 = CircleFunction::parse(&trig_text(&c1, 1), TAU).unwrap();
        let f2 = CircleFunction::parse(&trig_text(&c2, 2), TAU).unwrap();
        let combo = CircleFunction::linear_combination(&[(a, f1.clone()), (b, f2.clone())]).unwrap();
        let (r1, r2, r) = (v.residual_vector(&f1).unwrap(), v.residual_vector(&f2).unwrap(), v.residual_vector(&combo).unwrap());
        for i in 0..r.len() {
            prop_assert!((r[i] - a * r1[i] - b * r2[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn moment_map_is_lipschitz(
        p in prop::collection::vec(-1.0f64..1.0, 4),
        dir in prop::collection::vec(-1.0f64..1.0, 4),
        t in 1e-4f64..1e-1,
    ) {
        prop_assume!(p.iter().map(|x| x * x).sum::<f64>() > 1e-3);
        let basis: Vec<CircleFunction> = ["1", "x", "cos(3*x)"].iter().map(|s| CircleFunction::parse(s, 1.0).unwrap()).collect();
        let rule = QuadratureRule::default();
        let a = SignedPartition::normalized(p.clone(), 1.0).unwrap();
        let q: Vec<f64> = p.iter().zip(&dir).map(|(x, d)| x + t * d).collect();
        prop_assume!(q.iter().map(|x| x * x).sum::<f64>() > 1e-3);
        let b = SignedPartition::normalized(q, 1.0).unwrap();
        let dist = a.coords().iter().zip(b.coords()).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let (ma, mb) = (moment_map(&a, &basis, &rule), moment_map(&b, &basis, &rule));
        let diff = ma.iter().zip(&mb).map(|(x, y)| (x - y).abs()).fold(0.0f64, f64::max);
        // sup norms of 1, x and cos 3x on [0, 1] are all 1
        prop_assert!(diff <= 3.0 * 2.0 * 1.0 * dist + 1e-12);
    }

    #[test]
    fn canonical_steps_are_short_and_alternating(p in prop::collection::vec(-1.0f64..1.0, 1..7)) {
        prop_assume!(p.iter().map(|x| x * x).sum::<f64>() > 1e-6);
        let part = SignedPartition::normalized(p.clone(), 1.0).unwrap();
        let c = converse_core::step_from_sphere(&part).canonicalize();
        prop_assert!(c.signs().len() <= p.len());
        prop_assert!(c.signs().windows(2).all(|w| w[0] != w[1]));
        prop_assert!(c.lengths().iter().all(|l| *l > 0.0));
        prop_assert_eq!(c.canonicalize(), c.clone());
    }

    #[test]
    fn dropping_the_last_length_keeps_the_cell(lengths in lengths_strategy(1, 5), positive in any::<bool>()) {
        let sign = if positive { 1 } else { -1 };
        let mut padded = lengths.clone();
        padded.push(0.0);
        let lhs = cell_map(sign, &padded, 1.0).unwrap().canonicalize();
        let rhs = cell_map(sign, &lengths, 1.0).unwrap();
        prop_assert!(lhs.l1_distance(&rhs).unwrap() < 1e-12);
    }

    #[test]
    fn step_lengths_round_trip(lengths in lengths_strategy(1, 8)) {
        let signs = (0..lengths.len()).map(|i| if i % 2 == 0 { 1 } else { -1 }).collect();
        let h = StepFunction::from_lengths(1.0, &lengths, signs).unwrap();
        let back = StepFunction::from_json(&h.to_json()).unwrap();
        prop_assert_eq!(back, h.clone());
        for (a, b) in h.lengths().iter().zip(&lengths) {
            prop_assert!((a - b).abs() < 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(250))]

    #[test]
    fn chebyshev_collocation_is_nonsingular(
        order in 0usize..=3,
        raw in prop::collection::vec(0.0f64..TAU, 7),
    ) {
        let n = 2 * order + 1;
        let mut pts = raw[..n].to_vec();
        pts.sort_by(f64::total_cmp);
        let min_gap = pts.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        prop_assume!(n == 1 || min_gap > 1e-3);
        let col = ChebyshevSystem::trig(order).collocation_matrix(&pts);
        prop_assert!(col.is_ok());
        prop_assert!(col.unwrap().determinant() != 0.0);
    }

    #[test]
    fn high_harmonics_change_sign_often(
        k in 1usize..=2,
        coeffs in prop::collection::vec(-1.0f64..1.0, 6),
    ) {
        prop_assume!(coeffs.iter().any(|c| c.abs() > 0.1));
        let f = CircleFunction::parse(&trig_text(&coeffs, k + 1), TAU).unwrap();
        let report = ChebyshevSystem::trig(k).sturm_hurwitz_check(&f).unwrap();
        prop_assert!(report.pass);
        prop_assert!(report.count >= 2 * k + 2);
    }

    #[test]
    fn rotations_form_one_parameter_groups(k in 0.1f64..4.0, s in -3.0f64..3.0, t in -3.0f64..3.0) {
        let lhs = rotation_exp(k, s + t);
        let rhs = rotation_exp(k, s).mul(&rotation_exp(k, t));
        prop_assert!(lhs.distance(&rhs) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn frames_keep_unit_determinant(
        a in 0.0f64..0.5,
        b in -0.5f64..0.5,
        base in 0.5f64..3.0,
    ) {
        let k = CircleFunction::parse(&format!("{base}+{a}*cos(2*x)+{b}*sin(6*x)"), PI).unwrap();
        let path = integrate_frame(&k, Sl2::IDENTITY, 1024).unwrap();
        for f in &path.frames {
            prop_assert!((f.det() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn monodromy_differential_matches_differences(c in 0.05f64..0.2, low_first in any::<bool>()) {
        let (k1, k2) = (1.0 + c, 1.0 - c);
        let tan = solve_tan_equation(k1, k2).unwrap();
        let model = if low_first {
            StepPotential::four_interval(k2, k1, tan.t2, tan.t1).unwrap()
        } else {
            StepPotential::four_interval(k1, k2, tan.t1, tan.t2).unwrap()
        };
        let analytic = monodromy_jacobian(&model).unwrap().breakpoint_matrix();
        let h = 1e-6;
        let log_at = |alpha: &[f64]| {
            let s = StretchPerturbation::from_breakpoint_shifts(alpha);
            let lengths: Vec<f64> = model.lengths().iter().zip(s.components()).map(|(l, d)| l + d).collect();
            sl2_log(&monodromy(&StepPotential::new(model.values().to_vec(), lengths).unwrap()).neg())
        };
        let mut num = 0.0f64;
        for j in 0..3 {
            let mut p = [0.0; 3];
            p[j] = h;
            let mut m = [0.0; 3];
            m[j] = -h;
            let (lp, lm) = (log_at(&p), log_at(&m));
            for r in 0..3 {
                num = num.max(((lp[r] - lm[r]) / (2.0 * h) - analytic[(r, j)]).abs());
            }
        }
        prop_assert!(num / analytic.amax() < 1e-5);
    }

    #[test]
    fn nonprojective_lifts_have_nonzero_schwarzian(a in 0.02f64..0.2) {
        // g = x + a sin(4x)/4, a lift that is not a Möbius map
        let curve = PlaneCurve::from_fn(2048, |x| {
            let g = x + a * (4.0 * x).sin() / 4.0;
            let d1 = 1.0 + a * (4.0 * x).cos();
            let d2 = -4.0 * a * (4.0 * x).sin();
            let r = d1.powf(-0.5);
            let dr = -0.5 * d1.powf(-1.5) * d2;
            let (c, s) = (g.cos(), g.sin());
            ([r * c, r * s], [dr * c - r * d1 * s, dr * s + r * d1 * c])
        });
        let g = recover_diffeo(&curve).unwrap();
        let worst = g.schwarzian_samples(0).unwrap().iter().fold(0.0f64, |m, (_, s)| m.max(s.abs()));
        prop_assert!(worst > a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn shk_is_scale_equivariant(lambda in 0.1f64..10.0, b in 0.05f64..0.15) {
        let text = format!("0.8*sin(2*x)+{b}*cos(x)");
        let f = CircleFunction::parse(&text, TAU).unwrap();
        let v = ChebyshevSystem::trig(1);
        let base = solve_converse_shk(&SHKProblem::new(f.clone(), v.clone())).unwrap();
        let mut scaled = SHKProblem::new(f.scaled(lambda), v);
        scaled.target *= lambda;
        let sol = solve_converse_shk(&scaled).unwrap();
        prop_assert!(sol.phi.sup_distance(&base.phi, 4096) < 1e-9);
        for (r, s) in base.verified_residuals.iter().zip(&sol.verified_residuals) {
            prop_assert!((lambda * r - s).abs() < 1e-12 * lambda.max(1.0));
        }
        prop_assert!(sol.phi.min_slope(4096) > 0.0);
        let pulled = f.pullback(&sol.phi).unwrap();
        prop_assert!(count_sign_changes(&pulled, 0.0).unwrap().count >= 4);
    }
}
