use proptest::prelude::*;

use hydrowave::commute::commute_residual;
use hydrowave::evolve::{evolve_to, Scheme};
use hydrowave::hodograph::{forward_map, invert_point, HodographMap, PSystem};
use hydrowave::solutions::*;
use hydrowave::{FuncExpr, Rect, SpeedLaw, StateField};

fn e(s: &str) -> FuncExpr {
    FuncExpr::parse(s).unwrap()
}

fn cubic(c: [f64; 4]) -> FuncExpr {
    e(&format!(
        "{} + {}*s + {}*s^2 + {}*s^3",
        c[0], c[1], c[2], c[3]
    ))
}

fn coeffs() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-2.0f64..2.0)
}

fn probe() -> Vec<(f64, f64)> {
    Rect::new(1.0, 2.0, 1.0, 2.0).unwrap().grid(5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn families_solve_their_wave_equation(k in 0.3f64..3.0, a in coeffs(), b in coeffs()) {
        let (t1, t2) = (cubic(a), cubic(b));
        let f2 = family_case2(k, t1.clone(), t2.clone()).unwrap();
        let law2 = SpeedLaw::Case2 { k0: k };
        prop_assert!(wave_residual(&f2, &law2, &probe()).unwrap() <= 1e-10);
        let f3 = family_case3(k, t1.clone(), t2.clone()).unwrap();
        let law3 = SpeedLaw::Case3 { k1: k };
        prop_assert!(wave_residual(&f3, &law3, &probe()).unwrap() <= 1e-10);
        let f1 = family_case1(k, 1.0 + k, t1, t2).unwrap();
        let law1 = SpeedLaw::Case1 { c0: k, v0: 1.0 + k };
        prop_assert!(wave_residual(&f1, &law1, &probe()).unwrap() <= 1e-10);
    }

    #[test]
    fn superposition_stays_in_the_solution_space(k in 0.3f64..3.0, a in coeffs(), b in coeffs(), c in coeffs()) {
        let law = SpeedLaw::Case2 { k0: k };
        let f = family_case2(k, cubic(a), cubic(b)).unwrap().scaled(c[0])
            + family_case2(k, cubic(b), cubic(a)).unwrap()
            + trivial_density(c[0], c[1], c[2], c[3]);
        prop_assert!(wave_residual(&f, &law, &probe()).unwrap() <= 1e-10);
    }

    #[test]
    fn swapping_variables_exchanges_cases(k1 in 0.3f64..3.0, a in coeffs(), b in coeffs()) {
        // Swapping (u, v) takes a Case3 solution to a Case2 solution with k0 = 1/k1².
        let f = family_case3(k1, cubic(a), cubic(b)).unwrap().swapped();
        let law = SpeedLaw::Case2 { k0: 1.0 / (k1 * k1) };
        prop_assert!(wave_residual(&f, &law, &probe()).unwrap() <= 1e-10);
        for (u, v) in probe() {
            let a2 = SpeedLaw::Case3 { k1 }.eval_speed(v, u).unwrap();
            let b2 = law.eval_speed(u, v).unwrap();
            prop_assert!((a2 * b2 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn commute_residual_is_symmetric(k in 0.3f64..3.0, a in coeffs(), b in coeffs(), q in 2i32..6) {
        let f = family_case2(k, cubic(a), cubic(b)).unwrap();
        let h = hydrowave::Density::of_u(e(&format!("s^{q}")));
        prop_assert_eq!(commute_residual(&h, &f, &probe()).unwrap(), commute_residual(&f, &h, &probe()).unwrap());
    }

    #[test]
    fn hodograph_round_trip(u in 1.0f64..3.5, v in 1.0f64..2.5, du in -0.02f64..0.02, dv in -0.02f64..0.02) {
        let f = family_case2(1.0, e("s^2"), e("0")).unwrap();
        let m = HodographMap::new(f, Rect::new(0.5, 4.0, 0.3, 3.0).unwrap());
        let img = forward_map(&m, u, v).unwrap();
        prop_assume!(img.x.abs() > 0.1);
        let (ru, rv) = invert_point(&m, img.x, img.t, (u + du, v + dv)).unwrap();
        prop_assert!((ru - u).abs() < 1e-8 && (rv - v).abs() < 1e-8);
    }

    #[test]
    fn evolution_conserves_totals(amp in 0.0f64..0.1, phase in 0.0f64..6.0, lw in any::<bool>()) {
        let p = PSystem::case2(1.0, 0.0).unwrap();
        let s = StateField::sample(0.0, 1.0 / 40.0, 40, 0.0, |x| {
            let a = 2.0 * std::f64::consts::PI * x + phase;
            Ok((amp * a.cos(), 1.0 + amp * a.sin()))
        }).unwrap();
        let scheme = if lw { Scheme::LaxWendroff } else { Scheme::LaxFriedrichs };
        let end = evolve_to(&s, &p, scheme, 0.8, 0.2, |_, _| {}).unwrap();
        let sum = |xs: &[f64]| xs.iter().sum::<f64>();
        prop_assert!((sum(&end.u) - sum(&s.u)).abs() < 1e-11);
        prop_assert!((sum(&end.v) - sum(&s.v)).abs() < 1e-11);
    }

    #[test]
    fn rect_text_round_trip(a in -5.0f64..5.0, w in 0.1f64..5.0, c in -5.0f64..5.0, h in 0.1f64..5.0) {
        let r = Rect::new(a, a + w, c, c + h).unwrap();
        let back: Rect = r.to_string().parse().unwrap();
        prop_assert_eq!(back, r);
    }

    #[test]
    fn expressions_render_to_equivalent_source(a in coeffs(), x in -2.0f64..2.0) {
        let f = cubic(a);
        let g = FuncExpr::parse(&f.render()).unwrap();
        let (fx, gx) = (f.eval(x).unwrap(), g.eval(x).unwrap());
        prop_assert!((fx - gx).abs() <= 1e-12 * (1.0 + fx.abs()));
    }
}
