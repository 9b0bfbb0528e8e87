//! End-to-end acceptance run: one PASS/FAIL line per criterion, non-zero exit
//! if any fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hydrowave::calculus::fitted_order;
use hydrowave::catalog::catalog;
use hydrowave::commute::{commute_residual, tensor_commutation_residual};
use hydrowave::evolve::{evolve_to, functional_monitor, l1_distance, Scheme};
use hydrowave::hodograph::*;
use hydrowave::solutions::*;
use hydrowave::speedlaw::{constraint_residuals, probe_points, ConstraintData};
use hydrowave::{Density, Error, FuncExpr, Rect, SpeedLaw, StateField};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn e(s: &str) -> FuncExpr {
    FuncExpr::parse(s).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn exact_families() -> Outcome {
    let pairs = [
        ("s^3 - 2*s", "s^2"),
        ("exp(s)", "exp(-s)"),
        ("sin(s)", "cos(2*s)"),
        ("s*exp(s)", "sin(s) + s^2"),
        ("1", "2"),
    ];
    let grid = Rect::new(1.0, 2.0, 1.0, 2.0).unwrap().grid(30);
    let laws = [
        SpeedLaw::Case1 { c0: 1.0, v0: 1.0 },
        SpeedLaw::Case2 { k0: 1.5 },
        SpeedLaw::Case3 { k1: 0.8 },
    ];
    let (mut worst, mut slowest) = (0.0f64, 0.0f64);
    for law in &laws {
        let clock = Instant::now();
        for (t1, t2) in pairs {
            let f = match *law {
                SpeedLaw::Case1 { c0, v0 } => family_case1(c0, v0, e(t1), e(t2)),
                SpeedLaw::Case2 { k0 } => family_case2(k0, e(t1), e(t2)),
                SpeedLaw::Case3 { k1 } => family_case3(k1, e(t1), e(t2)),
                _ => unreachable!(),
            }
            .map_err(|err| err.to_string())?;
            worst = worst.max(wave_residual(&f, law, &grid).map_err(|err| err.to_string())?);
        }
        slowest = slowest.max(clock.elapsed().as_secs_f64());
    }
    check(
        worst <= 1e-8 && slowest < 1.0,
        format!(
            "max residual {worst:.1e} over 3 cases x 5 pairs on 30x30, slowest case {slowest:.2} s"
        ),
    )
}

fn swap_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let k1 = 1.3;
    let k0 = 1.0 / (k1 * k1);
    let (t1, t2) = (e("sin(s) + s^2"), e("exp(-s)"));
    let three = family_case3(k1, t1.clone(), t2.clone()).unwrap().swapped();
    let two = family_case2(k0, t1, t2).unwrap();
    let (mut speed, mut value) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let (u, v) = (rng.gen_range(0.5..2.5), rng.gen_range(0.5..2.5));
        // f(v, u) solves the swapped equation, so the speeds are reciprocal.
        let a3 = SpeedLaw::Case3 { k1 }.eval_speed(v, u).unwrap();
        let a2 = SpeedLaw::Case2 { k0 }.eval_speed(u, v).unwrap();
        speed = speed.max((a2 - 1.0 / a3).abs() / a2.abs());
        let (x, y) = (three.value(u, v).unwrap(), two.value(u, v).unwrap());
        value = value.max((x - y).abs() / y.abs().max(1e-300));
    }
    check(
        speed <= 1e-14 && value <= 1e-12,
        format!("100 random points: speed rel diff {speed:.1e}, solution rel diff {value:.1e}"),
    )
}

fn compatibility() -> Outcome {
    let probe = probe_points(
        &Rect::new(1.0, 2.0, 1.0, 2.0).unwrap(),
        12,
        &[-1.0, 0.5, 2.0],
    );
    let (mut good, mut bad) = (0.0f64, f64::INFINITY);
    for law in [
        SpeedLaw::Case1 { c0: 1.0, v0: 1.0 },
        SpeedLaw::Case2 { k0: 1.0 },
        SpeedLaw::Case3 { k1: 1.3 },
    ] {
        let cd = ConstraintData::for_law(&law, e("sin(s)")).map_err(|err| err.to_string())?;
        good = good.max(constraint_residuals(&cd, &probe).unwrap().max());
        bad = bad.min(
            constraint_residuals(&cd.perturbed(0.1), &probe)
                .unwrap()
                .max(),
        );
    }
    check(
        good <= 1e-8 && bad >= 1e-3,
        format!("derived data max {good:.1e}, perturbed lambda min {bad:.1e}"),
    )
}

fn smooth_field(n: usize) -> StateField {
    StateField::sample(0.0, 1.0 / n as f64, n, 0.0, |x| {
        let a = 2.0 * PI * x;
        Ok((1.4 + 0.3 * a.sin(), 1.5 + 0.2 * (2.0 * a).cos()))
    })
    .unwrap()
}

fn commuting_flows() -> Outcome {
    let probe = Rect::new(1.0, 2.0, 1.0, 2.0).unwrap().grid(15);
    let p = |kv: &[(&str, f64)]| {
        kv.iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect::<BTreeMap<_, _>>()
    };
    let entries = [
        ("t1", p(&[("c0", 1.0), ("v0", 1.0)])),
        ("t2", p(&[("k0", 1.0)])),
        ("o1-gas", p(&[("k0", 1.0), ("p0", 0.5)])),
        ("o2-elastic", p(&[("k1", 1.0)])),
        ("product-i", p(&[("c0", 1.0), ("v0", 1.0), ("sep_k", 2.0)])),
        ("product-ii", p(&[("k0", 1.5), ("sep_k", 1.0)])),
    ];
    let (mut worst, mut symmetric) = (0.0f64, true);
    for (name, params) in &entries {
        let entry = catalog(name, params).map_err(|err| err.to_string())?;
        for (t1, t2) in [("s^3", "exp(s)"), ("sin(s)", "s"), ("1/(1+s^2)", "cosh(s)")] {
            let f = match entry.speed {
                SpeedLaw::Case1 { c0, v0 } => family_case1(c0, v0, e(t1), e(t2)),
                SpeedLaw::Case2 { k0 } => family_case2(k0, e(t1), e(t2)),
                SpeedLaw::Case3 { k1 } => family_case3(k1, e(t1), e(t2)),
                _ => unreachable!(),
            }
            .unwrap();
            let r = commute_residual(&entry.density, &f, &probe).unwrap();
            symmetric &= r == commute_residual(&f, &entry.density, &probe).unwrap();
            worst = worst.max(r);
        }
    }
    let negative = commute_residual(
        &Density::of_u(e("s^4")),
        &Density::of_v(e("s^4")),
        &[(1.0, 1.0)],
    )
    .unwrap();

    // Tensor form on smooth fields: the pointwise commutator vanishes to
    // rounding, so r_a1 sits below c·step⁴ at every resolution.
    let h = catalog("t2", &p(&[("k0", 1.0)])).unwrap().density;
    let f = family_case2(1.0, e("s^3"), e("exp(s)")).unwrap();
    let floor = 1e-11;
    let mut tensor_ok = true;
    let mut tensor = Vec::new();
    for n in [50usize, 100, 200] {
        let r = tensor_commutation_residual(&h, &f, &smooth_field(n)).unwrap();
        let step = 1.0 / n as f64;
        tensor_ok &=
            r.r_a1 <= (1e2 * step.powi(4)).max(floor) && r.r_a2 <= 10.0 * r.r_a1.max(floor);
        tensor.push(format!("N={n}: r_a1 {:.1e} r_a2 {:.1e}", r.r_a1, r.r_a2));
    }
    check(
        worst <= 1e-10 && symmetric && negative >= 0.9 && tensor_ok,
        format!(
            "catalog x 3 families max {worst:.1e}, symmetric {symmetric}, (u^4, v^4) at (1,1) {negative:.4}; {}",
            tensor.join(", ")
        ),
    )
}

fn tower() -> Outcome {
    let clock = Instant::now();
    let mut worst = 0.0f64;
    for (alpha, beta, rect) in [
        (e("1"), e("1"), Rect::new(0.0, 1.0, 0.0, 1.0).unwrap()),
        (
            e("s^2"),
            e("(s+1)^2*s^2"),
            Rect::new(1.0, 2.0, 1.0, 2.0).unwrap(),
        ),
    ] {
        let hs = nutku_tower(&alpha, &beta, &e("s"), &e("s"), 5, &rect)
            .map_err(|err| err.to_string())?;
        let probe = rect.grid(10);
        for h in &hs {
            worst = worst.max(separability_residual(h, &alpha, &beta, &probe, 1e-3).unwrap());
        }
    }
    let secs = clock.elapsed().as_secs_f64();
    check(
        worst <= 1e-6 && secs < 10.0,
        format!("H_1..H_5 for unit and case-1 weights, max FD residual {worst:.1e}, {secs:.2} s"),
    )
}

fn quadratic_map() -> HodographMap {
    let f = family_case2(1.0, e("s^2"), e("0")).unwrap();
    HodographMap::new(f, Rect::new(0.5, 4.0, 0.3, 3.0).unwrap())
}

fn round_trip() -> Outcome {
    let m = quadratic_map();
    // Images of the 32x32 seed grid, computed once and searched per target.
    let seeds: Vec<((f64, f64), (f64, f64))> = m
        .rect
        .grid(32)
        .into_iter()
        .filter_map(|(u, v)| {
            forward_map(&m, u, v)
                .ok()
                .map(|img| ((u, v), (img.x, img.t)))
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut done, mut worst, mut failures) = (0, 0.0f64, 0);
    while done < 10_000 {
        let (u, v) = (rng.gen_range(0.5..4.0), rng.gen_range(0.3..3.0));
        let img = forward_map(&m, u, v).unwrap();
        if img.det().abs() <= 1e-3 {
            continue;
        }
        // Nearest seeds first, as the library's scan does, up to eight of them.
        let mut order: Vec<(f64, (f64, f64))> = seeds
            .iter()
            .map(|&(p, (x, t))| ((x - img.x).hypot(t - img.t), p))
            .collect();
        order.sort_by(|a, b| a.0.total_cmp(&b.0));
        match order
            .iter()
            .take(8)
            .find_map(|&(_, seed)| invert_point(&m, img.x, img.t, seed).ok())
        {
            Some((ru, rv)) => worst = worst.max((ru - u).abs().max((rv - v).abs())),
            None => failures += 1,
        }
        done += 1;
    }
    let critical = matches!(
        invert_point(&m, 0.0, 4.0, (1.0, 1.0)),
        Err(Error::SingularJacobian { .. })
    );
    check(
        worst <= 1e-9 && failures == 0 && critical,
        format!(
            "10^4 points, max error {worst:.1e}, {failures} failures; (1,1) singular: {critical}"
        ),
    )
}

fn psystem_from(
    m: &HodographMap,
    system: &PSystem,
    grid: Grid1,
    t: f64,
    seed: (f64, f64),
) -> (f64, f64) {
    let d = 1e-4;
    let fs = solve_fields(m, grid, &[t - d, t, t + d], seed).unwrap();
    psystem_residual(&fs[0], &fs[1], &fs[2], system).unwrap()
}

fn implicit_solutions() -> Outcome {
    let p = PSystem::case2(1.0, 0.0).unwrap();
    let m1 = quadratic_map();
    let a = psystem_from(
        &m1,
        &p,
        Grid1::span(2.5, 3.5, 201).unwrap(),
        6.0,
        (2.0, 1.0),
    );
    let f2 = family_case2(1.0, e("s^3"), e("exp(s)")).unwrap();
    let m2 = HodographMap::new(f2, Rect::new(0.5, 4.0, 0.3, 3.0).unwrap());
    let img = forward_map(&m2, 1.5, 2.0).unwrap();
    let b = psystem_from(
        &m2,
        &p,
        Grid1::span(img.x - 0.02, img.x + 0.02, 201).unwrap(),
        img.t,
        (1.5, 2.0),
    );
    let wrong = PSystem::case2(2.0, 0.0).unwrap();
    let c = psystem_from(
        &m1,
        &wrong,
        Grid1::span(2.5, 3.5, 201).unwrap(),
        6.0,
        (2.0, 1.0),
    );
    let good = a.0.max(a.1).max(b.0).max(b.1);
    let bad = c.0.max(c.1);
    check(
        good <= 1e-6 && bad >= 1e-2,
        format!(
            "theta s^2: {:.1e}, theta (s^3, exp): {:.1e}, wrong pressure {bad:.1e}",
            a.0.max(a.1),
            b.0.max(b.1)
        ),
    )
}

fn cross_validation() -> Outcome {
    let clock = Instant::now();
    let m = quadratic_map();
    let p = PSystem::case2(1.0, 0.0).unwrap();
    let exact = |x: f64, t: f64| {
        let v = (((t - 2.0) * (t - 2.0) / 4.0 - 1.0) / x).sqrt();
        ((t - 2.0) / (2.0 * v), v)
    };
    let mut orders = Vec::new();
    for scheme in [Scheme::LaxFriedrichs, Scheme::LaxWendroff] {
        let (mut hs, mut errs) = (vec![], vec![]);
        for n in [100usize, 200, 400] {
            let h = 2.0 / n as f64;
            let grid = Grid1 { x0: 2.0, h, n };
            let start = solve_field(&m, grid, 6.0, exact(2.0, 6.0)).unwrap();
            let target = solve_field(&m, grid, 6.2, exact(2.0, 6.2)).unwrap();
            let end = evolve_to(&start, &p, scheme, 0.5, 6.2, |_, _| {})
                .map_err(|err| err.to_string())?;
            let (lo, hi) = ((0.6 / h).round() as usize, (1.4 / h).round() as usize);
            hs.push(h);
            errs.push(
                l1_distance(&end.u, &target.u, h, lo, hi)
                    + l1_distance(&end.v, &target.v, h, lo, hi),
            );
        }
        orders.push(fitted_order(&hs, &errs));
    }
    let secs = clock.elapsed().as_secs_f64();
    check(
        (orders[0] - 1.0).abs() <= 0.3 && (orders[1] - 2.0).abs() <= 0.3 && secs < 30.0,
        format!(
            "LxF order {:.2}, LW order {:.2}, {secs:.1} s",
            orders[0], orders[1]
        ),
    )
}

fn conserved_functionals() -> Outcome {
    let p = PSystem::case2(1.0, 0.0).unwrap();
    let h = p.hamiltonian().unwrap();
    let f = family_case2(1.0, e("s^3"), e("exp(s)")).unwrap();
    let q = Density::of_u(e("s^4"));
    let ns = [100usize, 200, 400];
    let (mut dh, mut df, mut dq) = (vec![], vec![], vec![]);
    for n in ns {
        let s = StateField::sample(0.0, 1.0 / n as f64, n, 0.0, |x| {
            Ok((
                1.0 + 0.05 * (2.0 * PI * x).cos(),
                1.0 + 0.05 * (2.0 * PI * x).sin(),
            ))
        })
        .unwrap();
        let end = evolve_to(&s, &p, Scheme::LaxWendroff, 0.5, 0.5, |_, _| {}).unwrap();
        let drift = |d: &Density| {
            (functional_monitor(&end, d).unwrap() - functional_monitor(&s, d).unwrap()).abs()
        };
        dh.push(drift(&h));
        df.push(drift(&f));
        dq.push(drift(&q));
    }
    let steps: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
    let (oh, of) = (fitted_order(&steps, &dh), fitted_order(&steps, &df));
    // Second-order scheme: conserved drifts shrink at least like step².
    let ok = oh >= 1.7 && of >= 1.7 && dq[2] >= 1e-6 && dq[2] > 100.0 * df[2];
    check(
        ok,
        format!(
            "LW drift orders h {oh:.1}, f {of:.1}; u^4 drift {:.1e} -> {:.1e} -> {:.1e}",
            dq[0], dq[1], dq[2]
        ),
    )
}

fn run_cli(args: &[&str], threads: &str) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_hydrowave"))
        .args(args)
        .env("HYDROWAVE_THREADS", threads)
        .output()
        .map_err(|err| err.to_string())?;
    if status.status.code() != Some(0) {
        return Err(format!("{args:?} exited with {:?}", status.status.code()));
    }
    Ok(())
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|err| err.to_string())?;
    let out = |name: &str| dir.path().join(name).to_string_lossy().into_owned();
    let runs: [(&str, Vec<&str>); 2] = [
        (
            "field",
            vec![
                "hodograph",
                "--pressure",
                "case2:k0=1",
                "--theta1",
                "s^2",
                "--theta2",
                "0",
                "--t",
                "6",
                "--x",
                "2.5:3.5:101",
                "--seed",
                "2,1",
            ],
        ),
        (
            "traj",
            vec![
                "evolve",
                "--pressure",
                "case2:k0=1",
                "--init",
                "preset:wavy,n=64",
                "--scheme",
                "lw",
                "--cfl",
                "0.5",
                "--tend",
                "0.3",
                "--every",
                "5",
            ],
        ),
    ];
    let mut compared = 0;
    for (name, base) in &runs {
        let mut files = Vec::new();
        for (i, threads) in ["1", "4", "4"].iter().enumerate() {
            let path = out(&format!("{name}{i}.csv"));
            let mut args = base.clone();
            args.extend(["--out", path.as_str()]);
            run_cli(&args, threads)?;
            files.push(std::fs::read(Path::new(&path)).map_err(|err| err.to_string())?);
        }
        if files.iter().any(|f| f != &files[0]) || files[0].is_empty() {
            return Err(format!("{name}: CSV outputs differ between runs"));
        }
        compared += files.len();
    }
    Ok(format!(
        "{compared} runs of hodograph and evolve (1 and 4 threads) byte-identical"
    ))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("exact-family residuals", exact_families),
        ("case 2 / case 3 swap equivalence", swap_equivalence),
        ("constraint compatibility", compatibility),
        ("commuting flows", commuting_flows),
        ("separable tower", tower),
        ("hodograph round trip", round_trip),
        ("implicit solutions solve the p-system", implicit_solutions),
        ("scheme cross-validation", cross_validation),
        ("conserved functionals", conserved_functionals),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
