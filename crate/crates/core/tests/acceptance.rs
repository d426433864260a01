//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::time::{Duration, Instant};

use maxblow::counterexample::{
    blowup_report, find_density_point, sublevel_set, BlowupReport, CounterexampleError, WitnessMode,
};
use maxblow::maximal::{maximal_function, maximal_function_auto, maximal_function_interval};
use maxblow::space::{doubling_certificate, gen_dyadic_interval, RadiusWindow, SpaceDescriptor};
use maxblow::varlp::{constant_p_norm, luxemburg_norm, modular, ExponentFunction, PointFunction};
use rand::Rng;

const TOL: f64 = 1e-10;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn constant_exponent_oracle() -> Outcome {
    let mut rng = common::rng(1);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for _ in 0..100 {
        let space = common::random_space(&mut rng, 64);
        let f = common::random_function(&mut rng, 64);
        for p_const in [1.0, 1.3, 2.0, 5.0, f64::INFINITY] {
            let closed = constant_p_norm(&space, p_const, &f).map_err(|e| e.to_string())?;
            let p = ExponentFunction::constant(64, p_const).unwrap();
            let norm = luxemburg_norm(&space, &p, &f, TOL).map_err(|e| e.to_string())?.value;
            let rel = (norm - closed).abs() / closed;
            worst = worst.max(rel);
            check(rel <= 1e-9, || format!("p={p_const}: {norm} vs {closed}"))?;
            count += 1;
        }
    }
    Ok(format!("{count} comparisons, worst relative error {worst:.1e}"))
}

fn maximal_oracle() -> Outcome {
    let mut rng = common::rng(2);
    for case in 0..50 {
        let n = rng.gen_range(1..=256);
        let space = common::random_space(&mut rng, n);
        let f = common::random_function(&mut rng, n);
        let m = maximal_function(&space, &f).map_err(|e| e.to_string())?;
        let naive = common::naive_maximal(&space, &f);
        for x in 0..n {
            check(m.values[x].to_bits() == naive[x].0.to_bits(), || {
                format!("case {case}, point {x}: {} vs naive {}", m.values[x], naive[x].0)
            })?;
            check(m.argmax_ball[x] == (naive[x].1, naive[x].2), || format!("case {case}, point {x}: argmax differs"))?;
        }
    }
    for depth in 1..=12 {
        let space = gen_dyadic_interval(depth).unwrap();
        let f = common::random_function(&mut rng, space.n());
        let a = maximal_function(&space, &f).map_err(|e| e.to_string())?;
        let b = maximal_function_interval(&space, &f).map_err(|e| e.to_string())?;
        check(a == b, || format!("interval path differs at depth {depth}"))?;
    }
    Ok("50 random spaces match naive enumeration; interval path exact up to n = 4096".into())
}

fn invariant_suite() -> Outcome {
    const CASES: usize = 200;
    let mut rng = common::rng(3);
    let n = 40;
    for case in 0..CASES {
        let s = common::random_space(&mut rng, n);
        let f = common::random_function(&mut rng, n);
        let g = common::random_function(&mut rng, n);
        let sum = PointFunction::new(f.values().iter().zip(g.values()).map(|(a, b)| a + b).collect()).unwrap();
        let mf = maximal_function_auto(&s, &f).unwrap().values;
        let mg = maximal_function_auto(&s, &g).unwrap().values;
        let ms = maximal_function_auto(&s, &sum).unwrap().values;
        let two = 2f64.powi(rng.gen_range(-30..30));
        let m2 = maximal_function_auto(&s, &f.scaled(two).unwrap()).unwrap().values;
        let c = rng.gen_range(0.0..1e4);
        let mc = maximal_function_auto(&s, &f.scaled(c).unwrap()).unwrap().values;
        for x in 0..n {
            check(mf[x] >= f.get(x), || format!("case {case}: domination fails at {x}"))?;
            check(m2[x] == two * mf[x], || format!("case {case}: homogeneity (2^k) fails at {x}"))?;
            check((mc[x] - c * mf[x]).abs() <= 1e-13 * c * mf[x], || format!("case {case}: homogeneity fails at {x}"))?;
            check(ms[x] <= (mf[x] + mg[x]) * (1.0 + 1e-14), || format!("case {case}: sublinearity fails at {x}"))?;
            check(ms[x] >= mf[x], || format!("case {case}: monotonicity fails at {x}"))?;
        }

        let p = ExponentFunction::new(
            (0..n)
                .map(|_| match rng.gen_range(0..5) {
                    0 => 1.0,
                    1 => f64::INFINITY,
                    _ => rng.gen_range(1.0..6.0),
                })
                .collect(),
        )
        .unwrap();
        let (l1, l2) = (rng.gen_range(0.01..5.0), rng.gen_range(5.0..50.0));
        let rho = |l: f64| modular(&s, &p, &f.scaled(1.0 / l).unwrap()).unwrap();
        check(rho(l1) >= rho(l2), || format!("case {case}: modular monotonicity fails"))?;
        let nf = luxemburg_norm(&s, &p, &f, TOL).unwrap().value;
        let ng = luxemburg_norm(&s, &p, &g, TOL).unwrap().value;
        let ns = luxemburg_norm(&s, &p, &sum, TOL).unwrap().value;
        if nf > 0.0 {
            check(rho(nf * (1.0 + 2.0 * TOL)) <= 1.0, || format!("case {case}: unit-ball property fails"))?;
        }
        check(ns <= nf + ng + 10.0 * TOL * (nf + ng), || format!("case {case}: triangle inequality fails"))?;
    }
    Ok(format!("{CASES} cases each for 8 invariants, zero failures"))
}

fn dyadic_twelve() -> (SpaceDescriptor, RadiusWindow) {
    (gen_dyadic_interval(12).unwrap(), RadiusWindow::dyadic(2f64.powi(-10), 0.5).unwrap())
}

fn check_report(r: &BlowupReport, s: &SpaceDescriptor, e: &[usize], a: f64, delta: f64) -> Result<(), String> {
    let k = r.k;
    let dec = &r.witness.decomposition;
    let mu0 = s.measure(&dec.balls[0]);
    for (i, ann) in dec.annuli.iter().enumerate() {
        let mu_ann = s.measure(ann);
        let mu_b = s.measure(&dec.balls[i]);
        check(mu_ann >= (1.0 - delta) * mu_b - 1e-12, || format!("k={k}: annulus {i} too light"))?;
        check(mu_b >= a.powi(-(i as i32)) * mu0 - 1e-12, || format!("k={k}: ball {i} too light"))?;
        let hit: Vec<usize> = ann.iter().copied().filter(|y| e.binary_search(y).is_ok()).collect();
        check(s.measure(&hit) >= (1.0 - delta) / 2.0 * mu_ann - 1e-12, || format!("k={k}: annulus {i} misses E"))?;
    }
    Ok(())
}

fn certified_chain(r: &BlowupReport) -> Result<(), String> {
    check(r.ratio >= r.certified_ratio, || format!("k={}: ratio {} < certified {}", r.k, r.ratio, r.certified_ratio))?;
    check(r.certified_ratio >= r.finite_theory_bound * (1.0 - 1e-8), || {
        format!("k={}: certified {} < bound {}", r.k, r.certified_ratio, r.finite_theory_bound)
    })
}

fn proof_skeleton() -> Outcome {
    let (s, w) = dyadic_twelve();
    let cert = doubling_certificate(&s, &w).unwrap();
    let p = ExponentFunction::constant(s.n(), 1.0).unwrap();
    let mut summary = Vec::new();
    for k in [1u32, 2, 4, 8] {
        let r = blowup_report(&s, &p, k, &cert, &w, TOL, WitnessMode::Density).map_err(|e| e.to_string())?;
        check_report(&r, &s, &sublevel_set(&p, k), cert.a_const, cert.delta_const)?;
        check(r.modular_fk <= r.modular_bound, || format!("k={k}: modular {} > {}", r.modular_fk, r.modular_bound))?;
        certified_chain(&r)?;
        summary.push(format!("k={k} J={} certified {:.3} >= {:.3}", r.j, r.certified_ratio, r.finite_theory_bound));
    }
    Ok(format!("A={:.4} delta={:.4}; {}", cert.a_const, cert.delta_const, summary.join(", ")))
}

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = maxblow::cli::run(std::iter::once("maxblow").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn divergence_witness() -> Outcome {
    let (code, out, err) = run_cli(&[
        "sweep", "--gen", "dyadic:12", "--exponent", "const:1", "--k", "1,2,4,8", "--window", "0.0009765625:0.5",
    ]);
    check(code == 0, || format!("sweep exit {code}: {err}"))?;
    let rows = maxblow::counterexample::parse_sweep_csv(&out)?;
    let (first, last) = (&rows[0], &rows[rows.len() - 1]);
    let growth = last.ratio / first.ratio;
    check(growth >= 2.0, || format!("ratio(8)/ratio(1) = {growth:.3}"))?;
    Ok(format!("ratio(8)/ratio(1) = {growth:.3}, sweep exit 0, {}", err.trim()))
}

fn usc_variant() -> Outcome {
    let (s, w) = dyadic_twelve();
    let cert = doubling_certificate(&s, &w).unwrap();
    let labels = s.labels().unwrap();
    let p = ExponentFunction::new((0..s.n()).map(|x| if labels.point(x)[0] < 0.5 { 1.0 } else { 2.0 }).collect())
        .unwrap();
    let mut summary = Vec::new();
    for k in [1u32, 2, 4, 8] {
        let r = blowup_report(&s, &p, k, &cert, &w, TOL, WitnessMode::Usc).map_err(|e| e.to_string())?;
        check(r.witness.support_set.iter().all(|&x| labels.point(x)[0] < 0.5), || {
            format!("k={k}: support leaves the left half")
        })?;
        check(r.witness.support_set == r.witness.decomposition.balls[0], || format!("k={k}: support is not B^0"))?;
        certified_chain(&r)?;
        summary.push(format!("k={k} certified {:.3} >= {:.3}", r.certified_ratio, r.finite_theory_bound));
    }
    Ok(summary.join(", "))
}

fn negative_controls() -> Outcome {
    let (code, out, _) = run_cli(&["sweep", "--gen", "dyadic:10", "--exponent", "const:2", "--k", "1,2"]);
    check(code == 1 && out.is_empty(), || format!("p = 2 sweep exit {code}"))?;
    let (s, w) = dyadic_twelve();
    let cert = doubling_certificate(&s, &w).unwrap();
    let p = ExponentFunction::constant(s.n(), 2.0).unwrap();
    for k in [1u32, 2, 8] {
        let err = blowup_report(&s, &p, k, &cert, &w, TOL, WitnessMode::Density).unwrap_err();
        check(err == CounterexampleError::EmptySublevelSet { k }, || format!("k={k}: {err}"))?;
    }

    let single = SpaceDescriptor::from_table(vec![vec![0.0]], vec![1.0]).unwrap();
    let c = doubling_certificate(&single, &RadiusWindow::dyadic(0.125, 1.0).unwrap()).unwrap();
    check(!c.reverse_doubling && c.delta_const == 1.0, || "single point passes reverse doubling".into())?;

    let s8 = gen_dyadic_interval(8).unwrap();
    let w8 = RadiusWindow::dyadic(2f64.powi(-6), 0.5).unwrap();
    let c8 = doubling_certificate(&s8, &w8).unwrap();
    let err = find_density_point(&s8, &[77], &c8).unwrap_err();
    check(err == CounterexampleError::NoDensityPoint, || format!("sparse E: {err}"))?;
    Ok("empty E_k exits 1, single point flagged, sparse E has no density point".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome, Duration); 7] = [
        ("constant-exponent oracle", constant_exponent_oracle, Duration::from_secs(10)),
        ("maximal-operator oracle", maximal_oracle, Duration::from_secs(60)),
        ("invariant suite", invariant_suite, Duration::MAX),
        ("proof skeleton, dyadic L=12", proof_skeleton, Duration::from_secs(120)),
        ("divergence witness", divergence_witness, Duration::MAX),
        ("usc variant, twopiece exponent", usc_variant, Duration::MAX),
        ("negative controls", negative_controls, Duration::MAX),
    ];
    let mut failed = 0;
    for (i, (name, run, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > *limit => Err(format!("{detail}; took {elapsed:.1?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail} ({elapsed:.2?})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {why} ({elapsed:.2?})", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", criteria.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
