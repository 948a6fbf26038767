//! One line per acceptance criterion, `PASS` or `FAIL`, with timings.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lebesgue::cantor::{build_stage, CantorKind};
use lebesgue::cli::{random_multiinterval, run_to_string};
use lebesgue::convergence::{check_dominated, check_monotone, egorov_witness, fatou_gap, ConvergenceConfig, ConvergenceError};
use lebesgue::fubini::{fubini_check, section_identity_check, FubiniError};
use lebesgue::lebesgue::{
    abs_continuity_probe, exterior_interior_measure, indicator_of, integrate_bounded, measure, SetDescriptor, TruncationSchedule,
};
use lebesgue::qc::{QcFunction, QcSequence};
use lebesgue::rational::{int, pow2_inv, rat, Endpoint, Rational};
use lebesgue::riemann::{dini_test, riemann_integrate};
use lebesgue::set::{disjointify_1d, dyadic_decompose, Interval, Multirectangle, OpenSet, Rectangle, Topology};
use lebesgue::tietze::{circle_tent, extend_1d, extend_nd, CircleK, ClosedComplementDomain, Sampler};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn qc(s: &str) -> QcFunction {
    QcFunction::parse(s).unwrap_or_else(|e| panic!("{s}: {e}"))
}

fn unit() -> Vec<(Rational, Rational)> {
    vec![(int(0), int(1))]
}

fn dirichlet() -> Outcome {
    let (code, out, err) = run_to_string(["lebesgue", "integrate", "--fn", "dirichlet", "--domain", "[0,1]"]);
    ensure(code == 0, || format!("exit {code}: {err}"))?;
    let v: serde_json::Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    ensure(v["value"] == "0/1", || format!("value {}", v["value"]))?;
    ensure(v["errorBound"] == 0.0, || format!("errorBound {}", v["errorBound"]))?;
    let trace = v["trace"].as_array().ok_or("no trace")?;
    ensure(trace.iter().all(|t| t["value"] == 0.0 && t["riemannGap"] == 0.0), || "a stage was nonzero".into())?;
    Ok(format!("0/1 exactly at all {} stages", trace.len()))
}

/// Removed measure through each stage, read off the gaps of stage `top`:
/// a stage-`s` gap has length `base^{-s}`.
fn measures_by_gap(kind: CantorKind, top: u32) -> Result<Vec<Rational>, String> {
    let st = build_stage(kind, top).map_err(|e| e.to_string())?;
    let (pairs, denom) = st.scaled().ok_or("endpoints overflow i128")?;
    let base: i128 = if kind == CantorKind::Ternary { 3 } else { 4 };
    let stage_of: std::collections::HashMap<i128, usize> = (1..=top).map(|s| (denom / base.pow(s), s as usize)).collect();
    let mut counts = vec![0u64; top as usize + 1];
    for w in pairs.windows(2) {
        let len = w[1].0 - w[0].1;
        let s = stage_of.get(&len).ok_or_else(|| format!("gap of length {len}/{denom}"))?;
        counts[*s] += 1;
    }
    let mut per_stage = vec![Rational::from_integer(0.into()); top as usize + 1];
    let mut total = Rational::from_integer(0.into());
    for s in 1..=top {
        ensure(counts[s as usize] == 1 << (s - 1), || format!("{kind} stage {s}: {} gaps", counts[s as usize]))?;
        total += kind.gap_length(s) * Rational::from_integer(counts[s as usize].into());
        per_stage[s as usize] = total.clone();
    }
    ensure(st.measure_removed() == total, || format!("{kind} stage {top}: stored {} vs gaps {total}", st.measure_removed()))?;
    Ok(per_stage)
}

fn cantor() -> Outcome {
    let svc = measures_by_gap(CantorKind::SmithVolterra, 20)?;
    let ternary = measures_by_gap(CantorKind::Ternary, 20)?;
    let two_thirds = rat(2, 3);
    let mut power = Rational::one();
    for j in 1..=20u32 {
        let expect = rat(1, 2) * (Rational::one() - pow2_inv(j));
        ensure(svc[j as usize] == expect, || format!("svc stage {j}: {}", svc[j as usize]))?;
        ensure(rat(1, 2) - &svc[j as usize] == pow2_inv(j + 1), || format!("svc limit gap at {j}"))?;
        ensure(CantorKind::SmithVolterra.removed_measure(j) == expect, || format!("svc closed form at {j}"))?;
        power *= &two_thirds;
        let tern = CantorKind::Ternary.removed_measure(j);
        ensure(tern == Rational::one() - &power, || format!("ternary stage {j}: {tern}"))?;
        ensure(ternary[j as usize] == tern, || format!("ternary gaps at stage {j}"))?;
        let built = build_stage(CantorKind::SmithVolterra, j).map_err(|e| e.to_string())?;
        ensure(built.measure_removed() == expect, || format!("svc build at stage {j}"))?;
        if j <= 10 {
            let union = built.removed().measure();
            ensure(union.finite() == Some(&expect), || format!("svc removed set at stage {j}"))?;
        }
    }
    Ok("SVC J ≤ 20 and ternary J ≤ 20 exact".into())
}

fn riemann_lebesgue() -> Outcome {
    let fns = [
        "poly:0,0,1",
        "step:0,1/3,1,2,5",
        "id",
        "const:3/7",
        "power:7",
        "cos-power:2,3",
        "abs(poly:-1/2,1)",
        "max(poly:0,1,poly:1,-1)",
        "spike:3",
        "sum(id,neg(power:3))",
    ];
    let mut worst = 0.0f64;
    for s in fns {
        let f = qc(s);
        let r = riemann_integrate(&f.expr, &unit(), 1e-8).map_err(|e| format!("{s}: {e}"))?;
        let l = integrate_bounded(&f, &unit(), 64, 1e-8).map_err(|e| format!("{s}: {e}"))?;
        let diff = (l.value - r.value).abs();
        ensure(diff <= l.error_bound + 1e-8, || format!("{s}: lebesgue {} riemann {} bound {}", l.value, r.value, l.error_bound))?;
        // the stage approximants themselves, each against its own bound
        for t in &l.trace {
            let d = (t.value - r.value).abs();
            ensure(d <= t.error_bound + 1e-8, || format!("{s} stage {}: {} vs {} bound {}", t.n, t.value, r.value, t.error_bound))?;
        }
        let last = l.trace.last().ok_or("no stages")?;
        worst = worst.max((last.value - r.value).abs());
    }
    Ok(format!("10 functions, stage-64 approximants within {worst:.2e} of Riemann"))
}

fn dini() -> Outcome {
    let thomae = qc("thomae");
    for alpha in [rat(1, 5), rat(1, 10)] {
        for eps in [rat(1, 10), rat(1, 100)] {
            let o = dini_test(&thomae.expr, &int(0), &int(1), &alpha, &eps, 4096).map_err(|e| e.to_string())?;
            ensure(o.pass, || format!("thomae fails at α={alpha}, ε={eps}"))?;
        }
    }
    let d = qc("dirichlet");
    for alpha in [rat(1, 2), rat(1, 4)] {
        let o = dini_test(&d.expr, &int(0), &int(1), &alpha, &rat(1, 10), 256).map_err(|e| e.to_string())?;
        ensure(!o.pass && o.heavy_length == int(1), || format!("dirichlet at α={alpha}: pass {} heavy {}", o.pass, o.heavy_length))?;
    }
    Ok("thomae passes 4 (α, ε) pairs; dirichlet heavy length 1".into())
}

fn random_k(rng: &mut impl Rng) -> ClosedComplementDomain {
    let gaps = rng.gen_range(1..=3);
    let mut removed = Vec::new();
    for _ in 0..gaps {
        let a: i64 = rng.gen_range(0..30);
        let w: i64 = rng.gen_range(1..=6);
        removed.push(Interval::open(rat(a, 32), rat((a + w).min(31), 32).max(rat(a, 32) + rat(1, 64))));
    }
    ClosedComplementDomain::new(Rectangle::parse("[0,1]").unwrap(), Multirectangle::from_intervals(removed)).expect("K nonempty")
}

fn tietze() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let trials = 500;
    for t in 0..trials {
        let k = random_k(&mut rng);
        let a = rat(rng.gen_range(-8..=8), 4);
        let b = rat(rng.gen_range(-8..=8), 4);
        let c = rat(rng.gen_range(0..=8), 4);
        let f = |x: &Rational| &a * x + &b;
        let g = |x: &Rational| {
            let v = &a * x + &b;
            let w = &c - x;
            if v > w {
                v
            } else {
                w
            }
        };
        let mut kpts: Vec<Rational> = Vec::new();
        for i in 0..=64 {
            let x = rat(i, 64);
            if k.contains(std::slice::from_ref(&x)) {
                kpts.push(x);
            }
        }
        for iv in disjointify_1d(k.removed()).intervals() {
            for e in [iv.lo(), iv.hi()] {
                if let Endpoint::Finite(x) = e {
                    if k.contains(std::slice::from_ref(x)) {
                        kpts.push(x.clone());
                    }
                }
            }
        }
        // f is affine, so its extremes on K sit at sampled boundary points
        let lo = kpts.iter().map(&f).min().ok_or("empty K")?;
        let hi = kpts.iter().map(&f).max().ok_or("empty K")?;
        for i in 0..=40 {
            let x = rat(i, 40);
            let fx = extend_1d(&k, f, &x).map_err(|e| e.to_string())?;
            let gx = extend_1d(&k, g, &x).map_err(|e| e.to_string())?;
            ensure(lo <= fx && fx <= hi, || format!("trial {t}: F({x}) = {fx} outside [{lo}, {hi}]"))?;
            ensure(fx <= gx, || format!("trial {t}: F({x}) > G({x})"))?;
            if k.contains(std::slice::from_ref(&x)) {
                ensure(fx == f(&x), || format!("trial {t}: F ≠ f at {x}"))?;
            }
        }
        if t % 10 == 0 {
            let lo2 = rat(rng.gen_range(1..4), 8);
            let hi2 = &lo2 + rat(rng.gen_range(1..4), 8);
            let removed = Multirectangle::new(2, vec![Rectangle::open(&[(lo2.clone(), hi2.clone()), (rat(1, 4), rat(3, 4))])]).unwrap();
            let k2 = ClosedComplementDomain::new(Rectangle::parse("[0,1]x[0,1]").unwrap(), removed).map_err(|e| e.to_string())?;
            let (p, q) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let f2 = move |x: &[f64]| p * x[0] + q * x[1];
            let s = Sampler { resolution: 4, lipschitz: None, tol: None };
            let x = [(lebesgue::rational::to_f64(&lo2) + lebesgue::rational::to_f64(&hi2)) / 2.0, 0.5];
            let mut prev = f64::NEG_INFINITY;
            for n in 0..5 {
                let e = extend_nd(&k2, &f2, &x, n, &s).map_err(|e| e.to_string())?;
                ensure(e.value >= prev, || format!("trial {t}: F_{n} decreased"))?;
                prev = e.value;
            }
            let on_k = [rng.gen_range(0.0..1.0), 0.125];
            let e = extend_nd(&k2, &f2, &on_k, 3, &s).map_err(|e| e.to_string())?;
            ensure((e.value - f2(&on_k)).abs() <= f64::EPSILON * 4.0, || format!("trial {t}: F ≠ f on K"))?;
        }
    }
    let x0 = |p: &[f64]| p[0];
    for n in 0..6 {
        let v = extend_nd(&CircleK::default(), &x0, &[0.0, 0.0], n, &Sampler::default()).map_err(|e| e.to_string())?.value;
        ensure(v == 1.0, || format!("circle F_{n}(0,0) = {v}, max_K f = 1"))?;
    }
    for m in 1..6 {
        let (k, f) = circle_tent(m);
        let v = extend_nd(&k, &f, &[0.0, 0.0], 4, &Sampler::default()).map_err(|e| e.to_string())?.value;
        ensure((v - if m % 2 == 1 { 1.0 } else { 0.0 }).abs() < 1e-12, || format!("circle tent {m}: {v}"))?;
    }
    Ok(format!("{trials} trials; circle F_n(0,0) = max_K f"))
}

fn egorov() -> Outcome {
    let seq = QcSequence::parse("power").unwrap();
    let cfg = ConvergenceConfig::default();
    let sigmas = [rat(1, 2), rat(1, 4), rat(1, 8), rat(1, 16)];
    let w = egorov_witness(&seq, &rat(1, 8), &sigmas, &cfg).map_err(|e| e.to_string())?;
    ensure(w.length < rat(1, 8), || format!("L(O) = {}", w.length))?;
    for row in &w.table {
        ensure(row.stage.is_some() && row.sup < lebesgue::rational::to_f64(&row.sigma), || format!("σ = {} not reached", row.sigma))?;
    }
    let single = egorov_witness(&seq, &rat(1, 8), &sigmas[3..], &cfg).map_err(|e| e.to_string())?;
    ensure(single.levels == w.levels, || "O depends on σ".into())?;
    let trap = QcSequence::parse("trapezoid").unwrap();
    ensure(matches!(egorov_witness(&trap, &rat(1, 8), &sigmas, &cfg), Err(ConvergenceError::UnboundedDomain)), || "trapezoid accepted".into())?;
    let stages: Vec<String> = w.table.iter().map(|r| r.stage.unwrap_or(0).to_string()).collect();
    Ok(format!("L(O) = {} < 1/8, stages {}", w.length, stages.join(",")))
}

fn convergence() -> Outcome {
    let cfg = ConvergenceConfig::default();
    let spike = QcSequence::parse("spike").unwrap();
    let d = check_dominated(&spike, None, &cfg).map_err(|e| e.to_string())?;
    ensure(d.violation.as_ref().is_some_and(|v| v.hypothesis == "dominated"), || "spike not flagged".into())?;
    let f = fatou_gap(&spike, &cfg).map_err(|e| e.to_string())?;
    ensure((f.gap - 1.0).abs() <= 1e-6, || format!("spike Fatou gap {}", f.gap))?;
    let power = QcSequence::parse("power").unwrap();
    let p = check_dominated(&power, None, &cfg).map_err(|e| e.to_string())?;
    ensure(p.violation.is_none() && p.gap.abs() <= 1e-6, || format!("x^n gap {} violation {:?}", p.gap, p.violation))?;
    let tail = QcSequence::parse("tail-indicator").unwrap();
    let m = check_monotone(&tail, &cfg).map_err(|e| e.to_string())?;
    ensure(m.violation.is_some(), || "1_[n,∞) not flagged".into())?;
    Ok(format!("spike Fatou gap {:.6} (expected 1), x^n gap {:.2e}", f.gap, p.gap.abs()))
}

fn random_boxes(rng: &mut impl Rng, dim: usize) -> Multirectangle {
    let n = rng.gen_range(1..=4);
    let rects = (0..n)
        .map(|_| {
            let sides = (0..dim)
                .map(|_| {
                    let a: i64 = rng.gen_range(-4..4);
                    let w: i64 = rng.gen_range(1..=4);
                    let topo = [Topology::Open, Topology::Closed, Topology::HalfOpenLo, Topology::HalfOpenHi][rng.gen_range(0..4)];
                    Interval::new(Endpoint::Finite(rat(a, 3)), Endpoint::Finite(rat(a + w, 3)), topo).unwrap()
                })
                .collect();
            Rectangle::new(sides)
        })
        .collect();
    Multirectangle::new(dim, rects).unwrap()
}

fn fubini() -> Outcome {
    let xy = qc("prod(id;id)");
    let rep = fubini_check(&xy, &Rectangle::parse("[0,1]x[0,1]").unwrap(), 1e-6).map_err(|e| e.to_string())?;
    ensure((rep.direct.value - 0.25).abs() <= 1e-6, || format!("direct {}", rep.direct.value))?;
    for o in &rep.iterated {
        ensure((o.result.value - 0.25).abs() <= 1e-6, || format!("{} = {}", o.order, o.result.value))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for dim in [2, 3] {
        for t in 0..20 {
            let a = random_boxes(&mut rng, dim);
            for axis in 0..dim {
                let r = section_identity_check(&a, axis).map_err(|e| e.to_string())?;
                ensure(r.agree && Some(&r.volume) == a.measure().finite(), || {
                    format!("ℝ^{dim} set {t} axis {axis}: {} vs {}", r.volume, r.integral)
                })?;
            }
        }
    }
    let e = qc("exp-abs-y");
    ensure(matches!(fubini_check(&e, &Rectangle::whole_space(2), 1e-6), Err(FubiniError::NotSummable(_))), || "exp-abs-y not gated".into())?;
    Ok("xy = 1/4 in all orders; 40 section sets exact; exp-abs-y NotSummable".into())
}

/// Sweep-line length of a union of bounded intervals.
fn oracle_union_length(m: &Multirectangle) -> Option<Rational> {
    let mut ends: Vec<(Rational, Rational)> = Vec::new();
    for iv in m.intervals() {
        match (iv.lo(), iv.hi()) {
            (Endpoint::Finite(a), Endpoint::Finite(b)) => ends.push((a.clone(), b.clone())),
            _ => return None,
        }
    }
    ends.sort();
    let mut total = Rational::from_integer(0.into());
    let mut reach: Option<Rational> = None;
    for (a, b) in ends {
        let start = match &reach {
            Some(r) if r > &a => r.clone(),
            _ => a,
        };
        if b > start {
            total += &b - &start;
            reach = Some(b);
        }
    }
    Some(total)
}

fn measure_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let schedule = TruncationSchedule::default();
    let bx = Rectangle::parse("[0,5]").unwrap();
    for t in 0..100 {
        let components = rng.gen_range(1..=5);
        let m = random_multiinterval(&mut rng, components);
        let sweep = oracle_union_length(&m).ok_or("unbounded")?;
        let disjoint = disjointify_1d(&m).length().finite().cloned().ok_or("unbounded")?;
        ensure(disjoint == sweep, || format!("set {t} {m}: disjointified {disjoint} vs {sweep}"))?;
        let via = measure(&SetDescriptor::Characteristic(indicator_of(&m)), &schedule, 4).map_err(|e| e.to_string())?;
        ensure(via.exact.as_ref() == Some(&disjoint), || format!("set {t} {m}: {:?} vs {disjoint}", via.exact))?;
        let b = exterior_interior_measure(&m, &bx, &rat(1, 64)).map_err(|e| e.to_string())?;
        ensure(b.exterior.0 <= sweep && sweep <= b.exterior.1, || format!("set {t}: exterior bracket misses {sweep}"))?;
        ensure(b.interior.0 <= sweep && sweep <= b.interior.1, || format!("set {t}: interior bracket misses {sweep}"))?;
    }
    let mut probes = 0;
    for (s, seed) in [("poly:0,1", 1), ("sum(dirichlet,const:1/2)", 2), ("step:0,1/2,1,-3,4", 3)] {
        let rows = abs_continuity_probe(&qc(s), &unit(), 12, seed, 8).map_err(|e| e.to_string())?;
        ensure(rows.iter().all(|r| r.within_bound == Some(true)), || format!("{s}: probe exceeded M·λ(O)"))?;
        probes += rows.len();
    }
    Ok(format!("100 sets exact, brackets contain the oracle, {probes} probes within M·λ(O)"))
}

fn dyadic() -> Outcome {
    for d in [1usize, 2] {
        let unit_open = Rectangle::open(&vec![(int(0), int(1)); d]);
        let o = OpenSet::new(Multirectangle::new(d, vec![unit_open]).unwrap()).map_err(|e| e.to_string())?;
        let bx = Rectangle::closed(&vec![(int(0), int(1)); d]);
        for j in 1..=12u32 {
            let dec = dyadic_decompose(&o, &bx, j).map_err(|e| e.to_string())?;
            let side = Rational::one() - pow2_inv(j - 1);
            let closed_form = if d == 1 { side.clone() } else { &side * &side };
            ensure(dec.length() == closed_form, || format!("d={d} J={j}: {}", dec.length()))?;
            // level-J cubes [i/2^J, (i+1)/2^J]^d whose closure lies in (0,1)^d
            let n = 1u64 << j;
            let inside_1d = (0..n).filter(|&i| i >= 1 && i + 1 < n).count() as u64;
            let count = if d == 1 {
                inside_1d
            } else {
                (0..n * n).filter(|&c| (c % n >= 1 && c % n + 1 < n) && (c / n >= 1 && c / n + 1 < n)).count() as u64
            };
            let brute = Rational::new(count.into(), (n.pow(d as u32)).into());
            ensure(brute == dec.length(), || format!("d={d} J={j}: brute force {brute}"))?;
        }
    }
    Ok("(0,1) and (0,1)² match closed forms and enumeration for J ≤ 12".into())
}

type Criterion = (u32, &'static str, u64, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "Dirichlet integral", 1, dirichlet),
        (2, "Cantor measures", 1, cantor),
        (3, "Riemann/Lebesgue agreement", 30, riemann_lebesgue),
        (4, "Dini test", 10, dini),
        (5, "Tietze properties", 60, tietze),
        (6, "Egorov finite stage", 10, egorov),
        (7, "Convergence theorems", 10, convergence),
        (8, "Fubini", 60, fubini),
        (9, "Measure suite", 60, measure_suite),
        (10, "Dyadic decomposition", 30, dyadic),
    ];
    let only: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (n, name, limit, run) in criteria {
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let start = Instant::now();
        let out = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let took = start.elapsed();
        let out = match out {
            Ok(msg) if took > Duration::from_secs(limit) => Err(format!("{msg}; took {took:.2?} > {limit} s")),
            other => other,
        };
        match out {
            Ok(msg) => println!("criterion {n:>2} PASS  {name}: {msg} ({took:.2?})"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n:>2} FAIL  {name}: {msg} ({took:.2?})");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
