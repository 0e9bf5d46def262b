//! Acceptance criteria 1 to 12. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::Rng;
use terracini_core::conditioning::{cpdcond, norm_balance};
use terracini_core::decomp::cpd_gevd;
use terracini_core::lab::fixtures::{integer_example, positive_example};
use terracini_core::lab::{
    gen_random_factors, odeco_sweep, random_matrix, rank1_sweep, run_experiment, seeded_rng,
    sequence_rows, unit_vector, worst_direction, Experiment, Paatero,
    SampleKind, Sequence,
};
use terracini_core::linalg::orth;
use terracini_core::scaling::{distance, iterated_scaling, pair_distance, DistanceOptions};
use terracini_core::{build_terracini, cpdgen, kernel_basis, rank_one, GroupElement, Params, Representative};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn kappa(p: &Params) -> f64 {
    cpdcond(p).expect("valid params").kappa()
}

fn fixture_kappa() -> Outcome {
    let start = Instant::now();
    let k = kappa(&positive_example());
    let elapsed = start.elapsed().as_secs_f64();
    let r = rel(k, 18.410308);
    check(r <= 1e-4 && elapsed < 0.1, format!("kappa {k:.8}, rel {r:.2e}, {elapsed:.4} s"))
}

fn integer_fixture() -> Outcome {
    let p = integer_example();
    let k = kappa(&p);
    let kb = kernel_basis(&p).unwrap();
    let prod = build_terracini(&p).matrix * &kb.matrix;
    let worst = prod.column_iter().map(|c| c.norm()).fold(0.0, f64::max);
    check(
        (k - 0.769).abs() <= 1e-3 && kb.ncols() == 4 && worst <= 1e-12,
        format!("kappa {k:.6}, kernel dim {}, max |T K col| {worst:.1e}", kb.ncols()),
    )
}

fn rank1_law() -> Outcome {
    let mut worst = rank1_sweep(3, 10)
        .unwrap()
        .iter()
        .map(|r| r.deviation.abs())
        .fold(0.0, f64::max);
    let mut rng = seeded_rng(31);
    for d in 3..=10 {
        for _ in 0..3 {
            let dims: Vec<usize> = (0..d).map(|_| rng.random_range(2..=3)).collect();
            let factors: Vec<DMatrix<f64>> = dims
                .iter()
                .map(|&n| random_matrix(&mut rng, n, 1, SampleKind::Normal) * rng.random_range(0.1..10.0))
                .collect();
            let k = kappa(&Params::from_factors(&factors).unwrap());
            worst = worst.max((k.powi(-2) - d as f64).abs());
        }
    }
    check(worst <= 1e-10, format!("max |kappa^-2 - d| = {worst:.2e}"))
}

fn rank1_singular_values() -> Outcome {
    let mut rng = seeded_rng(41);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let d = rng.random_range(2..=6);
        let dims: Vec<usize> = (0..d).map(|_| rng.random_range(2..=4)).collect();
        let alpha: f64 = rng.random_range(0.2..5.0);
        let each = alpha.powf(1.0 / d as f64);
        let vectors: Vec<Vec<f64>> = dims
            .iter()
            .map(|&n| unit_vector(&mut rng, n).into_iter().map(|x| x * each).collect())
            .collect();
        let shape = terracini_core::Shape::new(dims.clone(), 1).unwrap();
        let p = terracini_core::tensor::vecr(&[Representative::new(vectors)], &shape).unwrap();
        let s = build_terracini(&p).singular_values();
        let base = alpha.powf(1.0 - 1.0 / d as f64);
        let sigma = shape.sigma();
        let mut expected = vec![(d as f64).sqrt() * base];
        expected.extend(std::iter::repeat_n(base, sigma));
        expected.extend(std::iter::repeat_n(0.0, d - 1));
        if s.len() != expected.len() {
            return Err(format!("{} singular values, expected {}", s.len(), expected.len()));
        }
        for (a, b) in s.iter().zip(&expected) {
            worst = worst.max((a - b).abs());
        }
    }
    check(worst <= 1e-10, format!("max deviation {worst:.2e} over 20 instances"))
}

const ODECO_TABLE: [f64; 16] = [
    -0.2, 0.4, 1.1, 1.8, 2.4, 3.1, 3.8, 4.4, 5.1, 5.8, 6.4, 7.1, 7.8, 8.4, 9.1, 9.8,
];

fn odeco() -> Outcome {
    let rows = odeco_sweep(5, 15).unwrap();
    let worst = rows
        .iter()
        .zip(ODECO_TABLE)
        .map(|(r, t)| (r.log10_kappa - t).abs())
        .fold(0.0, f64::max);
    let n = rows.len() as f64;
    let xm = rows.iter().map(|r| r.s as f64).sum::<f64>() / n;
    let ym = rows.iter().map(|r| r.log10_kappa).sum::<f64>() / n;
    let sxy: f64 = rows.iter().map(|r| (r.s as f64 - xm) * (r.log10_kappa - ym)).sum();
    let sxx: f64 = rows.iter().map(|r| (r.s as f64 - xm).powi(2)).sum();
    let slope = sxy / sxx;
    check(
        worst <= 0.05 && (slope - 2.0 / 3.0).abs() <= 0.01,
        format!("max table deviation {worst:.3}, slope {slope:.5}"),
    )
}

fn isl_contract() -> Outcome {
    let size = 1e-2;
    let mut worst_delta: f64 = 0.0;
    let mut worst_kernel: f64 = 0.0;
    let mut worst_term: f64 = 0.0;
    let mut slope_violations = 0;
    for seed in 0..100u64 {
        let mut rng = seeded_rng(1000 + seed);
        let raw = gen_random_factors(&mut rng, &[3, 3, 2], 2, SampleKind::Normal).unwrap();
        let (p, _) = norm_balance(&raw).unwrap();
        let kb = kernel_basis(&p).unwrap();
        let coeffs = unit_vector(&mut rng, kb.ncols());
        let dir = kb.apply(&coeffs);
        let scale = size / norm(&dir);
        let nabla: Vec<f64> = dir.iter().map(|x| x * scale).collect();
        let res = match iterated_scaling(&p, &nabla) {
            Ok(res) => res,
            Err(e) => return Err(format!("seed {seed}: {e}")),
        };
        worst_delta = worst_delta.max(norm(&res.delta) / (2.0 * res.lambda * size * size));
        let dn = norm(&res.delta);
        if dn > 0.0 {
            worst_kernel = worst_kernel.max(kb.transpose_norm(&res.delta) / dn);
        }
        for i in 0..p.rank() {
            let a = rank_one(&p.representative(i));
            let b = rank_one(&res.p_dot.representative(i));
            worst_term = worst_term.max(a.distance(&b) / a.norm());
        }
        let rate = res.lambda * size;
        for w in res.nabla_norms.windows(2) {
            if w[1] > 10.0 * f64::EPSILON && w[1] > rate * w[0] {
                slope_violations += 1;
            }
        }
    }
    check(
        worst_delta <= 1.0 && worst_kernel <= 1e-10 && worst_term <= 1e-12 && slope_violations == 0,
        format!(
            "max |delta|/(2 lambda |nabla|^2) {worst_delta:.2e}, max |K^T delta|/|delta| {worst_kernel:.1e}, \
             max term mismatch {worst_term:.1e}, slope violations {slope_violations}"
        ),
    )
}

fn worst_direction_ratio() -> Outcome {
    let w = worst_direction(&positive_example(), 1e-8).unwrap();
    check(w.rel_diff <= 1e-5, format!("estimate {:.8}, kappa {:.8}, rel {:.2e}", w.estimate, w.kappa, w.rel_diff))
}

fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> DMatrix<f64> {
    orth(&random_matrix(rng, n, n, SampleKind::Normal))
}

fn invariance() -> Outcome {
    let mut rng = seeded_rng(51);
    let mut worst_scale: f64 = 0.0;
    let mut worst_orth: f64 = 0.0;
    for _ in 0..100 {
        let dims: Vec<usize> = (0..3).map(|_| rng.random_range(3..=5)).collect();
        let r = rng.random_range(1..=3);
        let p = gen_random_factors(&mut rng, &dims, r, SampleKind::Normal).unwrap();
        let k = kappa(&p);
        let mut factors = p.to_factors();
        let beta = 10f64.powi(rng.random_range(-6..=6)) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        factors[0] *= beta;
        worst_scale = worst_scale.max(rel(kappa(&Params::from_factors(&factors).unwrap()), k));
        let rotated: Vec<DMatrix<f64>> = p
            .to_factors()
            .iter()
            .map(|m| random_orthogonal(&mut rng, m.nrows()) * m)
            .collect();
        worst_orth = worst_orth.max(rel(kappa(&Params::from_factors(&rotated).unwrap()), k));
    }
    let mut min_ratio = f64::INFINITY;
    for _ in 0..500 {
        let d = rng.random_range(3..=4);
        let dims: Vec<usize> = (0..d).map(|_| rng.random_range(2..=4)).collect();
        let shape = terracini_core::Shape::new(dims.clone(), 1).unwrap();
        let max_r = (shape.pi() / (shape.sigma() + 1)).clamp(1, 3);
        let r = rng.random_range(1..=max_r);
        let p = gen_random_factors(&mut rng, &dims, r, SampleKind::Normal).unwrap();
        let k = kappa(&p);
        if k.is_finite() {
            min_ratio = min_ratio.min(k * d as f64);
        }
    }
    let mut worst_fd: f64 = 0.0;
    for _ in 0..5 {
        let p = gen_random_factors(&mut rng, &[3, 2, 4], 2, SampleKind::Normal).unwrap();
        let t = build_terracini(&p).matrix;
        let h = 1e-6;
        for col in 0..p.data().len() {
            let mut e = vec![0.0; p.data().len()];
            e[col] = h;
            let plus = cpdgen(&p.axpy(1.0, &e).unwrap());
            let minus = cpdgen(&p.axpy(-1.0, &e).unwrap());
            let fd: Vec<f64> = plus.values().iter().zip(minus.values()).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            let exact: Vec<f64> = t.column(col).iter().copied().collect();
            let diff: Vec<f64> = fd.iter().zip(&exact).map(|(a, b)| a - b).collect();
            worst_fd = worst_fd.max(norm(&diff) / norm(&exact));
        }
    }
    check(
        worst_scale <= 1e-10 && worst_orth <= 1e-10 && min_ratio >= 1.0 && worst_fd <= 1e-7,
        format!(
            "scale {worst_scale:.1e}, orthogonal {worst_orth:.1e}, min kappa*d {min_ratio:.3}, finite differences {worst_fd:.1e}"
        ),
    )
}

fn distance_properties() -> Outcome {
    let mut rng = seeded_rng(61);
    let mut worst_orbit: f64 = 0.0;
    let mut worst_feasible = f64::NEG_INFINITY;
    for _ in 0..50 {
        let p = gen_random_factors(&mut rng, &[4, 3, 3], 3, SampleKind::Normal).unwrap();
        let g = GroupElement::random(&mut rng, 3, 3);
        let d = distance(&p, &g.apply(&p).unwrap()).unwrap().value;
        worst_orbit = worst_orbit.max(d / p.norm());
        let q = gen_random_factors(&mut rng, &[4, 3, 3], 3, SampleKind::Normal).unwrap();
        let plain: Vec<f64> = p.data().iter().zip(q.data()).map(|(a, b)| a - b).collect();
        worst_feasible = worst_feasible.max(distance(&p, &q).unwrap().value - norm(&plain));
    }
    let eps = 1e-3;
    let (a, b, c) = (unit_vector(&mut rng, 3), unit_vector(&mut rng, 3), unit_vector(&mut rng, 2));
    let scaled = |v: &[f64], s: f64| v.iter().map(|x| x * s).collect::<Vec<_>>();
    let left = Representative::new(vec![a.clone(), b.clone(), c.clone()]);
    let right = Representative::new(vec![scaled(&a, 1.0 + eps), scaled(&b, 1.0 - eps), c]);
    let pd = pair_distance(&left, &right, &DistanceOptions::default()).unwrap().value;
    check(
        worst_orbit <= 1e-10 && worst_feasible <= 0.0 && pd <= eps * eps + 1e-9,
        format!("orbit {worst_orbit:.1e}, d - |p-q| max {worst_feasible:.2e}, eps example {pd:.3e}"),
    )
}

fn gevd_round_trip() -> Outcome {
    let mut rng = seeded_rng(71);
    let mut worst_back: f64 = 0.0;
    let mut worst_fwd: f64 = 0.0;
    for i in 0..100 {
        let r = rng.random_range(1..=4);
        let dims = [rng.random_range(r.max(2)..=13), rng.random_range(r.max(2)..=11), rng.random_range(2..=7)];
        let p = gen_random_factors(&mut rng, &dims, r, SampleKind::Normal).unwrap();
        let t = cpdgen(&p);
        let q = match cpd_gevd(&t, r) {
            Ok(q) => q,
            Err(e) => return Err(format!("instance {i} {dims:?} r={r}: {e}")),
        };
        worst_back = worst_back.max(cpdgen(&q).distance(&t) / t.norm());
        let (pb, _) = norm_balance(&p).unwrap();
        let (qb, _) = norm_balance(&q).unwrap();
        worst_fwd = worst_fwd.max(distance(&pb, &qb).unwrap().value / pb.norm());
    }
    check(
        worst_back <= 1e-10 && worst_fwd <= 1e-8,
        format!("max backward {worst_back:.1e}, max orbit forward {worst_fwd:.1e}"),
    )
}

fn trends() -> Outcome {
    let seed = 1;
    let rows = sequence_rows(Experiment::IllConditioned, seed, 1..=45).unwrap();
    let max_back = rows.iter().filter(|r| !r.solver_failed).map(|r| r.backward).fold(0.0, f64::max);
    let failed = rows.iter().filter(|r| r.solver_failed).count();
    let k1 = rows[0].kappa;
    let k40 = rows[39].kappa;
    let dominated = rows
        .iter()
        .filter(|r| !r.warned && !r.solver_failed)
        .all(|r| r.forward_proxy <= 10.0 * r.bound);
    let ill = max_back <= 1e-13 && failed == 0 && k40 / k1 >= 1e8 && dominated;

    let dsl = sequence_rows(Experiment::DeSilvaLim, seed, 5..=100).unwrap();
    let first_warn = dsl.iter().find(|r| r.warned).map(|r| r.s);
    let late_warnings = dsl.iter().filter(|r| r.s >= 80 && r.warned).count();
    let early_warnings = dsl.iter().filter(|r| r.s <= 40 && r.warned).count();
    let desilva = late_warnings > 0 && early_warnings == 0;

    // The same instance the paatero experiment draws for this seed.
    let paatero = Paatero::sample(&mut seeded_rng(seed), [5, 4, 3]);
    let kp20 = kappa(&paatero.params(20));
    let kp100 = kappa(&paatero.params(100));
    let pa = kp100 / kp20 >= 1e3;

    check(
        ill && desilva && pa,
        format!(
            "ill-conditioned: max backward {max_back:.1e}, kappa {k1:.1e} -> {k40:.1e}, proxy <= 10 bound {dominated}; \
             de Silva-Lim: first warning at s={first_warn:?}; Paatero: kappa {kp20:.1e} -> {kp100:.1e}"
        ),
    )
}

fn determinism() -> Outcome {
    let mut differing = Vec::new();
    for e in Experiment::ALL {
        let mut a = Vec::new();
        let mut b = Vec::new();
        run_experiment(e, 12, None, &mut a).unwrap();
        run_experiment(e, 12, None, &mut b).unwrap();
        if a != b || a.is_empty() {
            differing.push(e.name());
        }
    }
    check(differing.is_empty(), format!("experiments differing between runs: {differing:?}"))
}

fn main() -> ExitCode {
    let suite_start = Instant::now();
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("positive fixture condition number", fixture_kappa),
        ("integer fixture condition number and kernel", integer_fixture),
        ("rank-1 law", rank1_law),
        ("rank-1 Terracini singular values", rank1_singular_values),
        ("odeco sweep", odeco),
        ("iterated scaling contract", isl_contract),
        ("worst-direction ratio", worst_direction_ratio),
        ("invariance suite", invariance),
        ("distance properties", distance_properties),
        ("GEVD round trip", gevd_round_trip),
        ("trend reproductions", trends),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failures += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} criterion {}: {name} ({detail}) [{:.2} s]", i + 1, start.elapsed().as_secs_f64());
    }
    let det = determinism();
    let total = suite_start.elapsed().as_secs_f64();
    let (tag, detail) = match det {
        Ok(d) if total < 300.0 => ("PASS", format!("{d}; suite time {total:.1} s")),
        Ok(d) | Err(d) => {
            failures += 1;
            ("FAIL", format!("{d}; suite time {total:.1} s"))
        }
    };
    println!("{tag} criterion 12: end-to-end determinism and runtime ({detail})");
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
