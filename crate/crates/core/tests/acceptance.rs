//! End-to-end acceptance checks. Runs as a plain binary so that the verdict
//! lines always reach the terminal.

#![allow(clippy::needless_range_loop)]

use std::time::{Duration, Instant};

use distbound::bounds::{
    berlekamp_bound, blahut_search, general_elias_point, min_distance_is_finite, piret_bound,
    plotkin_exponential, stable_set_bound, BlahutOptions,
};
use distbound::channels::{
    blahut_counterexample, chernoff_distance, pairwise_reversible, ternary_unilateral, Channel,
};
use distbound::distances::{
    build_bhattacharyya, build_from_points, build_hamming, build_lee, build_pentagon, build_qpsk,
    code_min_distance, to_similarity, Code, DistanceMatrix, WeightedGraph,
};
use distbound::embedding::{classify, euclidean_embed, reconstruction_error, DEFAULT_EMBED_TOL};
use distbound::ext::{ExtReal, Finite, Infinity};
use distbound::oracle::{
    kronecker_power, max_stable_set, optimal_min_distance, DEFAULT_VERTEX_BUDGET,
};
use distbound::simplex::{binary_entropy, Composition, StochasticMatrix};
use distbound::theta::binary_theta_analytic;
use distbound::theta::{
    lovasz_classical, solve_theta, solve_theta_graph, solve_theta_p, SolverOptions,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        passed,
        detail: detail.into(),
    }
}

fn lee_figure(k: usize) -> Vec<Vec<f64>> {
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let rows: Vec<Vec<f64>> = match k {
        5 => vec![
            vec![0.0, a, a, 0.0, 0.0],
            vec![0.0, a, a, a, 0.0],
            vec![0.0, 0.0, a, a, 0.0],
            vec![0.0, 0.0, a, a, a],
            vec![0.0, 0.0, 0.0, a, a],
        ],
        6 => vec![
            vec![0.0, 1.0, 1.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 1.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0],
        ],
        _ => unreachable!(),
    };
    // Points are the columns.
    (0..k)
        .map(|x| rows.iter().map(|r| r[x]).collect())
        .collect()
}

fn max_entry_diff(a: &DistanceMatrix, b: &DistanceMatrix) -> f64 {
    let k = a.k();
    let mut m = 0.0f64;
    for x in 0..k {
        for y in 0..k {
            m = m.max((a.get(x, y).to_f64() - b.get(x, y).to_f64()).abs());
        }
    }
    m
}

fn centered_gram(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = points.len();
    let dim = points[0].len();
    let mean: Vec<f64> = (0..dim)
        .map(|j| points.iter().map(|p| p[j]).sum::<f64>() / k as f64)
        .collect();
    let c: Vec<Vec<f64>> = points
        .iter()
        .map(|p| p.iter().zip(&mean).map(|(a, b)| a - b).collect())
        .collect();
    (0..k)
        .map(|i| {
            (0..k)
                .map(|j| c[i].iter().zip(&c[j]).map(|(a, b)| a * b).sum())
                .collect()
        })
        .collect()
}

fn binary_analytic_agreement() -> Verdict {
    let d = build_hamming(2).unwrap();
    let opts = SolverOptions::default();
    let mut worst = 0.0f64;
    for rho in [0.5, 1.0, 2.0, 10.0, 100.0] {
        for q0 in [0.5, 0.7, 0.9] {
            let q = Composition::new(vec![q0, 1.0 - q0]).unwrap();
            let solved = solve_theta_p(&d, Finite(rho), &q, &opts)
                .unwrap()
                .value_f64();
            let exact = binary_theta_analytic(Finite(rho), &q).unwrap();
            worst = worst.max((solved - exact).abs());
        }
    }
    verdict(
        worst <= 1e-6,
        format!("max |solver - closed form| = {worst:.2e} (tol 1e-6)"),
    )
}

fn lovasz_recovery() -> Verdict {
    let opts = SolverOptions::default();
    let pent = lovasz_classical(&to_similarity(&build_pentagon()), &opts)
        .unwrap()
        .value_f64();
    let pent_err = (pent - 0.5 * 5f64.ln()).abs();
    let mut empty_err = 0.0f64;
    for k in 2..=6 {
        let g = WeightedGraph::new(
            (0..k)
                .map(|i| (0..k).map(|j| f64::from(u8::from(i == j))).collect())
                .collect(),
        )
        .unwrap();
        let v = lovasz_classical(&g, &opts).unwrap().value_f64();
        empty_err = empty_err.max((v - (k as f64).ln()).abs());
    }
    verdict(
        pent_err <= 1e-3 && empty_err <= 1e-4,
        format!("pentagon {pent:.6} (err {pent_err:.1e}), empty graphs max err {empty_err:.1e}"),
    )
}

fn random_distance(rng: &mut ChaCha8Rng, k: usize) -> DistanceMatrix {
    let mut e = vec![vec![ExtReal::ZERO; k]; k];
    for x in 0..k {
        for y in (x + 1)..k {
            let v = if rng.random_bool(0.2) {
                Infinity
            } else {
                Finite(rng.random_range(0.05..3.0))
            };
            e[x][y] = v;
            e[y][x] = v;
        }
    }
    DistanceMatrix::new(e).unwrap()
}

fn random_block_length(rng: &mut ChaCha8Rng, k: usize) -> usize {
    let max_n = (1..=8)
        .take_while(|n| k.pow(*n as u32) <= 4096)
        .last()
        .unwrap();
    rng.random_range(1..=max_n.min(6))
}

fn random_words(rng: &mut ChaCha8Rng, k: usize, n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut words: Vec<Vec<usize>> = Vec::new();
    while words.len() < m {
        let w: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        if !words.contains(&w) {
            words.push(w);
        }
    }
    words
}

const RHO_CHOICES: [ExtReal; 6] = [
    Finite(0.3),
    Finite(1.0),
    Finite(2.0),
    Finite(5.0),
    Finite(20.0),
    Infinity,
];

/// `true` when the code respects the bound; at `ρ = ∞` the claim is finiteness.
fn respects(dmin: ExtReal, m: usize, n: usize, theta: f64, rho: ExtReal) -> bool {
    match rho {
        Infinity => !min_distance_is_finite(m, n, theta) || dmin.is_finite(),
        Finite(_) => match plotkin_exponential(m, n, theta, rho) {
            Infinity => true,
            Finite(b) => dmin.to_f64() <= b + 1e-9 * (1.0 + b),
        },
    }
}

fn finite_n_soundness() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0003);
    let opts = SolverOptions::default();
    let (mut violations, mut informative, mut cc_violations, mut cc_informative) = (0, 0, 0, 0);
    for trial in 0..1000 {
        let k = rng.random_range(2..=4);
        let d = random_distance(&mut rng, k);
        let rho = RHO_CHOICES[rng.random_range(0..RHO_CHOICES.len())];
        let n = random_block_length(&mut rng, k);
        let total = k.pow(n as u32);

        let theta = solve_theta(&d, rho, &opts).unwrap().value_f64();
        let m = rng.random_range(2..=total.min(16));
        let code = if trial % 10 == 0 && total <= 256 {
            optimal_min_distance(n, m, &d, None, DEFAULT_VERTEX_BUDGET)
                .unwrap()
                .witness
        } else {
            Code::new(random_words(&mut rng, k, n, m)).unwrap()
        };
        let dmin = code_min_distance(&code, &d).unwrap();
        if !respects(dmin, m, n, theta, rho) {
            violations += 1;
        }
        if plotkin_exponential(m, n, theta, rho).is_finite()
            || (rho.is_infinite() && min_distance_is_finite(m, n, theta))
        {
            informative += 1;
        }

        // Constant composition: permutations of one base word.
        let mut base: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        base.sort_unstable();
        let p = Composition::of_sequence(&base, k);
        let mut words: Vec<Vec<usize>> = Vec::new();
        for _ in 0..64 {
            let mut w = base.clone();
            w.shuffle(&mut rng);
            if !words.contains(&w) {
                words.push(w);
            }
            if words.len() >= 12 {
                break;
            }
        }
        if words.len() < 2 {
            continue;
        }
        let m = rng.random_range(2..=words.len());
        words.truncate(m);
        let code = Code::new(words).unwrap();
        let theta_p = solve_theta_p(&d, rho, &p, &opts).unwrap().value_f64();
        let dmin = code_min_distance(&code, &d).unwrap();
        if !respects(dmin, m, n, theta_p, rho) {
            cc_violations += 1;
        }
        if plotkin_exponential(m, n, theta_p, rho).is_finite() {
            cc_informative += 1;
        }
    }
    verdict(
        violations == 0 && cc_violations == 0,
        format!(
            "violations {violations}/1000 ({informative} informative), constant composition {cc_violations} ({cc_informative} informative)"
        ),
    )
}

fn four_conditions_agree(d: &DistanceMatrix) -> (bool, bool) {
    let r = classify(d);
    let all = r.evaluated();
    let agree = all.iter().all(|b| *b == all[0]);
    (agree, all[0])
}

fn condition_cross_agreement() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0004);
    let mut disagreements = 0;
    let mut point_failures = 0;
    let mut worst_recon = 0.0f64;
    for _ in 0..200 {
        let k = rng.random_range(2..=7);
        let dim = rng.random_range(1..=4);
        let pts: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let d = build_from_points(&pts).unwrap();
        let (agree, pass) = four_conditions_agree(&d);
        if !agree {
            disagreements += 1;
        }
        if !pass {
            point_failures += 1;
        }
        if let Ok(v) = euclidean_embed(&d, DEFAULT_EMBED_TOL) {
            worst_recon = worst_recon.max(reconstruction_error(&d, &v));
        }
    }
    let mut mixed = [0usize; 2];
    for _ in 0..200 {
        let k = rng.random_range(3..=7);
        let dim = rng.random_range(1..=3);
        let pts: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let base = build_from_points(&pts).unwrap();
        let amp = rng.random_range(0.01..1.0);
        let mut e = vec![vec![0.0; k]; k];
        for x in 0..k {
            for y in (x + 1)..k {
                let v =
                    (base.get(x, y).to_f64() * (1.0 + amp * rng.random_range(-1.0..1.0))).max(0.0);
                e[x][y] = v;
                e[y][x] = v;
            }
        }
        let d = DistanceMatrix::from_finite(e).unwrap();
        let (agree, pass) = four_conditions_agree(&d);
        if !agree {
            disagreements += 1;
        }
        mixed[usize::from(pass)] += 1;
        if pass {
            if let Ok(v) = euclidean_embed(&d, DEFAULT_EMBED_TOL) {
                worst_recon = worst_recon.max(reconstruction_error(&d, &v));
            }
        }
    }
    let tri = DistanceMatrix::from_finite(vec![
        vec![0.0, 0.01, 0.01],
        vec![0.01, 0.0, 1.0],
        vec![0.01, 1.0, 0.0],
    ])
    .unwrap();
    let tri_report = classify(&tri);
    let tri_all_fail =
        tri_report.evaluated().len() == 4 && tri_report.evaluated().iter().all(|b| !b);
    verdict(
        disagreements == 0 && point_failures == 0 && worst_recon <= 1e-8 && tri_all_fail,
        format!(
            "disagreements {disagreements}, point sets failing {point_failures}, perturbed pass/fail {}/{}, \
             max reconstruction {worst_recon:.1e}, triangle counterexample fails all four: {tri_all_fail}",
            mixed[1], mixed[0]
        ),
    )
}

fn lee_fixture() -> Verdict {
    let mut worst = 0.0f64;
    let mut worst_fig = 0.0f64;
    let mut worst_gram = 0.0f64;
    for k in [5, 6] {
        let lee = build_lee(k).unwrap();
        let fig = lee_figure(k);
        worst_fig = worst_fig.max(max_entry_diff(&build_from_points(&fig).unwrap(), &lee));
        let v = euclidean_embed(&lee, DEFAULT_EMBED_TOL).unwrap();
        worst = worst.max(reconstruction_error(&lee, &v));
        // Same centered Gram matrix means same configuration up to isometry.
        let (a, b) = (centered_gram(&v), centered_gram(&fig));
        for x in 0..k {
            for y in 0..k {
                worst_gram = worst_gram.max((a[x][y] - b[x][y]).abs());
            }
        }
    }
    verdict(
        worst <= 1e-9 && worst_fig <= 1e-12 && worst_gram <= 1e-9,
        format!("reconstruction {worst:.1e}, figure construction {worst_fig:.1e}, centered Gram gap {worst_gram:.1e}"),
    )
}

fn elias_recovery() -> Verdict {
    let d = build_hamming(2).unwrap();
    let f = Composition::uniform(2);
    let opts = SolverOptions::default();
    let mut worst = 0.0f64;
    for lambda in [0.1, 0.25, 0.4] {
        let v = StochasticMatrix::binary_flip(lambda);
        let p = general_elias_point(&d, Finite(1e4), &f, &v, &opts).unwrap();
        let r = std::f64::consts::LN_2 - binary_entropy(lambda);
        let delta = 2.0 * lambda * (1.0 - lambda);
        worst = worst
            .max((p.r - r).abs())
            .max((p.delta.to_f64() - delta).abs());
    }
    verdict(
        worst <= 1e-2,
        format!("max deviation from (ln2 - h(λ), 2λ(1-λ)) = {worst:.2e} (tol 1e-2)"),
    )
}

fn qpsk_nesting() -> Verdict {
    let d = build_qpsk();
    let u = Composition::uniform(4);
    let opts = BlahutOptions::default();
    let (mut order_violations, mut kkt) = (0, 0.0f64);
    for i in 1..=20 {
        let r = 4f64.ln() * i as f64 / 21.0;
        let b = berlekamp_bound(&d, r).unwrap();
        let p = piret_bound(&d, &b.q_star, r).unwrap();
        let bl = blahut_search(&d, &u, r, &opts).unwrap();
        let (bd, pd, bld) = (b.point.delta.to_f64(), p.delta.to_f64(), bl.delta.to_f64());
        if !(bld <= pd + 1e-9 && pd <= bd + 1e-9) {
            order_violations += 1;
        }
        kkt = kkt.max(b.entropy_residual).max(b.exponential_residual);
    }
    verdict(
        order_violations == 0 && kkt <= 1e-8,
        format!("ordering violations {order_violations}/20, max KKT residual {kkt:.1e}"),
    )
}

fn oracle_fixtures() -> Verdict {
    let g = to_similarity(&build_pentagon());
    let s1 = max_stable_set(
        &kronecker_power(&g, 1, None, DEFAULT_VERTEX_BUDGET).unwrap(),
        0.0,
    )
    .unwrap();
    let s2 = max_stable_set(
        &kronecker_power(&g, 2, None, DEFAULT_VERTEX_BUDGET).unwrap(),
        0.0,
    )
    .unwrap();
    let stable_ok = |w: &[Vec<usize>]| {
        w.iter().enumerate().all(|(i, a)| {
            w[i + 1..]
                .iter()
                .all(|b| a.iter().zip(b).any(|(x, y)| g.get(*x, *y) == 0.0))
        })
    };
    let h = build_hamming(2).unwrap();
    let code = optimal_min_distance(5, 4, &h, None, DEFAULT_VERTEX_BUDGET).unwrap();
    let recheck = code_min_distance(&code.witness, &h).unwrap();
    let ok = s1.size == 2
        && s2.size == 5
        && stable_ok(&s1.witness)
        && stable_ok(&s2.witness)
        && code.distance == Finite(3.0)
        && recheck == Finite(3.0)
        && code.witness.size() == 4;
    verdict(
        ok,
        format!(
            "α(C5) = {}, α(C5^2) = {}, optimal d(5, 4) = {} (re-validated {})",
            s1.size, s2.size, code.distance, recheck
        ),
    )
}

fn channel_suite() -> Verdict {
    let bsc = Channel::bsc(0.1).unwrap();
    let expect = -(2.0 * 0.09f64.sqrt()).ln();
    let dc = chernoff_distance(bsc.row(0), bsc.row(1))
        .unwrap()
        .value
        .to_f64();
    let db = build_bhattacharyya(&bsc).unwrap().get(0, 1).to_f64();
    let bsc_ok =
        (dc - expect).abs() <= 1e-9 && (db - expect).abs() <= 1e-9 && pairwise_reversible(&bsc);

    let tu = ternary_unilateral(1e-6).unwrap();
    let dc = chernoff_distance(tu.row(0), tu.row(1))
        .unwrap()
        .value
        .to_f64();
    let db = build_bhattacharyya(&tu).unwrap().get(0, 1).to_f64();
    let ratio = dc / db;
    let tu_ok = (1.9..=2.0).contains(&ratio) && !pairwise_reversible(&tu);

    let cx = blahut_counterexample(0.1).unwrap();
    let cx_ok = (cx - 3.0 * 9f64.ln()).abs() <= 1e-12;
    verdict(
        bsc_ok && tu_ok && cx_ok,
        format!("BSC D_C = d_B: {bsc_ok}; unilateral D_C/d_B = {ratio:.6}; counterexample {cx:.12} vs 3 ln 9"),
    )
}

fn finite_size_consistency() -> Verdict {
    let opts = SolverOptions::default();
    let mut violations = 0;
    let mut checks = 0;
    let graphs = [
        to_similarity(&build_pentagon()),
        to_similarity(&build_hamming(2).unwrap()),
        to_similarity(&build_lee(4).unwrap()),
        to_similarity(&build_qpsk()),
    ];
    for g in &graphs {
        for (eps, rho) in [
            (0.0f64, Infinity),
            (0.2, Finite(1.0)),
            (0.05, Finite(0.5)),
            (0.4, Finite(3.0)),
        ] {
            let theta = solve_theta_graph(g, rho, &opts).unwrap().value_f64();
            for n in 1..=3 {
                let Ok(kp) = kronecker_power(g, n, None, DEFAULT_VERTEX_BUDGET) else {
                    continue;
                };
                let size = max_stable_set(&kp, eps.powi(n as i32)).unwrap().size as f64;
                let bound = stable_set_bound(theta, eps, rho, n);
                checks += 1;
                if let Finite(b) = bound {
                    if size > b * (1.0 + 1e-6) {
                        violations += 1;
                    }
                }
            }
        }
    }
    for d in [
        build_hamming(2).unwrap(),
        build_lee(5).unwrap(),
        build_qpsk(),
    ] {
        for rho in [Finite(0.5), Finite(2.0), Finite(10.0)] {
            let theta = solve_theta(&d, rho, &opts).unwrap().value_f64();
            for n in 1..=3 {
                for m in 2..=6 {
                    let Ok(opt) = optimal_min_distance(n, m, &d, None, DEFAULT_VERTEX_BUDGET)
                    else {
                        continue;
                    };
                    checks += 1;
                    if !respects(opt.distance, m, n, theta, rho) {
                        violations += 1;
                    }
                }
            }
        }
    }
    verdict(
        violations == 0,
        format!(
            "asymptotic limits not reproducible at this scale; {checks} finite-size oracle checks (n ≤ 3), {violations} violations"
        ),
    )
}

type Criterion = (&'static str, fn() -> Verdict, Option<Duration>);

fn main() {
    let criteria: [Criterion; 10] = [
        (
            "binary analytic agreement",
            binary_analytic_agreement,
            Some(Duration::from_secs(30)),
        ),
        ("classical Lovász recovery", lovasz_recovery, None),
        (
            "finite-n soundness",
            finite_n_soundness,
            Some(Duration::from_secs(300)),
        ),
        (
            "squared-Euclidean condition agreement",
            condition_cross_agreement,
            None,
        ),
        ("Lee embedding fixture", lee_fixture, None),
        ("Elias recovery", elias_recovery, None),
        ("QPSK bound nesting", qpsk_nesting, None),
        (
            "oracle fixtures",
            oracle_fixtures,
            Some(Duration::from_secs(60)),
        ),
        ("channel suite", channel_suite, None),
        (
            "finite-size oracle consistency",
            finite_size_consistency,
            None,
        ),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = run();
        let took = start.elapsed();
        let in_time = budget.is_none_or(|b| took <= b);
        let pass = v.passed && in_time;
        if !pass {
            failed += 1;
        }
        let limit = budget.map_or(String::new(), |b| format!(" of {}s", b.as_secs()));
        println!(
            "{} criterion {:>2} {name}: {} [{:.2}s{limit}]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            v.detail,
            took.as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
