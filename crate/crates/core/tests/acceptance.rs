//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Every criterion runs in the single `acceptance` test so the timing
//! measurements are not disturbed by other tests of this binary. The lines
//! go straight to stdout, bypassing the test harness capture.

mod common;

use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use lipcert::nn::sample_perturbation;
use lipcert::oracle::{correct_power_method, correct_power_method_sq, sampled_opnorm_lower_bound_sq};
use lipcert::sqrt::sqrt_upper_bound;
use lipcert::unsound_ref::{
    ref_bot_logit, ref_certify, ref_margin_lipschitz, ref_power_method_norm, ref_tiny_weight_lipschitz, Float32Value,
    REF_EPS_GUARD,
};
use lipcert::{
    argmax, certify, find_counterexample, format_bounds, format_model, gen_all_bounds, gram_iteration, parse_bounds,
    parse_model, Error, LipschitzBounds, Matrix, NeuralNet, Rational, SqrtConfig, Vector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{four_decimal, q, random_net, random_symmetric, random_vector};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn sci(x: &Rational) -> String {
    format!("{:.6e}", x.to_f64())
}

fn f32_table(bounds: &LipschitzBounds) -> Vec<Vec<Float32Value>> {
    bounds
        .to_rows()
        .iter()
        .map(|row| row.iter().map(|x| Float32Value(x.to_f64() as f32)).collect())
        .collect()
}

fn toy_net(w: Rational) -> NeuralNet {
    NeuralNet::new(vec![
        Matrix::from_rows(vec![vec![w]]).unwrap(),
        Matrix::from_integers(&[&[1], &[-1]]).unwrap(),
    ])
    .unwrap()
}

// Criterion 1: weights at the smallest normal f32 value.
fn tiny_weights() -> Outcome {
    const GRAM_N: usize = 8;
    let tiny32 = f32::MIN_POSITIVE;
    let tiny = Rational::from_f32(tiny32).unwrap();
    let reference = ref_tiny_weight_lipschitz(&vec![vec![Float32Value(tiny32)], vec![Float32Value(-tiny32)]]);
    ensure(reference.0 == 0.0, || {
        format!("reference bound is {:e}, expected exactly 0", reference.0)
    })?;

    let cfg = SqrtConfig::default();
    let net = NeuralNet::new(vec![
        Matrix::from_rows(vec![vec![tiny.clone()], vec![-tiny.clone()]]).unwrap()
    ])
    .unwrap();
    let bounds = gen_all_bounds(&net, GRAM_N, &cfg);
    let b = bounds.get(0, 1);
    let lower = &tiny * Rational::from(2);
    let upper = &cfg.err_tolerance * Rational::from(10);
    ensure(*b >= lower && *b <= upper, || {
        format!("bound {} outside [2 tiny, 10 err]", sci(b))
    })?;

    let zero = Vector::from_integers(&[0, 0]).unwrap();
    let ours = certify(&zero, &Rational::zero(), &bounds).unwrap();
    ensure(!ours.certified && ours.failing_index == Some(1), || {
        format!("certify([0,0], 0) = {ours:?}")
    })?;
    let table = f32_table(&bounds);
    let y = [Float32Value(0.0), Float32Value(0.0)];
    ensure(ref_certify(&y, Float32Value(0.0), &table), || {
        "reference rejected [0,0]".into()
    })?;
    Ok(format!(
        "reference 0, ours {} in [2.35e-38, 1e-10], [0,0] rejected",
        sci(b)
    ))
}

// Criterion 2: a first-layer weight of 1e-5.
fn small_first_layer() -> Outcome {
    const GRAM_N: usize = 8;
    const REF_ITERS: usize = 100;
    let w = Rational::new(1, 100_000);
    let w32 = Float32Value(1e-5);
    let first = ref_power_method_norm(&vec![vec![w32]], REF_ITERS, REF_EPS_GUARD);
    ensure(first.0 < 1e-5, || {
        format!("reference first-layer estimate {:e} not below 1e-5", first.0)
    })?;
    let layers = vec![vec![vec![w32]], vec![vec![Float32Value(1.0)], vec![Float32Value(-1.0)]]];
    let ref_margin = ref_margin_lipschitz(&layers, 0, 1, REF_ITERS, REF_EPS_GUARD);
    ensure(ref_margin.0 < 2e-5, || {
        format!("reference margin {:e} not below 2e-5", ref_margin.0)
    })?;

    let cfg = SqrtConfig::default();
    let gram = gram_iteration(&Matrix::from_rows(vec![vec![w.clone()]]).unwrap(), GRAM_N, &cfg).value;
    ensure(gram >= w, || format!("gram bound {} below w", sci(&gram)))?;
    let bounds = gen_all_bounds(&toy_net(w), GRAM_N, &cfg);
    let b = bounds.get(0, 1);
    ensure(*b >= q(2, 100_000) && *b <= q(21, 1_000_000), || {
        format!("margin bound {} outside [2e-5, 2.1e-5]", sci(b))
    })?;
    Ok(format!(
        "reference layer {:e}, reference margin {:e}, ours {}",
        first.0,
        ref_margin.0,
        sci(b)
    ))
}

// Criterion 3: equal logits.
fn equal_logits() -> Outcome {
    let bounds = gen_all_bounds(&toy_net(q(9, 10)), 8, &SqrtConfig::default());
    let table = f32_table(&bounds);
    let y = [Float32Value(0.0), Float32Value(0.0)];
    let zero = Vector::from_integers(&[0, 0]).unwrap();
    for (eps32, eps) in [(0.0f32, q(0, 1)), (0.1, q(1, 10)), (1.58, q(158, 100))] {
        let bot = ref_bot_logit(&y, Float32Value(eps32), &table);
        ensure(bot.0 == f32::NEG_INFINITY, || {
            format!("reference bottom logit {:e} at eps {eps32}", bot.0)
        })?;
        ensure(ref_certify(&y, Float32Value(eps32), &table), || {
            format!("reference rejected at {eps32}")
        })?;
        let ours = certify(&zero, &eps, &bounds).unwrap();
        ensure(!ours.certified, || format!("[0,0] certified at eps {eps}"))?;
    }
    Ok("reference bottom logit -inf and accepts; ours rejects at 0, 0.1, 1.58".into())
}

// Criterion 4: soundness properties on random nets.
fn soundness_suite() -> Outcome {
    const NETS: u64 = 50;
    const GRAM_N: usize = 8;
    const PAIRS: usize = 500;
    const ROBUSTNESS_SAMPLES: usize = 10_000;
    const INPUT_ATTEMPTS: usize = 5;
    const PROBES: usize = 32;
    const POWER_ITERS: usize = 100;
    // The sampled bound may beat an unconverged power method by this much
    // (relative, in squares).
    let power_slack = q(1, 100);
    let cfg = SqrtConfig::default();

    let mut margin_checks = 0usize;
    let mut robust_checked = 0usize;
    let mut layers_checked = 0usize;
    for seed in 0..NETS {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0400 + seed);
        let net = random_net(&mut rng, 4, 8);
        let bounds = gen_all_bounds(&net, GRAM_N, &cfg);
        let dim = net.input_dim();

        // (a) margin sampling
        for p in 0..PAIRS {
            let v = random_vector(&mut rng, dim);
            let u = if p % 2 == 0 {
                random_vector(&mut rng, dim)
            } else {
                v.plus(&sample_perturbation(&mut rng, dim, &q(1, 100))).unwrap()
            };
            let (ov, ou) = (net.apply(&v).unwrap(), net.apply(&u).unwrap());
            let dist_sq = v.minus(&u).unwrap().sum_of_squares();
            for (i, k, l) in bounds.pairs() {
                let delta = (&ov[k] - &ov[i]) - (&ou[k] - &ou[i]);
                ensure(delta.square() <= l.square() * &dist_sq, || {
                    format!(
                        "net {seed}: margin ({i},{k}) moved {} but bound allows {}",
                        sci(&delta.abs()),
                        sci(l)
                    )
                })?;
                margin_checks += 1;
            }
        }

        // (b) certified points survive sampling
        for _ in 0..INPUT_ATTEMPTS {
            let v = random_vector(&mut rng, dim);
            let out = net.apply(&v).unwrap();
            let x = argmax(&out);
            let radius = (0..out.len())
                .filter(|&i| i != x && bounds.get(i, x).is_positive())
                .map(|i| (&out[x] - &out[i]) / bounds.get(i, x))
                .min()
                .unwrap_or_else(Rational::one);
            let eps = (radius * q(999, 1000)).floor_to_places(8);
            if !eps.is_positive() {
                continue;
            }
            let result = certify(&out, &eps, &bounds).unwrap();
            ensure(result.certified, || {
                format!("net {seed}: eps below the certified radius rejected")
            })?;
            let cex = find_counterexample(&net, &v, &eps, ROBUSTNESS_SAMPLES, seed).unwrap();
            ensure(cex.is_none(), || {
                format!("net {seed}: certified input has a counterexample")
            })?;
            robust_checked += 1;
            break;
        }

        // (c) sandwich on every layer
        for (j, layer) in net.layers().iter().enumerate() {
            let sampled = sampled_opnorm_lower_bound_sq(layer, PROBES, seed);
            let power = correct_power_method_sq(layer, POWER_ITERS, seed);
            let upper = gram_iteration(layer, GRAM_N, &cfg).value.square();
            ensure(sampled <= upper && power <= upper, || {
                format!("net {seed} layer {j}: lower bound above gram bound")
            })?;
            ensure(&sampled * (Rational::one() - &power_slack) <= power, || {
                format!(
                    "net {seed} layer {j}: power method {} trails sampling {}",
                    sci(&power),
                    sci(&sampled)
                )
            })?;
            layers_checked += 1;
        }
    }
    ensure(robust_checked * 2 >= NETS as usize, || {
        format!("only {robust_checked} nets had a certifiable input")
    })?;
    Ok(format!(
        "{NETS} nets: {margin_checks} margin checks, {robust_checked} certified inputs x {ROBUSTNESS_SAMPLES} samples, {layers_checked} layer sandwiches"
    ))
}

// Criterion 5: gram bound against a converged power method.
fn gram_tightness() -> Outcome {
    const MATRICES: u64 = 20;
    const GRAM_N: usize = 10;
    const POWER_ITERS: usize = 500;
    let tolerance = q(105, 100);
    let cfg = SqrtConfig::default();
    let mut worst = 0f64;
    for seed in 0..MATRICES {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0500 + seed);
        let m = random_symmetric(&mut rng, 8);
        let gram = gram_iteration(&m, GRAM_N, &cfg).value;
        let power = correct_power_method(&m, POWER_ITERS, seed);
        ensure(power <= gram, || {
            format!("matrix {seed}: power method above gram bound")
        })?;
        ensure(gram <= &power * &tolerance, || {
            format!("matrix {seed}: gram {} vs power {}", sci(&gram), sci(&power))
        })?;
        worst = worst.max((gram / power).to_f64());
    }
    Ok(format!("{MATRICES} symmetric 8x8: worst gram/power ratio {worst:.6}"))
}

fn time_per_vector(vectors: &[Vector], eps: &Rational, bounds: &LipschitzBounds, rounds: usize) -> Duration {
    let mut samples: Vec<Duration> = (0..rounds)
        .map(|_| {
            let start = Instant::now();
            for v in vectors {
                std::hint::black_box(certify(v, eps, bounds).unwrap());
            }
            start.elapsed() / vectors.len() as u32
        })
        .collect();
    samples.sort();
    samples[rounds / 2]
}

fn net_with_width(rng: &mut ChaCha8Rng, input: usize, width: usize, outputs: usize) -> NeuralNet {
    NeuralNet::new(vec![
        common::random_matrix(rng, width, input),
        common::random_matrix(rng, outputs, width),
    ])
    .unwrap()
}

// Criterion 6: certification cost does not depend on model size.
fn certify_cost() -> Outcome {
    const VECTORS: usize = 500;
    const ROUNDS: usize = 9;
    const MAX_SIZE_RATIO: f64 = 2.0;
    // Allowed excess over proportional growth between consecutive dims.
    const LINEAR_SLACK: f64 = 1.5;
    let cfg = SqrtConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0600);
    let eps = q(1, 1000);

    let narrow = gen_all_bounds(&net_with_width(&mut rng, 4, 1, 10), 8, &cfg);
    let wide = gen_all_bounds(&net_with_width(&mut rng, 4, 1024, 10), 8, &cfg);
    // A dominant first logit certifies against both tables, so both run
    // every comparison and only the table contents differ.
    let dominant = |rng: &mut ChaCha8Rng, d: usize| {
        let mut v = random_vector(rng, d).into_inner();
        v[0] = Rational::from(100);
        Vector::new(v).unwrap()
    };
    let vectors: Vec<Vector> = (0..VECTORS).map(|_| dominant(&mut rng, 10)).collect();
    for bounds in [&narrow, &wide] {
        ensure(
            vectors.iter().all(|v| certify(v, &eps, bounds).unwrap().certified),
            || "probe vectors not certified".into(),
        )?;
    }
    // Warm up, then interleave so drift hits both alike.
    time_per_vector(&vectors, &eps, &narrow, 1);
    let (mut t_narrow, mut t_wide) = (Vec::new(), Vec::new());
    for _ in 0..3 {
        t_narrow.push(time_per_vector(&vectors, &eps, &narrow, ROUNDS));
        t_wide.push(time_per_vector(&vectors, &eps, &wide, ROUNDS));
    }
    t_narrow.sort();
    t_wide.sort();
    let (a, b) = (t_narrow[1].as_secs_f64(), t_wide[1].as_secs_f64());
    let ratio = a.max(b) / a.min(b);
    ensure(ratio < MAX_SIZE_RATIO, || {
        format!("width 1 {a:.3e}s vs width 1024 {b:.3e}s per vector")
    })?;

    let dims = [2usize, 10, 100];
    let mut per_dim = Vec::new();
    for &d in &dims {
        let bounds = gen_all_bounds(
            &NeuralNet::new(vec![common::random_matrix(&mut rng, d, 4)]).unwrap(),
            1,
            &cfg,
        );
        let vectors: Vec<Vector> = (0..VECTORS).map(|_| dominant(&mut rng, d)).collect();
        ensure(certify(&vectors[0], &eps, &bounds).unwrap().certified, || {
            format!("dim {d}: probe not certified")
        })?;
        per_dim.push(time_per_vector(&vectors, &eps, &bounds, ROUNDS).as_secs_f64());
    }
    for w in 0..dims.len() - 1 {
        let growth = per_dim[w + 1] / per_dim[w];
        // A certified vector costs d - 1 comparisons, so linear growth is
        // growth in proportion to d - 1.
        let allowed = LINEAR_SLACK * (dims[w + 1] - 1) as f64 / (dims[w] - 1) as f64;
        ensure(growth <= allowed, || {
            format!(
                "dim {} -> {}: cost grew {growth:.2}x, allowed {allowed:.2}x",
                dims[w],
                dims[w + 1]
            )
        })?;
    }
    Ok(format!(
        "width 1 vs 1024 ratio {ratio:.2}; per-vector cost at dims 2/10/100: {:.2e}/{:.2e}/{:.2e}s",
        per_dim[0], per_dim[1], per_dim[2]
    ))
}

// Criterion 7: square-root invariants across 80 decades.
fn sqrt_suite() -> Outcome {
    const CASES: usize = 10_000;
    let cfg = SqrtConfig::default();
    let two_err = &cfg.err_tolerance * Rational::from(2);
    let zero = sqrt_upper_bound(&Rational::zero(), &cfg).unwrap();
    ensure(zero.value.is_zero(), || format!("sqrt(0) = {}", zero.value))?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0700);
    let mut converged = 0;
    for case in 0..CASES {
        let exponent: i32 = rng.random_range(-40..40);
        // Mantissa in [1, 10), either a decimal or a ratio of small integers.
        let mantissa = if case % 2 == 0 {
            Rational::new(rng.random_range(1_000_000i64..10_000_000), 1_000_000)
        } else {
            let b = rng.random_range(1i64..=999);
            Rational::new(rng.random_range(b..10 * b), b)
        };
        let decade = Rational::ulp(exponent.unsigned_abs());
        let x = if exponent >= 0 {
            mantissa / decade
        } else {
            mantissa * decade
        };
        let r = sqrt_upper_bound(&x, &cfg).unwrap();
        ensure(r.value.square() >= x, || format!("r^2 < x for x = {}", sci(&x)))?;
        if r.converged {
            converged += 1;
            ensure(r.value.square() - &x <= &two_err * &r.value, || {
                format!("converged slack too large for x = {}", sci(&x))
            })?;
        }
    }
    Ok(format!(
        "{CASES} inputs in [1e-40, 1e40], {converged} converged, sqrt(0) = 0"
    ))
}

fn random_entry(rng: &mut ChaCha8Rng) -> Rational {
    match rng.random_range(0..4) {
        0 => Rational::new(rng.random_range(-50i64..=50), 3),
        1 => Rational::new(rng.random_range(-50i64..=50), 7),
        2 => Rational::new(
            rng.random_range(-1i64..=1) * rng.random_range(1i64..=1_000_000_000),
            10_000_000_000_000i64,
        ),
        _ => four_decimal(rng),
    }
}

// Criterion 8: exact round trips and the three malformed-input classes.
fn round_trips() -> Outcome {
    const CASES: u64 = 100;
    let cfg = SqrtConfig::default();
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..CASES {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0800 + seed);
        let depth = rng.random_range(1..=3);
        let mut widths: Vec<usize> = (0..=depth).map(|_| rng.random_range(1..=5)).collect();
        widths[depth] = widths[depth].max(2);
        let layers = widths
            .windows(2)
            .map(|w| {
                let rows = (0..w[1])
                    .map(|_| (0..w[0]).map(|_| random_entry(&mut rng)).collect())
                    .collect();
                Matrix::from_rows(rows).unwrap()
            })
            .collect();
        let net = NeuralNet::new(layers).unwrap();
        let text = format_model(&net);
        let back = parse_model(&text).map_err(|e| format!("case {seed}: {e}"))?;
        ensure(back == net && format_model(&back) == text, || {
            format!("case {seed}: model text not a fixpoint")
        })?;

        let bounds = gen_all_bounds(&net, 2, &cfg);
        let path = dir.path().join(format!("bounds{seed}.txt"));
        lipcert::save_bounds(&bounds, &path).unwrap();
        let loaded = lipcert::load_bounds(&path).map_err(|e| format!("case {seed}: {e}"))?;
        ensure(
            loaded == bounds && format_bounds(&loaded) == format_bounds(&bounds),
            || format!("case {seed}: bounds changed in round trip"),
        )?;
        ensure(parse_bounds(&format_bounds(&bounds)).unwrap() == bounds, || {
            format!("case {seed}: parse")
        })?;
    }

    match parse_model("1,0\n0,x\n") {
        Err(Error::ModelLiteral { line: 2, column: 3, .. }) => {}
        other => return Err(format!("bad literal gave {other:?}")),
    }
    match parse_model("1\n\n\n2\n") {
        Err(Error::ModelFormat { ref reason, .. }) if reason.contains("empty") => {}
        other => return Err(format!("empty layer gave {other:?}")),
    }
    match parse_model("1,0\n\n1,2,3\n") {
        Err(Error::ModelFormat {
            layer: 1, ref reason, ..
        }) if reason.contains("layer 0") => {}
        other => return Err(format!("chain violation gave {other:?}")),
    }
    Ok(format!(
        "{CASES} model and bounds round trips; bad literal, empty layer, chain violation rejected"
    ))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Outcome,
}

const CRITERIA: &[Criterion] = &[
    Criterion {
        id: 1,
        name: "tiny weights",
        budget: Duration::from_secs(1),
        run: tiny_weights,
    },
    Criterion {
        id: 2,
        name: "small first layer",
        budget: Duration::from_secs(1),
        run: small_first_layer,
    },
    Criterion {
        id: 3,
        name: "equal logits",
        budget: Duration::from_secs(1),
        run: equal_logits,
    },
    Criterion {
        id: 4,
        name: "soundness suite",
        budget: Duration::from_secs(600),
        run: soundness_suite,
    },
    Criterion {
        id: 5,
        name: "gram tightness",
        budget: Duration::from_secs(300),
        run: gram_tightness,
    },
    Criterion {
        id: 6,
        name: "certify cost",
        budget: Duration::from_secs(60),
        run: certify_cost,
    },
    Criterion {
        id: 7,
        name: "sqrt invariants",
        budget: Duration::from_secs(60),
        run: sqrt_suite,
    },
    Criterion {
        id: 8,
        name: "round trips and parser",
        budget: Duration::from_secs(10),
        run: round_trips,
    },
];

#[test]
fn acceptance() {
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = Vec::new();
    for c in CRITERIA.iter().filter(|c| only.is_none_or(|id| id == c.id)) {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if elapsed <= c.budget {
                Ok(detail)
            } else {
                Err(format!("{detail}; over the {:?} budget", c.budget))
            }
        });
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        let line = format!(
            "acceptance {} [{}] {}: {} ({:.2}s)\n",
            c.id,
            tag,
            c.name,
            detail,
            elapsed.as_secs_f64()
        );
        let _ = std::io::stdout().lock().write_all(line.as_bytes());
        if outcome.is_err() {
            failed.push(c.id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
