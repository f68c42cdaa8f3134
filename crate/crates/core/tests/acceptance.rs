//! Acceptance suite: one check per shipping criterion, run sequentially so
//! the wall-clock measurements are not polluted by concurrent tests.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the
//! per-criterion PASS/FAIL lines as they complete. The training criteria (5,
//! 6, 7) dominate the runtime; they stop as soon as their target is met.

use decgreen::autodiff::jet::{Jet2, Point2};
use decgreen::autodiff::tape::TapeNet;
use decgreen::cli::{
    load_checkpoint, run_benchmark, save_checkpoint, BenchmarkConfig, CheckpointMeta,
    RunConfig,
};
use decgreen::models::{hcache_build, Model, ModelConfig, ModelKind, Nets};
use decgreen::nn::{LayerSpec, Mlp};
use decgreen::pde::Problem;
use decgreen::rng::{derive_seed, Rng};
use decgreen::sampling::{grid, sample_interior, SampleSet};
use decgreen::training::{
    evaluate, interpolate_eval, loss_tape, loss_value, TrainConfig, Trainer,
};

struct Outcome {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn report(results: &mut Vec<Outcome>, name: &'static str, pass: bool, detail: String) {
    println!(
        "criterion {name}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    results.push(Outcome { name, pass, detail });
}

fn spec(widths: &[usize]) -> LayerSpec {
    LayerSpec::new(widths.to_vec()).unwrap()
}

fn model_config(kind: ModelKind) -> ModelConfig {
    ModelConfig {
        kind,
        k: 3,
        p: 0,
        r: None,
        net_spec: None,
        g_spec: None,
        f2_spec: None,
        f_spec: None,
        h_spec: None,
        o_spec: None,
    }
}

fn train_config(problem: Problem, model: ModelConfig) -> TrainConfig {
    TrainConfig {
        problem,
        model,
        a_values: vec![15.0],
        lambda1: 1.0,
        lambda2: 1.0,
        lr: 0.001,
        steps: 1,
        n_interior: 1000,
        m_boundary: 400,
        seed: 0,
        eval_resolution: 101,
        threads: 1,
        early_stop_train_loss: None,
        log_every: 100,
    }
}

// ---------------------------------------------------------------------------
// 1. Differentiation correctness
// ---------------------------------------------------------------------------

/// Pre-activations of every hidden unit at `p`, computed by a test-local
/// forward pass (independent of the library's own evaluation code).
fn preactivations(net: &Mlp, p: Point2) -> Vec<f64> {
    let widths = net.spec().widths();
    let mut acts: Vec<f64> = vec![p[0], p[1]];
    let mut pre = Vec::new();
    for l in 0..net.spec().layers() {
        let w = &net.weights()[l];
        let b = &net.biases()[l];
        let mut next = Vec::with_capacity(widths[l + 1]);
        for j in 0..widths[l + 1] {
            let mut z = b[j];
            for (i, a) in acts.iter().enumerate() {
                z += w[[j, i]] * a;
            }
            if l + 1 < net.spec().layers() {
                pre.push(z);
                next.push(if z > 0.0 { z.powi(3) } else { 0.0 });
            } else {
                next.push(z);
            }
        }
        acts = next;
    }
    pre
}

fn criterion_1(results: &mut Vec<Outcome>) {
    let started = std::time::Instant::now();
    let problem = Problem::Poisson2d;
    // Source instance a = 1 keeps the loss O(1): the central-difference
    // oracle's cancellation noise is ~eps * |loss| / step ~ 2e-11 absolute,
    // so gradients down to 1e-4 can be certified at 1e-6 relative error.
    // Gradients below that floor are unverifiable by this oracle (not wrong);
    // they are pinned instead by the tape-vs-batched agreement tests.
    let a_values = [1.0f64];
    let fd_step = 1e-5;
    let compare_floor = 1e-4;
    let mut worst_rel: f64 = 0.0;
    let mut checked_params = 0usize;
    let mut nets_done = 0usize;
    let mut attempt = 0u64;

    while nets_done < 50 {
        attempt += 1;
        assert!(attempt < 500, "could not find 50 qualifying networks");
        let mut rng = Rng::seeded(derive_seed(41, attempt));
        let hidden_layers = 2 + (rng.next_u64() % 3) as usize;
        let mut widths = vec![2usize];
        for _ in 0..hidden_layers {
            widths.push(4 + (rng.next_u64() % 29) as usize); // <= 32
        }
        widths.push(1);
        let net = Mlp::new(spec(&widths), 3, derive_seed(42, attempt)).unwrap();

        // Small collocation sets; re-draw until every pre-activation at every
        // point is bounded away from the ReLU-K kink.
        let mut qualified = None;
        for srun in 0..40u64 {
            let samples = SampleSet::generate(
                &problem.domain(),
                0,
                6,
                4,
                1,
                derive_seed(43, attempt * 100 + srun),
            )
            .unwrap();
            let all_points: Vec<Point2> = samples.interior[0]
                .iter()
                .chain(samples.boundary[0].iter())
                .copied()
                .collect();
            let ok = all_points
                .iter()
                .all(|&p| preactivations(&net, p).iter().all(|z| z.abs() > 1e-3));
            if ok {
                qualified = Some(samples);
                break;
            }
        }
        let Some(samples) = qualified else { continue };

        let model = Model {
            config: ModelConfig {
                net_spec: Some(net.spec().clone()),
                ..model_config(ModelKind::Pinn)
            },
            nets: Nets::Pinn { net },
        };

        let (tape, loss, tnets) =
            loss_tape(&model, problem, &samples, 1.0, 1.0, &a_values).unwrap();
        let tnet_refs: Vec<&TapeNet> = tnets.iter().collect();
        let grads = tape.param_gradient(loss, &tnet_refs).unwrap();
        let flat: Vec<f64> = grads[0].iter_flat().collect();

        // Central finite differences on a random subset of parameters.
        let mut model = model;
        let n_params = flat.len();
        let mut rng = Rng::seeded(derive_seed(44, attempt));
        for _ in 0..25 {
            let idx = (rng.next_u64() as usize) % n_params;
            let orig = model.nets()[0].1.params_flat();
            let mut bump = orig.clone();
            bump[idx] = orig[idx] + fd_step;
            model.nets_mut()[0].1.set_params_flat(&bump).unwrap();
            let up = loss_value(&model, problem, &samples, 1.0, 1.0, &a_values)
                .unwrap()
                .total;
            bump[idx] = orig[idx] - fd_step;
            model.nets_mut()[0].1.set_params_flat(&bump).unwrap();
            let down = loss_value(&model, problem, &samples, 1.0, 1.0, &a_values)
                .unwrap()
                .total;
            model.nets_mut()[0].1.set_params_flat(&orig).unwrap();
            let fd = (up - down) / (2.0 * fd_step);
            let ad = flat[idx];
            let scale = fd.abs().max(ad.abs());
            if scale > compare_floor {
                worst_rel = worst_rel.max((fd - ad).abs() / scale);
                checked_params += 1;
            }
        }
        nets_done += 1;
    }

    // Jet Laplacians of degree <= 2 polynomials are exact.
    let mut rng = Rng::seeded(4242);
    let mut worst_lap: f64 = 0.0;
    for _ in 0..200 {
        let c: Vec<f64> = (0..6).map(|_| rng.range(-3.0, 3.0)).collect();
        let p = [rng.range(-2.0, 2.0), rng.range(-2.0, 2.0)];
        let x = Jet2::var(p, 0);
        let y = Jet2::var(p, 1);
        let u = Jet2::constant(c[0])
            + x.scale(c[1])
            + y.scale(c[2])
            + (x * x).scale(c[3])
            + (x * y).scale(c[4])
            + (y * y).scale(c[5]);
        worst_lap = worst_lap.max((u.laplacian() - (2.0 * c[3] + 2.0 * c[5])).abs());
    }

    let elapsed = started.elapsed().as_secs_f64();
    let pass = worst_rel <= 1e-6 && worst_lap <= 1e-12 && elapsed < 60.0 && checked_params >= 400;
    report(
        results,
        "1 (differentiation correctness)",
        pass,
        format!(
            "50 nets, {checked_params} FD-checked params (|g| > {compare_floor:.0e}), \
             worst rel err {worst_rel:.2e} (<= 1e-6); \
             worst polynomial Laplacian err {worst_lap:.2e} (<= 1e-12); {elapsed:.1}s (< 60s)"
        ),
    );
}

// ---------------------------------------------------------------------------
// 2. Manufactured-solution closure
// ---------------------------------------------------------------------------

fn criterion_2(results: &mut Vec<Outcome>) {
    let mut worst: f64 = 0.0;
    for problem in [Problem::Poisson2d, Problem::ReactionDiffusion] {
        let pts = sample_interior(&problem.domain(), 1000, 777).unwrap();
        for p in pts {
            let j = problem.exact_jet(p, 15.0);
            let diff = (problem.apply_operator(&j, p) - problem.source(p, 15.0)).abs();
            worst = worst.max(diff);
        }
    }
    report(
        results,
        "2 (manufactured-solution closure)",
        worst <= 1e-10,
        format!("worst |L[u_exact] - g| over 2x1000 points: {worst:.2e} (<= 1e-10)"),
    );
}

// ---------------------------------------------------------------------------
// 3. Head-network equivalence
// ---------------------------------------------------------------------------

fn criterion_3(results: &mut Vec<Outcome>) {
    let mut worst: f64 = 0.0;
    let mut cases = 0usize;
    let mut rng = Rng::seeded(31337);
    while cases < 1000 {
        let r = 1 + (rng.next_u64() % 6) as usize;
        let p = 2 + (rng.next_u64() % 7) as usize;
        let f = Mlp::new(
            spec(&[2, 4 + (rng.next_u64() % 8) as usize, r]),
            3,
            rng.next_u64(),
        )
        .unwrap();
        let h = Mlp::new(
            spec(&[2, 3 + (rng.next_u64() % 6) as usize, r]),
            3,
            rng.next_u64(),
        )
        .unwrap();
        let mut o = Mlp::new(spec(&[p, 1]), 3, 1).unwrap();
        let mut params = vec![1.0; p + 1];
        params[p] = 0.0;
        o.set_params_flat(&params).unwrap();

        let samples = sample_interior(
            &Problem::Poisson2d.domain(),
            p,
            rng.next_u64(),
        )
        .unwrap();
        let gvals: Vec<f64> = (0..p).map(|_| rng.range(-2.0, 2.0)).collect();
        let cache = hcache_build(&h, &samples, &gvals).unwrap();

        for _ in 0..10 {
            let x = [rng.uniform(), rng.uniform()];
            let lin = decgreen::models::decgreen_eval(&f, &cache, x).unwrap();
            let nl = decgreen::models::decgreen_nl_eval(&f, &o, &cache, x).unwrap();
            worst = worst.max((lin.value - nl.value).abs());
            for i in 0..2 {
                worst = worst.max((lin.grad[i] - nl.grad[i]).abs());
            }
            for i in 0..3 {
                worst = worst.max((lin.hess[i] - nl.hess[i]).abs());
            }
            cases += 1;
        }
    }
    report(
        results,
        "3 (summation-head equivalence)",
        worst <= 1e-12,
        format!("worst component difference over {cases} random cases: {worst:.2e} (<= 1e-12)"),
    );
}

// ---------------------------------------------------------------------------
// 4. Complexity separation
// ---------------------------------------------------------------------------

fn criterion_4(results: &mut Vec<Outcome>) {
    // P = 100, N + M = 1400, single thread. Matched hidden stacks: the
    // kernel-pair model and the factorized model share the [*,128,128,128,
    // 128,*] trunk.
    let decgreen = ModelConfig {
        p: 100,
        f_spec: Some(spec(&[2, 128, 128, 128, 128, 50])),
        h_spec: Some(spec(&[2, 16, 16, 16, 50])),
        ..model_config(ModelKind::Decgreen)
    };
    let modnet = ModelConfig {
        p: 100,
        g_spec: Some(spec(&[4, 128, 128, 128, 128, 1])),
        ..model_config(ModelKind::Modnet)
    };
    let mut tcfg = train_config(Problem::Poisson2d, decgreen.clone());
    tcfg.n_interior = 1000;
    tcfg.m_boundary = 400;
    let run = RunConfig {
        train: tcfg,
        out_dir: std::env::temp_dir().join("decgreen-acceptance-bench"),
        checkpoint: None,
        export_resolution: 101,
        benchmark: Some(BenchmarkConfig {
            repetitions: 3,
            models: vec![decgreen, modnet],
        }),
    };
    let report_data = run_benchmark(&run, run.benchmark.as_ref().unwrap()).unwrap();
    let laws_ok = report_data.entries.iter().all(|e| e.counter_law_ok);
    let h_per_step = report_data.entries[0]
        .per_step_counts
        .iter()
        .find(|(r, _)| r == "h")
        .map(|(_, c)| *c)
        .unwrap_or(0);
    let g_per_step = report_data.entries[1]
        .per_step_counts
        .iter()
        .find(|(r, _)| r == "g")
        .map(|(_, c)| *c)
        .unwrap_or(0);
    let ratio = report_data.ratios[0].2;
    let pass = laws_ok && h_per_step == 100 && g_per_step == 100 * 1400 && ratio >= 5.0;
    report(
        results,
        "4 (complexity separation)",
        pass,
        format!(
            "H evals/step = {h_per_step} (== P = 100), G evals/step = {g_per_step} \
             (== P*(N+M) = 140000), wall-clock ratio modnet/decgreen = {ratio:.1} (>= 5)"
        ),
    );
}

// ---------------------------------------------------------------------------
// 5 & 7. Training accuracy criteria
// ---------------------------------------------------------------------------

/// Train in segments, checking the grid MSE between segments; stops at the
/// first confirmed crossing. Returns (reached, steps_used, best_mse,
/// loss_at_0, loss_at_200).
fn train_until_mse(
    cfg: &TrainConfig,
    target_mse: f64,
    segment: usize,
    max_steps: usize,
) -> (bool, usize, f64, f64, f64) {
    let mut trainer = Trainer::new(cfg).unwrap();
    let quad = trainer.samples().quadrature.clone();
    let a = cfg.a_values[0];
    let mut best = f64::INFINITY;
    let mut loss0 = f64::NAN;
    let mut loss200 = f64::NAN;
    let mut steps = 0usize;
    while steps < max_steps {
        let burst = segment.min(max_steps - steps);
        for _ in 0..burst {
            let b = match trainer.step() {
                Ok(b) => b,
                // A diverging seed counts as a failed seed, not a crashed
                // suite.
                Err(_) => return (false, steps, f64::INFINITY, loss0, loss200),
            };
            if steps == 0 {
                loss0 = b.total;
            }
            if steps == 200 {
                loss200 = b.total;
            }
            steps += 1;
        }
        // Cheap screen on a coarse grid, confirm on the full grid.
        let coarse = evaluate(trainer.model(), cfg.problem, &quad, a, 51).unwrap();
        if coarse <= target_mse * 1.2 {
            let fine = evaluate(trainer.model(), cfg.problem, &quad, a, cfg.eval_resolution)
                .unwrap();
            best = best.min(fine);
            if fine <= target_mse {
                return (true, steps, fine, loss0, loss200);
            }
        }
    }
    let fine = evaluate(trainer.model(), cfg.problem, &quad, a, cfg.eval_resolution).unwrap();
    best = best.min(fine);
    (false, steps, best, loss0, loss200)
}

fn criterion_5(results: &mut Vec<Outcome>) {
    // Table-1 architecture, P = 100, a = 15. Collocation counts are not
    // pinned by the criterion; 200/120 keeps the single-core step affordable.
    let model = ModelConfig {
        p: 100,
        f_spec: Some(spec(&[2, 512, 512, 512, 512, 50])),
        h_spec: Some(spec(&[2, 16, 16, 16, 1])),
        ..model_config(ModelKind::Decgreen)
    };
    let mut cfg = train_config(Problem::Poisson2d, model);
    cfg.n_interior = 200;
    cfg.m_boundary = 120;

    let mut successes = 0usize;
    let mut failures = 0usize;
    let mut details = Vec::new();
    let mut smoke = Vec::new();
    for seed in [101u64, 202, 303] {
        if successes >= 2 {
            break;
        }
        cfg.seed = seed;
        let (reached, steps, mse, loss0, loss200) =
            train_until_mse(&cfg, 1e-3, 250, 6000);
        smoke.push((loss0, loss200));
        details.push(format!("seed {seed}: mse {mse:.2e} after {steps} steps"));
        if reached {
            successes += 1;
        } else {
            failures += 1;
        }
    }
    // Training smoke oracle: the loss at step 200 is below the loss at step
    // 0, seed-averaged. Seeds that hit the MSE target in under 200 steps
    // satisfy the decrease trivially and are excluded from the average.
    let ran_past_200: Vec<&(f64, f64)> =
        smoke.iter().filter(|(_, l200)| l200.is_finite()).collect();
    let smoke_ok = if ran_past_200.is_empty() {
        true
    } else {
        let n = ran_past_200.len() as f64;
        let d0: f64 = ran_past_200.iter().map(|(a, _)| a).sum::<f64>() / n;
        let d200: f64 = ran_past_200.iter().map(|(_, b)| b).sum::<f64>() / n;
        d200 < d0
    };
    let pass = successes >= 2 && failures + successes <= 3 && smoke_ok;
    report(
        results,
        "5 (single-instance accuracy)",
        pass,
        format!(
            "{successes} seed(s) reached MSE <= 1e-3 on the 101^2 grid within budget \
             (2 required of 3); mean loss step200 < step0: {smoke_ok}; {}",
            details.join("; ")
        ),
    );
}

fn criterion_7(results: &mut Vec<Outcome>) {
    // Table-2 architecture, P = 300, reaction-diffusion.
    let model = ModelConfig {
        p: 300,
        f_spec: Some(spec(&[2, 512, 512, 512, 512, 512, 50])),
        h_spec: Some(spec(&[2, 32, 32, 32, 50])),
        ..model_config(ModelKind::Decgreen)
    };
    let mut cfg = train_config(Problem::ReactionDiffusion, model);
    cfg.n_interior = 200;
    cfg.m_boundary = 120;

    let mut successes = 0usize;
    let mut details = Vec::new();
    for seed in [11u64, 22, 33] {
        if successes >= 2 {
            break;
        }
        cfg.seed = seed;
        let (reached, steps, mse, _, _) = train_until_mse(&cfg, 1e-3, 250, 6000);
        details.push(format!("seed {seed}: mse {mse:.2e} after {steps} steps"));
        if reached {
            successes += 1;
        }
    }
    report(
        results,
        "7 (reaction-diffusion accuracy)",
        successes >= 2,
        format!(
            "{successes} seed(s) reached MSE <= 1e-3 on the 101^2 grid within budget \
             (2 required of 3); {}",
            details.join("; ")
        ),
    );
}

// ---------------------------------------------------------------------------
// 6. Operator interpolation
// ---------------------------------------------------------------------------

fn criterion_6(results: &mut Vec<Outcome>) {
    let model = ModelConfig {
        p: 100,
        f_spec: Some(spec(&[2, 64, 64, 64, 50])),
        h_spec: Some(spec(&[2, 16, 16, 1])),
        ..model_config(ModelKind::Decgreen)
    };
    let mut cfg = train_config(Problem::Poisson2d, model);
    cfg.a_values = (1..=10).map(|k| 10.0 * k as f64).collect();
    cfg.n_interior = 120;
    cfg.m_boundary = 80;
    cfg.seed = 7;

    let mut trainer = Trainer::new(&cfg).unwrap();
    let quad = trainer.samples().quadrature.clone();
    let mut rel_l2 = f64::INFINITY;
    let mut steps = 0usize;
    let max_steps = 8000;
    while steps < max_steps {
        for _ in 0..250 {
            trainer.step().unwrap();
        }
        steps += 250;
        let rep = interpolate_eval(
            trainer.model(),
            cfg.problem,
            &quad,
            &cfg.a_values,
            15.0,
            101,
        )
        .unwrap();
        rel_l2 = rep.rel_l2;
        if rel_l2 <= 0.05 {
            break;
        }
    }
    // The interpolation target sits inside the training range.
    let rep = interpolate_eval(
        trainer.model(),
        cfg.problem,
        &quad,
        &cfg.a_values,
        15.0,
        101,
    )
    .unwrap();
    let pass = rel_l2 <= 0.05 && !rep.extrapolation;
    report(
        results,
        "6 (operator interpolation)",
        pass,
        format!(
            "relative L2 at a=15 after multi-parameter training (a_k = 10k): \
             {rel_l2:.4} (<= 0.05) after {steps} steps; extrapolation flag: {}",
            rep.extrapolation
        ),
    );
}

// ---------------------------------------------------------------------------
// 8. Reproducibility
// ---------------------------------------------------------------------------

fn criterion_8(results: &mut Vec<Outcome>) {
    let model = ModelConfig {
        p: 20,
        f_spec: Some(spec(&[2, 24, 8])),
        h_spec: Some(spec(&[2, 12, 8])),
        ..model_config(ModelKind::Decgreen)
    };
    let mut tcfg = train_config(Problem::Poisson2d, model);
    tcfg.steps = 40;
    tcfg.n_interior = 60;
    tcfg.m_boundary = 30;
    tcfg.seed = 5;
    tcfg.threads = 1;
    tcfg.eval_resolution = 21;

    let dir = tempfile::tempdir().unwrap();
    let mut artifacts = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}"));
        let rc = RunConfig {
            train: tcfg.clone(),
            out_dir: out.clone(),
            checkpoint: None,
            export_resolution: 21,
            benchmark: None,
        };
        let cfg_path = dir.path().join(format!("cfg{run}.json"));
        std::fs::write(&cfg_path, serde_json::to_string(&rc).unwrap()).unwrap();
        decgreen::cli::cmd_train(&cfg_path, None, None, None).unwrap();
        artifacts.push((
            std::fs::read(out.join("summary.json")).unwrap(),
            std::fs::read(out.join("checkpoint.dgn")).unwrap(),
        ));
    }
    let summaries_match = artifacts[0].0 == artifacts[1].0;
    let checkpoints_match = artifacts[0].1 == artifacts[1].1;
    report(
        results,
        "8 (bitwise reproducibility)",
        summaries_match && checkpoints_match,
        format!(
            "two identical --threads 1 runs: summaries byte-identical: {summaries_match}, \
             checkpoints byte-identical: {checkpoints_match}"
        ),
    );
}

// ---------------------------------------------------------------------------
// 9. IO contracts
// ---------------------------------------------------------------------------

fn criterion_9(results: &mut Vec<Outcome>) {
    let dir = tempfile::tempdir().unwrap();

    // Config round trip.
    let model = ModelConfig {
        p: 10,
        f_spec: Some(spec(&[2, 8, 4])),
        h_spec: Some(spec(&[2, 6, 4])),
        ..model_config(ModelKind::Decgreen)
    };
    let rc = RunConfig {
        train: train_config(Problem::ReactionDiffusion, model),
        out_dir: dir.path().join("out"),
        checkpoint: None,
        export_resolution: 33,
        benchmark: None,
    };
    let text = serde_json::to_string_pretty(&rc).unwrap();
    let parsed: RunConfig = serde_json::from_str(&text).unwrap();
    let config_ok = parsed == rc && serde_json::to_string_pretty(&parsed).unwrap() == text;

    // Checkpoint round trip: save -> load -> save byte-identical.
    let model_inst = Model::new(rc.train.model.clone(), 9).unwrap();
    let meta = CheckpointMeta {
        format_version: 1,
        train: rc.train.clone(),
        trained_steps: 0,
    };
    let p1 = dir.path().join("c1.dgn");
    let p2 = dir.path().join("c2.dgn");
    save_checkpoint(&p1, &meta, &model_inst).unwrap();
    let (meta2, loaded) = load_checkpoint(&p1).unwrap();
    save_checkpoint(&p2, &meta2, &loaded).unwrap();
    let checkpoint_ok = std::fs::read(&p1).unwrap() == std::fs::read(&p2).unwrap();

    // CSV re-read reproduces the in-memory fields.
    let oracle = decgreen::models::poisson_oracle_model(15.0);
    let csv_path = dir.path().join("field.csv");
    decgreen::cli::export_field_csv(&csv_path, &oracle, Problem::Poisson2d, &[], 15.0, 21)
        .unwrap();
    let gridpts = grid(&Problem::Poisson2d.domain(), 21).unwrap();
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut csv_ok = true;
    let mut n_rows = 0;
    for (line, &p) in text.lines().skip(1).zip(gridpts.iter()) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        let exact = decgreen::pde::poisson_exact(p, 15.0);
        csv_ok &= (cols[0] - p[0]).abs() <= 1e-15
            && (cols[1] - p[1]).abs() <= 1e-15
            && (cols[2] - exact).abs() <= 1e-15
            && (cols[4] - (cols[2] - cols[3]).abs()).abs() <= 1e-15;
        n_rows += 1;
    }
    csv_ok &= n_rows == 21 * 21;

    report(
        results,
        "9 (IO contracts)",
        config_ok && checkpoint_ok && csv_ok,
        format!(
            "config round-trip: {config_ok}; checkpoint save-load-save byte-identical: \
             {checkpoint_ok}; CSV re-read within 1e-15: {csv_ok}"
        ),
    );
}

#[test]
fn acceptance() {
    let mut results = Vec::new();
    criterion_1(&mut results);
    criterion_2(&mut results);
    criterion_3(&mut results);
    criterion_4(&mut results);
    criterion_5(&mut results);
    criterion_6(&mut results);
    criterion_7(&mut results);
    criterion_8(&mut results);
    criterion_9(&mut results);

    println!("\nacceptance summary:");
    for r in &results {
        println!(
            "  {:45} {}",
            r.name,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    let failed: Vec<&Outcome> = results.iter().filter(|r| !r.pass).collect();
    assert!(
        failed.is_empty(),
        "failed criteria: {:?}",
        failed
            .iter()
            .map(|r| format!("{}: {}", r.name, r.detail))
            .collect::<Vec<_>>()
    );
}
