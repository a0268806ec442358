//! Acceptance report: one PASS/FAIL line per criterion.
//!
//! Failing criteria are reported, not hidden, and by default do not fail the
//! test run. Set RWSEG_ACCEPTANCE_STRICT=1 to turn any FAIL into a nonzero
//! exit status.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rwseg_cli::{run_sweep, InputArgs, ParamArgs, SweepArgs, SweepStatus};
use rwseg_core::corpus::load_corpus;
use rwseg_core::graph::EdgeWeights;
use rwseg_core::imageio::{
    decode_probability_raster, decode_seed_mask, decode_trimap, encode_image, encode_probability_raster,
    encode_seed_mask, encode_trimap, load_probability_raster, save_probability_raster,
};
use rwseg_core::random::{random_instance, RandomInstance};
use rwseg_core::walks::{boundary_random_walks_on, brw_objective, random_walks_on};
use rwseg_core::*;

const TOL: f64 = 1e-8;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn instances(count: u64) -> Vec<RandomInstance> {
    (0..count)
        .map(|k| random_instance(0x5EED, k, Default::default(), Weighting::default()))
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn solve_opts() -> SolveOptions {
    SolveOptions { tolerance: TOL, ..Default::default() }
}

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn corpus_dir() -> PathBuf {
    workspace_root().join("data/corpus")
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut failures = 0;
    for inst in instances(200) {
        let lap = assemble_laplacian(&inst.weights, &inst.seeds).unwrap();
        let blap = apply_boundary_modification(&lap, &inst.boundary, inst.lambda).unwrap();
        for l in [&lap, &blap] {
            let rhs = l.rhs();
            match (solve_system(l, &rhs, &solve_opts()), dense_oracle_solve(l, &rhs)) {
                (Ok(x), Ok(y)) => worst = worst.max(max_abs_diff(&x, &y)),
                _ => failures += 1,
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst < 1e-6 && failures == 0 && elapsed < Duration::from_secs(30),
        format!(
            "200 instances x (RW, BRW): worst max-norm gap {worst:.2e} (limit 1e-6), {failures} solve failures, {:.2} s (limit 30 s)",
            elapsed.as_secs_f64()
        ),
    )
}

/// `p_i - (sum_j w_ij p_j - 0.5 lambda e_i) / (d_i - lambda e_i)`
fn defect(w: &EdgeWeights, p: &[f64], i: usize, lambda: f64) -> f64 {
    let pull: f64 = w.neighbors(i).map(|(j, wij)| wij * p[j]).sum();
    p[i] - (pull - 0.5 * lambda) / (w.degree(i) - lambda)
}

fn harmonicity() -> Outcome {
    let mut worst_rw = 0.0f64;
    let mut worst_brw = 0.0f64;
    let mut checked = 0usize;
    for inst in instances(50) {
        let rw = random_walks_on(&inst.weights, &inst.seeds, &solve_opts()).unwrap();
        let seeds = inst.seeds_with_boundary();
        let brw = boundary_random_walks_on(&inst.weights, &seeds, inst.lambda, &solve_opts()).unwrap();
        for i in (0..rw.len()).filter(|&i| !inst.seeds.is_seed(i)) {
            worst_rw = worst_rw.max(defect(&inst.weights, rw.raw(), i, 0.0).abs());
            let lambda = if seeds.is_boundary(i) { inst.lambda } else { 0.0 };
            worst_brw = worst_brw.max(defect(&inst.weights, brw.raw(), i, lambda).abs());
            checked += 1;
        }
    }
    let limit = 10.0 * TOL;
    outcome(
        worst_rw < limit && worst_brw < limit,
        format!("50 instances, {checked} pixels: worst RW defect {worst_rw:.2e}, worst BRW defect {worst_brw:.2e} (limit {limit:.0e})"),
    )
}

fn maximum_principle() -> Outcome {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for inst in instances(200) {
        let map = random_walks_on(&inst.weights, &inst.seeds, &solve_opts()).unwrap();
        for &p in map.raw() {
            lo = lo.min(p);
            hi = hi.max(p);
        }
    }
    outcome(
        lo >= -1e-6 && hi <= 1.0 + 1e-6,
        format!("200 instances: RW probabilities span [{lo:.3e}, {hi:.12}]"),
    )
}

fn lambda_zero_reduction() -> Outcome {
    let mut mismatches = Vec::new();
    for (k, inst) in instances(20).into_iter().enumerate() {
        let params = FeedbackParams {
            lambda: 0.0,
            sample_fraction: 0.6,
            rng_seed: 1000 + k as u64,
            ..Default::default()
        };
        let ctx = RunContext::default();
        let a = run_ibrw(&inst.image, &inst.seeds, &params, &ctx).unwrap();
        let b = run_irw(&inst.image, &inst.seeds, &params, &ctx).unwrap();
        if a.map.labels() != b.map.labels() || a.trace != b.trace {
            mismatches.push(k);
        }
    }
    outcome(
        mismatches.is_empty(),
        format!("20 instances, sample fraction 0.6: mismatching instances {mismatches:?}"),
    )
}

fn brw_objective_check() -> Outcome {
    let direct = SolveOptions { method: SolveMethod::DenseDirect, ..Default::default() };
    let (mut tested, mut indefinite, mut violations, mut violations_definite) = (0, 0, 0, 0);
    for inst in instances(200) {
        if inst.boundary.is_empty() {
            continue;
        }
        tested += 1;
        let lap = apply_boundary_modification(
            &assemble_laplacian(&inst.weights, &inst.seeds).unwrap(),
            &inst.boundary,
            inst.lambda,
        )
        .unwrap();
        let definite = solve_system(&lap, &lap.rhs(), &direct).is_ok();
        indefinite += usize::from(!definite);
        let rw = random_walks_on(&inst.weights, &inst.seeds, &solve_opts()).unwrap();
        let brw = boundary_random_walks_on(&inst.weights, &inst.seeds_with_boundary(), inst.lambda, &solve_opts())
            .unwrap();
        let at_rw = brw_objective(&inst.weights, rw.raw(), &inst.boundary, inst.lambda);
        let at_brw = brw_objective(&inst.weights, brw.raw(), &inst.boundary, inst.lambda);
        if at_brw > at_rw + 1e-9 * at_rw.abs().max(1.0) {
            violations += 1;
            violations_definite += usize::from(definite);
        }
    }
    outcome(
        violations == 0,
        format!(
            "{tested} instances with nonempty S_E: {violations} violations \
             ({violations_definite} on positive definite systems); \
             {indefinite} systems indefinite despite lambda < min w"
        ),
    )
}

fn feedback_loop_pattern() -> Outcome {
    let start = Instant::now();
    let corpus = load_corpus(corpus_dir()).expect("bundled corpus");
    let params = FeedbackParams::default();
    let (mut a, mut b, mut c) = (true, true, true);
    let mut lines = Vec::new();
    for case in &corpus {
        let seeds = case.seeds.to_seed_state();
        let ctx = RunContext { ground_truth: Some(&case.trimap), ..Default::default() };
        let dims = (case.image.width(), case.image.height());
        let rw = run_algorithm(Algorithm::Rw, &case.image, &seeds, &params, &ctx).unwrap();
        let ibrw = run_ibrw(&case.image, &seeds, &params, &ctx).unwrap();
        let rw_err = error_rate(rw.map.labels(), dims, &case.trimap).unwrap().rate;
        let ibrw_err = error_rate(ibrw.map.labels(), dims, &case.trimap).unwrap().rate;
        let r = &ibrw.trace.records;
        let band = (r[0].boundary_count, r.get(1).map_or(r[0].boundary_count, |x| x.boundary_count));
        let iterations = r.len() - 1;
        let stopped_by_rule = ibrw.stop != StopReason::MaxIterations && ibrw.degraded.is_none();
        let (ok_a, ok_b, ok_c) = (ibrw_err <= rw_err, band.1 < band.0, stopped_by_rule && iterations <= 5);
        a &= ok_a;
        b &= ok_b;
        c &= ok_c;
        let mark = |ok: bool| if ok { "ok" } else { "x" };
        lines.push(format!(
            "      {:<13} (a) {} RW {:.2}% IBRW {:.2}%  (b) {} |S_E| {} -> {}  (c) {} {} iterations, {:?}",
            case.name,
            mark(ok_a),
            100.0 * rw_err,
            100.0 * ibrw_err,
            mark(ok_b),
            band.0,
            band.1,
            mark(ok_c),
            iterations,
            ibrw.stop,
        ));
    }
    let elapsed = start.elapsed();
    let fast = elapsed < Duration::from_secs(60);
    outcome(
        corpus.len() >= 5 && a && b && c && fast,
        format!(
            "{} corpus images: (a) {} (b) {} (c) {}, {:.2} s (limit 60 s)\n{}",
            corpus.len(),
            if a { "pass" } else { "FAIL" },
            if b { "pass" } else { "FAIL" },
            if c { "pass" } else { "FAIL" },
            elapsed.as_secs_f64(),
            lines.join("\n")
        ),
    )
}

fn sensitivity_sanity() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let input = InputArgs {
        image: None,
        seeds: None,
        trimap: None,
        corpus: Some(corpus_dir()),
    };
    let lambda = run_sweep(&SweepArgs {
        input: input.clone(),
        params: ParamArgs::default(),
        vary: vec!["lambda=0,0.005,0.0099,0.01,0.02,0.1,1".into()],
        out: dir.path().join("lambda.csv"),
    });
    let epsilon = run_sweep(&SweepArgs {
        input,
        params: ParamArgs::default(),
        vary: vec!["epsilon=0.05,0.1,0.2,0.3,0.45".into()],
        out: dir.path().join("epsilon.csv"),
    });
    let (Ok(lambda), Ok(epsilon)) = (lambda, epsilon) else {
        return outcome(false, "a sweep returned an error");
    };
    let flagged_right = lambda.iter().all(|r| {
        let infeasible = r.lambda > r.min_weight;
        (r.status == SweepStatus::Infeasible) == infeasible
    });
    let infeasible = lambda.iter().filter(|r| r.status == SweepStatus::Infeasible).count();
    let finite = epsilon
        .iter()
        .all(|r| r.status == SweepStatus::Ok && r.error_rate.is_some_and(f64::is_finite));
    let csv_rows = fs::read_to_string(dir.path().join("epsilon.csv")).unwrap().lines().count() - 1;
    outcome(
        flagged_right && infeasible > 0 && finite && csv_rows == epsilon.len(),
        format!(
            "lambda sweep: {} points, {infeasible} flagged infeasible, flags match lambda > min w: {flagged_right}; \
             epsilon sweep: {} points, all finite: {finite}",
            lambda.len(),
            epsilon.len()
        ),
    )
}

fn read_tree(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), fs::read(&path).unwrap());
            }
        }
    }
    out
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_rwseg"))
            .args(["segment", "--algorithm", "ibrw", "--sample-fraction", "0.5", "--rng-seed", "11"])
            .arg("--corpus")
            .arg(corpus_dir())
            .arg("--out")
            .arg(&out)
            .arg("--dump-iterations")
            .output()
            .unwrap();
        (status.status.success(), read_tree(&out))
    };
    let (ok1, first) = run("a");
    let (ok2, second) = run("b");
    let identical = first == second;
    outcome(
        ok1 && ok2 && identical && !first.is_empty(),
        format!("two CLI runs on the corpus: {} files each, byte-identical: {identical}", first.len()),
    )
}

fn format_round_trips() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let specials = [0.0, -0.0, 1.0, 0.5, f64::MIN_POSITIVE, 5e-324, -1.25, 1e300, 0.1 + 0.2];
    let bits = |m: &ProbabilityMap| m.raw().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    let mut bit_exact = true;
    for (k, inst) in instances(20).into_iter().enumerate() {
        let mut raw = random_walks_on(&inst.weights, &inst.seeds, &solve_opts()).unwrap().raw().to_vec();
        for (slot, v) in raw.iter_mut().step_by(3).zip(specials.iter().cycle().skip(k)) {
            *slot = *v;
        }
        let map = ProbabilityMap::from_raw(inst.image.width(), inst.image.height(), raw).unwrap();
        let path = dir.path().join(format!("{k}.pmap"));
        save_probability_raster(&map, &path).unwrap();
        bit_exact &= bits(&load_probability_raster(&path).unwrap()) == bits(&map);
        bit_exact &= bits(&decode_probability_raster(&encode_probability_raster(&map)).unwrap()) == bits(&map);
    }

    let seeds = SeedState::from_sets(4, 3, [1, 2], [9]).unwrap();
    let mask = SeedMask::from_seed_state(&seeds);
    let mask_ok = decode_seed_mask(&encode_seed_mask(&mask).unwrap(), Some((4, 3))).unwrap() == mask;
    let trimap = Trimap::new(3, 2, vec![0, 128, 255, 255, 128, 0]).unwrap();
    let trimap_ok = decode_trimap(&encode_trimap(&trimap).unwrap(), None).unwrap() == trimap;

    // Every foreign code must be rejected, whether it arrives as PNG or PGM.
    let foreign_seed: Vec<u8> = (3..=255).collect();
    let foreign_trimap: Vec<u8> = (0..=255).filter(|c| ![0, 128, 255].contains(c)).collect();
    let mask_rejects = foreign_seed.iter().all(|&c| {
        decode_seed_mask(&gray_png(c), None).is_err() && decode_seed_mask(&gray_pgm(c), None).is_err()
    });
    let trimap_rejects = foreign_trimap.iter().all(|&c| {
        decode_trimap(&gray_png(c), None).is_err() && decode_trimap(&gray_pgm(c), None).is_err()
    });
    outcome(
        bit_exact && mask_ok && trimap_ok && mask_rejects && trimap_rejects,
        format!(
            "raster bit-exact over 20 maps with signed zeros and subnormals: {bit_exact}; \
             seed mask round-trip {mask_ok}, rejects {} foreign codes: {mask_rejects}; \
             trimap round-trip {trimap_ok}, rejects {} foreign codes: {trimap_rejects}",
            foreign_seed.len(),
            foreign_trimap.len()
        ),
    )
}

/// 3x2 8-bit gray pixels, all 0 except one holding `code`.
fn gray_codes(code: u8) -> Vec<u8> {
    vec![0, code, 0, 0, 0, 0]
}

fn gray_png(code: u8) -> Vec<u8> {
    let intensity = gray_codes(code).into_iter().map(|c| c as f64 / 255.0).collect();
    encode_image(&ImageGrid::new(3, 2, intensity).unwrap()).unwrap()
}

fn gray_pgm(code: u8) -> Vec<u8> {
    let mut out = b"P5\n3 2\n255\n".to_vec();
    out.extend(gray_codes(code));
    out
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("harmonicity", harmonicity),
        ("maximum principle", maximum_principle),
        ("lambda=0 reduction", lambda_zero_reduction),
        ("BRW objective", brw_objective_check),
        ("feedback-loop pattern", feedback_loop_pattern),
        ("sensitivity sanity", sensitivity_sanity),
        ("determinism", determinism),
        ("format round-trips", format_round_trips),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        failed += usize::from(!o.pass);
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed > 0 && std::env::var_os("RWSEG_ACCEPTANCE_STRICT").is_some_and(|v| v == "1") {
        std::process::exit(1);
    }
}
