//! End-to-end acceptance checks. Prints one `[PASS]` or `[FAIL]` line per
//! criterion and exits non-zero if any failed.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode, Output};
use std::time::Instant;

use gkl_core::dataset::{load_dataset, parse_tu, DatasetBundle};
use gkl_core::graph::{labeled, Graph};
use gkl_core::kernels::graphlet::{binomial, graphlet_features};
use gkl_core::kernels::random_walk::{random_walk_kernel_pair, spectral_radius_estimate};
use gkl_core::kernels::{GraphletMode, GraphletTable, WalkParams};
use gkl_core::matrix::MatrixRole;
use gkl_core::nystrom::nystrom_fit;
use gkl_core::seed::graph_rng;
use gkl_core::svm::{dual_objective, svm_train};
use gkl_core::{Error, GraphKernel, KernelMatrix, KernelName, KernelSpec};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = std::result::Result<String, String>;

fn mutag_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/MUTAG")
}

/// A fresh cache directory already holding MUTAG.
fn seeded_cache() -> tempfile::TempDir {
    let cache = tempfile::tempdir().unwrap();
    let target = cache.path().join("MUTAG");
    std::fs::create_dir(&target).unwrap();
    for entry in std::fs::read_dir(mutag_dir()).unwrap() {
        let path = entry.unwrap().path();
        std::fs::copy(&path, target.join(path.file_name().unwrap())).unwrap();
    }
    cache
}

/// The `gkl` binary of this build, next to `target/<profile>/deps/`.
fn gkl_binary() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let bin = profile_dir.join(format!("gkl{}", std::env::consts::EXE_SUFFIX));
    if !bin.exists() {
        let cargo = std::env::var_os("CARGO").unwrap_or_else(|| "cargo".into());
        let mut build = Command::new(cargo);
        build.args(["build", "-p", "gkl-cli", "--bin", "gkl"]);
        if profile_dir.file_name().is_some_and(|p| p == "release") {
            build.arg("--release");
        }
        let status = build.status().expect("cargo build");
        assert!(
            status.success() && bin.exists(),
            "could not build {}",
            bin.display()
        );
    }
    bin
}

fn gkl(cache: &Path, args: &[&str]) -> Output {
    Command::new(gkl_binary())
        .args(args)
        .env("GKL_CACHE_DIR", cache)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn mutag(cache: &Path) -> DatasetBundle {
    load_dataset("MUTAG", None, Some(cache)).expect("MUTAG in the seeded cache")
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64, labels: i64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let vl = (0..n).map(|_| rng.random_range(0..labels)).collect();
    let el = (0..edges.len()).map(|_| rng.random_range(0..2)).collect();
    Graph::new(n, edges)
        .unwrap()
        .with_vertex_labels(vl)
        .unwrap()
        .with_aligned_edge_labels(el)
        .unwrap()
}

/// The caller's cache when `GKL_CACHE_DIR` is set, else a fresh directory.
fn enzymes_cache() -> (Option<tempfile::TempDir>, PathBuf) {
    match std::env::var_os("GKL_CACHE_DIR") {
        Some(dir) => (None, PathBuf::from(dir)),
        None => {
            let tmp = tempfile::tempdir().unwrap();
            let path = tmp.path().to_path_buf();
            (Some(tmp), path)
        }
    }
}

fn parse_accuracy(line: &str) -> Option<f64> {
    let pct = line.trim().strip_prefix("accuracy: ")?.strip_suffix(" %")?;
    pct.parse::<f64>().ok().map(|p| p / 100.0)
}

fn mutag_classification(cache: &Path) -> Outcome {
    let clock = Instant::now();
    let run = |seed: Option<u64>| -> std::result::Result<f64, String> {
        let mut args = vec![
            "classify",
            "MUTAG",
            "--kernel",
            "shortest_path",
            "--test-fraction",
            "0.1",
            "--C",
            "1",
        ];
        let seed = seed.map(|s| s.to_string());
        if let Some(s) = &seed {
            args.extend(["--seed", s]);
        }
        let out = gkl(cache, &args);
        if !out.status.success() {
            return Err(stderr(&out));
        }
        parse_accuracy(&stdout(&out)).ok_or_else(|| format!("unexpected output {:?}", stdout(&out)))
    };
    let single = run(None)?;
    let single_secs = clock.elapsed().as_secs_f64();
    ensure((0.75..=0.95).contains(&single), || {
        format!("accuracy {single:.4} outside [0.75, 0.95]")
    })?;
    let mut sum = 0.0;
    for seed in 0..20 {
        sum += run(Some(seed))?;
    }
    let mean = sum / 20.0;
    let total = clock.elapsed().as_secs_f64();
    ensure(mean >= 0.80, || {
        format!("mean over 20 seeds {mean:.4} < 0.80")
    })?;
    ensure(single_secs < 60.0, || {
        format!("single run took {single_secs:.1} s")
    })?;
    ensure(total < 60.0, || format!("21 runs took {total:.1} s"))?;
    Ok(format!(
        "accuracy {single:.4}, 20-seed mean {mean:.4}, {total:.1} s for 21 runs"
    ))
}

fn wl_identity(cache: &Path) -> Outcome {
    let data = mutag(cache);
    let wl = KernelSpec::new(KernelName::WeisfeilerLehman)
        .with("h", 0usize)
        .with("base", "vertex_histogram");
    let a = GraphKernel::new(wl)
        .unwrap()
        .fit_transform(&data.graphs)
        .map_err(|e| e.to_string())?
        .1;
    let b = GraphKernel::new(KernelSpec::new(KernelName::VertexHistogram))
        .unwrap()
        .fit_transform(&data.graphs)
        .map_err(|e| e.to_string())?
        .1;
    ensure(a.values() == b.values(), || "matrices differ".into())?;
    Ok(format!("{}x{} identical", a.rows(), a.cols()))
}

fn wl_hand_case() -> Outcome {
    let path = labeled(3, &[(0, 1), (1, 2)], &[0, 0, 0]).unwrap();
    let triangle = labeled(3, &[(0, 1), (1, 2), (0, 2)], &[0, 0, 0]).unwrap();
    let spec = KernelSpec::new(KernelName::WeisfeilerLehman).with("h", 1usize);
    let (_, k) = GraphKernel::new(spec)
        .unwrap()
        .fit_transform(&[path, triangle])
        .map_err(|e| e.to_string())?;
    ensure(k.get(0, 0) == 14.0 && k.get(0, 1) == 12.0, || {
        format!(
            "k(P3, P3) = {}, k(P3, triangle) = {}",
            k.get(0, 0),
            k.get(0, 1)
        )
    })?;
    Ok("k(P3, P3) = 14, k(P3, triangle) = 12".into())
}

fn walk_series(g: &Graph, h: &Graph, lambda: f64, terms: usize) -> f64 {
    let (n, m) = (g.order(), h.order());
    let mut adj = vec![Vec::new(); n * m];
    for u in 0..n {
        for v in 0..n {
            for x in 0..m {
                for y in 0..m {
                    if g.has_edge(u, v) && h.has_edge(x, y) {
                        adj[u * m + x].push(v * m + y);
                    }
                }
            }
        }
    }
    let mut walk = vec![1.0; n * m];
    let mut total: f64 = walk.iter().sum();
    let mut weight = 1.0;
    for _ in 0..terms {
        walk = (0..n * m)
            .map(|i| adj[i].iter().map(|&j| walk[j]).sum())
            .collect();
        weight *= lambda;
        total += weight * walk.iter().sum::<f64>();
    }
    total
}

fn random_walk_oracles() -> Outcome {
    let k2 = Graph::new(2, [(0, 1)]).unwrap();
    let p = WalkParams {
        lambda: 0.1,
        ..Default::default()
    };
    let closed = random_walk_kernel_pair(&k2, &k2, &p).map_err(|e| e.to_string())?;
    ensure((closed - 4.0 / 0.9).abs() < 1e-9, || {
        format!("k(K2, K2) = {closed}")
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for pair in 0..50 {
        let n = rng.random_range(1..=6);
        let g = random_graph(&mut rng, n, 0.5, 1);
        let m = rng.random_range(1..=6);
        let h = random_graph(&mut rng, m, 0.5, 1);
        let rho = spectral_radius_estimate(&g) * spectral_radius_estimate(&h);
        let lambda = if rho > 0.0 { 0.5 / rho } else { 0.5 };
        let p = WalkParams {
            lambda,
            ..Default::default()
        };
        let k = random_walk_kernel_pair(&g, &h, &p).map_err(|e| format!("pair {pair}: {e}"))?;
        let series = walk_series(&g, &h, lambda, 20);
        let bound = lambda.powi(21) * (n * m) as f64 * rho.powi(21) / (1.0 - lambda * rho);
        let gap = (k - series).abs();
        ensure(gap <= bound * (1.0 + 1e-9) + 1e-10, || {
            format!("pair {pair}: |{k} - {series}| > {bound}")
        })?;
        worst = worst.max(if bound > 0.0 { gap / bound } else { 0.0 });
    }
    Ok(format!(
        "closed form {closed:.12}, 50 pairs within bound (worst gap/bound {worst:.3})"
    ))
}

fn default_specs() -> Vec<KernelSpec> {
    KernelName::ALL
        .iter()
        .map(|&k| KernelSpec::new(k).seeded(0))
        .collect()
}

fn psd_suite(cache: &Path) -> Outcome {
    let data = mutag(cache);
    let subset = &data.graphs[..30];
    let mut report = Vec::new();
    for spec in default_specs() {
        let (_, k) = GraphKernel::new(spec.clone())
            .unwrap()
            .fit_transform(subset)
            .map_err(|e| format!("{}: {e}", spec.kernel))?;
        let asym = k.max_asymmetry();
        ensure(asym < 1e-9, || {
            format!("{}: asymmetry {asym:e}", spec.kernel)
        })?;
        let m = k.to_dmatrix();
        let sym = (&m + m.transpose()) * 0.5;
        let eig = sym.symmetric_eigen().eigenvalues;
        let (lo, hi) = (eig.min(), eig.max());
        ensure(lo >= -1e-8 * hi.max(1.0), || {
            format!("{}: min eigenvalue {lo:e}, max {hi:e}", spec.kernel)
        })?;
        report.push(format!("{} {lo:.1e}", spec.kernel));
    }
    Ok(format!("min eigenvalues: {}", report.join(", ")))
}

fn transform_consistency(cache: &Path) -> Outcome {
    let data = mutag(cache);
    let subset = &data.graphs[..30];
    let mut worst: f64 = 0.0;
    for base in default_specs() {
        for spec in [
            base.clone(),
            base.clone().normalized(true),
            base.clone().nystrom(10),
        ] {
            let gk = GraphKernel::new(spec.clone()).unwrap();
            let (fitted, k) = gk
                .fit_transform(subset)
                .map_err(|e| format!("{}: {e}", spec.kernel))?;
            let t = fitted
                .transform(subset)
                .map_err(|e| format!("{}: {e}", spec.kernel))?;
            let diff = k.max_abs_diff(&t).map_err(|e| e.to_string())?;
            ensure(diff < 1e-9, || {
                format!(
                    "{} (normalize={}, nystrom={:?}): {diff:e}",
                    spec.kernel, spec.normalize, spec.nystrom_components
                )
            })?;
            worst = worst.max(diff);
        }
    }
    Ok(format!("18 configurations, max difference {worst:e}"))
}

fn graphlet_tables() -> Outcome {
    let sizes: Vec<usize> = (3..=5)
        .map(|k| GraphletTable::new(k).map(|t| t.len()).unwrap_or(0))
        .collect();
    ensure(sizes == [4, 11, 34], || format!("class counts {sizes:?}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for k in 3..=5usize {
        let table = GraphletTable::new(k).unwrap();
        for i in 0..20 {
            let n = rng.random_range(k..=10);
            let g = random_graph(&mut rng, n, 0.4, 1);
            let f = graphlet_features(
                &g,
                &table,
                1,
                GraphletMode::Exhaustive,
                &mut graph_rng(0, i),
            )
            .map_err(|e| e.to_string())?;
            let expected = binomial(n, k) as f64;
            ensure(f.total() == expected, || {
                format!("k={k}, n={n}: total {} != {expected}", f.total())
            })?;
        }
    }
    Ok("4 / 11 / 34 classes, exhaustive totals equal C(n,k)".into())
}

fn nystrom_checks(cache: &Path) -> Outcome {
    let data = mutag(cache);
    let subset = &data.graphs[..30];
    let n = subset.len();
    let mut worst: f64 = 0.0;
    for spec in default_specs() {
        let exact = GraphKernel::new(spec.clone())
            .unwrap()
            .fit_transform(subset)
            .map_err(|e| e.to_string())?
            .1;
        let approx = GraphKernel::new(spec.clone().nystrom(n))
            .unwrap()
            .fit_transform(subset)
            .map_err(|e| e.to_string())?
            .1;
        let (e, a) = (exact.to_dmatrix(), approx.to_dmatrix());
        let rel = (&a - &e).norm() / e.norm();
        ensure(rel < 1e-6, || {
            format!("{}: q=n relative error {rel:e}", spec.kernel)
        })?;
        worst = worst.max(rel);

        for seed in 0..5 {
            let state = nystrom_fit(&exact, 2, seed).map_err(|e| e.to_string())?;
            let phi = state.landmark_columns(&exact) * state.coefficients().transpose();
            let ours = &phi * phi.transpose();
            let c = e.select_columns(state.landmarks());
            let w = c.select_rows(state.landmarks());
            let eig = w.clone().symmetric_eigen();
            let top = eig.eigenvalues.max();
            let mut w_plus = DMatrix::zeros(2, 2);
            for i in 0..2 {
                let l = eig.eigenvalues[i];
                if l > 1e-10 * top {
                    let u = eig.eigenvectors.column(i);
                    w_plus += (u * u.transpose()) / l;
                }
            }
            let oracle = &c * w_plus * c.transpose();
            let gap = (&ours - &oracle).amax();
            ensure(gap < 1e-9 * oracle.amax().max(1.0), || {
                format!("{}: q=2 differs by {gap:e}", spec.kernel)
            })?;
        }
    }
    Ok(format!(
        "q=n worst relative error {worst:e}; q=2 matches the pseudo-inverse"
    ))
}

fn write_tu(dir: &Path, name: &str, files: &[(&str, &str)]) {
    for (suffix, body) in files {
        std::fs::write(dir.join(format!("{name}_{suffix}.txt")), body).unwrap();
    }
}

fn loader(cache: &Path) -> Outcome {
    let data = mutag(cache);
    ensure(data.len() == 188 && data.classes().len() == 2, || {
        format!(
            "MUTAG: {} graphs, {} classes",
            data.len(),
            data.classes().len()
        )
    })?;

    let bad = tempfile::tempdir().unwrap();
    write_tu(
        bad.path(),
        "BAD",
        &[
            ("A", "1, 2\n2, 1\n2, 3\n3, 2\n"),
            ("graph_indicator", "1\n1\n2\n"),
            ("graph_labels", "0\n1\n"),
        ],
    );
    match parse_tu(bad.path(), "BAD") {
        Err(Error::CorruptDataset {
            line: Some(3),
            file,
            ..
        }) if file.ends_with("BAD_A.txt") => {}
        other => {
            return Err(format!(
                "cross-graph edge not rejected at line 3: {other:?}"
            ))
        }
    }

    let (_guard, enzymes_cache) = enzymes_cache();
    let enzymes =
        load_dataset("ENZYMES", None, Some(&enzymes_cache)).map_err(|e| format!("ENZYMES: {e}"))?;
    ensure(enzymes.len() == 600 && enzymes.classes().len() == 6, || {
        format!(
            "ENZYMES: {} graphs, {} classes",
            enzymes.len(),
            enzymes.classes().len()
        )
    })?;
    Ok("MUTAG 188/2, ENZYMES 600/6, cross-graph edge rejected at line 3".into())
}

fn project(z: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let at = |nu: f64| -> Vec<f64> {
        z.iter()
            .zip(y)
            .map(|(&zi, &yi)| (zi - nu * yi).clamp(0.0, c))
            .collect()
    };
    let balance = |a: &[f64]| a.iter().zip(y).map(|(a, y)| a * y).sum::<f64>();
    let (mut lo, mut hi) = (-1e6, 1e6);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if balance(&at(mid)) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(0.5 * (lo + hi))
}

fn projected_gradient(k: &KernelMatrix, y: &[f64], c: f64) -> f64 {
    let n = y.len();
    let q = DMatrix::from_fn(n, n, |i, j| y[i] * y[j] * k.get(i, j));
    let lipschitz = q.clone().symmetric_eigen().eigenvalues.max().max(1e-12);
    let mut a = vec![0.0; n];
    let mut z = a.clone();
    let mut t = 1.0f64;
    for _ in 0..20_000 {
        let qz = &q * DVector::from_column_slice(&z);
        let step: Vec<f64> = (0..n).map(|i| z[i] + (1.0 - qz[i]) / lipschitz).collect();
        let next = project(&step, y, c);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        z = (0..n)
            .map(|i| next[i] + (t - 1.0) / t_next * (next[i] - a[i]))
            .collect();
        a = next;
        t = t_next;
    }
    dual_objective(k, y, &a)
}

fn svm_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst: f64 = 0.0;
    for trial in 0..50 {
        let x = DMatrix::from_fn(20, 1 + trial % 6, |_, _| rng.random_range(-1.0..1.0));
        let k = KernelMatrix::from_dmatrix(&(&x * x.transpose()), MatrixRole::FitSquare).unwrap();
        let mut y: Vec<f64> = (0..20)
            .map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        y[0] = 1.0;
        y[1] = -1.0;
        let model = svm_train(&k, &y, 1.0).map_err(|e| format!("problem {trial}: {e}"))?;
        let ours = model.dual_objective(&k);
        let reference = projected_gradient(&k, &y, 1.0);
        let rel = (ours - reference).abs() / reference.abs().max(1.0);
        ensure(rel <= 1e-4, || {
            format!("problem {trial}: {ours} vs {reference}")
        })?;
        worst = worst.max(rel);
        let violation = model.kkt_violation(&k).map_err(|e| e.to_string())?;
        ensure(violation <= 1e-3, || {
            format!("problem {trial}: KKT violation {violation:e}")
        })?;
    }
    Ok(format!(
        "50 problems, worst relative gap {worst:e}, KKT within 1e-3"
    ))
}

fn enzymes_benchmark() -> Outcome {
    let (_guard, cache) = enzymes_cache();
    let out_dir = tempfile::tempdir().unwrap();
    let csv = out_dir.path().join("benchmark.csv");
    let out = gkl(
        &cache,
        &[
            "benchmark",
            "ENZYMES",
            "--param",
            "random_walk.lambda=0.01",
            "--param",
            "random_walk.match_labels=true",
            "--out",
            csv.to_str().unwrap(),
        ],
    );
    let text = std::fs::read_to_string(&csv).unwrap_or_default();
    ensure(out.status.success(), || {
        format!(
            "exit {:?}: {}",
            out.status.code(),
            stderr(&out).lines().last().unwrap_or("")
        )
    })?;
    let lines: Vec<&str> = text.lines().collect();
    ensure(
        lines.first() == Some(&"dataset,kernel,seconds") && lines.len() == 7,
        || format!("CSV:\n{text}"),
    )?;
    for (line, kernel) in lines[1..].iter().zip(KernelName::ALL) {
        let cells: Vec<&str> = line.split(',').collect();
        let timed = cells.len() == 3 && cells[2].parse::<f64>().is_ok();
        ensure(
            cells[0] == "ENZYMES" && cells[1] == kernel.as_str() && timed,
            || format!("bad row {line}"),
        )?;
    }
    Ok(format!("{} timed rows", lines.len() - 1))
}

fn main() -> ExitCode {
    let cache = seeded_cache();
    let cache = cache.path();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (
            "MUTAG shortest-path classification",
            Box::new(|| mutag_classification(cache)),
        ),
        (
            "WL h=0 equals vertex histogram on MUTAG",
            Box::new(|| wl_identity(cache)),
        ),
        ("WL hand case", Box::new(wl_hand_case)),
        (
            "random walk closed form and truncated series",
            Box::new(random_walk_oracles),
        ),
        ("PSD and symmetry suite", Box::new(|| psd_suite(cache))),
        (
            "transform consistency",
            Box::new(|| transform_consistency(cache)),
        ),
        ("graphlet tables", Box::new(graphlet_tables)),
        ("Nystrom reconstruction", Box::new(|| nystrom_checks(cache))),
        ("dataset loader", Box::new(|| loader(cache))),
        ("SVM oracle", Box::new(svm_oracle)),
        ("ENZYMES benchmark CSV", Box::new(enzymes_benchmark)),
    ];
    let mut failed = 0;
    for (name, check) in &criteria {
        let clock = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        let secs = clock.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {name}: {detail} ({secs:.1} s)"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail} ({secs:.1} s)");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
