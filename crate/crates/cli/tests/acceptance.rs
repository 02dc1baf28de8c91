//! Acceptance suite: one numbered check per criterion, each printing a
//! `[PASS]` or `[FAIL]` line. Oracles are dense nalgebra computations
//! (symmetric eigensolver, Cholesky) or explicit index loops.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use tensortrain::algebra::{mpo_apply_exact, mpo_mul_exact};
use tensortrain::env::EnvStack;
use tensortrain::frames::{frame_matrix, frame_matrix_two, supercore, vec_row_major};
use tensortrain::solvers::{self, CcaOptions, SweepConfig};
use tensortrain::tensorize::{plan_auto, quantize_vector};
use tensortrain::{io, DenseTensor, Rng, TruncationPolicy, TtMatrix, TtVector};

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn dense_random(shape: &[usize], rng: &mut Rng) -> DenseTensor<f64> {
    let len = shape.iter().product();
    DenseTensor::new(shape.to_vec(), (0..len).map(|_| rng.normal()).collect()).unwrap()
}

fn random_shape(rng: &mut Rng, order: (usize, usize), modes: (usize, usize)) -> Vec<usize> {
    let n = rng.range(order.0, order.1);
    (0..n).map(|_| rng.range(modes.0, modes.1)).collect()
}

fn laplacian_dense(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
        0 => 2.0,
        1 => -1.0,
        _ => 0.0,
    })
}

fn qtt_operator(m: &DMatrix<f64>, levels: usize) -> TtMatrix<f64> {
    let modes = vec![2; levels];
    TtMatrix::from_dense(m, &modes, &modes, &TruncationPolicy::tol(1e-14).unwrap()).unwrap()
}

/// Ascending eigenvalues from nalgebra's symmetric solver.
fn dense_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Ascending singular values as square roots of the eigenvalues of `MᵀM`.
fn dense_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    dense_eigenvalues(&(m.transpose() * m)).into_iter().map(|l| l.max(0.0).sqrt()).collect()
}

fn rel(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let mut rng = Rng::seeded(1001);
    let mut worst = 0.0f64;
    for case in 0..50 {
        let shape = random_shape(&mut rng, (3, 6), (2, 5));
        let t = dense_random(&shape, &mut rng);
        for eps in [0.0, 1e-4, 1e-8] {
            let x = TtVector::from_dense(&t, &TruncationPolicy::tol(eps).unwrap()).unwrap();
            let err = x.to_dense().distance(&t).unwrap() / t.norm();
            // ε = 0 is read as "exact up to roundoff"
            let bound = eps + 100.0 * f64::EPSILON;
            ensure(err <= bound, || format!("case {case} {shape:?} ε={eps}: error {err:e}"))?;
            worst = worst.max(err / bound);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 10.0, || format!("took {secs:.2}s"))?;
    Ok(format!("150 compressions, worst error/bound {worst:.3}, {secs:.2}s"))
}

fn criterion_2() -> Check {
    let mut rng = Rng::seeded(1002);
    for case in 0..100 {
        let modes = random_shape(&mut rng, (3, 6), (2, 4));
        let n = modes.len();
        let mut ranks = vec![1; n + 1];
        for r in ranks.iter_mut().take(n).skip(1) {
            *r = rng.range(1, 5);
        }
        // make the profile attainable: r_k ≤ r_{k−1}I_k and r_k ≤ I_{k+1}r_{k+1}
        for k in 1..n {
            ranks[k] = ranks[k].min(ranks[k - 1] * modes[k - 1]);
        }
        for k in (1..n).rev() {
            ranks[k] = ranks[k].min(ranks[k + 1] * modes[k]);
        }
        let x = TtVector::<f64>::random(&modes, &ranks, &mut rng).unwrap();
        let y = TtVector::from_dense(&x.to_dense(), &TruncationPolicy::tol(1e-12).unwrap()).unwrap();
        ensure(y.ranks() == ranks, || {
            format!("case {case}: modes {modes:?} built {ranks:?}, recovered {:?}", y.ranks())
        })?;
    }
    Ok("100/100 rank profiles recovered".into())
}

fn random_train(rng: &mut Rng, max_len: usize) -> TtVector<f64> {
    loop {
        let modes = random_shape(rng, (2, 6), (2, 4));
        if modes.iter().product::<usize>() > max_len {
            continue;
        }
        let ranks: Vec<usize> = (0..=modes.len())
            .map(|k| if k == 0 || k == modes.len() { 1 } else { rng.range(1, 5) })
            .collect();
        return TtVector::random(&modes, &ranks, rng).unwrap();
    }
}

fn criterion_3() -> Check {
    let mut rng = Rng::seeded(1003);
    let mut worst = 0.0f64;
    for _ in 0..30 {
        let x = random_train(&mut rng, 1 << 12);
        let v = x.to_dense().to_vector();
        for n in 0..x.order() {
            let g = frame_matrix(&x, n).unwrap();
            let core = DVector::from_column_slice(x.core(n).data());
            let e = (&v - g * core).norm() / v.norm();
            worst = worst.max(e);
            ensure(e <= 1e-12, || format!("one-core frame at n={n}: {e:e}"))?;
        }
        for n in 0..x.order() - 1 {
            let g = frame_matrix_two(&x, n).unwrap();
            let s = vec_row_major(&supercore(&x, n).unwrap());
            let e = (&v - g * s).norm() / v.norm();
            worst = worst.max(e);
            ensure(e <= 1e-12, || format!("two-core frame at n={n}: {e:e}"))?;
        }
    }
    Ok(format!("30 trains, every site, worst relative error {worst:.2e}"))
}

fn criterion_4() -> Check {
    let mut rng = Rng::seeded(1004);
    let mut worst = 0.0f64;
    for _ in 0..30 {
        let x = random_train(&mut rng, 1 << 12);
        for n in 0..x.order() {
            let y = x.clone().orthogonalized(n).unwrap();
            let g = frame_matrix(&y, n).unwrap();
            let gram = g.transpose() * &g;
            let e = (gram.clone() - DMatrix::identity(gram.nrows(), gram.ncols())).amax();
            worst = worst.max(e);
            ensure(e <= 1e-12, || format!("site {n}: {e:e}"))?;
        }
    }
    Ok(format!("30 trains, every centre, worst max-entry deviation {worst:.2e}"))
}

fn criterion_5() -> Check {
    let mut rng = Rng::seeded(1005);
    let mut worst = 0.0f64;
    let mut cases = 0;
    for _ in 0..40 {
        let n = rng.range(1, 4);
        let rows: Vec<usize> = (0..n).map(|_| rng.range(1, 4)).collect();
        let mids: Vec<usize> = (0..n).map(|_| rng.range(1, 4)).collect();
        let cols: Vec<usize> = (0..n).map(|_| rng.range(1, 4)).collect();
        let ranks = |rng: &mut Rng| -> Vec<usize> {
            (0..=n).map(|k| if k == 0 || k == n { 1 } else { rng.range(1, 4) }).collect()
        };
        let a = TtMatrix::random(&rows, &mids, &ranks(&mut rng), &mut rng).unwrap();
        let b = TtMatrix::random(&mids, &cols, &ranks(&mut rng), &mut rng).unwrap();
        let x = TtVector::random(&mids, &ranks(&mut rng), &mut rng).unwrap();
        let (ad, bd) = (a.to_dense(), b.to_dense());
        if ad.len() > 1 << 12 || bd.len() > 1 << 12 {
            continue;
        }
        cases += 1;
        let y = mpo_apply_exact(&a, &x).unwrap();
        let expect: Vec<usize> = a.ranks().iter().zip(x.ranks()).map(|(p, r)| p * r).collect();
        ensure(y.ranks() == expect, || format!("apply ranks {:?} vs {expect:?}", y.ranks()))?;
        let e = rel(&y.to_dense().to_vector(), &(&ad * x.to_dense().to_vector()));
        worst = worst.max(e);
        ensure(e <= 1e-11, || format!("apply error {e:e}"))?;

        let c = mpo_mul_exact(&a, &b).unwrap();
        let expect: Vec<usize> = a.ranks().iter().zip(b.ranks()).map(|(p, r)| p * r).collect();
        ensure(c.ranks() == expect, || format!("product ranks {:?} vs {expect:?}", c.ranks()))?;
        let prod = &ad * &bd;
        let e = (c.to_dense() - &prod).norm() / prod.norm();
        worst = worst.max(e);
        ensure(e <= 1e-11, || format!("product error {e:e}"))?;
    }
    Ok(format!("{cases} shape cases, worst relative error {worst:.2e}, ranks exact products"))
}

fn criterion_6() -> Check {
    let mut rng = Rng::seeded(1006);
    let mut worst = 0.0f64;
    for case in 0..20 {
        let x = random_train(&mut rng, 1 << 8);
        let modes = x.modes();
        let n = modes.len();
        let ranks: Vec<usize> = (0..=n).map(|k| if k == 0 || k == n { 1 } else { rng.range(1, 4) }).collect();
        let a = TtMatrix::random(&modes, &modes, &ranks, &mut rng).unwrap();
        let ad = a.to_dense();
        let mut stack = EnvStack::build(x.cores(), Some(&a), x.cores()).unwrap();
        for k in 0..n {
            let local = stack.effective_operator(k).unwrap();
            let g = frame_matrix(&x, k).unwrap();
            let explicit = g.transpose() * &ad * &g;
            let e = (local - &explicit).norm() / explicit.norm().max(f64::MIN_POSITIVE);
            worst = worst.max(e);
            ensure(e <= 1e-11, || format!("case {case} site {k}: {e:e}"))?;
            stack.update_left(k, x.cores(), x.cores()).unwrap();
        }
    }
    Ok(format!("20 cases, every site, worst relative error {worst:.2e}"))
}

fn criterion_7() -> Check {
    let start = Instant::now();
    let dense = laplacian_dense(64);
    let a = qtt_operator(&dense, 6);
    let exact = dense_eigenvalues(&dense);

    let r = solvers::eig_min(&a, &SweepConfig::fixed(4).with_seed(7)).map_err(|e| e.to_string())?;
    ensure(r.report.converged && r.report.sweeps <= 20, || format!("eig_min: {:?}", r.report))?;
    let e1 = (r.value - exact[0]).abs();
    ensure(e1 <= 1e-7, || format!("eig_min error {e1:e}"))?;
    ensure(r.report.is_monotone(1e-10), || format!("eig_min trajectory {:?}", r.report.objective))?;

    let r = solvers::eig_block(&a, 3, &SweepConfig::fixed(12).with_seed(7)).map_err(|e| e.to_string())?;
    ensure(r.report.converged && r.report.sweeps <= 20, || format!("eig_block: {:?}", r.report))?;
    let e3 = (0..3).map(|k| (r.values[k] - exact[k]).abs()).fold(0.0, f64::max);
    ensure(e3 <= 1e-7, || format!("eig_block error {e3:e}"))?;
    ensure(r.report.is_monotone(1e-10), || format!("eig_block trajectory {:?}", r.report.objective))?;

    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 5.0, || format!("took {secs:.2}s"))?;
    Ok(format!("eig_min error {e1:.1e}, eig_block(3) error {e3:.1e}, monotone, {secs:.2}s"))
}

fn criterion_8() -> Check {
    let mut rng = Rng::seeded(1008);
    let mut worst = 0.0f64;
    let mut cross = 0.0f64;
    for _ in 0..3 {
        let m = DMatrix::from_fn(16, 16, |_, _| rng.normal());
        let a = TtMatrix::from_dense(&m, &[2; 4], &[2; 4], &TruncationPolicy::exact()).unwrap();
        let exact = dense_singular_values(&m);

        let r = solvers::svd_dominant(&a, &SweepConfig::fixed(16)).map_err(|e| e.to_string())?;
        let e = (r.sigma - exact[15]).abs();
        worst = worst.max(e);
        ensure(e <= 1e-6, || format!("dominant σ error {e:e}"))?;

        let r = solvers::svd_small_k(&a, 3, &SweepConfig::fixed(16)).map_err(|e| e.to_string())?;
        for k in 0..3 {
            let e = (r.singular_values[k] - exact[k]).abs();
            worst = worst.max(e);
            ensure(e <= 1e-6, || format!("σ_{k} error {e:e}"))?;
        }
        // the same values from an eigensolve of the Gram operator
        let gram = mpo_mul_exact(&a.transpose(), &a).unwrap();
        let g = solvers::eig_block(&gram, 3, &SweepConfig::fixed(16)).map_err(|e| e.to_string())?;
        for k in 0..3 {
            let e = (g.values[k].max(0.0).sqrt() - r.singular_values[k]).abs();
            cross = cross.max(e);
            ensure(e <= 1e-8, || format!("√λ_{k} vs σ_{k}: {e:e}"))?;
        }
    }
    Ok(format!("3 random 16×16: worst σ error {worst:.1e}, √eig(AᵀA) agreement {cross:.1e}"))
}

fn criterion_9() -> Check {
    let mut rng = Rng::seeded(1009);
    // well-conditioned operator: sum of two Kronecker products
    let f = |rng: &mut Rng, shift: f64| {
        DMatrix::from_fn(4, 4, |i, j| if i == j { shift } else { 0.0 } + 0.2 * rng.normal())
    };
    let (a1, a2, b1, b2) = (f(&mut rng, 2.0), f(&mut rng, 2.0), f(&mut rng, 1.0), f(&mut rng, 1.0));
    let dense = a1.kronecker(&a2) + b1.kronecker(&b2);
    let a = qtt_operator(&dense, 4);
    let xs = TtVector::random(&[2; 4], &[1, 2, 3, 2, 1], &mut rng).unwrap();
    let y = mpo_apply_exact(&a, &xs).unwrap();
    let r = solvers::linsolve(&a, &y, &SweepConfig::fixed(3).with_seed(2).with_tol(1e-12))
        .map_err(|e| e.to_string())?;
    let e = rel(&r.x.to_dense().to_vector(), &xs.to_dense().to_vector());
    ensure(e <= 1e-8, || format!("recovery error {e:e}, report {:?}", r.report))?;
    ensure(r.report.is_monotone(1e-10), || format!("trajectory {:?}", r.report.objective))?;

    let lap = laplacian_dense(64);
    let a = qtt_operator(&lap, 6);
    let ones = TtVector::rank_one(&vec![vec![1.0, 1.0]; 6]).unwrap();
    let r = solvers::linsolve(&a, &ones, &SweepConfig::fixed(4).with_seed(3)).map_err(|e| e.to_string())?;
    let x = r.x.to_dense().to_vector();
    let b = DVector::from_element(64, 1.0);
    let res = (&lap * &x - &b).norm() / b.norm();
    ensure(r.report.sweeps <= 20 && res <= 1e-7, || {
        format!("Laplacian residual {res:e} after {} sweeps", r.report.sweeps)
    })?;
    let direct = lap.clone().cholesky().unwrap().solve(&b);
    let e2 = rel(&x, &direct);
    ensure(e2 <= 1e-7, || format!("Laplacian vs dense solve {e2:e}"))?;
    Ok(format!(
        "x★ recovered to {e:.1e}; Laplacian residual {res:.1e} in {} sweeps (vs dense {e2:.1e})",
        r.report.sweeps
    ))
}

/// Dense generalized eigenvalues of `(C, B)` via `L⁻¹CL⁻ᵀ`.
fn dense_pencil(c: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
    let l = b.clone().cholesky().unwrap().l();
    let half = l.solve_lower_triangular(c).unwrap();
    let m = l.solve_lower_triangular(&half.transpose()).unwrap();
    dense_eigenvalues(&((&m + m.transpose()) * 0.5))
}

/// Dense canonical correlations, descending.
fn dense_cca(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Vec<f64> {
    let lx = (x * x.transpose()).cholesky().unwrap().l();
    let ly = (y * y.transpose()).cholesky().unwrap().l();
    let m = lx.solve_lower_triangular(&(x * y.transpose())).unwrap();
    let m = ly.solve_lower_triangular(&m.transpose()).unwrap().transpose();
    let mut s = dense_singular_values(&m);
    s.reverse();
    s
}

fn criterion_10() -> Check {
    let mut rng = Rng::seeded(1010);
    let exact_policy = TruncationPolicy::exact();
    let modes = [2; 4];
    let spd = |rng: &mut Rng| {
        let g = DMatrix::from_fn(16, 16, |_, _| rng.normal());
        &g * g.transpose() + DMatrix::identity(16, 16) * 4.0
    };
    let xm = DMatrix::from_fn(16, 16, |_, _| rng.normal());
    let (am, bm) = (spd(&mut rng), spd(&mut rng));
    let to = |m: &DMatrix<f64>| TtMatrix::from_dense(m, &modes, &modes, &exact_policy).unwrap();
    let r = solvers::gevd(&to(&xm), &to(&am), &to(&bm), 2, &SweepConfig::fixed(16)).map_err(|e| e.to_string())?;
    let exact = dense_pencil(&(&xm * &am * xm.transpose()), &bm);
    let eg = (0..2)
        .map(|k| (r.values[k] - exact[k]).abs() / exact[k].abs().max(1.0))
        .fold(0.0, f64::max);
    ensure(eg <= 1e-6, || format!("gevd error {eg:e}"))?;
    let vs: Vec<DVector<f64>> = r.vectors.to_vectors().unwrap().iter().map(|v| v.to_dense().to_vector()).collect();
    for i in 0..2 {
        for j in 0..2 {
            let g = (vs[i].transpose() * &bm * &vs[j])[(0, 0)];
            let e = (g - if i == j { 1.0 } else { 0.0 }).abs();
            ensure(e <= 1e-8, || format!("VᵀBV deviation {e:e}"))?;
        }
    }

    let latent = DMatrix::from_fn(2, 64, |_, _| rng.normal());
    let xd = DMatrix::from_fn(16, 2, |_, _| rng.normal()) * &latent + DMatrix::from_fn(16, 64, |_, _| rng.normal());
    let yd = DMatrix::from_fn(16, 2, |_, _| rng.normal()) * &latent + DMatrix::from_fn(16, 64, |_, _| rng.normal());
    let obs = [4, 4, 2, 2];
    let x = TtMatrix::from_dense(&xd, &modes, &obs, &exact_policy).unwrap();
    let y = TtMatrix::from_dense(&yd, &modes, &obs, &exact_policy).unwrap();
    let r = solvers::cca(&x, &y, CcaOptions::new(2), &SweepConfig::fixed(16)).map_err(|e| e.to_string())?;
    let exact = dense_cca(&xd, &yd);
    let ec = (0..2).map(|k| (r.correlations[k] - exact[k]).abs()).fold(0.0, f64::max);
    ensure(ec <= 1e-6, || format!("cca error {ec:e}: {:?} vs {:?}", r.correlations, &exact[..2]))?;

    let r = solvers::cca(&x, &x, CcaOptions::new(1), &SweepConfig::fixed(16)).map_err(|e| e.to_string())?;
    let self_corr = r.correlations[0];
    ensure((self_corr - 1.0).abs() <= 1e-8, || format!("self correlation {self_corr}"))?;
    Ok(format!("gevd error {eg:.1e}, cca error {ec:.1e}, self correlation 1{:+.1e}", self_corr - 1.0))
}

fn criterion_11() -> Check {
    let n = 1 << 16;
    let plan = plan_auto(n, 2, false).map_err(|e| e.to_string())?;
    let constant = vec![1.0; n];
    let x = quantize_vector(&constant, &plan, &TruncationPolicy::tol(1e-12).unwrap()).unwrap();
    ensure(x.ranks().iter().all(|&r| r == 1), || format!("constant ranks {:?}", x.ranks()))?;
    ensure(x.param_count() == 32, || format!("constant parameters {}", x.param_count()))?;

    let ramp: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let x = quantize_vector(&ramp, &plan, &TruncationPolicy::tol(1e-12).unwrap()).unwrap();
    ensure(x.max_rank() <= 2, || format!("ramp ranks {:?}", x.ranks()))?;
    let back = x.to_dense().to_vector();
    let e = rel(&back, &DVector::from_vec(ramp));
    ensure(e <= 1e-10, || format!("ramp reconstruction {e:e}"))?;
    Ok(format!(
        "constant: 32 parameters; ramp: max rank {}, {} parameters, error {e:.1e}",
        x.max_rank(),
        x.param_count()
    ))
}

fn write_raw(path: &Path, data: &[f64]) {
    io::write_raw(path, data).unwrap();
}

/// Runs every CLI command in `dir` and returns `(name, stdout)` pairs.
fn cli_session(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let bin = env!("CARGO_BIN_EXE_ttk");
    let mut rng = Rng::seeded(1012);
    let lap = laplacian_dense(64);
    write_raw(&dir.join("lap.bin"), &tensortrain::tensor::row_major(&lap));
    write_raw(&dir.join("ramp.bin"), &(0..1024).map(|i| i as f64).collect::<Vec<_>>());
    write_raw(&dir.join("cube.bin"), &(0..64).map(|_| rng.normal()).collect::<Vec<_>>());
    write_raw(&dir.join("ones.bin"), &[1.0; 64]);
    let data: Vec<f64> = (0..16 * 64).map(|_| rng.normal()).collect();
    write_raw(&dir.join("x.bin"), &data);
    let data: Vec<f64> = (0..16 * 64).map(|_| rng.normal()).collect();
    write_raw(&dir.join("y.bin"), &data);

    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("compress", vec!["compress", "--input", "cube.bin", "--shape", "4,4,4", "--tol", "1e-10", "--out", "cube.ttk"]),
        ("quantize", vec!["quantize", "--input", "ramp.bin", "--tol", "1e-12", "--out", "ramp.ttk"]),
        (
            "quantize-op",
            vec!["quantize", "--input", "lap.bin", "--row-shape", "64", "--col-shape", "64", "--tol", "1e-14", "--out", "lap.ttk"],
        ),
        ("quantize-rhs", vec!["quantize", "--input", "ones.bin", "--out", "ones.ttk"]),
        (
            "compress-x",
            vec!["compress", "--input", "x.bin", "--row-shape", "2,2,2,2", "--col-shape", "4,4,2,2", "--tol", "0", "--out", "x.ttk"],
        ),
        (
            "compress-y",
            vec!["compress", "--input", "y.bin", "--row-shape", "2,2,2,2", "--col-shape", "4,4,2,2", "--tol", "0", "--out", "y.ttk"],
        ),
        ("info", vec!["info", "lap.ttk"]),
        ("reconstruct", vec!["reconstruct", "ramp.ttk", "--out", "ramp_back.bin"]),
        ("eig", vec!["eig", "lap.ttk", "--k", "3", "--rank", "12", "--seed", "5", "--out", "eig.ttk"]),
        ("svd", vec!["svd", "lap.ttk", "--rank", "8", "--seed", "5", "--allow-nonconverged", "--out", "svd.ttk"]),
        ("svd-small", vec!["svd", "lap.ttk", "--smallest", "--k", "2", "--rank", "8", "--out", "svds.ttk"]),
        ("gevd", vec!["gevd", "--x", "lap.ttk", "--a", "lap.ttk", "--b", "lap.ttk", "--k", "2", "--adaptive", "--allow-nonconverged", "--out", "gevd.ttk"]),
        ("cca", vec!["cca", "--x", "x.ttk", "--y", "y.ttk", "--k", "2", "--rank", "16", "--out", "cca.ttk"]),
        ("solve", vec!["solve", "lap.ttk", "--rhs", "ones.ttk", "--rank", "4", "--out", "sol.ttk"]),
    ];
    let mut outputs = Vec::new();
    for (name, args) in runs {
        let out = Command::new(bin)
            .args(&args)
            .current_dir(dir)
            .output()
            .map_err(|e| format!("{name}: {e}"))?;
        if !out.status.success() {
            return Err(format!("{name} exited with {}: {}", out.status, String::from_utf8_lossy(&out.stderr)));
        }
        outputs.push((name.to_string(), out.stdout));
    }
    Ok(outputs)
}

fn criterion_12() -> Check {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let out_a = cli_session(a.path())?;
    let out_b = cli_session(b.path())?;
    for ((name, sa), (_, sb)) in out_a.iter().zip(&out_b) {
        ensure(sa == sb, || format!("stdout of {name} differs"))?;
    }
    let mut files: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    files.sort();
    for f in &files {
        let (x, y) = (std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
        ensure(x == y, || format!("{} differs", f.to_string_lossy()))?;
    }
    Ok(format!("{} commands, {} files byte-identical across two runs", out_a.len(), files.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 12] = [
        ("TT-SVD accuracy law", criterion_1),
        ("exact-rank recovery", criterion_2),
        ("frame equation", criterion_3),
        ("frame orthogonality", criterion_4),
        ("MPO algebra", criterion_5),
        ("effective operator", criterion_6),
        ("eigen solvers", criterion_7),
        ("SVD solvers", criterion_8),
        ("linear solver", criterion_9),
        ("GEVD and CCA", criterion_10),
        ("QTT compression", criterion_11),
        ("CLI determinism", criterion_12),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
