//! Acceptance gate: eight end-to-end suites, one per library guarantee,
//! each printing a single summary line (run with `--nocapture` to see the
//! measured figures; a failed suite fails its test).

use std::time::Instant;
use torvar::{
    commutator, commuting_unitary_correction, cube_homotopy, disk_homotopy, expm_i_pi,
    gen_member, gen_perturbation, herm_eig, intertwiner, joint_diagonalize, member_with_spectrum,
    op_norm, psra_1d, psra_md, spectrum, torus_homotopy, CMatrix, Complex64, GridSpec,
    HomotopyCertificate, MatrixTuple, ProjectiveDecomposition, TuplePath, VarietyKind,
};

fn pass(name: &str, detail: &str) {
    println!("[PASS] {name}: {detail}");
}

fn seed3(a: usize, b: usize, c: usize) -> u64 {
    (a as u64)
        .wrapping_mul(1_000_003)
        .wrapping_add((b as u64).wrapping_mul(1_009))
        .wrapping_add(c as u64)
}

fn hausdorff_real(a: &[f64], b: &[f64]) -> f64 {
    let one_way = |from: &[f64], to: &[f64]| {
        from.iter()
            .map(|x| to.iter().map(|y| (x - y).abs()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

#[test]
fn quantization_suite() {
    let t0 = Instant::now();
    let mut worst_err: f64 = 0.0;
    let mut worst_comm: f64 = 0.0;
    for (ni, &n) in [4usize, 16, 64].iter().enumerate() {
        for (di, &delta) in [0.5f64, 0.25, 0.1].iter().enumerate() {
            for trial in 0..100 {
                let x = gen_member(VarietyKind::Cube, n, 1, seed3(ni, di, trial)).unwrap();
                let a = x.get(0);
                let res = psra_1d(a, delta).unwrap();
                let approx = res.approximant.get(0);

                let err = op_norm(&a.sub(approx));
                assert!(err <= delta + 1e-10, "n={n} delta={delta}: error {err}");
                worst_err = worst_err.max(err - delta);

                let comm = op_norm(&commutator(a, approx).unwrap());
                assert!(comm <= 1e-10 * n as f64, "n={n} delta={delta}: commutator {comm}");
                worst_comm = worst_comm.max(comm);

                // quantized spectrum: on the grid exactly, delta-close to the
                // true spectrum, and carried by a resolution of the identity
                let sigma_x = herm_eig(a).unwrap().values;
                let mut sigma_q = Vec::with_capacity(n);
                for (k, p) in res.decomposition.projectors.iter().enumerate() {
                    let v = res.decomposition.values[k][0];
                    assert!(
                        res.grids.round(v) == v,
                        "n={n} delta={delta}: value {v} off the grid"
                    );
                    let rank = p.diag().iter().map(|d| d.re).sum::<f64>().round() as usize;
                    sigma_q.extend(std::iter::repeat(v).take(rank));
                }
                let dh = hausdorff_real(&sigma_x, &sigma_q);
                assert!(dh <= delta, "n={n} delta={delta}: hausdorff {dh}");

                let mut sum = CMatrix::zeros(n);
                for p in &res.decomposition.projectors {
                    sum = sum.add(p);
                }
                let pou = sum.max_abs_diff(&CMatrix::identity(n));
                assert!(pou <= 1e-10 * n as f64, "n={n} delta={delta}: partition {pou}");
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 60.0, "quantization suite took {secs:.1} s (budget 60 s)");
    pass(
        "quantization suite",
        &format!(
            "900 matrices, worst error-over-delta {worst_err:.2e}, worst commutator {worst_comm:.2e}, {secs:.1} s"
        ),
    );
}

#[test]
fn joint_quantization_suite() {
    let t0 = Instant::now();
    let mut worst_comm: f64 = 0.0;
    let mut worst_block: f64 = 0.0;
    for (ni, &n) in [4usize, 16, 64].iter().enumerate() {
        for (di, &delta) in [0.5f64, 0.25, 0.1].iter().enumerate() {
            for (mi, &m) in [2usize, 3].iter().enumerate() {
                for trial in 0..12 {
                    let x =
                        gen_member(VarietyKind::Cube, n, m, seed3(ni * 2 + mi, di, trial) ^ 0xd1b)
                            .unwrap();
                    let res = psra_md(&x, delta).unwrap();

                    // every input and every approximant component commute
                    let mut family: Vec<&CMatrix> = x.iter().collect();
                    family.extend(res.approximant.iter());
                    for i in 0..family.len() {
                        for l in (i + 1)..family.len() {
                            let c = op_norm(&commutator(family[i], family[l]).unwrap());
                            assert!(
                                c <= 1e-10 * n as f64,
                                "n={n} m={m} delta={delta}: commutator {c}"
                            );
                            worst_comm = worst_comm.max(c);
                        }
                    }

                    let cells = res.decomposition.n_delta as f64;
                    let bound = (1.0 + 1.0 / delta).powi(m as i32);
                    assert!(cells <= bound, "n={n} m={m} delta={delta}: {cells} cells > {bound}");

                    // blockwise the inputs are delta-close to scalars
                    for j in 0..m {
                        for (k, p) in res.decomposition.projectors.iter().enumerate() {
                            let scaled = p.scale_re(res.decomposition.values[k][j]);
                            let b = op_norm(&x.get(j).mul(p).sub(&scaled));
                            assert!(
                                b <= delta + 1e-9,
                                "n={n} m={m} delta={delta}: block residual {b}"
                            );
                            worst_block = worst_block.max(b / delta);
                        }
                    }
                }
            }
        }
    }
    pass(
        "joint quantization suite",
        &format!(
            "216 tuples, worst commutator {worst_comm:.2e}, worst block residual/delta {worst_block:.2}, {:.1} s",
            t0.elapsed().as_secs_f64()
        ),
    );
}

#[test]
fn blockwise_correction_suite() {
    let n = 6;
    // three partitions of a 6-point diagonal into r spectral blocks
    let cases: [(&[f64], &[usize]); 3] = [
        (&[-0.6, 0.6], &[3, 3]),
        (&[-0.7, 0.0, 0.7], &[2, 2, 2]),
        (&[-0.8, -0.4, 0.0, 0.4, 0.8], &[2, 1, 1, 1, 1]),
    ];
    let mut lines = Vec::new();
    for (ci, (vals, mults)) in cases.iter().enumerate() {
        let mut diag = Vec::new();
        let mut projectors = Vec::new();
        let mut values = Vec::new();
        let mut offset = 0usize;
        for (v, &mult) in vals.iter().zip(mults.iter()) {
            diag.extend(std::iter::repeat(Complex64::new(*v, 0.0)).take(mult));
            let range = offset..offset + mult;
            projectors.push(CMatrix::from_fn(n, |i, l| {
                if i == l && range.contains(&i) {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }));
            values.push(vec![*v]);
            offset += mult;
        }
        let d = CMatrix::from_diag(&diag);
        let decomp = ProjectiveDecomposition {
            projectors,
            values,
            n_delta: vals.len(),
        };

        let mut rng = seeded_rng(97 + ci as u64);
        let g = torvar::haar_unitary(n, &mut rng).hermitian_part();
        let k = g.scale_re(1.0 / op_norm(&g));

        let mut achieved_by_target = Vec::new();
        for &target in &[1e-1, 1e-2, 1e-3] {
            let t = scale_to_conjugation_distance(&k, &d, target);
            let w = expm_i_pi(&k.scale_re(t)).unwrap();
            let moved = op_norm(&w.mul(&d).mul(&w.adjoint()).sub(&d));
            assert!(
                (moved - target).abs() <= 0.02 * target,
                "calibration missed: {moved} vs {target}"
            );
            let out = commuting_unitary_correction(&w, &decomp, 1.0).unwrap();
            let comm = op_norm(&commutator(&out.z, &d).unwrap());
            assert!(comm <= 1e-9 * n as f64, "r={}: [Z, D] = {comm}", vals.len());
            let chain: f64 = out.block_bounds.iter().sum();
            assert!(
                out.achieved <= chain + 1e-8,
                "r={}: achieved {} > blockwise chain {}",
                vals.len(),
                out.achieved,
                chain
            );
            achieved_by_target.push(out.achieved);
        }
        // shrinking the perturbation shrinks the residual (5% slack)
        for w in achieved_by_target.windows(2) {
            assert!(w[1] <= w[0] * 1.05, "residuals not monotone: {achieved_by_target:?}");
        }
        lines.push(format!(
            "r={} residuals {:.2e}/{:.2e}/{:.2e}",
            vals.len(),
            achieved_by_target[0],
            achieved_by_target[1],
            achieved_by_target[2]
        ));
    }
    pass("blockwise correction suite", &lines.join(", "));
}

fn seeded_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand_chacha::rand_core::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}

/// Smallest `t` with `||e^{i pi t K} D e^{-i pi t K} - D||` at `target`,
/// found by doubling then bisection (the distance grows monotonically from 0
/// for small `t`).
fn scale_to_conjugation_distance(k: &CMatrix, d: &CMatrix, target: f64) -> f64 {
    let dist = |t: f64| {
        let w = expm_i_pi(&k.scale_re(t)).unwrap();
        op_norm(&w.mul(d).mul(&w.adjoint()).sub(d))
    };
    let mut hi = 1e-4;
    while dist(hi) < target {
        hi *= 2.0;
        assert!(hi <= 4.0, "conjugation never reaches distance {target}");
    }
    let mut lo = hi / 2.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if dist(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn homotopy_certification_suites() {
    let t0 = Instant::now();
    let (n, m, delta) = (8usize, 2usize, 0.05);
    let tol = 1e-8 * n as f64;
    let mut summary = Vec::new();
    for kind in [VarietyKind::Cube, VarietyKind::Disk, VarietyKind::Torus] {
        let radius = match kind {
            VarietyKind::Disk => delta / 2.0,
            _ => delta,
        };
        let mut worst_defect: f64 = 0.0;
        let mut worst_budget: f64 = 0.0;
        for trial in 0..50usize {
            let sx = seed3(kind as usize, 0, trial) ^ 0x5eed;
            let x = gen_member(kind, n, m, sx).unwrap();
            let y = gen_perturbation(&x, kind, radius, sx ^ 0xff00).unwrap();
            let (_, cert): (TuplePath, HomotopyCertificate) = match kind {
                VarietyKind::Cube => cube_homotopy(&x, &y, delta, 4.0).unwrap(),
                VarietyKind::Disk => disk_homotopy(&x, &y, delta, 4.0).unwrap(),
                VarietyKind::Torus => torus_homotopy(&x, &y, delta, 4.0).unwrap(),
            };
            assert!(cert.passed, "{kind:?} trial {trial}: {cert:?}");
            assert!(cert.endpoint_residuals.0 <= tol && cert.endpoint_residuals.1 <= tol);
            // certificates sample 256 points per segment; the membership
            // defect bounds the unitarity defect at every torus sample
            assert!(cert.samples >= 4 * 256);
            assert!(cert.max_membership_defect <= tol);
            assert!(cert.max_eth_deviation <= cert.epsilon_budget);
            worst_defect = worst_defect.max(cert.max_membership_defect);
            worst_budget = worst_budget.max(cert.epsilon_budget);
        }
        summary.push(format!(
            "{kind:?} worst defect {worst_defect:.1e} worst eps-hat {worst_budget:.3}"
        ));
    }
    let secs = t0.elapsed().as_secs_f64();
    assert!(secs < 300.0, "homotopy suites took {secs:.0} s (budget 300 s)");
    pass(
        "homotopy certification suites",
        &format!("150 pairs at (n,m,delta)=(8,2,0.05): {}; {secs:.0} s", summary.join("; ")),
    );
}

#[test]
fn dimension_independence_probe() {
    let base: Vec<Vec<Complex64>> = vec![
        vec![0.62, -0.48, 0.11, -0.83]
            .into_iter()
            .map(|v| Complex64::new(v, 0.0))
            .collect(),
        vec![-0.27, 0.71, -0.55, 0.33]
            .into_iter()
            .map(|v| Complex64::new(v, 0.0))
            .collect(),
    ];
    let delta = 0.05;
    let opts = torvar::HomotopyOptions {
        samples_per_segment: 4,
        ..Default::default()
    };
    let mut medians = Vec::new();
    for &n in &[4usize, 8, 16, 32] {
        let mut budgets = Vec::new();
        for trial in 0..12u64 {
            // same four-point joint spectrum at every n, embedded with
            // multiplicity n/4
            let x = member_with_spectrum(VarietyKind::Cube, &base, n, 1000 + trial).unwrap();
            let y = gen_perturbation(&x, VarietyKind::Cube, delta, 2000 + trial).unwrap();
            let (_, cert) =
                torvar::homotopy::cube_homotopy_with(&x, &y, delta, 4.0, &opts).unwrap();
            assert!(cert.passed, "n={n} trial={trial}: {cert:?}");
            budgets.push(cert.epsilon_budget);
        }
        budgets.sort_by(f64::total_cmp);
        medians.push(0.5 * (budgets[5] + budgets[6]));
    }
    let lo = medians.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = medians.iter().cloned().fold(0.0f64, f64::max);
    let spread = (hi - lo) / lo;
    assert!(
        spread <= 0.10,
        "median eps-hat varies {:.1}% across n: {medians:?}",
        100.0 * spread
    );
    pass(
        "dimension independence probe",
        &format!(
            "median eps-hat per n in {{4,8,16,32}} = {:?}, spread {:.1}%",
            medians
                .iter()
                .map(|v| format!("{v:.4}"))
                .collect::<Vec<_>>(),
            100.0 * spread
        ),
    );
}

#[test]
fn intertwiner_suite() {
    let n = 6;
    let mut worst: f64 = 0.0;
    for trial in 0..100usize {
        let m = 1 + trial % 3;
        let seed = seed3(6, m, trial);
        let x = gen_member(VarietyKind::Disk, n, m, seed).unwrap();
        let y = gen_perturbation(&x, VarietyKind::Disk, 0.05, seed ^ 0xabcdef).unwrap();
        let it = intertwiner(&x, &y).unwrap();
        for j in 0..m {
            let moved = it.w.mul(x.get(j)).mul(&it.w.adjoint());
            let c = op_norm(&commutator(&moved, y.get(j)).unwrap());
            assert!(c <= 1e-9 * n as f64, "trial {trial} component {j}: {c}");
            worst = worst.max(c);
        }
    }

    // locality-to-quantization ratio per tuple arity
    let delta = 0.05;
    let opts = torvar::HomotopyOptions {
        samples_per_segment: 8,
        ..Default::default()
    };
    let mut table = Vec::new();
    for m in 1..=3usize {
        let mut ratios = Vec::new();
        for trial in 0..8u64 {
            let seed = 40_000 + 100 * m as u64 + trial;
            let x = gen_member(VarietyKind::Cube, n, m, seed).unwrap();
            let y = gen_perturbation(&x, VarietyKind::Cube, delta, seed ^ 0x77).unwrap();
            let (_, cert) =
                torvar::homotopy::cube_homotopy_with(&x, &y, delta, 4.0, &opts).unwrap();
            assert!(cert.passed, "m={m} trial={trial}: {cert:?}");
            ratios.push(cert.epsilon_budget / delta);
        }
        ratios.sort_by(f64::total_cmp);
        let max = ratios[ratios.len() - 1];
        // the flat-branch budget (2 k_m + 3) delta with the default k_m = 4
        // must dominate every measured ratio
        assert!(max <= 11.0, "m={m}: eps-hat/delta reached {max}");
        table.push(format!(
            "m={m}: eps-hat/delta median {:.2} max {:.2}",
            0.5 * (ratios[3] + ratios[4]),
            max
        ));
    }
    println!("empirical locality constants — {}", table.join("; "));
    pass(
        "intertwiner suite",
        &format!("worst conjugated commutator {worst:.2e}; {}", table.join("; ")),
    );
}

#[test]
fn pseudospectrum_oracle() {
    let n = 6;
    let grid = GridSpec::square(Complex64::new(0.0, 0.0), 3.2, 24);
    let epsilon = 0.31;
    for trial in 0..20u64 {
        let a = gen_member(VarietyKind::Disk, n, 1, 500 + trial).unwrap();
        let a = a.get(0);
        let mask = torvar::pseudospectrum_mask(a, epsilon, &grid).unwrap();
        let eigs = spectrum(a).unwrap();
        for (idx, mu) in grid.points().into_iter().enumerate() {
            let dist = eigs
                .iter()
                .map(|l| (l - mu).norm())
                .fold(f64::INFINITY, f64::min);
            assert_eq!(
                mask.inside[idx],
                dist <= epsilon,
                "normal trial {trial} at grid point {mu}: sigma_min {} vs distance {dist}",
                mask.sigma_min[idx]
            );
        }
    }

    let mut checked = 0usize;
    for trial in 0..20u64 {
        let a = random_non_normal(n, 600 + trial);
        let inner = torvar::pseudospectrum_mask(&a, 0.08, &grid).unwrap();
        let outer = torvar::pseudospectrum_mask(&a, 0.25, &grid).unwrap();
        for (i, o) in inner.inside.iter().zip(&outer.inside) {
            assert!(!i | o, "non-normal trial {trial}: nesting violated");
            checked += 1;
        }
    }
    pass(
        "pseudospectrum oracle",
        &format!(
            "20 normal matrices match the spectral-distance oracle on {} grid points; {checked} nesting checks, zero violations",
            grid.len()
        ),
    );
}

fn random_non_normal(n: usize, seed: u64) -> CMatrix {
    use rand::Rng;
    let mut rng = seeded_rng(seed);
    let a = CMatrix::from_fn(n, |_, _| {
        Complex64::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))
    });
    assert!(torvar::defects(&a).normality > 1e-6, "seed {seed} drew a normal matrix");
    a
}

#[test]
fn joint_diagonalization_oracle() {
    use rand::Rng;
    for &n in &[4usize, 16, 64] {
        for m in 1..=3usize {
            let mut rng = seeded_rng(seed3(8, n, m));
            let values: Vec<Vec<Complex64>> = (0..m)
                .map(|_| {
                    (0..n)
                        .map(|_| {
                            let r = 0.95 * rng.gen_range(0.0f64..1.0).sqrt();
                            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
                            Complex64::from_polar(r, phi)
                        })
                        .collect()
                })
                .collect();
            let planted: Vec<Vec<Complex64>> =
                (0..n).map(|k| (0..m).map(|j| values[j][k]).collect()).collect();
            let x = member_with_spectrum(VarietyKind::Disk, &values, n, seed3(9, n, m)).unwrap();
            let js = joint_diagonalize(&x).unwrap();
            let (_, cost) =
                torvar::jointspec::match_spectra_with_cost(&planted, &js.points()).unwrap();
            assert!(cost <= 1e-9, "n={n} m={m}: planted spectrum missed by {cost:.2e}");
        }
    }
    pass(
        "joint diagonalization oracle",
        "planted joint spectra recovered to 1e-9 for n in {4,16,64}, m in {1,2,3}",
    );
}

// keep the tuple import used even if future edits drop a suite
#[allow(dead_code)]
fn _shape(t: &MatrixTuple) -> (usize, usize) {
    (t.m(), t.n())
}
