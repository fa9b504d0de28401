use idmatrix::ensemble::{self, EnsembleSpec, HermitianMatrix, Pattern};
use idmatrix::spectra::{self, LipFn, LipSpec};
use num_complex::Complex64;
use proptest::prelude::*;

mod common;
use common::random_hermitian;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cyclic Jacobi rotations on a real symmetric matrix.
fn jacobi_eigenvalues(mut a: Vec<f64>, n: usize) -> Vec<f64> {
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[i * n + j].powi(2)).sum();
        if off < 1e-26 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut d: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    d.sort_by(|x, y| y.total_cmp(x));
    d
}

#[test]
fn real_spectra_match_jacobi() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..100 {
        let n = rng.random_range(1..=12);
        let m = random_hermitian(&mut rng, n, false);
        let dense: Vec<f64> = m.to_dense().iter().map(|z| z.re).collect();
        let want = jacobi_eigenvalues(dense, n);
        let got = spectra::eigenvalues(&m).unwrap().eigenvalues;
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10, "{got:?} vs {want:?}");
        }
    }
}

/// A complex Hermitian `H = A + iB` has the spectrum of `[[A, -B], [B, A]]` with every value doubled.
#[test]
fn complex_spectra_match_real_embedding() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..60 {
        let n = rng.random_range(1..=8);
        let m = random_hermitian(&mut rng, n, true);
        let d = m.to_dense();
        let big = 2 * n;
        let mut r = vec![0.0; big * big];
        for i in 0..n {
            for j in 0..n {
                let z = d[i * n + j];
                r[i * big + j] = z.re;
                r[(i + n) * big + j + n] = z.re;
                r[i * big + j + n] = -z.im;
                r[(i + n) * big + j] = z.im;
            }
        }
        let doubled = jacobi_eigenvalues(r, big);
        let got = spectra::eigenvalues(&m).unwrap().eigenvalues;
        for (i, g) in got.iter().enumerate() {
            assert!((g - doubled[2 * i]).abs() < 1e-9 && (g - doubled[2 * i + 1]).abs() < 1e-9);
        }
    }
}

#[test]
fn two_by_two_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..500 {
        let (a, d) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let b = Complex64::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let m = HermitianMatrix::from_dense(2, &[Complex64::new(a, 0.0), b, b.conj(), Complex64::new(d, 0.0)]);
        let mid = 0.5 * (a + d);
        let rad = (0.25 * (a - d).powi(2) + b.norm_sqr()).sqrt();
        let s = spectra::eigenvalues(&m).unwrap();
        assert!((s.eigenvalues[0] - (mid + rad)).abs() < 1e-12);
        assert!((s.eigenvalues[1] - (mid - rad)).abs() < 1e-12);
    }
}

#[test]
fn hoffman_wielandt_and_weyl() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    for _ in 0..200 {
        let n = rng.random_range(2..=12);
        let a = random_hermitian(&mut rng, n, true);
        let b = random_hermitian(&mut rng, n, true);
        let la = spectra::eigenvalues(&a).unwrap().eigenvalues;
        let lb = spectra::eigenvalues(&b).unwrap().eigenvalues;
        let hs = a.sub(&b).hs_norm();
        let op = spectra::eigenvalues(&a.sub(&b)).unwrap().rho();
        let sq: f64 = la.iter().zip(&lb).map(|(x, y)| (x - y).powi(2)).sum();
        assert!(sq.sqrt() <= hs * (1.0 + 1e-12) + 1e-12);
        for (x, y) in la.iter().zip(&lb) {
            assert!((x - y).abs() <= op * (1.0 + 1e-12) + 1e-12);
        }
    }
}

#[test]
fn eigenvector_residual_is_tiny() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    for n in [1, 2, 5, 16, 40] {
        let m = random_hermitian(&mut rng, n, true);
        let full = spectra::eigen_sorted(&m).unwrap();
        let fast = spectra::eigenvalues(&m).unwrap();
        assert!(full.residual.unwrap() < 1e-10 * (n as f64) * m.hs_norm().max(1.0));
        for (x, y) in full.eigenvalues.iter().zip(&fast.eigenvalues) {
            assert!((x - y).abs() < 1e-12 * m.hs_norm().max(1.0));
        }
    }
}

#[test]
fn wishart_embedding_gives_singular_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    for _ in 0..50 {
        let n = rng.random_range(1..=5);
        let k = n + rng.random_range(1..=4);
        let y: Vec<Complex64> = (0..k * n).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let emb = ensemble::wishart_embed(&y, k, n).unwrap();
        let l = spectra::eigenvalues(&emb).unwrap().eigenvalues;
        // Y*Y assembled directly
        let mut g = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                g[i * n + j] = (0..k).map(|r| y[r * n + i].conj() * y[r * n + j]).sum();
            }
        }
        let gram = spectra::eigenvalues(&HermitianMatrix::from_dense(n, &g)).unwrap().eigenvalues;
        for i in 0..n {
            assert!((l[i] * l[i] - gram[i]).abs() < 1e-10, "{l:?} {gram:?}");
            assert!((l[k + n - 1 - i] + l[i]).abs() < 1e-10);
        }
        for v in &l[n..k] {
            assert!(v.abs() < 1e-10);
        }
    }
}

#[test]
fn assembled_entries_follow_pattern_weights() {
    let n = 6;
    let spec = EnsembleSpec::new(n, Pattern::Band { width: 1 });
    let asm = ensemble::Assembler::new(&spec).unwrap();
    let x: Vec<f64> = (0..spec.entry_dim()).map(|i| 1.0 + i as f64).collect();
    let m = asm.assemble(&x).unwrap();
    let s = (n as f64).sqrt();
    let off = n * (n - 1) / 2;
    let mut slot = 0;
    for i in 0..n {
        assert!((m.get(i, i) - Complex64::new(x[i] / s, 0.0)).norm() < 1e-14);
        for j in i + 1..n {
            let w = if j - i <= 1 { 1.0 } else { 0.0 };
            assert!((m.get(i, j) - Complex64::new(w * x[n + slot] / s, w * x[n + off + slot] / s)).norm() < 1e-14);
            slot += 1;
        }
    }
}

#[test]
fn staircase_is_lipschitz_and_close() {
    let base = LipSpec::Sin.build().unwrap();
    let f = LipFn::staircase(&base, 0.1, 0.0, 6.0).unwrap();
    let mut prev = (0.0, f.eval(0.0));
    for i in 1..=6000 {
        let x = i as f64 * 1e-3;
        let v = f.eval(x);
        assert!((v - prev.1).abs() <= (x - prev.0) + 1e-12);
        assert!((v - x.sin()).abs() <= 0.1 + 1e-12);
        prev = (x, v);
    }
}

proptest! {
    #[test]
    fn trace_and_frobenius_identities(seed in any::<u64>(), n in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_hermitian(&mut rng, n, true);
        let l = spectra::eigenvalues(&m).unwrap().eigenvalues;
        let scale = m.hs_norm().max(1.0);
        prop_assert!((l.iter().sum::<f64>() - m.trace()).abs() < 1e-11 * scale * n as f64);
        prop_assert!((l.iter().map(|x| x * x).sum::<f64>().sqrt() - m.hs_norm()).abs() < 1e-11 * scale);
        prop_assert!(l.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn shift_moves_every_eigenvalue(seed in any::<u64>(), n in 1usize..8, c in -5.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_hermitian(&mut rng, n, true);
        let mut d = m.to_dense();
        for i in 0..n {
            d[i * n + i] += c;
        }
        let l0 = spectra::eigenvalues(&m).unwrap().eigenvalues;
        let l1 = spectra::eigenvalues(&HermitianMatrix::from_dense(n, &d)).unwrap().eigenvalues;
        for (a, b) in l0.iter().zip(&l1) {
            prop_assert!((a + c - b).abs() < 1e-10);
        }
    }
}
