//! Library results checked against independent computations done here.

use std::collections::BTreeMap;

use memdecay_core::decay_bounds::{banded_certificate_from_norms, BoundParams};
use memdecay_core::*;

fn hat(n_scale: usize, shift: i64, k: i64) -> f64 {
    let n = n_scale as f64;
    (1.0 - ((k as f64) - n * shift as f64).abs() / n).max(0.0)
}

fn offset(topo: &Topology, i: usize, j: usize) -> i64 {
    let m = topo.size as i64;
    let k = i as i64 - j as i64;
    if !topo.is_circulant() {
        return k;
    }
    let r = k.rem_euclid(m);
    if r > m / 2 {
        r - m
    } else {
        r
    }
}

/// Wiener norm with pieces formed entry by entry.
fn wiener_oracle(a: &ComplexMatrix, topo: &Topology, scale: usize) -> f64 {
    let m = a.rows();
    let reach = m as i64 / scale as i64 + 2;
    let mut total = 0.0;
    for n in -reach..=reach {
        let piece =
            ComplexMatrix::from_fn(m, m, |i, j| a[(i, j)] * hat(scale, n, offset(topo, i, j)));
        total += operator_norm(&piece, NormMode::Spectral).unwrap();
    }
    5.0 * total
}

fn symbol(terms: &[(i64, f64)]) -> BTreeMap<i64, Complex64> {
    terms.iter().map(|&(k, v)| (k, ONE * v)).collect()
}

fn circulant_spec(m: usize, terms: &[(i64, f64)]) -> GeneratorSpec {
    GeneratorSpec::new(GeneratorKind::CirculantSymbol, m).with_params(GeneratorParams {
        coefficients: Some(
            terms
                .iter()
                .map(|&(offset, re)| SymbolTerm {
                    offset,
                    re,
                    im: 0.0,
                })
                .collect(),
        ),
        ..Default::default()
    })
}

#[test]
fn symbol_inverse_of_two_plus_cos_matches_residues() {
    // 1/(2 + cos t) = sum_k r^{|k|} e^{ikt} / sqrt(3), r = 2 - sqrt(3)
    let r = 2.0 - 3f64.sqrt();
    let inv = symbol_inverse_coefficients(&symbol(&[(0, 2.0), (1, 0.5), (-1, 0.5)]), 256).unwrap();
    assert!((inv[&0].re - 1.0 / 3f64.sqrt()).abs() < 1e-12);
    for k in -40..=40i64 {
        let expected = r.powi(k.abs() as i32) / 3f64.sqrt() * if k % 2 == 0 { 1.0 } else { -1.0 };
        assert!((inv[&k] - ONE * expected).norm() < 1e-10, "k = {k}");
    }
    let scaled =
        symbol_inverse_coefficients(&symbol(&[(0, 4.0), (1, 1.0), (-1, 1.0)]), 256).unwrap();
    assert!((scaled[&0].re - 0.5 / 3f64.sqrt()).abs() < 1e-12);
    assert!((scaled[&0].re - 0.28868).abs() < 1e-5);
}

#[test]
fn circulant_inverse_diagonals_match_symbol_inverse() {
    let m = 64;
    let terms = [(0, 4.0), (1, 1.0), (-1, 1.0)];
    let (a, topo) = generate(&circulant_spec(m, &terms)).unwrap();
    let b = direct_inverse(&a).unwrap();
    let coeffs = symbol_inverse_coefficients(&symbol(&terms), m).unwrap();
    for i in 0..m {
        for j in 0..m {
            let k = offset(&topo, i, j);
            assert!((b[(i, j)] - coeffs[&k]).norm() < 1e-10);
        }
    }
}

#[test]
fn circulant_eigenvalues_follow_the_symbol() {
    let m = 8;
    let (a, _) = generate(&circulant_spec(m, &[(0, 4.0), (1, 1.0), (-1, 1.0)])).unwrap();
    for j in 0..m {
        let theta = 2.0 * std::f64::consts::PI * j as f64 / m as f64;
        let v: Vec<Complex64> = (0..m)
            .map(|p| Complex64::from_polar(1.0, theta * p as f64))
            .collect();
        let av = a.mat_vec(&v).unwrap();
        let lambda = 4.0 + 2.0 * theta.cos();
        for p in 0..m {
            assert!((av[p] - v[p] * lambda).norm() < 1e-12);
        }
    }
    assert_eq!(a, a.adjoint());
}

#[test]
fn shift_inverse_is_a_geometric_series() {
    let spec = GeneratorSpec::new(GeneratorKind::ShiftCausal, 64).with_params(GeneratorParams {
        lambda: Some(2.0),
        ..Default::default()
    });
    let (a, topo) = generate(&spec).unwrap();
    let b = direct_inverse(&a).unwrap();
    let p = diagonal_profile(&b, &topo).unwrap();
    for j in 1..=30 {
        assert!(
            (p.get(-j) - 0.5f64.powi(j as i32)).abs() < 1e-9,
            "offset -{j}"
        );
    }
    // (I - 2S)^{-1} = -(2S)^{-1} (I - (2S)^{-1})^{-1}; wrap-around weight 1/(2^M - 1)
    let wrap = 1.0 / (2f64.powi(64) - 1.0);
    assert!((p.get(0) - wrap).abs() < 1e-15);
}

#[test]
fn wiener_norm_matches_entrywise_pieces() {
    let spec = GeneratorSpec::new(GeneratorKind::GeometricProfile, 24)
        .with_seed(11)
        .with_params(GeneratorParams {
            gamma: Some(0.6),
            ..Default::default()
        });
    let (a, topo) = generate(&spec).unwrap();
    for scale in 1..=4 {
        let lib = wiener_norm(&a, &topo, scale, NormMode::Spectral).unwrap();
        let oracle = wiener_oracle(&a, &topo, scale);
        assert!(
            (lib - oracle).abs() <= 1e-12 * oracle,
            "scale {scale}: {lib} vs {oracle}"
        );
    }
    let (c, ct) = generate(&circulant_spec(
        16,
        &[(0, 3.0), (2, -1.0), (-3, 0.5), (8, 0.25)],
    ))
    .unwrap();
    for scale in 1..=4 {
        let lib = wiener_norm(&c, &ct, scale, NormMode::Spectral).unwrap();
        let oracle = wiener_oracle(&c, &ct, scale);
        assert!((lib - oracle).abs() <= 1e-12 * oracle);
    }
}

#[test]
fn circulant_inverse_wiener_norm() {
    // pieces at N = 1 are single diagonals of a circulant: norm |c_k|;
    // sum_k |c_k| = 1/f(pi) = 1/2 for f = 4 + 2cos
    let (a, topo) = generate(&circulant_spec(128, &[(0, 4.0), (1, 1.0), (-1, 1.0)])).unwrap();
    let b = direct_inverse(&a).unwrap();
    let w = wiener_norm(&b, &topo, 1, NormMode::Spectral).unwrap();
    assert!((w - 2.5).abs() < 1e-9, "{w}");
    let norm_b = operator_norm(&b, NormMode::Spectral).unwrap();
    assert!((norm_b - 0.5).abs() < 1e-12);
    assert!((operator_norm(&a, NormMode::Spectral).unwrap() - 6.0).abs() < 1e-12);
}

/// `alpha*` from setting the derivative of the log-bound to zero.
fn closed_form_alpha(a: f64, scale: f64, kappa: f64, n: i64) -> Option<f64> {
    let reach = scale * (n.abs() as f64 - 1.0);
    if reach <= kappa * a {
        return None;
    }
    Some((reach * (1.0 + kappa) / (kappa * (a + reach))).ln() / a)
}

#[test]
fn banded_bound_matches_closed_form_optimum() {
    for &(a, scale, norm_a, norm_b) in &[
        (1.0, 1, 6.0, 0.5),
        (2.0, 1, 3.0, 1.0),
        (1.0, 3, 2.0, 2.0),
        (3.0, 2, 5.0, 0.4),
    ] {
        let kappa = norm_a * norm_b;
        let p = BoundParams {
            bandwidth: a,
            scale,
            norm_a,
            norm_b,
            dim: 1,
        };
        for n in 2..=40i64 {
            let e = banded_inverse_bound(&p, &[n]).unwrap();
            let f = |t: f64| {
                (t * scale as f64 * (1.0 - n as f64)).exp() * norm_b
                    / (1.0 - ((t * a).exp() - 1.0) * kappa)
            };
            match closed_form_alpha(a, scale as f64, kappa, n) {
                Some(alpha) => {
                    let got = e.alpha_star.unwrap();
                    assert!(
                        (got - alpha).abs() <= 1e-6 * alpha,
                        "a={a} N={scale} n={n}: {got} vs {alpha}"
                    );
                    assert!((e.bound - f(alpha)).abs() <= 1e-12 * f(alpha));
                }
                None => {
                    assert!(e.alpha_star.unwrap() < 1e-6);
                    assert!((e.bound - f(1e-9)).abs() <= 1e-9 * f(1e-9));
                }
            }
            let neg = banded_inverse_bound(&p, &[-n]).unwrap();
            assert_eq!(neg.bound, e.bound);
        }
    }
}

#[test]
fn banded_bound_at_the_tridiagonal_example() {
    let p = BoundParams {
        bandwidth: 1.0,
        scale: 1,
        norm_a: 6.0,
        norm_b: 0.5,
        dim: 1,
    };
    let e = banded_inverse_bound(&p, &[5]).unwrap();
    let alpha = (16.0f64 / 15.0).ln();
    assert!((e.alpha_star.unwrap() - alpha).abs() < 1e-8);
    let u = alpha.exp();
    let bound = 0.5 * u.powi(-4) / (4.0 - 3.0 * u);
    assert!((e.bound - bound).abs() < 1e-13);
    let far = banded_inverse_bound(&p, &[50]).unwrap();
    let alpha_max = (4.0f64 / 3.0).ln();
    let far_alpha = far.alpha_star.unwrap();
    assert!((far_alpha - (49.0f64 * 4.0 / 150.0).ln()).abs() < 1e-8);
    assert!(far_alpha < alpha_max && alpha_max - far_alpha < 0.025);
    let rates: Vec<f64> = (2..=200)
        .map(|n| banded_inverse_bound(&p, &[n]).unwrap().alpha_star.unwrap())
        .collect();
    assert!(rates.windows(2).all(|w| w[1] >= w[0] - 1e-12));
    assert!((rates.last().unwrap() - (199.0f64 * 4.0 / 600.0).ln()).abs() < 1e-8);
    assert!(alpha_max - rates.last().unwrap() < 0.006);
}

#[test]
fn circulant_certificate_is_sound_with_margin() {
    let (a, topo) = generate(&circulant_spec(128, &[(0, 4.0), (1, 1.0), (-1, 1.0)])).unwrap();
    let ctx = decay_bounds::InverseContext::new(&a, &topo, NormMode::Spectral).unwrap();
    let cert = decay_bounds::banded_inverse_certificate_with(&ctx, 1).unwrap();
    assert_eq!(cert.bandwidth, 1);
    assert!((cert.kappa - 3.0).abs() < 1e-12);
    assert!((cert.asymptotic_rate - 0.75).abs() < 1e-12);
    let (v, measured) = verify_banded(&cert, ctx.b(), &topo, NormMode::Spectral).unwrap();
    assert!(v.passed);
    assert_eq!(v.max_relative_violation, 0.0);
    let c5 = (2.0 - 3f64.sqrt()).powi(5) / (2.0 * 3f64.sqrt());
    assert!((measured[&5] - c5).abs() < 1e-12);
    assert!((measured[&5] - 4.0e-4).abs() < 0.05e-4);
    assert!(cert.bound(5).unwrap() / measured[&5] > 1e3);
}

#[test]
fn certificate_from_norms_rejects_small_kappa() {
    assert!(matches!(
        banded_certificate_from_norms(1, 1, 0.5, 0.5, &[0, 1, 2]),
        Err(Error::InvalidKappa(_))
    ));
}

/// Smallest `K` whose remainder has oracle Wiener norm at most `t`.
fn psi_oracle(a: &ComplexMatrix, topo: &Topology, t: f64) -> usize {
    let m = a.rows();
    for k in 1.. {
        let rem = ComplexMatrix::from_fn(m, m, |i, j| {
            let off = offset(topo, i, j);
            let cover: f64 = (-2..=2).map(|s| hat(k, s, off)).sum();
            a[(i, j)] * (1.0 - cover)
        });
        if rem.is_zero() || wiener_oracle(&rem, topo, k) <= t {
            return k;
        }
    }
    unreachable!()
}

#[test]
fn psi_matches_direct_scan() {
    let m = 64;
    let a = ComplexMatrix::from_fn(m, m, |i, j| ONE * 0.5f64.powi(i.abs_diff(j) as i32));
    let topo = Topology::linear(m);
    let w11 = wiener_norm(&a, &topo, 1, NormMode::Spectral).unwrap();
    assert_eq!(psi_a(&a, &topo, w11, NormMode::Spectral).unwrap(), 1);
    for &t in &[1e-2, 1e-4, 1e-6] {
        let lib = psi_a(&a, &topo, t, NormMode::Spectral).unwrap();
        assert_eq!(lib, psi_oracle(&a, &topo, t), "t = {t}");
    }
    let k6 = psi_a(&a, &topo, 1e-6, NormMode::Spectral).unwrap();
    assert!((9..=13).contains(&k6), "{k6}");
}

#[test]
fn wiener_certificate_for_circulant() {
    let (a, topo) = generate(&circulant_spec(128, &[(0, 4.0), (1, 1.0), (-1, 1.0)])).unwrap();
    let cert = wiener_inverse_certificate(&a, &topo, NormMode::Spectral).unwrap();
    assert_eq!(cert.scale, 1);
    let (_, eps) = wiener_constants(3.0, 1).unwrap();
    assert!((cert.bound_1_1 - 1.5 / eps).abs() < 1e-6 * cert.bound_1_1);
    assert!((cert.bound_1_1 - 5.3e3).abs() < 0.05e3);
    let b = direct_inverse(&a).unwrap();
    let (v, m) = verify_wiener(&cert, &b, &topo, NormMode::Spectral).unwrap();
    assert!(v.passed);
    assert_eq!(v.checked, 3);
    assert!((m.wiener_1_1 - 2.5).abs() < 1e-9);
}

#[test]
fn neumann_examples() {
    let (a, topo) = generate(&circulant_spec(64, &[(0, 4.0), (1, 1.0), (-1, 1.0)])).unwrap();
    let opts = NeumannOptions {
        scale: ScaleChoice::Fixed(1),
        ..Default::default()
    };
    let r = neumann_inverse(&a, &topo, &opts).unwrap();
    assert_eq!(r.trace.iterations, 1);
    assert!(r.trace.residual <= 1e-10);

    let spec = GeneratorSpec::new(GeneratorKind::GeometricProfile, 48)
        .with_seed(5)
        .with_params(GeneratorParams {
            gamma: Some(0.5),
            scale: Some(0.25),
            shift: Some(1.0),
            ..Default::default()
        });
    let (g, gt) = generate(&spec).unwrap();
    let r = neumann_inverse(&g, &gt, &NeumannOptions::default())
        .unwrap()
        .ensure_converged()
        .unwrap();
    let b = direct_inverse(&g).unwrap();
    let lib = wiener_norm(&r.matrix, &gt, 1, NormMode::Spectral).unwrap();
    let direct = wiener_norm(&b, &gt, 1, NormMode::Spectral).unwrap();
    assert!((lib - direct).abs() <= 1e-6 * direct);
    assert!(r.trace.contraction_bound < 0.5);
    // increments shrink at least as fast as the predicted ratio
    let inc = &r.trace.increments;
    for w in inc.windows(2) {
        assert!(w[1] <= w[0] * r.trace.dl_norm * (1.0 + 1e-9) + 1e-300);
    }
}

#[test]
fn matrix_market_array_file_round_trip() {
    let dir = std::env::temp_dir().join(format!("memdecay-oracle-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("a.mtx");
    std::fs::write(
        &path,
        "%%MatrixMarket matrix array complex general\n2 2\n1 0\n0 1\n2 0\n3 -1\n",
    )
    .unwrap();
    let a = read_matrix_file(&path).unwrap();
    assert_eq!(a[(0, 0)], ONE);
    assert_eq!(a[(1, 0)], Complex64::new(0.0, 1.0));
    assert_eq!(a[(0, 1)], ONE * 2.0);
    assert_eq!(a[(1, 1)], Complex64::new(3.0, -1.0));
    write_matrix_file(&path, &a).unwrap();
    assert_eq!(read_matrix_file(&path).unwrap(), a);
    std::fs::remove_dir_all(&dir).unwrap();
}
