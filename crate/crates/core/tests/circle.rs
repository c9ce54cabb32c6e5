mod common;

use common::*;
use oddindex::circle::{CircleModel, MatrixLoop, SVD_TOL};
use oddindex::equispec::RepElement;
use oddindex::linalg::{c, eigvalsh, max_abs, CMatrix};
use proptest::prelude::*;

fn rep(v: &[i64]) -> RepElement {
    RepElement::new(v.to_vec()).unwrap()
}

#[test]
fn toeplitz_compression_examples() {
    let id = CircleModel::new(MatrixLoop::monomial(0), 8, 1).unwrap();
    assert!(max_abs(&(id.toeplitz_compression() - CMatrix::identity(9, 9))) == 0.0);

    let shift = CircleModel::new(MatrixLoop::monomial(1), 16, 1).unwrap().toeplitz_compression();
    for n in 0..16 {
        assert_eq!(shift[(n + 1, n)], c(1.0, 0.0));
    }
    assert_eq!(shift.iter().filter(|z| z.norm() > 0.0).count(), 16);

    let mut rng = rng(11);
    let v = random_unitary(&mut rng, 2);
    let model = CircleModel::new(MatrixLoop::constant(v.clone()).unwrap(), 8, 1).unwrap();
    let t = model.toeplitz_compression();
    for n in 0..9 {
        assert!(max_abs(&(t.view((2 * n, 2 * n), (2, 2)) - &v)) < 1e-15);
    }
}

#[test]
fn kernel_and_cokernel_examples() {
    let k = |lp: MatrixLoop, l: usize, p: usize| CircleModel::new(lp, l, p).unwrap().kernel_cokernel(SVD_TOL).unwrap();
    assert_eq!(k(MatrixLoop::monomial(1), 16, 1), (rep(&[0]), rep(&[1])));
    assert_eq!(k(MatrixLoop::monomial(2), 24, 2), (rep(&[0, 0]), rep(&[1, 1])));
    assert_eq!(k(MatrixLoop::monomial(0), 8, 1), (rep(&[0]), rep(&[0])));
    assert_eq!(k(MatrixLoop::monomial(-2), 24, 1), (rep(&[2]), rep(&[0])));
}

#[test]
fn index_examples() {
    let index = |lp: MatrixLoop, p: usize| {
        let l = CircleModel::guard_truncation(&lp);
        CircleModel::new(lp, l, p).unwrap().equivariant_index().unwrap()
    };
    assert_eq!(index(MatrixLoop::monomial(1), 1), rep(&[-1]));
    assert_eq!(index(MatrixLoop::monomial(-2), 1), rep(&[2]));
    assert_eq!(index(MatrixLoop::diagonal(&[2, -2]), 2), rep(&[0, 0]));
}

#[test]
fn winding_examples() {
    assert_eq!(MatrixLoop::monomial(-3).winding_number().unwrap(), -3);
    assert_eq!(MatrixLoop::diagonal(&[1, -2]).winding_number().unwrap(), -1);
    let mut rng = rng(2);
    assert_eq!(MatrixLoop::constant(random_unitary(&mut rng, 3)).unwrap().winding_number().unwrap(), 0);
}

#[test]
fn model_operators() {
    let mut rng = rng(4);
    let model = CircleModel::new(projection_product(&mut rng, 2, 1, 2), 32, 1).unwrap();
    let spec = eigvalsh(&model.dirac());
    for (i, n) in (-32..=32).enumerate() {
        assert_eq!(spec[2 * i], n as f64);
        assert_eq!(spec[2 * i + 1], n as f64);
    }
    let p = model.hardy_sign();
    assert!(max_abs(&(&p * &p - CMatrix::identity(model.dim(), model.dim()))) == 0.0);
    let p_plus = model.hardy_projection();
    assert!(max_abs(&(&p_plus * &p_plus - &p_plus)) == 0.0);
}

#[test]
fn d_path_endpoints() {
    let model = CircleModel::new(MatrixLoop::monomial(2), 24, 1).unwrap();
    let fam = model.d_path(9).unwrap();
    assert_eq!(fam.start(), &model.dirac());
    // Inside the guard band the conjugated Dirac operator is the shifted one.
    let end = fam.end();
    for i in 0..model.dim() {
        let n = model.mode_of(i);
        if n.abs() <= 22 {
            assert!((end[(i, i)].re - (n + 2) as f64).abs() < 1e-12);
        }
    }
    let mut rng = rng(9);
    let constant = CircleModel::new(MatrixLoop::constant(random_unitary(&mut rng, 2)).unwrap(), 8, 1).unwrap();
    let fam = constant.d_path(5).unwrap();
    assert!(max_abs(&(fam.end() - fam.start())) < 1e-12);
}

#[test]
fn p_path_spectrum_examples() {
    let model = CircleModel::new(MatrixLoop::monomial(1), 16, 1).unwrap();
    let (interior, _) = model.p_path_spectrum(0.5);
    assert_eq!(interior.iter().filter(|v| v.abs() < 1e-9).count(), 1);

    let model = CircleModel::new(MatrixLoop::monomial(2), 24, 1).unwrap();
    let u = 0.3;
    let (interior, _) = model.p_path_spectrum(u);
    assert_eq!(interior.iter().filter(|v| (*v - (2.0 * u - 1.0)).abs() < 1e-9).count(), 2);
    assert_eq!(interior.iter().filter(|v| (*v - (1.0 - 2.0 * u)).abs() < 1e-9).count(), 0);
}

#[test]
fn equivariance_filter() {
    let lp = MatrixLoop::diagonal(&[1, 2]);
    assert!(CircleModel::new(lp.clone(), 24, 2).is_err());
    assert!(CircleModel::new(lp, 23, 1).is_err());
}

#[test]
fn loop_file_round_trip_and_validation() {
    let mut rng = rng(6);
    let lp = framed_diagonal(&mut rng, &[2, -2]);
    let text = toml::to_string(&lp.to_spec(Some(2))).unwrap();
    let (back, order) = MatrixLoop::from_toml_str(&text).unwrap();
    assert_eq!(order, Some(2));
    for theta in [0.0, 0.7, 2.9] {
        assert!(max_abs(&(back.eval(theta) - lp.eval(theta))) < 1e-15);
    }

    let not_unitary = "size = 1\n[[coefficient]]\nmode = 1\nre = [[0.5]]\n";
    assert!(MatrixLoop::from_toml_str(not_unitary).is_err());
    let unknown = "size = 1\ncolour = 3\n";
    assert!(MatrixLoop::from_toml_str(unknown).is_err());
    let ragged = "size = 2\n[[coefficient]]\nmode = 0\nre = [[1.0, 0.0]]\n";
    assert!(MatrixLoop::from_toml_str(ragged).is_err());

    let dir = std::env::temp_dir().join(format!("oddindex-loop-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let odd = dir.join("odd.toml");
    std::fs::write(&odd, "size = 1\ngroup_order = 2\n[[coefficient]]\nmode = 1\nre = [[1.0]]\n").unwrap();
    assert!(MatrixLoop::from_file(&odd).is_err());
    std::fs::remove_dir_all(&dir).unwrap();
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn index_is_minus_winding(seed in any::<u64>(), k in -3i64..=3, count in 1usize..3) {
        let mut rng = rng(seed);
        let lp = projection_product(&mut rng, 2, k, count);
        let model = CircleModel::new(lp.clone(), 64, 1).unwrap();
        prop_assert_eq!(model.equivariant_index().unwrap().dimension(), -lp.winding_number().unwrap());
    }

    #[test]
    fn log_derivative_is_skew(seed in any::<u64>(), theta in 0.0f64..6.3) {
        let mut rng = rng(seed);
        let lp = framed_diagonal(&mut rng, &[1, -2]);
        let w = lp.log_derivative(theta);
        prop_assert!(max_abs(&(&w + w.adjoint())) < 1e-12);
        let tr = w.trace();
        prop_assert!((tr - c(0.0, -1.0)).norm() < 1e-12);
    }
}
