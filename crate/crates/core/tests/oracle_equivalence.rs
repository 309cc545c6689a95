mod support;

use num_complex::Complex64;
use retroalign::numerics::{left_null_basis, null_vector, numerical_rank, singular_values, CMatrix, Tolerance};
use support::oracle;

const INSTANCES: u64 = 100;
const REL: f64 = 1e-10;

#[test]
fn oracle_agrees_on_known_matrices() {
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex64::new(3.0, 0.0),
        Complex64::new(0.0, 2.0),
        Complex64::new(1.0, 0.0),
    ]));
    let s = oracle::singular_values(&d);
    assert!((s[0] - 3.0).abs() < 1e-14 && (s[1] - 2.0).abs() < 1e-14 && (s[2] - 1.0).abs() < 1e-14);
    assert!((oracle::det(&d) - Complex64::new(0.0, 6.0)).norm() < 1e-14);

    // [I | 1] is annihilated by (1, 1, 1, -1).
    let one = Complex64::new(1.0, 0.0);
    let z = Complex64::new(0.0, 0.0);
    let a = CMatrix::from_row_slice(3, 4, &[one, z, z, one, z, one, z, one, z, z, one, one]);
    let expected = [one, one, one, -one];
    assert!(oracle::alignment(&oracle::cofactor_null_vector(&a), &expected) > 1.0 - 1e-14);
    let jac = oracle::null_space(&a, 1e-8);
    assert!(oracle::alignment(jac.column(0).as_slice(), &expected) > 1.0 - 1e-14);
}

#[test]
fn singular_values_match_oracle() {
    for seed in 0..INSTANCES {
        let a = oracle::lcg_matrix(5, 6, seed);
        let ours = singular_values(&a);
        let theirs = oracle::singular_values(&a);
        for (x, y) in ours.iter().zip(&theirs) {
            assert!((x - y).abs() <= REL * theirs[0], "seed {seed}");
        }
    }
}

#[test]
fn null_vector_matches_oracle() {
    let tol = Tolerance::default();
    for seed in 0..INSTANCES {
        let (r, c) = if seed % 2 == 0 { (3, 4) } else { (5, 6) };
        let a = oracle::lcg_matrix(r, c, seed);
        let v = null_vector(&a, &tol).unwrap();
        let w = oracle::cofactor_null_vector(&a);
        assert!(oracle::alignment(v.as_slice(), &w) >= 1.0 - REL, "seed {seed}");
        let residual = (&a * &v).norm() / (oracle::fro(&a) * v.norm());
        assert!(residual <= REL, "seed {seed}: residual {residual}");
        let jac = oracle::null_space(&a, 1e-8);
        assert_eq!(jac.ncols(), 1);
        assert!(oracle::alignment(v.as_slice(), jac.column(0).as_slice()) >= 1.0 - REL);
    }
}

#[test]
fn numerical_rank_matches_oracle() {
    let tol = Tolerance::default();
    for seed in 0..INSTANCES {
        let rows = 3 + (seed % 6) as usize;
        let cols = 3 + ((seed / 6) % 6) as usize;
        let r = 1 + (seed as usize % rows.min(cols));
        let a = oracle::lcg_rank_matrix(rows, cols, r, seed);
        assert_eq!(oracle::rank(&a, tol.rank_rel_tol), r, "oracle, seed {seed}");
        assert_eq!(numerical_rank(&a, &tol), r, "seed {seed}");
    }
}

#[test]
fn left_null_basis_matches_oracle() {
    let tol = Tolerance::default();
    for seed in 0..INSTANCES {
        let (rows, cols, r) = match seed % 3 {
            0 => (8, 6, 5),
            1 => (7, 4, 4),
            _ => (4, 6, 3),
        };
        let a = oracle::lcg_rank_matrix(rows, cols, r, seed);
        let n = left_null_basis(&a, &tol).unwrap();
        let o = oracle::left_null_space(&a, tol.rank_rel_tol);
        assert_eq!(n.ncols(), rows - r);
        assert_eq!(o.ncols(), rows - r);
        let gram = n.adjoint() * &n;
        assert!(oracle::fro(&(gram - CMatrix::identity(rows - r, rows - r))) <= REL);
        let annihilation = oracle::fro(&(n.adjoint() * &a)) / oracle::fro(&a);
        assert!(annihilation <= REL, "seed {seed}: {annihilation}");
        let diff = oracle::fro(&(oracle::projector(&n) - oracle::projector(&o)));
        assert!(diff <= REL * (rows - r) as f64, "seed {seed}: projector gap {diff}");
    }
}
