use cylscale::eigen::{eig_all, eig_near_with};
use cylscale::io::mtx::parse_matrix_market;
use cylscale::sparse::CsrMatrix;
use cylscale::C64;

fn oracle() -> (CsrMatrix, Vec<C64>) {
    let a = parse_matrix_market(include_str!("data/random50.mtx")).unwrap();
    let eigs = include_str!("data/random50_eigenvalues.txt")
        .lines()
        .map(|l| {
            let mut it = l.split_whitespace().map(|t| t.parse::<f64>().unwrap());
            C64::new(it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    (a, eigs)
}

#[test]
fn dense_solver_matches_reference_eigenvalues() {
    let (a, expected) = oracle();
    assert_eq!(a.nrows(), 50);
    assert_eq!(a.asymmetry(), 0.0);
    let r = eig_all(&a, &CsrMatrix::identity(50), 1e-10).unwrap();
    assert!(r.converged);
    assert_eq!(r.len(), 50);
    for (got, want) in r.eigenvalues.iter().zip(&expected) {
        assert!((got - want).norm() < 1e-8, "{got} vs {want}");
    }
    assert!(r.max_residual() < 1e-10);
}

#[test]
fn shift_invert_finds_the_nearest_reference_eigenvalues() {
    let (a, expected) = oracle();
    let shift = C64::new(0.3, -0.2);
    let mut near = expected.clone();
    near.sort_by(|x, y| (x - shift).norm().total_cmp(&(y - shift).norm()));
    let r = eig_near_with(&a, &CsrMatrix::identity(50), shift, 6, 1e-10, 50).unwrap();
    assert!(r.converged);
    for (got, want) in r.eigenvalues.iter().zip(&near[..6]) {
        assert!((got - want).norm() < 1e-8, "{got} vs {want}");
    }
}
