mod common;

use common::close;
use radchaos::verify::{catalog, CatalogObject};
use radchaos::{
    build_complete, chaos_coeffs, cut_norm, cut_norm_star, decouple, disc_exact,
    expected_disc_exact, linf_chaos, linf_multiple, lp_rademacher_exact, mixed_norm_profile,
    opnorm_inf_to_1, Budget, CoeffTensor, SignPattern, SimplexCoeffs, WeightedHypergraph,
};

const B: Budget = Budget(radchaos::DEFAULT_BUDGET);

fn ruc_values(a: &CoeffTensor) -> (f64, f64) {
    let cells = a.len();
    let values: Vec<f64> = common::sign_vectors(cells)
        .iter()
        .map(|s| {
            let flipped: Vec<f64> = a.values().iter().zip(s).map(|(v, t)| v * t).collect();
            common::linf(&CoeffTensor::new(a.dims().to_vec(), flipped).unwrap())
        })
        .collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (mean, values.iter().copied().fold(f64::INFINITY, f64::min))
}

#[test]
fn catalog_values_match_brute_force() {
    for entry in catalog() {
        for (quantity, &expected) in &entry.expected {
            let got = match (&entry.object, quantity.as_str()) {
                (CatalogObject::Tensor(t), "cut") => common::cut(t),
                (CatalogObject::Tensor(t), "opnorm") => common::opnorm(t),
                (CatalogObject::Tensor(t), "linf") => common::linf(t),
                (CatalogObject::Tensor(t), "ruc_mean") => ruc_values(t).0,
                (CatalogObject::Tensor(t), "ruc_min") => ruc_values(t).1,
                (CatalogObject::Simplex(s), "chaos") => common::chaos(s),
                (CatalogObject::Simplex(s), "decoupled") => common::linf(&decouple(s)),
                (CatalogObject::Vector(v), "l1") => common::lp(v, 1.0),
                (CatalogObject::Graph(g), "disc") => common::disc(g),
                (CatalogObject::Graph(g), "expected_disc") => common::expected_disc(g),
                (_, q) => panic!("{}: unknown quantity {q}", entry.name),
            };
            assert!(close(got, expected, 1e-12), "{} {quantity}: {got} vs {expected}", entry.name);
        }
    }
}

fn k3_signed(signs: [f64; 3]) -> WeightedHypergraph {
    let mut i = 0;
    radchaos::model::build_complete_with(3, 2, |_| {
        i += 1;
        signs[i - 1]
    })
    .unwrap()
}

// Values below were produced by the brute-force module and are frozen here.

#[test]
fn frozen_matrix_values() {
    let check = CoeffTensor::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
    assert_eq!(common::cut(&check), 1.0);
    assert_eq!(common::opnorm(&check), 4.0);
    assert_eq!(cut_norm(&check, B).unwrap().value, 1.0);
    assert_eq!(opnorm_inf_to_1(&check, B).unwrap().value, 4.0);

    let ones = CoeffTensor::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
    assert_eq!(ruc_values(&ones), (3.0, 2.0));
    assert_eq!(common::mixed(&ones), vec![8f64.sqrt(), 8f64.sqrt()]);
    assert_eq!(mixed_norm_profile(&ones).m(), common::mixed(&ones).as_slice());
}

#[test]
fn frozen_chaos_values() {
    let k3 = chaos_coeffs(&build_complete(3, 2, 1.0).unwrap());
    assert_eq!(common::chaos(&k3), 3.0);
    assert_eq!(common::star(&k3), 3.0);
    let signed = chaos_coeffs(&k3_signed([1.0, 1.0, -1.0]));
    assert_eq!(common::star(&signed), 1.0);
    assert_eq!(cut_norm_star(&signed, B).unwrap().value, 1.0);
    // eps = (-1, 1, 1) gives -1 - 1 - 1
    assert_eq!(common::chaos(&signed), 3.0);
    assert_eq!(linf_chaos(&signed, B).unwrap().value, 3.0);

    let triple = SimplexCoeffs::from_entries(3, 3, [(vec![1, 2, 3], 6.0)]).unwrap();
    let t = decouple(&triple);
    assert!(t.values().iter().filter(|&&v| v != 0.0).all(|&v| v == 1.0));
    assert_eq!(t.values().iter().filter(|&&v| v != 0.0).count(), 6);
}

#[test]
fn frozen_discrepancy_values() {
    let k3 = build_complete(3, 2, 1.0).unwrap();
    let k4 = build_complete(4, 2, 1.0).unwrap();
    assert_eq!(common::disc(&k3), 1.0);
    assert_eq!(common::expected_disc(&k3), 1.5);
    assert_eq!(common::disc(&k4), 1.0);
    assert_eq!(disc_exact(&k3, B).unwrap().value, 1.0);
    assert_eq!(disc_exact(&k4, B).unwrap().value, 1.0);
    assert_eq!(expected_disc_exact(&k3, B).unwrap().value, 1.5);
    for n in 5..=6 {
        let kn = build_complete(n, 2, 1.0).unwrap();
        assert_eq!(disc_exact(&kn, B).unwrap().value, common::disc(&kn), "n = {n}");
        assert!(close(expected_disc_exact(&kn, B).unwrap().value, common::expected_disc(&kn), 1e-12));
    }
}

#[test]
fn frozen_lp_values() {
    assert_eq!(common::lp(&[1.0, 1.0], 1.0), 1.0);
    assert!(close(common::lp(&[1.0, 1.0], 2.0), 2f64.sqrt(), 1e-15));
    for (a, p) in [(vec![1.0, 2.0, -0.5], 3.0), (vec![0.3, 0.3, 0.3, 0.3], 1.5), (vec![2.0], 4.0)] {
        let exact = lp_rademacher_exact(&a, p, B).unwrap();
        assert!(close(exact, common::lp(&a, p), 1e-12), "{a:?} p={p}");
    }
}

#[test]
fn linf_of_a_vector_is_its_l1_norm() {
    let v = CoeffTensor::new(vec![4], vec![1.0, -2.0, 0.5, 3.0]).unwrap();
    assert_eq!(common::linf(&v), 6.5);
    assert_eq!(linf_multiple(&v, B).unwrap().value, 6.5);
}

#[test]
fn sign_pattern_application_matches_brute_force() {
    let a = CoeffTensor::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
    let p = SignPattern::new(vec![1, -1, -1, 1]).unwrap();
    assert_eq!(a.hadamard_signs(&p).unwrap().values(), &[1.0, -2.0, -3.0, 4.0]);
}
