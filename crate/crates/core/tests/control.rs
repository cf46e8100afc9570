use proptest::prelude::*;
use xlab_core::control::*;
use xlab_core::ops::leray_project;
use xlab_core::solver::{resolving_endpoint, ForcingPath, SolverConfig};
use xlab_core::{HolderIndex, TorusGrid, VectorField2D};

fn grid() -> TorusGrid {
    TorusGrid::new(16).unwrap()
}

fn path_strategy(dim: usize) -> impl Strategy<Value = ControlPath> {
    (1usize..8).prop_flat_map(move |l| {
        (
            proptest::collection::vec(0.05f64..1.0, l),
            proptest::collection::vec(proptest::collection::vec(-2.0f64..2.0, dim), l),
        )
            .prop_map(|(lengths, coeffs)| {
                let mut t = vec![0.0];
                for d in lengths {
                    t.push(t.last().unwrap() + d);
                }
                ControlPath::new(t, coeffs).unwrap()
            })
    })
}

fn euclid(c: &[f64]) -> f64 {
    c.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn default_space_is_six_dimensional_and_divergence_free() {
    let sp = ControlSpace::default_space(grid());
    assert_eq!(sp.dim(), 6);
    for e in sp.basis() {
        assert!(e.max_divergence() <= 1e-12 * e.sup_norm());
        assert!(leray_project(e).sup_distance(e) <= 1e-13);
    }
    assert!(sp.gram().determinant() > 1e-12);
}

#[test]
fn sampled_ball_respects_radius_and_seed() {
    let sp = ControlSpace::default_space(grid());
    let norm = FieldNorm::Holder(HolderIndex::new(2.5).unwrap());
    let cn = sp.coefficient_norm(norm);
    let f = |c: &[f64]| cn.eval(c);
    let a = sample_bm(&sp, norm, 2.0, 25, 9, 16, 1.0);
    for s in &a {
        assert!(s.composite_norm(&f) <= 2.0 * (1.0 + 1e-12));
        assert_eq!(s.eta.intervals(), 16);
    }
    assert_eq!(a, sample_bm(&sp, norm, 2.0, 25, 9, 16, 1.0));
    assert_ne!(a, sample_bm(&sp, norm, 2.0, 25, 10, 16, 1.0));
    let zero = sample_bm(&sp, norm, 0.0, 5, 9, 16, 1.0);
    assert!(zero.iter().all(|s| s.composite_norm(&f) == 0.0));
    // serialisable for manifests and control files
    let json = serde_json::to_string(&a[0]).unwrap();
    assert_eq!(serde_json::from_str::<BmSample>(&json).unwrap(), a[0]);
}

#[test]
fn zero_control_endpoint_is_uncontrolled_solution() {
    let g = grid();
    let sp = ControlSpace::default_space(g);
    let cfg = SolverConfig::new(g);
    let u0 = VectorField2D::from_fn(g, |_, y| (y.sin(), 0.0));
    let z = primitive(&ControlPath::zero(1.0, 4, 6));
    let y = [0.5, 0.0, 0.0, -0.25, 0.0, 0.0];
    let k = endpoint_map(&sp, &y, &z, &u0, &ForcingPath::zero(), 1.0, &cfg).unwrap();
    let free = resolving_endpoint(&u0, &ForcingPath::zero(), 1.0, &cfg).unwrap();
    assert!(k.sup_distance(&(&free + &sp.field(&y))) < 1e-14);
    let k0 = endpoint_map(&sp, &[0.0; 6], &z, &u0, &ForcingPath::zero(), 1.0, &cfg).unwrap();
    assert!(k0.sup_distance(&u0) < 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn primitive_is_linear(p in path_strategy(3), a in -3.0f64..3.0, b in -3.0f64..3.0, seed in 0u64..100) {
        let q = ControlPath::new(
            p.breakpoints().to_vec(),
            p.coeffs().iter().enumerate().map(|(k, c)| c.iter().map(|x| x * (k as f64 + seed as f64 * 0.1).sin()).collect()).collect(),
        ).unwrap();
        let lhs = primitive(&p.combine(a, &q, b));
        let (zp, zq) = (primitive(&p), primitive(&q));
        for ((l, x), y) in lhs.nodes().iter().zip(zp.nodes()).zip(zq.nodes()) {
            for i in 0..3 {
                prop_assert!((l[i] - (a * x[i] + b * y[i])).abs() <= 1e-12 * (1.0 + l[i].abs()));
            }
        }
    }

    #[test]
    fn relaxation_norm_is_dominated_by_l1(p in path_strategy(4)) {
        prop_assert!(relaxation_norm(&p, &euclid) <= p.l1_norm(&euclid) * (1.0 + 1e-12));
    }

    #[test]
    fn relaxation_norm_is_homogeneous(p in path_strategy(2), a in -5.0f64..5.0) {
        let lhs = relaxation_norm(&p.scaled(a), &euclid);
        let rhs = a.abs() * relaxation_norm(&p, &euclid);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
    }

    #[test]
    fn primitive_starts_at_zero_and_differentiates_back(p in path_strategy(2)) {
        let z = primitive(&p);
        prop_assert_eq!(&z.nodes()[0], &vec![0.0, 0.0]);
        for (k, w) in p.breakpoints().windows(2).enumerate() {
            let slope: Vec<f64> = z.nodes()[k + 1].iter().zip(&z.nodes()[k]).map(|(b, a)| (b - a) / (w[1] - w[0])).collect();
            for (s, c) in slope.iter().zip(&p.coeffs()[k]) {
                prop_assert!((s - c).abs() <= 1e-9 * (1.0 + c.abs()));
            }
        }
    }
}
