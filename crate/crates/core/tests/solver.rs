use std::f64::consts::PI;

use xlab_core::control::{self, ControlPath, ControlSpace};
use xlab_core::holder::HolderBallSampler;
use xlab_core::solver::{
    self, conserved_quantities, diagnostics::relative_drift, flow_map, resolving_endpoint, solve, FieldPath,
    ForcingPath, Method, SolverConfig, TimeProfile, Triple,
};
use xlab_core::{Error, HolderIndex, TorusGrid, VectorField2D};

fn grid(n: usize) -> TorusGrid {
    TorusGrid::new(n).unwrap()
}

fn shear(g: TorusGrid) -> VectorField2D {
    VectorField2D::from_fn(g, |_, y| (y.sin(), 0.0))
}

fn random_field(g: TorusGrid, kmax: Option<usize>, seed: u64) -> VectorField2D {
    let s = HolderIndex::new(2.5).unwrap();
    let sampler = HolderBallSampler::new(s, 1.0, g);
    let sampler = match kmax {
        Some(k) => sampler.with_kmax(k),
        None => sampler,
    };
    sampler.sample(g, seed)
}

fn both_methods(g: TorusGrid) -> [SolverConfig; 2] {
    [SolverConfig::new(g), SolverConfig::new(g).with_method(Method::SpectralReference)]
}

/// Values of a fine-grid field at the points of the half-resolution grid.
fn restrict(u: &VectorField2D) -> VectorField2D {
    let n = u.grid().n() / 2;
    let g = grid(n);
    let pick = |v: &[f64], i: usize, j: usize| v[(2 * i) * (2 * n) + 2 * j];
    let a = (0..n * n).map(|k| pick(u.u1().values(), k / n, k % n)).collect();
    let b = (0..n * n).map(|k| pick(u.u2().values(), k / n, k % n)).collect();
    VectorField2D::new(
        xlab_core::ScalarField2D::from_values(g, a).unwrap(),
        xlab_core::ScalarField2D::from_values(g, b).unwrap(),
    )
    .unwrap()
}

#[test]
fn steady_shear_is_preserved() {
    let g = grid(64);
    for cfg in both_methods(g) {
        let tr = Triple::unshifted(shear(g), ForcingPath::zero(), 1.0).unwrap();
        let traj = solve(&tr, &cfg).unwrap();
        assert_eq!(*traj.times.last().unwrap(), 1.0);
        for u in &traj.velocity {
            assert!(u.sup_distance(&shear(g)) <= 1e-6);
        }
        let c = conserved_quantities(&traj).unwrap();
        assert!(c.iter().all(|q| (q.energy - PI * PI).abs() < 1e-10));
    }
}

#[test]
fn forced_shear_matches_closed_form() {
    let g = grid(64);
    let f = ForcingPath::separable(shear(g), |t: f64| t.cos(), |t: f64| t.sin());
    let horizon = PI / 2.0;
    for cfg in both_methods(g) {
        let tr = Triple::unshifted(VectorField2D::zeros(g), f.clone(), horizon).unwrap();
        let traj = solve(&tr, &cfg).unwrap();
        for (t, u) in traj.times.iter().zip(&traj.velocity) {
            assert!(u.sup_distance(&shear(g).scale(t.sin())) <= 1e-6, "t = {t}");
        }
        assert!(traj.endpoint().sup_distance(&shear(g)) <= 1e-6);
    }
}

#[test]
fn zero_data_stays_zero() {
    let g = grid(16);
    let tr = Triple::unshifted(VectorField2D::zeros(g), ForcingPath::zero(), 0.5).unwrap();
    let traj = solve(&tr, &SolverConfig::new(g)).unwrap();
    assert_eq!(traj.endpoint().sup_norm(), 0.0);
    assert!(conserved_quantities(&traj).unwrap().iter().all(|c| c.energy == 0.0 && c.enstrophy == 0.0));
}

#[test]
fn methods_agree_and_conserve_at_128() {
    let g = grid(128);
    let u0 = random_field(g, None, 7);
    let tr = Triple::unshifted(u0, ForcingPath::zero(), 1.0).unwrap();
    let [sl, sp] = both_methods(g).map(|c| solve(&tr, &c).unwrap());
    let gap = sl.endpoint().sup_distance(sp.endpoint());
    assert!(gap <= 1e-4, "cross-method gap {gap:e}");
    for traj in [&sl, &sp] {
        let (de, dz) = relative_drift(&conserved_quantities(traj).unwrap());
        assert!(de <= 1e-4 && dz <= 1e-4, "drift {de:e} {dz:e}");
        for u in &traj.velocity {
            assert!(u.max_divergence() <= 1e-8 * u.sup_norm());
        }
    }
}

#[test]
fn semi_lagrangian_converges_at_second_order_or_better() {
    let u0 = |n| random_field(grid(n), Some(4), 3);
    let end = |n: usize| {
        let tr = Triple::unshifted(u0(n), ForcingPath::zero(), 1.0).unwrap();
        solve(&tr, &SolverConfig::new(grid(n))).unwrap().endpoint().clone()
    };
    let (a, b, c) = (end(32), end(64), end(128));
    let d1 = restrict(&b).sup_distance(&a);
    let d2 = restrict(&c).sup_distance(&b);
    assert!(d1 / d2 >= 4.0, "ratio {} ({d1:e}, {d2:e})", d1 / d2);
}

#[test]
fn pressure_snapshots() {
    let g = grid(32);
    let tr = Triple::unshifted(shear(g), ForcingPath::zero(), 0.2).unwrap();
    let cfg = SolverConfig { pressure: true, ..SolverConfig::new(g) };
    let traj = solve(&tr, &cfg).unwrap();
    let p = traj.pressure.unwrap();
    assert_eq!(p.len(), traj.times.len());
    assert!(p.iter().all(|p| p.sup_norm() < 1e-12));
}

#[test]
fn invalid_data_and_guards() {
    let g = grid(16);
    let grad = VectorField2D::from_fn(g, |x, _| (-x.sin(), 0.0));
    assert!(matches!(
        Triple::unshifted(grad, ForcingPath::zero(), 1.0),
        Err(Error::NotDivergenceFree { .. })
    ));
    let tr = Triple::unshifted(shear(g), ForcingPath::zero(), 1.0).unwrap();
    let cfg = SolverConfig { min_dt: 0.5, ..SolverConfig::new(g) };
    assert!(matches!(solve(&tr, &cfg), Err(Error::CflViolation { .. })));
    let f = ForcingPath::steady(shear(g).scale(50.0));
    let tr = Triple::unshifted(shear(g), f, 1.0).unwrap();
    let cfg = SolverConfig { blowup_factor: 1e-3, ..SolverConfig::new(g) };
    assert!(matches!(solve(&tr, &cfg), Err(Error::Divergence { .. })));
}

#[test]
fn resolving_endpoint_trivial_cases() {
    let g = grid(16);
    let cfg = SolverConfig::new(g);
    let u0 = random_field(g, Some(3), 1);
    assert_eq!(resolving_endpoint(&u0, &ForcingPath::zero(), 0.0, &cfg).unwrap(), u0);
    let e = resolving_endpoint(&shear(g), &ForcingPath::zero(), 1.0, &cfg).unwrap();
    assert!(e.sup_distance(&shear(g)) < 1e-6);
}

#[test]
fn flow_map_examples() {
    let g = grid(32);
    let cfg = SolverConfig::new(g);
    let constant = VectorField2D::constant(g, (1.0, 0.0));
    let traj = solve(&Triple::unshifted(constant, ForcingPath::zero(), 1.0).unwrap(), &cfg).unwrap();
    let m = flow_map(&traj, 0.0, 0.7).unwrap();
    for i in 0..32 {
        for j in 0..32 {
            let (x, y) = m.position(i, j);
            let ex = (g.coord(i) - 0.7).rem_euclid(2.0 * PI);
            assert!(xlab_core::grid::circle_distance(x, ex) < 1e-12 && (y - g.coord(j)).abs() < 1e-12);
        }
    }
    let id = flow_map(&traj, 0.4, 0.4).unwrap();
    assert_eq!(id.max_distance(&solver::FlowMap::identity(g, 0.4)), 0.0);

    let traj = solve(&Triple::unshifted(shear(g), ForcingPath::zero(), 1.0).unwrap(), &cfg).unwrap();
    let m = flow_map(&traj, 0.0, 0.5).unwrap();
    for i in 0..32 {
        for j in 0..32 {
            let (d1, d2) = m.displacement(i, j);
            assert!((d1 + 0.5 * g.coord(j).sin()).abs() < 1e-9 && d2.abs() < 1e-12);
        }
    }
    assert!(matches!(flow_map(&traj, 0.6, 0.5), Err(Error::OutOfRange { .. })));
    assert!(matches!(flow_map(&traj, 0.0, 1.5), Err(Error::OutOfRange { .. })));
}

#[test]
fn flow_maps_compose() {
    let g = grid(64);
    let u0 = random_field(g, Some(4), 5).scale(2.0);
    let traj = solve(&Triple::unshifted(u0, ForcingPath::zero(), 1.0).unwrap(), &SolverConfig::new(g)).unwrap();
    let outer = flow_map(&traj, 0.0, 0.5).unwrap();
    let inner = flow_map(&traj, 0.5, 1.0).unwrap();
    let whole = flow_map(&traj, 0.0, 1.0).unwrap();
    let err = outer.compose(&inner).max_distance(&whole);
    assert!(err < 1e-5, "composition error {err:e}");
}

#[test]
fn transport_representation_of_vorticity() {
    // Unforced: ω(t, x) = ω₀(U_{0,t}(x)), compared by spectral evaluation of ω₀.
    let g = grid(64);
    let u0 = random_field(g, Some(4), 9);
    let traj = solve(&Triple::unshifted(u0, ForcingPath::zero(), 1.0).unwrap(), &SolverConfig::new(g)).unwrap();
    let m = flow_map(&traj, 0.0, 1.0).unwrap();
    let w0 = &traj.vorticity[0];
    let spec = w0.spectrum();
    let n = g.n();
    let eval = |x: f64, y: f64| {
        let mut s = 0.0;
        for p in 0..n {
            for q in 0..n {
                let c = spec[p * n + q];
                if c.norm() < 1e-14 {
                    continue;
                }
                let ph = g.wavenumber(p) as f64 * x + g.wavenumber(q) as f64 * y;
                s += c.re * ph.cos() - c.im * ph.sin();
            }
        }
        s / (n * n) as f64
    };
    let w1 = traj.vorticity.last().unwrap();
    let mut err = 0.0_f64;
    for i in (0..n).step_by(7) {
        for j in (0..n).step_by(5) {
            let (x, y) = m.position(i, j);
            err = err.max((eval(x, y) - w1.at(i, j)).abs());
        }
    }
    assert!(err < 1e-3 * w0.sup_norm(), "transport error {err:e}");
}

#[test]
fn endpoint_identity_on_random_controls() {
    let g = grid(64);
    let space = ControlSpace::default_space(g);
    let cfg = SolverConfig::new(g);
    let u0 = random_field(g, Some(6), 2);
    let h = ForcingPath::zero();
    for seed in 0..3u64 {
        let mut rng = xlab_core::rng::stream(seed, 1, 0);
        use rand::Rng;
        let coeffs = (0..8).map(|_| (0..space.dim()).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let eta = ControlPath::uniform(1.0, coeffs).unwrap();
        let z = control::primitive(&eta);
        let lhs = resolving_endpoint(&u0, &h.plus(&eta.to_forcing(&space).unwrap()), 1.0, &cfg).unwrap();
        let rhs = control::endpoint_map(&space, z.end(), &z, &u0, &h, 1.0, &cfg).unwrap();
        assert!(lhs.sup_distance(&rhs) <= 1e-4, "seed {seed}: {:e}", lhs.sup_distance(&rhs));
    }
}

#[test]
fn shifted_solution_satisfies_substitution() {
    // u solves the shifted system iff u + z solves standard Euler with f + ż.
    let g = grid(32);
    let z_end = shear(g).scale(0.3);
    let z = FieldPath::new(vec![0.0, 1.0], vec![VectorField2D::zeros(g), z_end.clone()]).unwrap();
    let u0 = random_field(g, Some(3), 4);
    let tr = Triple::new(u0.clone(), Some(z), ForcingPath::zero(), 1.0).unwrap();
    let cfg = SolverConfig::new(g);
    let u = solve(&tr, &cfg).unwrap();
    let w_end = resolving_endpoint(&u0, &ForcingPath::steady(z_end.clone()), 1.0, &cfg).unwrap();
    assert!((u.endpoint() + &z_end).sup_distance(&w_end) < 1e-12);
    let _ = TimeProfile::Interval { start: 0.0, end: 1.0 };
}
