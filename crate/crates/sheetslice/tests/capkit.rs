use proptest::prelude::*;
use sheetslice::capkit::{
    bilinear_energy, capacity, capacity_on_atoms, cube_midpoints, energy, project_kernel_with, DiscreteMeasure, Kernel,
    ProjectionForm,
};
use sheetslice::kernels::EpsKernelParams;
use sheetslice::setkit::CompactSet1D;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn energy_is_translation_invariant(
        raw in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, 0.1f64..1.0), 2..24),
        shift in (-3.0f64..3.0, -3.0f64..3.0),
        beta in 0.1f64..1.9,
    ) {
        let atoms: Vec<f64> = raw.iter().flat_map(|&(x, y, _)| [x, y]).collect();
        let total: f64 = raw.iter().map(|r| r.2).sum();
        let weights: Vec<f64> = raw.iter().map(|r| r.2 / total).collect();
        let mu = DiscreteMeasure::new(2, atoms, weights).unwrap();
        let k = Kernel::riesz(beta);
        let (a, b) = (energy(&mu, &k), energy(&mu.shifted(&[shift.0, shift.1]), &k));
        prop_assume!(a.is_finite());
        prop_assert!(rel(a, b) < 1e-9, "{a} vs {b}");
    }

    #[test]
    fn capacity_is_antitone_in_the_kernel(b1 in 0.1f64..1.5, db in 0.05f64..0.5, n in 16usize..96) {
        // Distances within [1, 1.5] are below 1, where |x|^{-β} increases with β.
        let f = CompactSet1D::interval(1.0, 1.5).unwrap();
        let weak = capacity(&f, &Kernel::riesz(b1), n).unwrap();
        let strong = capacity(&f, &Kernel::riesz(b1 + db), n).unwrap();
        prop_assert!(weak.converged && strong.converged);
        prop_assert!(weak.capacity >= strong.capacity * (1.0 - 1e-9));
    }
}

#[test]
fn capacity_grows_with_the_set_at_fixed_density() {
    let k = Kernel::riesz(0.7);
    let small = capacity(&CompactSet1D::interval(1.0, 1.5).unwrap(), &k, 64).unwrap();
    let large = capacity(&CompactSet1D::interval(1.0, 2.0).unwrap(), &k, 128).unwrap();
    let union = capacity(&"1,1.5;1.75,2".parse().unwrap(), &k, 96).unwrap();
    assert!(small.capacity <= union.capacity + 1e-9 && union.capacity <= large.capacity + 1e-9);
}

#[test]
fn solver_certifies_its_duality_gap() {
    for beta in [0.25, 0.5, 1.0, 1.5] {
        let r = capacity(&"0,0.3;0.5;0.7,1".parse().unwrap(), &Kernel::riesz(beta), 200).unwrap();
        assert!(r.converged && r.duality_gap < 1e-9, "β = {beta}: gap {}", r.duality_gap);
        let w: f64 = r.minimizer.weights.iter().sum();
        assert!((w - 1.0).abs() < 1e-12);
        assert!((r.capacity * r.energy - 1.0).abs() < 1e-12);
    }
}

#[test]
fn capacity_on_separated_points_matches_the_two_atom_oracle() {
    // Two atoms at distance r: the optimum splits evenly, I = (k(h/2) + k(r))/2.
    let k = Kernel::riesz(0.5);
    let r = capacity_on_atoms(1, vec![1.0, 1.25], &k).unwrap();
    let exact = 0.5 * (k.eval(0.125) + k.eval(0.25));
    assert!(rel(r.energy, exact) < 1e-9, "{} vs {exact}", r.energy);
}

/// `I_k(λ × σ, λ × ρ) = I_{Π₁k}(σ, ρ)` for the uniform measure λ on [0,1],
/// with σ and ρ on disjoint atoms so no self-terms enter.
#[test]
fn product_energy_equals_projected_energy() {
    let lambda = DiscreteMeasure::uniform(1, cube_midpoints(1, 256)).unwrap();
    let sigma = DiscreteMeasure::new(1, vec![1.0, 1.3, 1.9], vec![0.2, 0.5, 0.3]).unwrap();
    let rho = DiscreteMeasure::new(1, vec![1.1, 1.6], vec![0.6, 0.4]).unwrap();
    let kernels = [Kernel::riesz(0.5), Kernel::riesz(1.5), Kernel::FEps(EpsKernelParams::new(0.5, 3).unwrap())];
    for k in &kernels {
        let lhs = bilinear_energy(&lambda.product(&sigma), &lambda.product(&rho), k).unwrap();
        let pk = project_kernel_with(k, 1, ProjectionForm::Difference).unwrap();
        let rhs = bilinear_energy(&sigma, &rho, &pk).unwrap();
        assert!(rel(lhs, rhs) < 1e-3, "{k:?}: {lhs} vs {rhs}");
    }
}
