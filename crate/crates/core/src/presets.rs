//! Ready-made networks used in tests, benchmarks and documentation.

use crate::kinetics::Concentrations;
use crate::network::ReactionNetwork;
use crate::parse::parse_network;

/// A ⇌ B with unit rate constants.
pub fn isomerization() -> ReactionNetwork {
    parse_network("A -> B ; k = 1\nB -> A ; k = 1")
        .expect("fixture parses")
        .network
}

/// X1 ⇌ X2 ⇌ X3 with rate constants 2, 3, 5, 7 (detailed balanced; its
/// equilibrium ray is (1, 2/3, 10/21)).
pub fn reversible_chain3() -> ReactionNetwork {
    parse_network("X1 <-> X2 ; kf = 2, kr = 3\nX2 <-> X3 ; kf = 5, kr = 7")
        .expect("fixture parses")
        .network
}

/// The detailed-balance equilibrium of [`reversible_chain3`].
pub fn reversible_chain3_equilibrium() -> Concentrations {
    Concentrations::from_slice(&[1.0, 2.0 / 3.0, 10.0 / 21.0]).expect("positive")
}

/// X1 → X2 → X3 → X1 with unit rates (complex-balanced but not
/// detailed-balanced).
pub fn cycle3() -> ReactionNetwork {
    parse_network("X1 -> X2 ; k = 1\nX2 -> X3 ; k = 1\nX3 -> X1 ; k = 1")
        .expect("fixture parses")
        .network
}

/// A small branched network over four species with two bimolecular
/// complexes: X1+2X2 ⇌ X3, X3 → 2X1+X2, 2X1+X2 → X4, X3 → X4.
pub fn branched4() -> ReactionNetwork {
    parse_network(
        "X1 + 2 X2 <-> X3 ; kf=1, kr=1\n\
         X3 -> 2 X1 + X2 ; k=1\n\
         2 X1 + X2 -> X4 ; k=1\n\
         X3 -> X4 ; k=1",
    )
    .expect("fixture parses")
    .network
}

/// Number of phosphorylation steps in the McKeithan T-cell proofreading
/// model used by [`mckeithan`].
pub const MCKEITHAN_N: usize = 19;

/// Forward (phosphorylation) rate constants k_{p,0..19} of the McKeithan
/// kinetic-proofreading chain.
pub const MCKEITHAN_KP: [f64; 20] = [
    52.0, 49.0, 41.0, 39.0, 37.0, 34.0, 31.0, 29.0, 25.0, 19.0, 16.0, 21.0, 20.0, 19.0, 18.0,
    15.0, 24.0, 13.0, 7.0, 5.0,
];

/// Dissociation rate constants k_{-1,0..19}.
pub const MCKEITHAN_KM: [f64; 20] = [
    13.0, 29.0, 0.16, 1.4, 2.3, 2.0, 0.19, 0.33, 0.94, 0.67, 0.31, 0.21, 3.0, 5.0, 1.0, 11.0,
    0.8, 7.0, 1.0, 17.0,
];

/// McKeithan's T-cell receptor kinetic-proofreading network with N = 19
/// intermediate complexes:
///
/// ```text
/// T + M → C0 → C1 → … → C19,   Ci → T + M  (i = 0..19)
/// ```
///
/// 22 species, 21 complexes, 40 reactions. Every reaction is irreversible,
/// yet the network is complex-balanced (deficiency zero, one strongly
/// connected linkage class).
pub fn mckeithan() -> ReactionNetwork {
    let n = MCKEITHAN_N;
    let m = n + 3; // T, M, C0..CN
    let mut species: Vec<String> = vec!["T".into(), "M".into()];
    for i in 0..=n {
        species.push(format!("C{i}"));
    }

    // complex 0 is T+M; complex i+1 is Ci
    let mut complexes: Vec<Vec<i64>> = Vec::with_capacity(n + 2);
    let mut tm = vec![0_i64; m];
    tm[0] = 1;
    tm[1] = 1;
    complexes.push(tm);
    for i in 0..=n {
        let mut col = vec![0_i64; m];
        col[2 + i] = 1;
        complexes.push(col);
    }

    let mut reactions: Vec<(usize, usize, f64)> = Vec::with_capacity(2 * n + 2);
    reactions.push((0, 1, MCKEITHAN_KP[0]));
    for i in 1..=n {
        reactions.push((i, i + 1, MCKEITHAN_KP[i]));
    }
    for i in 0..=n {
        reactions.push((i + 1, 0, MCKEITHAN_KM[i]));
    }

    ReactionNetwork::new(species, complexes, reactions).expect("fixture is valid")
}

/// The initial condition of the McKeithan example: T = 1, M = 2, every
/// intermediate at 0.01.
pub fn mckeithan_x0() -> Concentrations {
    let mut v = vec![0.01; MCKEITHAN_N + 3];
    v[0] = 1.0;
    v[1] = 2.0;
    Concentrations::from_slice(&v).expect("positive")
}

/// Back-substitution complex-equilibrium of the McKeithan chain, pinned to
/// a chosen value of [C_N] and of [T].
///
/// Setting every complex balance to zero determines [C_{i−1}] from [C_i]
/// downward and the product [T][M] from [C_0]; the two remaining degrees
/// of freedom are fixed by the arguments. Serves as an independent oracle
/// for equilibrium computations.
pub fn mckeithan_equilibrium_from(c_n: f64, t: f64) -> Concentrations {
    let n = MCKEITHAN_N;
    let mut c = vec![0.0_f64; n + 1];
    c[n] = c_n;
    c[n - 1] = MCKEITHAN_KM[n] / MCKEITHAN_KP[n] * c[n];
    for i in (1..n).rev() {
        // k_p[i]·C_{i−1} = (k_m[i] + k_p[i+1])·C_i
        c[i - 1] = (MCKEITHAN_KM[i] + MCKEITHAN_KP[i + 1]) / MCKEITHAN_KP[i] * c[i];
    }
    let tm_product = (MCKEITHAN_KM[0] + MCKEITHAN_KP[1]) / MCKEITHAN_KP[0] * c[0];
    let mut v = Vec::with_capacity(n + 3);
    v.push(t);
    v.push(tm_product / t);
    v.extend_from_slice(&c);
    Concentrations::from_slice(&v).expect("positive")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::equilibrium_membership;
    use crate::kinetics::{equilibrium_residual, mass_action_rates, vector_field};
    use crate::structure::build_structure;
    use approx::assert_relative_eq;

    #[test]
    fn mckeithan_dimensions() {
        let net = mckeithan();
        assert_eq!(net.species_count(), 22);
        assert_eq!(net.complex_count(), 21);
        assert_eq!(net.reaction_count(), 40);
        assert_eq!(net.complex_name(0), "T+M");
        assert_eq!(net.complex_name(20), "C19");
    }

    #[test]
    fn mckeithan_first_rate_at_initial_condition() {
        let net = mckeithan();
        let v = mass_action_rates(&net, &mckeithan_x0()).unwrap();
        // T+M -> C0 with k = 52 at T = 1, M = 2
        assert_relative_eq!(v[0], 104.0, epsilon = 1e-12);
    }

    #[test]
    fn mckeithan_terminal_species_derivative() {
        let net = mckeithan();
        let xdot = vector_field(&net, &mckeithan_x0()).unwrap();
        // d[C19]/dt = 5·0.01 − 17·0.01
        let c19 = net.species_index("C19").unwrap();
        assert_relative_eq!(xdot[c19], -0.12, epsilon = 1e-12);
    }

    #[test]
    fn mckeithan_structure() {
        let net = mckeithan();
        let report = build_structure(&net);
        assert_eq!(report.linkage_class_count(), 1);
        assert_eq!(report.deficiency, 0);
        assert_eq!(report.moiety_basis.len(), 2);

        // the documented moiety vectors lie in the computed span
        let m = net.species_count();
        for target in [
            {
                let mut u = vec![2.0; m];
                u[0] = 1.0;
                u[1] = 1.0;
                u
            },
            {
                let mut u = vec![0.0; m];
                u[0] = 1.0;
                u[1] = -1.0;
                u
            },
        ] {
            let t = nalgebra::DVector::from_vec(target);
            let mut residual = t.clone();
            for b in &report.moiety_basis {
                residual -= b * b.dot(&t);
            }
            assert!(crate::linalg::vec_inf_norm(&residual) < 1e-10);
        }

        let u = report.mass_vector.expect("mass vector exists");
        assert_relative_eq!(u[0], 1.0, epsilon = 1e-9);
        assert_relative_eq!(u[1], 1.0, epsilon = 1e-9);
        for i in 2..net.species_count() {
            assert_relative_eq!(u[i], 2.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn back_substitution_oracle_is_an_equilibrium() {
        let net = mckeithan();
        let x = mckeithan_equilibrium_from(0.05, 1.0);
        let (residual, scale) = equilibrium_residual(&net, &x);
        assert!(residual <= 1e-12 * scale, "residual {residual:.3e}");

        // two different pinnings land in the same equilibrium set
        let s = build_structure(&net).stoichiometric;
        let other = mckeithan_equilibrium_from(1.7, 0.3);
        assert!(equilibrium_membership(&s, &x, &other));
    }
}
