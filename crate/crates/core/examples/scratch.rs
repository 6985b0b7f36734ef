use crn_core::equilibria::{sample_equilibrium_set, EquilibriumAnchor};
use crn_core::kinetics::{equilibrium_residual, MassActionField};
use crn_core::reduction::{reduce_network, ReducedMassActionField};
use crn_core::simulation::{compare, integrate, IntegrateOptions, Method, Sampling};
use crn_core::*;
use rand::SeedableRng;

fn main() {
    let net = presets::mckeithan();
    let verdict = find_complex_equilibrium(&net);
    println!(
        "mck: complex_balanced={} weakly_reversible={} deficiency={} residual={:.3e}",
        verdict.complex_balanced, verdict.weakly_reversible, verdict.deficiency, verdict.residual
    );
    let witness = verdict.witness.clone().unwrap();
    let (res, scale) = equilibrium_residual(&net, &witness);
    println!("witness residual {:.3e} scale {:.3e} rel {:.3e}", res, scale, res / scale);
    println!("witness[0..5] = {:?}", &witness.as_vector().as_slice()[0..5]);

    // cross-check against the back-substitution oracle
    let c19 = net.species_index("C19").unwrap();
    let oracle = presets::mckeithan_equilibrium_from(
        witness.as_vector()[c19],
        witness.as_vector()[0],
    );
    let mut worst: f64 = 0.0;
    for i in 0..net.species_count() {
        let rel = ((witness.as_vector()[i] - oracle.as_vector()[i]) / oracle.as_vector()[i]).abs();
        worst = worst.max(rel);
    }
    println!("oracle cross-check worst relative = {:.3e}", worst);

    // reduction: delete C15..C19 (complex indices 16..=20)
    let anchor = EquilibriumAnchor::new(&net, witness).unwrap();
    let deleted: Vec<usize> = (16..=20).collect();
    let reduced = reduce_network(&net, &anchor, &deleted).unwrap();
    println!(
        "reduced: c_hat={} reactions={} cond(L22)={:.3e}",
        reduced.retained.len(),
        reduced.extracted_reactions.len(),
        reduced.block_condition
    );

    // full vs reduced over [0,2]
    let names: Vec<String> = net.species().iter().map(|s| s.name.clone()).collect();
    let x0 = presets::mckeithan_x0();
    let opts = IntegrateOptions {
        method: Method::default(),
        sampling: Sampling::Uniform(201),
    };
    let field = MassActionField::new(&net);
    let t0 = std::time::Instant::now();
    let full = integrate(|x| field.eval(x), &x0, 2.0, &names, &opts).unwrap();
    println!("full sim: {:?} steps acc={} rej={}", t0.elapsed(), full.stats.accepted, full.stats.rejected);
    let rfield = ReducedMassActionField::new(&reduced);
    let red = integrate(|x| rfield.eval(x), &x0, 2.0, &names, &opts).unwrap();
    println!("red sim: acc={} rej={}", red.stats.accepted, red.stats.rejected);

    let report = compare(&full, &red, &["T".into(), "M".into()], None, None).unwrap();
    println!(
        "T sup discrepancy = {:.12e}\nM sup discrepancy = {:.12e}",
        report.sup_discrepancy[0], report.sup_discrepancy[1]
    );
    println!("terminal gaps = {:?}", report.terminal_gap);
    // net change signs over [0,2]
    for name in ["T", "M"] {
        let cf = full.species_column(name).unwrap();
        let cr = red.species_column(name).unwrap();
        println!(
            "{name}: full net change {:+.6e}, reduced {:+.6e}",
            cf.last().unwrap() - cf[0],
            cr.last().unwrap() - cr[0]
        );
    }

    // long-horizon convergence vs Newton
    let structure = build_structure(&net);
    let newton = unique_equilibrium_in_class(&net, &anchor, &x0).unwrap();
    println!("newton iterations = {}", newton.iterations);
    let t0 = std::time::Instant::now();
    let long = integrate(
        |x| field.eval(x),
        &x0,
        50.0,
        &names,
        &IntegrateOptions::default(),
    )
    .unwrap();
    println!("t=50 sim: {:?} steps={}", t0.elapsed(), long.stats.accepted);
    let mut worst: f64 = 0.0;
    for i in 0..net.species_count() {
        worst = worst.max((long.terminal()[i] - newton.x1.as_vector()[i]).abs());
    }
    println!("|x(50) - x1|_inf = {:.3e}", worst);
    let u1 = &structure.moiety_basis;
    println!("moiety basis dim = {}", u1.len());

    // equilibrium set samples annihilate reduced field
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let samples = sample_equilibrium_set(&structure, &anchor, 20, 0.5, &mut rng);
    let incl = equilibria_inclusion_check(&reduced, &samples);
    println!("inclusion worst residual = {:.3e}", incl.worst);

    // RK4 order fit on the toggle
    let ab = presets::isomerization();
    let ab_names: Vec<String> = ab.species().iter().map(|s| s.name.clone()).collect();
    let abf = MassActionField::new(&ab);
    let ab_x0 = Concentrations::from_slice(&[2.0, 0.01]).unwrap();
    let exact = 1.005 + 0.995 * (-4.0_f64).exp();
    let mut pts = Vec::new();
    for h in [0.4, 0.2, 0.1, 0.05] {
        let traj = integrate(
            |x| abf.eval(x),
            &ab_x0,
            2.0,
            &ab_names,
            &IntegrateOptions {
                method: Method::FixedRk4 { step: h },
                sampling: Sampling::Steps,
            },
        )
        .unwrap();
        let err = (traj.terminal()[0] - exact).abs();
        println!("h={h}: err={err:.6e}");
        pts.push((h as f64, err));
    }
    let n = pts.len() as f64;
    let (sx, sy, sxx, sxy) = pts.iter().fold((0.0, 0.0, 0.0, 0.0), |acc, &(h, e)| {
        let (x, y) = (h.ln(), e.ln());
        (acc.0 + x, acc.1 + y, acc.2 + x * x, acc.3 + x * y)
    });
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    println!("fitted RK4 order = {slope:.4}");
}
