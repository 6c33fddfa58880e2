use rsf_core::exterior::{
    exterior_derivative, form_from_velocity, pullback, wedge, DiscreteMap, IndexTuple, KForm,
};
use rsf_core::fields::{AnalyticField, Grid, ScalarField, TrigField};
use rsf_core::rsf::{component_vorticities, decomposition_plan};
use rsf_core::solver::{
    list_snapshots, read_diagnostics, simulate_to_dir, Mode, SolverConfig, DIAGNOSTICS_FILE,
};

fn max_gap(a: &KForm<ScalarField>, b: &KForm<ScalarField>) -> f64 {
    a.sub(b).unwrap().max_norm()
}

#[test]
fn pullback_is_multiplicative_on_node_maps() {
    // nodes go to nodes, so interpolation is exact and only the Jacobian
    // algebra is tested (Cauchy–Binet)
    let g = Grid::cube(4, 8).unwrap();
    let h = g.spacing(0);
    let jac = [
        1.0, 0.2, 0.0, -0.1, 0.3, 1.1, 0.0, 0.0, 0.0, 0.4, 0.9, 0.2, 0.1, 0.0, -0.3, 1.2,
    ];
    let map = DiscreteMap::from_fn(
        &g,
        |a| {
            a.iter()
                .enumerate()
                .map(|(i, x)| x + (i + 1) as f64 * h)
                .collect()
        },
        |_| jac.to_vec(),
    )
    .unwrap();
    let u = TrigField::trig_random(3, 2, 4, 4, 3);
    let alpha = form_from_velocity(u.components())
        .unwrap()
        .sample(&g)
        .unwrap();
    let beta = exterior_derivative(
        &form_from_velocity(
            &u.components()[1..]
                .iter()
                .chain(&u.components()[..1])
                .cloned()
                .collect::<Vec<_>>(),
        )
        .unwrap(),
    )
    .sample(&g)
    .unwrap();
    let lhs = pullback(&map, &wedge(&alpha, &beta).unwrap()).unwrap();
    let rhs = wedge(
        &pullback(&map, &alpha).unwrap(),
        &pullback(&map, &beta).unwrap(),
    )
    .unwrap();
    assert!(max_gap(&lhs, &rhs) < 1e-13);
}

#[test]
fn components_sum_to_the_vorticity() {
    for d in 3..=6 {
        let g = Grid::cube(d, 8).unwrap();
        let u = TrigField::trig_random(d as u64, 1, d, d, 2)
            .sample(&g, 0.0)
            .unwrap();
        let plan = decomposition_plan(d).unwrap();
        let parts = component_vorticities(u.components(), &plan).unwrap();
        let mut total = KForm::zero(&g, 2);
        for p in &parts {
            total = total.add(p).unwrap();
        }
        let whole = exterior_derivative(&form_from_velocity(u.components()).unwrap());
        assert!(max_gap(&total, &whole) < 1e-12, "d={d}");
        // a component never touches a foreign pair of axes
        for (i, p) in parts.iter().enumerate() {
            let own = plan.axes(i);
            for t in p.support() {
                assert!(
                    t.axes().iter().any(|a| own.contains(a)),
                    "d={d} component {i} tuple {t}"
                );
            }
        }
    }
    assert!(IndexTuple::one_based(&[2, 1]).is_err());
}

#[test]
fn free_mode_run_writes_consistent_output() {
    let tmp = tempfile::tempdir().unwrap();
    let config = SolverConfig {
        mode: Mode::Free,
        seed: 4,
        t_end: 0.3,
        dims: [16, 16, 8],
        snapshot_stride: 2,
        ..SolverConfig::default()
    };
    let summary = simulate_to_dir(&config, tmp.path()).unwrap();
    let snaps = list_snapshots(tmp.path()).unwrap();
    assert_eq!(snaps.len(), summary.snapshots);
    let diags = read_diagnostics(&tmp.path().join(DIAGNOSTICS_FILE)).unwrap();
    assert_eq!(diags.len(), snaps.len());
    let m0 = diags[0].mass;
    assert!(diags
        .iter()
        .all(|d| (d.mass - m0).abs() <= 1e-12 * m0 && d.rho_min > 0.0));
    // the horizontal velocity stays two-dimensional in every mode
    assert!(diags.iter().all(|d| d.rsf_dev == 0.0));
    let (last, t) = rsf_core::fields::io::read(snaps.last().unwrap()).unwrap();
    assert!((t - 0.3).abs() < 1e-12);
    assert_eq!(last.ncomp(), 4);
}
