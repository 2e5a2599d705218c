//! Cross-checks between the mesh solvers and the independent closed-form
//! family on the unit disk.

use gelfand_core::{
    build_mesh, continue_branch, liouville_closed_form, oracles, ContinuationConfig, Mesh,
    MeshSpec, LAMBDA_SUP,
};

fn disk(n_r: usize) -> Mesh {
    build_mesh(MeshSpec::DiskRadial { mode: 0, n_r }).unwrap()
}

#[test]
fn explicit_solution_satisfies_gelfand_equation_discretely() {
    // -Delta u = mu e^u for the closed-form family, checked with the
    // discrete operator at two resolutions (interior cells; the wall
    // cell carries the closure defect)
    for alpha in [0.25, 1.0, 4.0] {
        let rec = liouville_closed_form(alpha).unwrap();
        let mut errs = Vec::new();
        for n_r in [512usize, 1024] {
            let mesh = disk(n_r);
            let u = mesh.field_from_fn(|p| rec.u(p[0]));
            let ku = mesh.apply_laplacian(&u).unwrap();
            let rhs = mesh.field_from_fn(|p| rec.mu * rec.u(p[0]).exp());
            let mut worst = 0.0f64;
            for (a, b) in ku.as_slice()[..ku.len() - 1]
                .iter()
                .zip(rhs.as_slice())
            {
                worst = worst.max((a - b).abs());
            }
            errs.push(worst / rhs.max_abs());
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(
            order >= 1.9,
            "alpha {alpha}: errors {errs:?} give order {order}"
        );
    }
}

#[test]
fn branch_reproduces_closed_forms_at_moderate_resolution() {
    let mesh = disk(512);
    let cfg = ContinuationConfig {
        lambda_start: -10.0,
        lambda_end: LAMBDA_SUP - 0.5,
        ..Default::default()
    };
    let branch = continue_branch(&mesh, &cfg).unwrap();
    assert!(branch.len() > 60);
    for p in &branch.points {
        let mu_exact = oracles::disk_mu_of_lambda(p.lambda);
        let e_exact = oracles::disk_energy_of_lambda(p.lambda);
        let g_exact = oracles::disk_g_of_lambda(p.lambda);
        let z_exact = oracles::disk_mean_z_of_lambda(p.lambda);
        if p.lambda.abs() > 1e-12 {
            assert!(
                (p.mu - mu_exact).abs() <= 2e-3 * mu_exact.abs(),
                "mu at lambda {}: {} vs {mu_exact}",
                p.lambda,
                p.mu
            );
        }
        assert!(
            (p.energy - e_exact).abs() <= 2e-3 * e_exact,
            "E at lambda {}: {} vs {e_exact}",
            p.lambda,
            p.energy
        );
        assert!(
            (p.g - g_exact).abs() <= 2e-3 * g_exact.abs().max(0.05),
            "g at lambda {}: {} vs {g_exact}",
            p.lambda,
            p.g
        );
        assert!(
            (p.mean_z - z_exact).abs() <= 2e-3 * z_exact,
            "<z> at lambda {}: {} vs {z_exact}",
            p.lambda,
            p.mean_z
        );
        assert!((p.mu * p.mass_eu - p.lambda).abs() <= 1e-10 * p.lambda.abs().max(1.0));
        assert!((p.g - (1.0 - p.lambda * p.mean_z)).abs() <= 1e-12 * p.g.abs().max(1.0));
    }
}

#[test]
fn disk_e0_chain_is_consistent() {
    // closed form, small-alpha limit, and the mesh value agree
    let e0 = oracles::disk_e0();
    let rec = liouville_closed_form(1e-10).unwrap();
    assert!((rec.energy - e0).abs() < 1e-11);
    let mesh = disk(1024);
    let measured = gelfand_core::energy_zero(&mesh).unwrap();
    assert!((measured - e0).abs() < 5e-6, "{measured} vs {e0}");
}

#[test]
fn mesh_refinement_is_consistent_for_branch_quantities() {
    // mu(lambda) sampled on a coarse and a refined disk agree at O(h^2)
    let cfg = ContinuationConfig {
        lambda_start: 0.0,
        lambda_end: 20.0,
        ..Default::default()
    };
    let coarse = continue_branch(&disk(256), &cfg).unwrap();
    let fine = continue_branch(&disk(512), &cfg).unwrap();
    for lambda in [5.0, 12.0, 18.0] {
        let pc = &coarse.points[coarse.nearest_index(lambda)];
        let pf = &fine.points[fine.nearest_index(lambda)];
        let exact_c = oracles::disk_mu_of_lambda(pc.lambda);
        let exact_f = oracles::disk_mu_of_lambda(pf.lambda);
        let err_c = (pc.mu - exact_c).abs();
        let err_f = (pf.mu - exact_f).abs();
        assert!(
            err_f <= 0.35 * err_c + 1e-12,
            "lambda {lambda}: coarse {err_c:.3e}, fine {err_f:.3e}"
        );
    }
}
