//! End-to-end verification-suite runs on disk and square branches.

use gelfand_core::diagnostics::verify_branch_with_energies;
use gelfand_core::{
    build_mesh, classify_domain, continue_branch, find_lambda_star, mu_infty_diagram, oracles,
    verify_branch, ContinuationConfig, KindVerdict, Mesh, MeshSpec, LAMBDA_SUP,
};
use std::f64::consts::PI;

fn disk(n_r: usize) -> Mesh {
    build_mesh(MeshSpec::DiskRadial { mode: 0, n_r }).unwrap()
}

fn disk_branch(n_r: usize) -> (Mesh, gelfand_core::Branch) {
    let mesh = disk(n_r);
    let cfg = ContinuationConfig {
        lambda_start: -10.0,
        lambda_end: LAMBDA_SUP - 0.5,
        ..Default::default()
    };
    let branch = continue_branch(&mesh, &cfg).unwrap();
    (mesh, branch)
}

#[test]
fn verification_suite_passes_on_the_disk() {
    let (mesh, branch) = disk_branch(512);
    let report = verify_branch(&mesh, &branch).unwrap();
    for c in &report.checks {
        assert!(
            c.pass,
            "check {} failed with residual {:.3e} (tolerance {:.1e})",
            c.name, c.residual, c.tolerance
        );
    }
}

#[test]
fn corrupted_energy_is_flagged_at_the_right_point() {
    let (mesh, branch) = disk_branch(256);
    let mut energies: Vec<f64> = branch.points.iter().map(|p| p.energy).collect();
    let k = energies.len() / 2;
    energies[k] *= 1.01;
    let report = verify_branch_with_energies(&mesh, &branch, &energies).unwrap();
    let check = report.check("energy_derivative_matches_eta_mean").unwrap();
    assert!(!check.pass, "corruption not flagged");
    // the worst deviation sits at the corrupted point or its neighbors
    let flagged = check.worst_lambda.unwrap();
    let lo = branch.points[k - 1].lambda;
    let hi = branch.points[k + 1].lambda;
    assert!(
        flagged >= lo - 1e-12 && flagged <= hi + 1e-12,
        "flagged {flagged}, expected within [{lo}, {hi}]"
    );
}

#[test]
fn lambda_star_matches_disk_closed_form() {
    let (mesh, branch) = disk_branch(512);
    let cfg = ContinuationConfig::default();
    let (ls, es, ms) = find_lambda_star(&mesh, &branch, &cfg).unwrap();
    assert!((ls - 4.0 * PI).abs() <= 1e-3 * 4.0 * PI, "lambda_* = {ls}");
    assert!((ms - 2.0).abs() <= 2e-3, "mu_* = {ms}");
    let e_exact = (2.0 * (2.0f64).ln() - 1.0) / (4.0 * PI);
    assert!((es - e_exact).abs() <= 1e-4, "E_* = {es}");
}

#[test]
fn truncated_branch_has_no_sign_change() {
    let mesh = disk(256);
    let cfg = ContinuationConfig {
        lambda_start: 0.0,
        lambda_end: 2.0 * PI,
        ..Default::default()
    };
    let branch = continue_branch(&mesh, &cfg).unwrap();
    assert!(matches!(
        find_lambda_star(&mesh, &branch, &cfg),
        Err(gelfand_core::Error::NoSignChange)
    ));
    // g stays positive below 4*pi
    assert!(branch.points.iter().all(|p| p.g > 0.0));
}

#[test]
fn diagram_has_the_expected_shape_on_the_disk() {
    let (_mesh, branch) = disk_branch(512);
    let summary = mu_infty_diagram(&branch).unwrap();
    assert!(summary.single_interior_max);
    assert!(summary.rising_then_falling);
    assert!(summary.lambda_increasing);
    assert!(summary.mu_at_e0.abs() <= 1e-6);
    let max_mu = summary.points[summary.max_index].mu;
    assert!((max_mu - 2.0).abs() < 2e-3, "max mu {max_mu}");
    // tail rows decrease toward zero
    let tail: Vec<f64> = summary.points[summary.max_index..]
        .iter()
        .map(|p| p.mu)
        .collect();
    assert!(tail.last().unwrap() < &tail[0]);
}

#[test]
fn square_branch_verifies_and_bends_in_the_interval() {
    let mesh = build_mesh(MeshSpec::Rectangle {
        a: 1.0,
        b: 1.0,
        n_x: 32,
        n_y: 32,
    })
    .unwrap();
    let cfg = ContinuationConfig {
        lambda_start: -6.0,
        lambda_end: LAMBDA_SUP - 0.5,
        ..Default::default()
    };
    let branch = continue_branch(&mesh, &cfg).unwrap();
    let report = verify_branch(&mesh, &branch).unwrap();
    for c in &report.checks {
        assert!(
            c.pass,
            "square check {} failed with residual {:.3e}",
            c.name, c.residual
        );
    }
    let (ls, es, ms) = find_lambda_star(&mesh, &branch, &cfg).unwrap();
    assert!(ls >= 4.0 * PI - 0.5 && ls < LAMBDA_SUP, "lambda_* = {ls}");
    assert!(es > 0.0 && ms > 0.0);
    let summary = mu_infty_diagram(&branch).unwrap();
    assert!(summary.single_interior_max);
}

#[test]
fn disk_and_square_classify_as_first_kind() {
    let cfg = ContinuationConfig {
        e_max: 6.0 * oracles::disk_e0(),
        ..Default::default()
    };
    let disk_evidence =
        classify_domain(&MeshSpec::DiskRadial { mode: 0, n_r: 128 }, &cfg).unwrap();
    assert_eq!(disk_evidence.verdict, KindVerdict::FirstKindEvidence);
    assert!(disk_evidence.growth_exponent.iter().all(|&p| p > 0.0));

    let sq_cfg = ContinuationConfig {
        e_max: 6.0 * 0.018, // a bit above E0 of the unit square
        ..Default::default()
    };
    let sq_evidence = classify_domain(
        &MeshSpec::Rectangle {
            a: 1.0,
            b: 1.0,
            n_x: 24,
            n_y: 24,
        },
        &sq_cfg,
    )
    .unwrap();
    assert_eq!(sq_evidence.verdict, KindVerdict::FirstKindEvidence);
}
