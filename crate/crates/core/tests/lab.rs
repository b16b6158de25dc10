use bbdg_core::checks::{run_all, CheckConfig};
use bbdg_core::lab::{
    complexity_csv, complexity_sweep, condition_number, eigen_identities, operator_report, reports_csv,
    KernelKind, OperatorFamily, COMPLEXITY_CSV_HEADER, REPORT_CSV_HEADER,
};
use nalgebra::DMatrix;

#[test]
fn report_csv_has_one_row_per_degree() {
    let reports: Vec<_> = (1..=9)
        .map(|n| operator_report(OperatorFamily::BernsteinL0, n).unwrap())
        .collect();
    let csv = reports_csv(&reports);
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], REPORT_CSV_HEADER);
    assert_eq!(lines.len(), 10);
    assert!(lines[1].starts_with("bernstein_l0,1,"));
}

#[test]
fn l0_condition_number_at_degree_four() {
    let r = operator_report(OperatorFamily::BernsteinL0, 4).unwrap();
    assert!((r.cond - 3.18182).abs() < 1e-5, "{}", r.cond);
    assert_eq!(r.rows, 15);
    assert!(r.eigenvalues.is_some());
}

#[test]
fn every_family_reports_at_low_degree() {
    for family in OperatorFamily::ALL {
        let r = operator_report(family, 3).unwrap();
        assert!(r.cond.is_finite() && r.cond >= 1.0, "{}", family.name());
        assert_eq!(r.nodes.is_some(), family.is_nodal());
        assert_eq!(family.name().parse::<OperatorFamily>().unwrap(), family);
    }
}

#[test]
fn condition_number_rejects_zero() {
    assert!(condition_number(&DMatrix::zeros(3, 3)).is_err());
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 4.0]));
    assert!((condition_number(&d).unwrap() - 4.0).abs() < 1e-14);
}

#[test]
fn complexity_csv_rows() {
    let degrees: Vec<usize> = (3..=9).collect();
    let sweeps: Vec<_> = KernelKind::ALL
        .into_iter()
        .map(|k| complexity_sweep(k, &degrees).unwrap())
        .collect();
    let csv = complexity_csv(&sweeps);
    assert!(csv.starts_with(COMPLEXITY_CSV_HEADER));
    assert_eq!(csv.lines().count(), 1 + KernelKind::ALL.len() * degrees.len());
    let opt = &sweeps
        .iter()
        .find(|s| s.kernel == KernelKind::OptimalLift)
        .unwrap();
    let dense = &sweeps.iter().find(|s| s.kernel == KernelKind::DenseLift).unwrap();
    assert!(opt.madds.iter().zip(&dense.madds).all(|(o, d)| o < d));
    assert!(opt.slope < dense.slope);
}

#[test]
fn eigen_identities_hold() {
    for dim in 1..=3 {
        for n in [1, 4, 7] {
            let r = eigen_identities(n, dim).unwrap();
            assert!(r.passed(), "N={n} d={dim}: {:?}", r.checks);
        }
    }
}

#[test]
fn all_suites_pass_by_default() {
    let cfg = CheckConfig::default();
    for r in run_all(&cfg).unwrap() {
        assert!(
            r.passed(),
            "{}: {:?}",
            r.suite.name(),
            r.outcomes.iter().filter(|o| !o.passed).collect::<Vec<_>>()
        );
    }
}

#[test]
fn perturbed_derivative_fails_its_suite() {
    let cfg = CheckConfig {
        degrees: vec![3],
        perturb_d0: Some(1e-6),
        ..CheckConfig::default()
    };
    let r = bbdg_core::checks::run_suite(bbdg_core::checks::Suite::Derivative, &cfg).unwrap();
    assert!(!r.passed());
}
