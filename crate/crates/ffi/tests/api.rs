use std::ffi::CStr;
use std::ptr;

use hestoncap_ffi::*;

fn market(params: HcMarketParams) -> (HcStatus, *mut HcMarket) {
    let mut m = ptr::null_mut();
    let status = unsafe { hc_market_new(&params, &mut m) };
    (status, m)
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(hc_last_error()) }
        .to_str()
        .unwrap()
        .to_owned()
}

fn solve(m: *const HcMarket, alpha: f64, beta: f64, force: i32) -> (HcStatus, *mut HcSolution) {
    let mut s = ptr::null_mut();
    let status = unsafe { hc_solve(m, alpha, beta, force, &mut s) };
    (status, s)
}

fn stressed() -> HcMarketParams {
    HcMarketParams {
        sigma: 1.0,
        kappa: 1.5,
        rho: -0.9,
        b: -15.0,
        ..hc_market_params_base()
    }
}

#[test]
fn base_market_round_trip() {
    let (status, m) = market(hc_market_params_base());
    assert_eq!(status, HcStatus::Ok);
    let mut ratio = 0.0;
    assert_eq!(
        unsafe { hc_market_merton_ratio(m, &mut ratio) },
        HcStatus::Ok
    );
    assert!((ratio - 0.859_171_428_571_428_6).abs() < 1e-12);

    let (status, s) = solve(m, 0.0, 1.0, 0);
    assert_eq!(status, HcStatus::Ok, "{}", last_error());
    let (mut w0, mut wt, mut load) = (0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(hc_solution_weight(s, 0.0, &mut w0), HcStatus::Ok);
        assert_eq!(hc_solution_weight(s, 1.0, &mut wt), HcStatus::Ok);
        assert_eq!(hc_solution_loading(s, 1.0, &mut load), HcStatus::Ok);
    }
    assert_eq!(w0, 1.0);
    assert!((wt - ratio).abs() < 1e-12);
    assert!((load + 1.381_084).abs() < 1e-6);

    let mut value = 0.0;
    unsafe {
        assert_eq!(
            hc_solution_value(s, 0.0, 1.0, 0.35, &mut value),
            HcStatus::Ok
        );
    }
    assert!((value + 0.089_470_1).abs() < 1e-6);

    let mut loss = -1.0;
    let status =
        unsafe { hc_solution_welfare_loss(s, HcCompetitor::CappedMerton as i32, &mut loss) };
    assert_eq!(status, HcStatus::Ok);
    let p = hestoncap::heston::MarketParams::base();
    let k = hestoncap::heston::IntervalConstraint::new(0.0, 1.0).unwrap();
    let sol = hestoncap::policy::solve_b(&p, &k, Default::default()).unwrap();
    let capped = hestoncap::wel::DeterministicStrategy::capped_merton(&p, &k);
    let direct = hestoncap::wel::wel_report(&sol, &capped, Default::default()).unwrap();
    assert_eq!(loss, direct.l0);
    assert!(loss > 0.0);
    unsafe {
        hc_solution_free(s);
        hc_market_free(m);
    }
}

#[test]
fn invalid_inputs_map_to_status_codes() {
    let (status, m) = market(HcMarketParams {
        b: 0.0,
        ..hc_market_params_base()
    });
    assert_eq!(status, HcStatus::InvalidArgument);
    assert!(m.is_null());
    assert!(last_error().contains("b"));

    let (_, m) = market(hc_market_params_base());
    let (status, s) = solve(m, 1.0, 0.0, 0);
    assert_eq!(status, HcStatus::InvalidArgument);
    assert!(s.is_null());

    let (status, s) = solve(m, 0.0, 1.0, 0);
    assert_eq!(status, HcStatus::Ok);
    let mut out = 0.0;
    unsafe {
        assert_eq!(hc_solution_weight(s, 1.5, &mut out), HcStatus::Domain);
        assert_eq!(
            hc_solution_value(s, 0.0, -1.0, 0.3, &mut out),
            HcStatus::Domain
        );
        assert_eq!(
            hc_solution_welfare_loss(s, 7, &mut out),
            HcStatus::InvalidArgument
        );
        assert_eq!(
            hc_solution_weight(ptr::null(), 0.0, &mut out),
            HcStatus::NullPointer
        );
        assert_eq!(
            hc_solve(m, 0.0, 1.0, 0, ptr::null_mut()),
            HcStatus::NullPointer
        );
        hc_solution_free(s);
        hc_market_free(m);
        hc_market_free(ptr::null_mut());
        hc_solution_free(ptr::null_mut());
    }
}

#[test]
fn assumption_failures_can_be_forced() {
    let (_, m) = market(stressed());
    let mut ratio = 0.0;
    unsafe { hc_market_merton_ratio(m, &mut ratio) };
    let (status, s) = solve(m, 2.0 * ratio, 1.0, 0);
    assert_eq!(status, HcStatus::Assumption);
    assert!(s.is_null());
    assert!(last_error().contains("(iii)"), "{}", last_error());

    let (status, s) = solve(m, 2.0 * ratio, 1.0, 1);
    assert_eq!(status, HcStatus::Ok);
    assert_eq!(last_error(), "");
    let mut loss = 0.0;
    let status =
        unsafe { hc_solution_welfare_loss(s, HcCompetitor::CappedUnconstrained as i32, &mut loss) };
    assert_eq!(status, HcStatus::Ok);
    assert!((loss - 0.0891).abs() < 5e-4, "{loss}");
    unsafe {
        hc_solution_free(s);
        hc_market_free(m);
    }
}

#[test]
fn errors_are_thread_local() {
    let (status, _) = market(HcMarketParams {
        b: 0.0,
        ..hc_market_params_base()
    });
    assert_eq!(status, HcStatus::InvalidArgument);
    let other = std::thread::spawn(last_error).join().unwrap();
    assert_eq!(other, "");
    assert!(!last_error().is_empty());
}
