//! Exercises the C interface through its Rust symbols.

use std::ffi::{CStr, CString};
use std::ptr;

use netab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(netab_last_error_message()) }.to_string_lossy().into_owned()
}

const SCENARIO_ONE: NetabIsingParams =
    NetabIsingParams { alpha0: 0.0, alpha1: 0.3, beta0: 0.05, beta1: 0.05, gamma: 0.05 };

#[test]
fn graph_round_trip_and_exact_ate() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(netab_graph_watts_strogatz(20, 4, 0.2, 7, &mut g), NetabStatus::Ok);
        assert_eq!(netab_graph_num_nodes(g), 20);
        assert_eq!(netab_graph_num_edges(g), 40);
        let (mut us, mut vs) = (vec![0usize; 40], vec![0usize; 40]);
        let mut written = 0;
        assert_eq!(netab_graph_edges(g, us.as_mut_ptr(), vs.as_mut_ptr(), 40, &mut written), NetabStatus::Ok);
        assert_eq!(written, 40);
        assert!(us.iter().zip(&vs).all(|(u, v)| u < v));

        let mut copy = ptr::null_mut();
        assert_eq!(netab_graph_from_edges(20, us.as_ptr(), vs.as_ptr(), 40, &mut copy), NetabStatus::Ok);
        assert_eq!(netab_graph_num_edges(copy), 40);

        let mut isolated = ptr::null_mut();
        assert_eq!(netab_graph_from_edges(6, ptr::null(), ptr::null(), 0, &mut isolated), NetabStatus::Ok);
        let params = NetabIsingParams { alpha0: 0.0, alpha1: 0.1, ..Default::default() };
        let mut ate = NetabAte::default();
        assert_eq!(netab_graph_ate_exact(isolated, &params, &mut ate), NetabStatus::Ok);
        assert!((ate.value - 0.1f64.tanh()).abs() < 1e-12);
        assert_eq!(ate.mc_standard_error, 0.0);
        let mut gibbs = NetabAte::default();
        assert_eq!(netab_graph_ate_gibbs(isolated, &params, 100, 2000, 3, &mut gibbs), NetabStatus::Ok);
        assert!((gibbs.value - ate.value).abs() < 4.0 * gibbs.mc_standard_error + 1e-3);

        netab_graph_free(g);
        netab_graph_free(copy);
        netab_graph_free(isolated);
        netab_graph_free(ptr::null_mut());
    }
}

#[test]
fn dataset_fit_and_bootstrap() {
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(netab_dataset_generate_ising(&SCENARIO_ONE, 6, 30, 4, 0.1, 0.5, 11, &mut d), NetabStatus::Ok);
        assert_eq!(netab_dataset_num_networks(d), 6);
        assert_eq!(netab_dataset_num_nodes(d), 180);

        let mut fitted = NetabIsingParams::default();
        let mut converged = 0;
        assert_eq!(netab_dataset_fit_ising(d, &mut fitted, &mut converged), NetabStatus::Ok);
        assert_eq!(converged, 1);

        let mut ate = NetabAte::default();
        assert_eq!(netab_dataset_ate_gibbs(d, &fitted, 50, 200, 1, &mut ate), NetabStatus::Ok);
        assert!(ate.value.is_finite() && ate.mc_standard_error > 0.0);

        let mut r = ptr::null_mut();
        assert_eq!(netab_bootstrap_test(d, NetabStatistic::AlphaDiff as i32, 39, 5, &mut r), NetabStatus::Ok);
        let p = netab_bootstrap_p_value(r);
        assert!((1.0 / 40.0..=1.0).contains(&p));
        assert!(netab_bootstrap_p_value_two_sided(r) >= p.min(0.5));
        let mut observed_params = NetabIsingParams::default();
        assert_eq!(netab_bootstrap_observed_params(r, &mut observed_params), NetabStatus::Ok);
        assert_eq!(observed_params, fitted);
        assert!((netab_bootstrap_observed(r) - (fitted.alpha1 - fitted.alpha0)).abs() < 1e-15);
        let len = netab_bootstrap_null_len(r);
        assert_eq!(len + netab_bootstrap_num_failed(r), 39);
        let mut buf = vec![0.0; len + 5];
        assert_eq!(netab_bootstrap_null_stats(r, buf.as_mut_ptr(), buf.len()), len);
        assert_eq!(netab_bootstrap_null_stats(r, buf.as_mut_ptr(), 3), 3);
        netab_bootstrap_free(r);

        let mut bad = ptr::null_mut();
        assert_eq!(netab_bootstrap_test(d, 9, 10, 5, &mut bad), NetabStatus::InvalidParameter);
        assert!(last_error().contains("statistic code 9"));
        assert!(bad.is_null());
        netab_dataset_free(d);
    }
}

#[test]
fn save_and_load_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("d.json").to_str().unwrap()).unwrap();
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(netab_dataset_generate_ising(&SCENARIO_ONE, 2, 10, 2, 0.0, 0.5, 1, &mut d), NetabStatus::Ok);
        assert_eq!(netab_dataset_save(d, path.as_ptr()), NetabStatus::Ok);
        let mut loaded = ptr::null_mut();
        assert_eq!(netab_dataset_load(path.as_ptr(), &mut loaded), NetabStatus::Ok);
        assert_eq!(netab_dataset_num_nodes(loaded), 20);
        netab_dataset_free(d);
        netab_dataset_free(loaded);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(netab_graph_watts_strogatz(4, 3, 0.1, 1, &mut g), NetabStatus::InvalidParameter);
        assert!(g.is_null());
        assert!(!last_error().is_empty());

        let (us, vs) = ([0usize], [0usize]);
        assert_eq!(netab_graph_from_edges(3, us.as_ptr(), vs.as_ptr(), 1, &mut g), NetabStatus::Validation);
        assert!(last_error().contains("self-loop"));

        assert_eq!(netab_graph_watts_strogatz(10, 2, 0.1, 1, ptr::null_mut()), NetabStatus::NullPointer);
        assert!(last_error().contains("out"));

        let json = CString::new("{\"triplets\": [").unwrap();
        let mut d = ptr::null_mut();
        assert_eq!(netab_dataset_from_json(json.as_ptr(), &mut d), NetabStatus::Parse);
        let missing = CString::new("/nonexistent/dataset.json").unwrap();
        assert_eq!(netab_dataset_load(missing.as_ptr(), &mut d), NetabStatus::Io);
        assert!(d.is_null());

        let mut big = ptr::null_mut();
        assert_eq!(netab_graph_watts_strogatz(30, 2, 0.0, 1, &mut big), NetabStatus::Ok);
        assert_eq!(last_error(), "");
        let mut ate = NetabAte::default();
        let params = NetabIsingParams::default();
        assert_eq!(netab_graph_ate_exact(big, &params, &mut ate), NetabStatus::Capacity);
        netab_graph_free(big);

        assert_eq!(netab_dataset_num_nodes(ptr::null()), 0);
        assert!(netab_bootstrap_p_value(ptr::null()).is_nan());
        assert_eq!(CStr::from_ptr(netab_version()).to_str().unwrap(), env!("CARGO_PKG_VERSION"));
    }
}
