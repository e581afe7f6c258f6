use gmcrm::crm::{CrmFamily, GmDependenceParams};
use gmcrm::partition::enumerate_partitions;
use gmcrm::peppf::correlation;
use gmcrm_demo::{correlation_curve_impl, ln_peppf_impl};

#[test]
fn curve_matches_library_correlation() {
    let ys = correlation_curve_impl("stable", 7.0, 0.4, 5).unwrap();
    for (i, y) in ys.iter().enumerate() {
        let z = i as f64 / 4.0;
        let p = GmDependenceParams::new(1.0, z).unwrap();
        let want = correlation(CrmFamily::Stable(0.4), p, 0.5, 0.5, 0.5).unwrap();
        assert_eq!(*y, want);
    }
}

fn join(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

#[test]
fn text_inputs_cover_every_partition() {
    // summing the demo's values over all partitions of (2, 1) gives 1
    let mut total = 0.0;
    for p in enumerate_partitions(2, 1).unwrap() {
        let f = p.frequency_data();
        let (q1, q2) = f.split.clone().unwrap();
        let lp = ln_peppf_impl(
            "dirichlet",
            2.0,
            0.0,
            0.3,
            &join(&f.freq1),
            &join(&f.freq2),
            &join(&q1),
            &join(&q2),
        )
        .unwrap();
        total += lp.exp();
    }
    assert!((total - 1.0).abs() < 1e-10, "{total}");
}
