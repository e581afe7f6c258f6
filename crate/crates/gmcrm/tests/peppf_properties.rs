use gmcrm::crm::{CrmFamily, GmDependenceParams};
use gmcrm::partition::{enumerate_partitions, TwoSamplePartition};
use gmcrm::peppf::{
    correlation, dependence_i, ln_peppf, peppf_dirichlet, peppf_general, peppf_stable,
    FrequencyData, PartitionModel, Precision,
};

fn sizes(max: usize) -> Vec<(usize, usize)> {
    (1..=max)
        .flat_map(|n| (0..=n).map(move |n1| (n1, n - n1)))
        .collect()
}

fn total(model: PartitionModel, n1: usize, n2: usize) -> f64 {
    enumerate_partitions(n1, n2)
        .unwrap()
        .map(|p| {
            ln_peppf(&model, &p.frequency_data(), &Precision::high())
                .unwrap()
                .exp()
        })
        .sum()
}

#[test]
fn dirichlet_normalizes_on_small_sizes() {
    for (n1, n2) in sizes(4) {
        for &c in &[0.5, 3.0] {
            for &z in &[0.0, 0.5, 1.0] {
                let t = total(PartitionModel::Dirichlet { c, z }, n1, n2);
                assert!((t - 1.0).abs() < 1e-8, "({n1},{n2}) c={c} z={z}: {t}");
            }
        }
    }
}

#[test]
fn stable_normalizes_on_small_sizes() {
    for (n1, n2) in sizes(4) {
        for &sigma in &[0.3, 0.7] {
            for &z in &[0.0, 0.25, 1.0] {
                let t = total(PartitionModel::Stable { sigma, z }, n1, n2);
                assert!(
                    (t - 1.0).abs() < 1e-6,
                    "({n1},{n2}) sigma={sigma} z={z}: {t}"
                );
            }
        }
    }
}

#[test]
fn permutations_within_groups_do_not_matter() {
    let a = FrequencyData::new(9, 6, vec![3, 1, 2], vec![2, 1], vec![2, 4]).unwrap();
    let b = FrequencyData::new(9, 6, vec![2, 3, 1], vec![1, 2], vec![4, 2]).unwrap();
    for model in [
        PartitionModel::Dirichlet { c: 1.3, z: 0.4 },
        PartitionModel::Stable { sigma: 0.6, z: 0.4 },
    ] {
        let va = ln_peppf(&model, &a, &Precision::high()).unwrap();
        let vb = ln_peppf(&model, &b, &Precision::high()).unwrap();
        assert!((va - vb).abs() < 1e-12, "{model:?}: {va} vs {vb}");
    }
}

fn with_extra(p: &TwoSamplePartition, n1: usize, second: bool) -> Vec<TwoSamplePartition> {
    let canon = p.canonical();
    let blocks = canon.iter().max().map_or(0, |m| m + 1);
    (0..=blocks)
        .map(|b| {
            let mut l1 = canon[..n1].to_vec();
            let mut l2 = canon[n1..].to_vec();
            if second {
                l2.push(b);
            } else {
                l1.push(b);
            }
            TwoSamplePartition::from_labels(&l1, &l2)
        })
        .collect()
}

#[test]
fn addition_rule() {
    let models = [
        PartitionModel::Dirichlet { c: 0.9, z: 0.35 },
        PartitionModel::Stable {
            sigma: 0.45,
            z: 0.6,
        },
    ];
    for model in models {
        for (n1, n2) in sizes(4) {
            for p in enumerate_partitions(n1, n2).unwrap() {
                let here = ln_peppf(&model, &p.frequency_data(), &Precision::high())
                    .unwrap()
                    .exp();
                for second in [false, true] {
                    let sum: f64 = with_extra(&p, n1, second)
                        .iter()
                        .map(|q| {
                            ln_peppf(&model, &q.frequency_data(), &Precision::high())
                                .unwrap()
                                .exp()
                        })
                        .sum();
                    assert!(
                        (sum - here).abs() < 1e-7,
                        "{model:?} {:?}: {sum} vs {here}",
                        p.canonical()
                    );
                }
            }
        }
    }
}

#[test]
fn general_representation_agrees_on_all_small_partitions() {
    let p = GmDependenceParams::new(1.4, 0.45).unwrap();
    let sigma = 0.5;
    for (n1, n2) in sizes(5) {
        for part in enumerate_partitions(n1, n2).unwrap() {
            let f = part.frequency_data();
            let d = peppf_dirichlet(p.c, p.z, &f).unwrap();
            let dg = peppf_general(CrmFamily::Gamma, p, &f).unwrap();
            assert!((d - dg).abs() < 1e-6, "gamma {f:?}: {d} vs {dg}");
            let s = peppf_stable(sigma, p.z, &f).unwrap();
            let sg = peppf_general(CrmFamily::Stable(sigma), p, &f).unwrap();
            assert!((s - sg).abs() < 1e-6, "stable {f:?}: {s} vs {sg}");
        }
    }
}

#[test]
fn stable_general_does_not_depend_on_c() {
    let f = FrequencyData::new(3, 2, vec![1], vec![1], vec![3]).unwrap();
    let fam = CrmFamily::Stable(0.35);
    let a = peppf_general(fam, GmDependenceParams::new(0.5, 0.3).unwrap(), &f).unwrap();
    let b = peppf_general(fam, GmDependenceParams::new(4.0, 0.3).unwrap(), &f).unwrap();
    assert!(((a - b) / a).abs() < 1e-7);
}

#[test]
fn correlation_over_z() {
    for family in [
        CrmFamily::Gamma,
        CrmFamily::Stable(0.3),
        CrmFamily::Stable(0.7),
    ] {
        for &c in &[0.5, 2.0] {
            let mut prev = f64::INFINITY;
            for i in 0..=10 {
                let z = i as f64 / 10.0;
                let r = correlation(
                    family,
                    GmDependenceParams::new(c, z).unwrap(),
                    0.4,
                    0.4,
                    0.4,
                )
                .unwrap();
                assert!(
                    (0.0..=1.0 + 1e-12).contains(&r),
                    "{family:?} c={c} z={z}: {r}"
                );
                assert!(r <= prev + 1e-12);
                prev = r;
                if i == 0 {
                    assert!((r - 1.0).abs() < 1e-6);
                }
                if i == 10 {
                    assert!(r.abs() < 1e-6);
                }
            }
        }
    }
}

#[test]
fn gamma_i_at_independence() {
    // at z = 1 the series collapses to 3F2(2,1,1;c+2,c+2)
    let c = 1.5;
    let i = dependence_i(CrmFamily::Gamma, GmDependenceParams::new(c, 1.0).unwrap()).unwrap();
    let mut sum = 0.0;
    let mut t = 1.0f64;
    for j in 0..2_000_000u64 {
        sum += t;
        let j = j as f64;
        t *= (2.0 + j) * (1.0 + j) / ((c + 2.0 + j) * (c + 2.0 + j));
    }
    let want = c / (c + 1.0) * sum;
    assert!(((i - want) / want).abs() < 1e-6);
}
