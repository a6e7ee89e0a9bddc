use listcolor::bias::{rho, BiasProfile};
use listcolor::colorer::{is_bad, moser_tardos_color, random_color_side_a, verify_proper};
use listcolor::coupon::{exact_collection_prob, CouponInstance};
use listcolor::graph::{gen_regular_bipartite, BipartiteGraph};
use listcolor::lists::{gen_lists, ListAssignment, ListMode};
use listcolor::oracle::{choosability, chromatic_number, l_colorable};
use listcolor::seed::mix;

#[test]
fn colorer_and_oracle_agree() {
    let profiles = [
        BiasProfile::uniform(),
        BiasProfile::linear(0.05),
        BiasProfile::piecewise(),
    ];
    let mut successes = 0;
    for i in 0..1000u64 {
        let n = 3 + (i % 6) as usize;
        let delta = 1 + (i % 3) as usize;
        let k = 1 + (i % 4) as usize;
        let g = gen_regular_bipartite(n, delta, mix(1, i)).unwrap();
        let l = gen_lists(&g, k, k + 2, ListMode::IndependentUniform, mix(2, i)).unwrap();
        let run = moser_tardos_color(&g, &l, &profiles[(i % 3) as usize], 20, mix(3, i)).unwrap();
        let exact = l_colorable(&g, &l);
        if let Some(c) = &run.coloring {
            successes += 1;
            assert!(verify_proper(&g, &l, c));
            assert!(
                exact.is_some(),
                "colorer found a coloring the oracle missed (instance {i})"
            );
        }
        if let Some(c) = &exact {
            assert!(verify_proper(&g, &l, c));
        }
    }
    assert!(successes > 100);
}

#[test]
fn text_formats_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen_regular_bipartite(12, 4, 7).unwrap();
    let l = gen_lists(&g, 5, 9, ListMode::PlantedOverlap(0.5), 8).unwrap();
    std::fs::write(dir.path().join("g.txt"), g.to_text()).unwrap();
    std::fs::write(dir.path().join("l.txt"), l.to_text()).unwrap();
    let g2 = BipartiteGraph::from_text(&std::fs::read_to_string(dir.path().join("g.txt")).unwrap())
        .unwrap();
    let l2 = ListAssignment::from_text(&std::fs::read_to_string(dir.path().join("l.txt")).unwrap())
        .unwrap();
    assert_eq!(g, g2);
    assert_eq!(l, l2);
}

#[test]
fn rho_matches_coupon_instance_of_a_neighbourhood() {
    let g = gen_regular_bipartite(6, 3, 11).unwrap();
    let l = gen_lists(&g, 3, 5, ListMode::IndependentUniform, 12).unwrap();
    let profile = BiasProfile::linear(0.0);
    for w in g.part_b() {
        let sources = g.neighbors(w).iter().map(|&v| l.list(v).to_vec()).collect();
        let inst =
            CouponInstance::from_profile(l.list(w).to_vec(), sources, &profile, None).unwrap();
        for &c in l.list(w) {
            assert!((inst.rho(c) - rho(&profile, &l, &g, w, c).unwrap()).abs() < 1e-12);
        }
    }
}

#[test]
fn bad_frequency_matches_collection_probability() {
    // A part-B vertex is bad exactly when its neighbours collect its list.
    let g = BipartiteGraph::new(3, 1, &[(0, 0), (1, 0), (2, 0)]).unwrap();
    let l = ListAssignment::new(2, vec![vec![1, 2], vec![1, 3], vec![2, 3], vec![1, 2]]).unwrap();
    let profile = BiasProfile::linear(0.0);
    let sources = (0..3).map(|v| l.list(v).to_vec()).collect();
    let inst = CouponInstance::from_profile(l.list(3).to_vec(), sources, &profile, None).unwrap();
    let q = exact_collection_prob(&inst).unwrap();
    let trials = 40_000u64;
    let hits = (0..trials)
        .filter(|&s| {
            is_bad(
                &g,
                &l,
                &random_color_side_a(&g, &l, &profile, mix(9, s)).unwrap(),
                3,
            )
        })
        .count();
    let freq = hits as f64 / trials as f64;
    let sd = (q * (1.0 - q) / trials as f64).sqrt();
    assert!((freq - q).abs() <= 4.0 * sd, "freq {freq} vs {q}");
}

#[test]
fn choosability_bounds_on_small_graphs() {
    for s in 0..10 {
        let g = gen_regular_bipartite(4, 2, s).unwrap();
        let ch = choosability(&g, None).unwrap();
        assert!(ch >= chromatic_number(&g));
        assert!(ch <= g.delta() + 1);
    }
}
