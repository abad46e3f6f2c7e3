use chainspec::corpus::{random_chain, random_potential};
use chainspec::criteria::{hamburger_esa, Verdict};
use chainspec::graph::{BirthDeath, FiniteGraph, GraphSpec, Potential, Vertex};
use chainspec::schrodinger::{
    berezanskii_esa, bounded_potential_esa, eigen_recursion, ground_state_conjugation, hc_conjugation, hc_equivalence,
    make_esa_potential, transformed_hamburger, transformed_hamburger_direct,
};
use chainspec::sequence::SequenceSpec;
use chainspec::series::SeriesOptions;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;
use common::{dense_gap, naive_eigen};

fn random_triple(rng: &mut ChaCha8Rng) -> (BirthDeath, Potential, f64) {
    (random_chain(rng), random_potential(rng), -rng.gen_range(0.1..2.0))
}

#[test]
fn recursion_matches_naive_second_order_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let (c, w, lambda) = random_triple(&mut rng);
        let v = eigen_recursion(&c, &w, lambda, 1.0, 30).unwrap();
        let naive = naive_eigen(&c, &w, lambda, 30);
        for (r, x) in naive.iter().enumerate() {
            let got = v.value(r).unwrap();
            assert!((got - x).abs() <= 1e-9 * x.abs(), "r = {r}: {got} vs {x}");
        }
    }
}

#[test]
fn conjugation_identity_on_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..10 {
        let (c, w, lambda) = random_triple(&mut rng);
        let v = eigen_recursion(&c, &w, lambda, 1.0, 40).unwrap();
        let vals: Vec<f64> = (0..=30).map(|r| v.value(r).unwrap()).collect();
        assert!(dense_gap(&c, &w, lambda, &vals) <= 1e-10);
        assert!(ground_state_conjugation(&v, 30).unwrap() <= 1e-10);
    }
}

#[test]
fn transformed_and_direct_series_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let opts = SeriesOptions::default();
    for _ in 0..10 {
        let (c, w, lambda) = random_triple(&mut rng);
        let v = eigen_recursion(&c, &w, lambda, 1.0, 400).unwrap();
        let a = transformed_hamburger(&v, &opts).unwrap();
        let b = transformed_hamburger_direct(&v, &opts).unwrap();
        assert_eq!(a.outcome, b.outcome, "{c:?} {w:?} {lambda}");
    }
}

#[test]
fn hc_verdict_matches_hamburger() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let opts = SeriesOptions::default();
    for _ in 0..5 {
        let c = random_chain(&mut rng);
        let rec = hc_equivalence(&c, &opts).unwrap();
        assert_eq!(rec.verdict, Verdict::on_divergence(&hamburger_esa(&c, &opts).unwrap()));
        assert!(rec.conjugation_gap <= 1e-10);
    }
}

#[test]
fn hc_survives_overflowing_weights() {
    // w = b / sqrt(m m') overflows near r = 1300 while m underflows
    let c = BirthDeath::new(
        SequenceSpec::exponential(1.15, 1.824),
        SequenceSpec::exponential(1.55, 0.5636),
    );
    let rec = hc_equivalence(&c, &SeriesOptions::default()).unwrap();
    assert!(rec.transformed.converges());
    assert!(rec.transformed.evidence.terms_used < 2000);
    assert_eq!(rec.verdict, Verdict::Fails);
}

#[test]
fn hc_exponential_measure_weights() {
    let c = BirthDeath::new(SequenceSpec::constant(1.0), SequenceSpec::exponential(1.0, 0.25));
    let rec = hc_equivalence(&c, &SeriesOptions::default()).unwrap();
    // w(r) = 1 / sqrt(4^-r 4^-(r+1)) = 2^(2r+1)
    for (r, w) in rec.weights.iter().enumerate() {
        assert!((w / 2f64.powi(2 * r as i32 + 1) - 1.0).abs() < 1e-12);
    }
    // W(0) = 1 * 1 * (1 - 2) = -1; W(r) = 2^r ((2^r - 2^(r+1)) + (2^r - 2^(r-1))) = -4^r / 2
    assert!((rec.potential[0] + 1.0).abs() < 1e-12);
    for r in 1..rec.potential.len() {
        assert!((rec.potential[r] + 4f64.powi(r as i32) / 2.0).abs() <= 1e-12 * 4f64.powi(r as i32));
    }
    assert!(hc_conjugation(&c, 30).unwrap() <= 1e-10);
}

#[test]
fn berezanskii_power_measure_converges() {
    let r = berezanskii_esa(&BirthDeath::unit_power(4.0), &SeriesOptions::default()).unwrap();
    assert!(r.series.converges());
}

#[test]
fn esa_potential_exponential_measure() {
    let c = BirthDeath::new(SequenceSpec::constant(1.0), SequenceSpec::exponential(1.0, 0.25));
    let p = make_esa_potential(&GraphSpec::Chain(c), &SeriesOptions::default()).unwrap();
    // Deg(r) = 2 * 4^r, smallest neighbour mass 4^-(r+1)
    for r in 1..10 {
        let expected = 2.0 * 4f64.powi(r) * 2f64.powi(r + 1);
        let got = p.eval(Vertex::Chain(r as usize)).unwrap();
        assert!((got / expected - 1.0).abs() < 1e-12);
    }
    assert!(p.certificates.iter().all(|c| c.verdict.diverges()));
}

#[test]
fn esa_potential_on_finite_graph_is_a_table() {
    let g = FiniteGraph::new(vec![1.0, 2.0, 4.0], vec![(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
    let p = make_esa_potential(&GraphSpec::Finite(g), &SeriesOptions::default()).unwrap();
    let table = p.table().unwrap().unwrap();
    assert_eq!(table.len(), 3);
    // vertex 1: Deg = 3/2, smallest neighbour mass 1
    assert!((table[1] - 1.5).abs() < 1e-15);
    assert!(p.certificates.is_empty());
}

proptest::proptest! {
    #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]

    #[test]
    fn residual_and_monotone_growth(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (c, w, lambda) = random_triple(&mut rng);
        let v = eigen_recursion(&c, &w, lambda, 1.0, 200).unwrap();
        proptest::prop_assert!(v.residual().unwrap() <= 1e-10);
        proptest::prop_assert!(v.positive);
        proptest::prop_assert!(v.strictly_increasing());
    }

    #[test]
    fn comparison_function_stays_below(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = BirthDeath::new(SequenceSpec::constant(rng.gen_range(0.5..2.0)), SequenceSpec::power(1.0, -rng.gen_range(0.0..3.0)));
        let w = random_potential(&mut rng);
        let rec = bounded_potential_esa(&c, &w, &SeriesOptions::default()).unwrap();
        proptest::prop_assert_eq!(rec.verdict, Verdict::Holds);
    }
}
