//! Random analytic graphs for property checks and CLI sampling.

use rand::Rng;

use crate::graph::{
    BirthDeath, FiniteGraph, GraphSpec, PendantChain, Potential, PotentialTail, Ray, StarLike, TwoRayStar,
};
use crate::sequence::SequenceSpec;

/// Edge weights: constant, power `p in [-2, 2]` or exponential `q in [0.5, 2]`.
pub fn random_edge<R: Rng + ?Sized>(rng: &mut R) -> SequenceSpec {
    let c = rng.gen_range(0.5..2.0);
    match rng.gen_range(0..3) {
        0 => SequenceSpec::constant(c),
        1 => SequenceSpec::power(c, rng.gen_range(-2.0..2.0)),
        _ => SequenceSpec::exponential(c, rng.gen_range(0.5..2.0)),
    }
}

/// Masses: constant, power `p in [-5, 1]` or exponential `q in [0.3, 1.5]`.
pub fn random_measure<R: Rng + ?Sized>(rng: &mut R) -> SequenceSpec {
    let c = rng.gen_range(0.5..2.0);
    match rng.gen_range(0..3) {
        0 => SequenceSpec::constant(c),
        1 => SequenceSpec::power(c, rng.gen_range(-5.0..1.0)),
        _ => SequenceSpec::exponential(c, rng.gen_range(0.3..1.5)),
    }
}

pub fn random_chain<R: Rng + ?Sized>(rng: &mut R) -> BirthDeath {
    BirthDeath::new(random_edge(rng), random_measure(rng))
}

pub fn random_two_ray_star<R: Rng + ?Sized>(rng: &mut R) -> TwoRayStar {
    let pos = random_chain(rng);
    let neg = random_chain(rng);
    TwoRayStar::from_rays(&pos, &neg).expect("analytic sequences skip cleanly")
}

/// Nonnegative potential: constant, growing power or growing exponential.
pub fn random_potential<R: Rng + ?Sized>(rng: &mut R) -> Potential {
    let tail = match rng.gen_range(0..3) {
        0 => PotentialTail::Const {
            c: rng.gen_range(0.0..5.0),
        },
        1 => PotentialTail::Power {
            c: rng.gen_range(0.1..2.0),
            p: rng.gen_range(0.0..1.5),
        },
        _ => PotentialTail::Exp {
            c: rng.gen_range(0.1..2.0),
            q: rng.gen_range(1.0..1.3),
        },
    };
    Potential::Closed {
        table: Vec::new(),
        tail,
    }
}

/// Connected graph on `n` vertices: a random spanning tree plus extra edges.
pub fn random_finite_graph<R: Rng + ?Sized>(rng: &mut R, n: usize) -> FiniteGraph {
    let measure: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..3.0)).collect();
    let mut edges = Vec::new();
    for x in 1..n {
        edges.push((rng.gen_range(0..x), x, rng.gen_range(0.1..3.0)));
    }
    for _ in 0..rng.gen_range(0..=n) {
        let (x, y) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if x != y
            && !edges
                .iter()
                .any(|&(a, b, _)| (a, b) == (x.min(y), x.max(y)) || (a, b) == (x.max(y), x.min(y)))
        {
            edges.push((x.min(y), x.max(y), rng.gen_range(0.1..3.0)));
        }
    }
    FiniteGraph::new(measure, edges).expect("random finite graph is valid")
}

/// Hub of up to four vertices with one to three rays.
pub fn random_star_like<R: Rng + ?Sized>(rng: &mut R) -> StarLike {
    let size = rng.gen_range(1..=4);
    let hub = random_finite_graph(rng, size);
    let rays = (0..rng.gen_range(1..=3))
        .map(|_| Ray {
            attach: rng.gen_range(0..hub.len()),
            weight: rng.gen_range(0.5..2.0),
            chain: random_chain(rng),
        })
        .collect();
    StarLike {
        hub,
        rays,
        family: None,
    }
}

pub fn random_pendant_chain<R: Rng + ?Sized>(rng: &mut R) -> PendantChain {
    PendantChain {
        base: random_chain(rng),
        pendant_edge: random_edge(rng),
        pendant_measure: random_measure(rng),
    }
}

/// Any infinite analytic kind, weighted towards chains.
pub fn random_graph<R: Rng + ?Sized>(rng: &mut R) -> GraphSpec {
    match rng.gen_range(0..6) {
        0..=2 => GraphSpec::Chain(random_chain(rng)),
        3 => GraphSpec::TwoRayStar(random_two_ray_star(rng)),
        4 => GraphSpec::StarLike(random_star_like(rng)),
        _ => GraphSpec::PendantChain(random_pendant_chain(rng)),
    }
}
