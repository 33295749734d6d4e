use proptest::prelude::*;
use rangewalk::graph::{ball, bfs, graph_distance};
use rangewalk::lattice::{cut_times, loop_erase, loop_erasure_lengths};
use rangewalk::resistance::effective_resistance;
use rangewalk::walk::DistributionVector;
use rangewalk::{
    build_graph, gen_path, ConductanceMode, ConductanceNetwork, LatticePoint, Sidedness, WalkPath,
};

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 64,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    /// Extending the future can only remove cut-times.
    #[test]
    fn longer_paths_have_fewer_cut_times(seed in any::<u64>(), dim in 1usize..6, n in 5u64..300, extra in 1u64..300) {
        let short = gen_path(dim, n, seed, Sidedness::OneSided).unwrap();
        let long = gen_path(dim, n + extra, seed, Sidedness::OneSided).unwrap();
        let a = cut_times(&short.trace(), Sidedness::OneSided, 0.0).unwrap();
        let b = cut_times(&long.trace(), Sidedness::OneSided, 0.0).unwrap();
        for &t in b.indices.iter().filter(|&&t| t < n as i64) {
            prop_assert!(a.contains(t), "t = {t}");
        }
    }

    #[test]
    fn two_sided_cut_times_are_one_sided(seed in any::<u64>(), dim in 2usize..6, n in 5u64..300) {
        let p = gen_path(dim, n, seed, Sidedness::TwoSided).unwrap();
        let tr = p.trace();
        let two = cut_times(&tr, Sidedness::TwoSided, 0.0).unwrap();
        let one = cut_times(&tr, Sidedness::OneSided, 0.0).unwrap();
        for &t in two.indices.iter().filter(|&&t| t >= 0) {
            prop_assert!(one.contains(t), "t = {t}");
        }
    }

    #[test]
    fn loop_erasure_is_idempotent(seed in any::<u64>(), dim in 1usize..5, n in 0u64..200) {
        let p = gen_path(dim, n, seed, Sidedness::OneSided).unwrap();
        let once = loop_erase(&p.trace(), n as i64).unwrap();
        let q = WalkPath::from_points(&once.points).unwrap();
        let twice = loop_erase(&q.trace(), once.edges() as i64).unwrap();
        prop_assert_eq!(&once.points, &twice.points);
        // an erased path is self-avoiding
        let mut pts: Vec<&LatticePoint> = once.points.iter().collect();
        pts.sort();
        pts.dedup();
        prop_assert_eq!(pts.len(), once.points.len());
    }

    /// `Y_n <= n` and `d_G(0, S_m) <= Y_m`: the erased path is a path in `G`.
    #[test]
    fn erasure_bounds_graph_distance(seed in any::<u64>(), dim in 1usize..6, n in 1u64..400) {
        let p = gen_path(dim, n, seed, Sidedness::OneSided).unwrap();
        let y = loop_erasure_lengths(&p.trace(), n as i64).unwrap();
        let g = build_graph(&p).unwrap();
        let dist = graph_distance(&g, g.root()).unwrap();
        for m in 0..=n as usize {
            prop_assert!(y[m] as usize <= m);
            prop_assert!(dist[g.vertex_at(m as i64) as usize] <= y[m]);
        }
    }

    #[test]
    fn rayleigh_monotonicity(seed in any::<u64>(), pick in any::<(u32, u32, u32)>(), boost in 1.0f64..10.0) {
        let p = gen_path(3, 120, seed, Sidedness::OneSided).unwrap();
        let g = build_graph(&p).unwrap();
        let n = g.num_vertices() as u32;
        let (a, b) = (pick.0 % n, pick.1 % n);
        prop_assume!(a != b);
        let mut net = ConductanceNetwork::unit(&g);
        let before = effective_resistance(&net, a, &[b]).unwrap();
        let (x, y) = g.edges().nth((pick.2 as usize) % g.num_edges()).unwrap();
        net.set_conductance(x, y, boost).unwrap();
        let after = effective_resistance(&net, a, &[b]).unwrap();
        prop_assert!(after <= before + 1e-10, "{after} > {before}");
    }

    #[test]
    fn resistance_is_a_metric(seed in any::<u64>(), pick in any::<(u32, u32, u32)>(), weighted in any::<bool>()) {
        let p = gen_path(4, 150, seed, Sidedness::OneSided).unwrap();
        let g = build_graph(&p).unwrap();
        let mode = if weighted { ConductanceMode::CrossingCount } else { ConductanceMode::Unit };
        let net = ConductanceNetwork::with_mode(&g, mode);
        let n = g.num_vertices() as u32;
        let (a, b, c) = (pick.0 % n, pick.1 % n, pick.2 % n);
        prop_assume!(a != b && b != c && a != c);
        let r = |x: u32, y: u32| effective_resistance(&net, x, &[y]).unwrap();
        prop_assert!((r(a, b) - r(b, a)).abs() < 1e-9);
        prop_assert!(r(a, c) <= r(a, b) + r(b, c) + 1e-9);
        // resistance never exceeds graph distance with conductances >= 1
        let (dist, _) = bfs(&g, a, u32::MAX - 1).unwrap();
        prop_assert!(r(a, b) <= dist[b as usize] as f64 + 1e-9);
    }

    #[test]
    fn kernel_is_reversible(seed in any::<u64>(), dim in 2usize..5) {
        let p = gen_path(dim, 200, seed, Sidedness::OneSided).unwrap();
        let g = build_graph(&p).unwrap();
        let net = ConductanceNetwork::with_mode(&g, ConductanceMode::CrossingCount);
        let kernel = |x: u32, y: u32| net.edges_of(x).find(|e| e.0 == y).map_or(0.0, |e| e.1) / net.weight(x);
        for (x, y) in g.edges() {
            let lhs = net.weight(x) * kernel(x, y);
            let rhs = net.weight(y) * kernel(y, x);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn evolution_conserves_mass(seed in any::<u64>(), weighted in any::<bool>()) {
        let p = gen_path(3, 60, seed, Sidedness::OneSided).unwrap();
        let g = build_graph(&p).unwrap();
        let mode = if weighted { ConductanceMode::CrossingCount } else { ConductanceMode::Unit };
        let net = ConductanceNetwork::with_mode(&g, mode);
        let mut d = DistributionVector::point(g.num_vertices(), g.root());
        for _ in 0..10_000 {
            d = d.step(&net);
        }
        prop_assert!((d.total() - 1.0).abs() < 1e-9);
        prop_assert!(d.mass.iter().all(|&m| m >= 0.0));
    }

    /// Every vertex within `n - 1` of the origin is visited by the `n`-th
    /// positive cut-time.
    #[test]
    fn balls_sit_inside_the_range_up_to_cut_times(seed in any::<u64>(), dim in 3usize..6) {
        let p = gen_path(dim, 3000, seed, Sidedness::OneSided).unwrap();
        let g = build_graph(&p).unwrap();
        let cuts = cut_times(&p.trace(), Sidedness::OneSided, 0.0).unwrap();
        let positive: Vec<i64> = cuts.indices.iter().copied().filter(|&t| t > 0).collect();
        for (i, &t) in positive.iter().enumerate().step_by(7).take(20) {
            let n = i as u32 + 1;
            let mut seen = vec![false; g.num_vertices()];
            for s in 0..=t {
                seen[g.vertex_at(s) as usize] = true;
            }
            for v in ball(&g, g.root(), n - 1).unwrap() {
                prop_assert!(seen[v as usize], "vertex {v} first seen after T_{n} = {t}");
            }
        }
    }

    /// `r + 1 <= |B(0, r)| <= 1 + sum_{i=1}^{r} 2d (2d - 1)^{i - 1}` while the
    /// ball does not cover the graph.
    #[test]
    fn ball_sizes(seed in any::<u64>(), dim in 2usize..6) {
        let p = gen_path(dim, 500, seed, Sidedness::OneSided).unwrap();
        let g = build_graph(&p).unwrap();
        let dist = graph_distance(&g, g.root()).unwrap();
        let far = dist.iter().copied().max().unwrap();
        let mut tree = 1u64;
        let mut shell = 2 * dim as u64;
        for r in 0..far.min(12) {
            let b = ball(&g, g.root(), r).unwrap().len() as u64;
            prop_assert!(b > r as u64);
            prop_assert!(b <= tree);
            tree += shell;
            shell *= 2 * dim as u64 - 1;
        }
    }
}
