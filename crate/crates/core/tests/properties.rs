mod common;

use std::collections::BTreeSet;

use dendrite_core::cells::cells_at_threshold;
use dendrite_core::chaos::distribution_profile;
use dendrite_core::dendrite::{DPoint, Dendrite};
use dendrite_core::extension::{EdgeRule, Stage};
use dendrite_core::odometer::{self, d_omega, phi, tau, timer_ok, FiberPoint, OmegaWord};
use dendrite_core::spaces::{hausdorff, subset_geometry};
use dendrite_core::{build_cell_hierarchy, build_dendrite, embed_system, MetricSpace, SequenceParams, SkewState, Subset};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Small spaces on an integer grid with the max metric: lots of exact ties.
fn grid_space() -> impl Strategy<Value = MetricSpace> {
    (1usize..=12, 1usize..=3).prop_flat_map(|(n, dim)| {
        prop::collection::vec(prop::collection::vec(0i32..6, dim), n).prop_map(|pts| {
            let pts: Vec<Vec<i32>> = pts.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
            let labels = (0..pts.len()).map(|i| format!("g{i}")).collect();
            MetricSpace::from_fn(labels, |i, j| {
                pts[i].iter().zip(&pts[j]).map(|(a, b)| (a - b).abs()).max().unwrap_or(0) as f64
            })
            .unwrap()
        })
    })
}

fn euclidean_space() -> impl Strategy<Value = MetricSpace> {
    (any::<u64>(), 1usize..=14).prop_map(|(seed, n)| common::random_euclidean(&mut ChaCha8Rng::seed_from_u64(seed), n, 2))
}

fn any_space() -> impl Strategy<Value = MetricSpace> {
    prop_oneof![grid_space(), euclidean_space()]
}

fn dendrite_of(space: &MetricSpace) -> Dendrite {
    build_dendrite(&build_cell_hierarchy(space).unwrap(), space).unwrap()
}

fn random_subset(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut s: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.4)).collect();
    if s.is_empty() {
        s.push(rng.random_range(0..n));
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hausdorff_is_a_metric_on_subsets(space in any_space(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = space.len();
        let (a, b, c) = (random_subset(&mut rng, n), random_subset(&mut rng, n), random_subset(&mut rng, n));
        let hab = hausdorff(&space, &a, &b);
        prop_assert_eq!(hab, common::oracle_hausdorff(&space, &a, &b));
        prop_assert_eq!(hab, hausdorff(&space, &b, &a));
        prop_assert_eq!(hausdorff(&space, &a, &a), 0.0);
        prop_assert!(hausdorff(&space, &a, &c) <= hab + hausdorff(&space, &b, &c) + 1e-12);
        let x = rng.random_range(0..n);
        let y = rng.random_range(0..n);
        prop_assert_eq!(hausdorff(&space, &[x], &[y]), space.distance(x, y));
        let g = subset_geometry(&space, &Subset::new(&space, a.clone()).unwrap(), &Subset::all(&space)).unwrap();
        prop_assert_eq!(g.dist_ab, 0.0);
        prop_assert!(g.diameter <= space.diameter());
    }

    #[test]
    fn hierarchy_matches_threshold_oracle(space in any_space()) {
        let hier = build_cell_hierarchy(&space).unwrap();
        let ours: BTreeSet<Vec<usize>> = hier.cells().iter().map(|c| c.members.clone()).collect();
        prop_assert_eq!(ours.len(), hier.len(), "duplicate cells");
        prop_assert_eq!(ours, common::oracle_cells(&space));
    }

    #[test]
    fn hierarchy_structure(space in any_space()) {
        let hier = build_cell_hierarchy(&space).unwrap();
        let cells = hier.cells();
        prop_assert_eq!(cells.iter().filter(|c| c.parent.is_none()).count(), 1);
        prop_assert_eq!(cells[hier.root()].members.len(), space.len());
        for (id, c) in cells.iter().enumerate() {
            prop_assert_eq!(c.children.is_empty(), c.is_singleton());
            if !c.children.is_empty() {
                prop_assert!(c.children.len() >= 2);
                let mut union: Vec<usize> = c.children.iter().flat_map(|&k| cells[k].members.clone()).collect();
                union.sort_unstable();
                prop_assert_eq!(&union, &c.members, "children must partition the cell");
            }
            for &k in &c.children {
                prop_assert_eq!(cells[k].parent, Some(id));
                prop_assert!(cells[k].birth_threshold < c.birth_threshold);
            }
            // birth threshold: a θ-cell at its birth, not one just below
            let at_birth = cells_at_threshold(&space, c.birth_threshold);
            prop_assert!(at_birth.contains(&c.members));
        }
        for a in cells {
            for b in cells {
                let sa: BTreeSet<_> = a.members.iter().collect();
                let sb: BTreeSet<_> = b.members.iter().collect();
                let nested = sa.is_subset(&sb) || sb.is_subset(&sa);
                prop_assert!(nested || sa.is_disjoint(&sb));
                if sa.len() > sb.len() && sb.is_subset(&sa) {
                    prop_assert!(a.birth_threshold > b.birth_threshold);
                }
            }
        }
    }

    #[test]
    fn threshold_partitions_refine(space in any_space(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let diam = space.diameter();
        let mut eta = rng.random::<f64>() * diam;
        let mut theta = rng.random::<f64>() * diam;
        if eta > theta { std::mem::swap(&mut eta, &mut theta); }
        let fine = cells_at_threshold(&space, eta);
        let coarse = cells_at_threshold(&space, theta);
        for block in &fine {
            prop_assert!(coarse.iter().any(|c| block.iter().all(|x| c.contains(x))));
        }
        prop_assert_eq!(cells_at_threshold(&space, 0.0).len(), space.len());
        prop_assert_eq!(cells_at_threshold(&space, diam).len(), 1);
    }

    #[test]
    fn rho_is_a_metric_extending_d(space in any_space(), seed in any::<u64>()) {
        let d = dendrite_of(&space);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for x in 0..space.len() {
            for y in 0..space.len() {
                let r = d.rho(DPoint::Vertex(d.leaf_of_point(x)), DPoint::Vertex(d.leaf_of_point(y)));
                prop_assert_eq!(r, space.distance(x, y));
            }
        }
        for _ in 0..200 {
            let (a, b, c) = (d.sample_point(&mut rng), d.sample_point(&mut rng), d.sample_point(&mut rng));
            let ab = d.rho(a, b);
            prop_assert_eq!(ab.to_bits(), d.rho(b, a).to_bits());
            prop_assert!(ab >= 0.0);
            prop_assert_eq!(d.rho(a, a), 0.0);
            prop_assert!(d.rho(a, c) <= ab + d.rho(b, c) + 1e-12);
        }
    }

    #[test]
    fn edges_are_isometric_intervals(space in any_space(), s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let d = dendrite_of(&space);
        for (id, e) in d.edges().iter().enumerate() {
            prop_assert!(e.length > 0.0);
            prop_assert_eq!(e.length, common::oracle_hausdorff(&space, d.members(e.parent), d.members(e.child)));
            let p = d.point_on_edge(id, s);
            let q = d.point_on_edge(id, t);
            let (pa, pb) = (d.rho(DPoint::Vertex(e.parent), p), d.rho(p, DPoint::Vertex(e.child)));
            prop_assert!((pa + pb - e.length).abs() <= 1e-12 * e.length.max(1.0));
            prop_assert!((d.rho(p, q) - (s - t).abs() * e.length).abs() <= 1e-12 * e.length.max(1.0));
        }
    }

    #[test]
    fn extension_contract(space in any_space(), seed in any::<u64>()) {
        prop_assume!(space.len() >= 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = space.len();
        let f: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let emb = embed_system(&space, &f).unwrap();
        let (d, filt, map) = (&emb.dendrite, &emb.filtration, &emb.map);

        for x in 0..n {
            prop_assert_eq!(map.evaluate(d, DPoint::Vertex(emb.correspondence[x])), DPoint::Vertex(emb.correspondence[f[x]]));
        }
        // enumeration condition: everything on [p0, p_i] comes earlier
        for (i, &p) in filt.order().iter().enumerate() {
            let mut u = p;
            while let Some(w) = filt.tree_parent(u) {
                prop_assert!(filt.position(w).unwrap() < i);
                u = w;
            }
            if i > 0 {
                let q = map.vertex_image(p);
                prop_assert!(filt.position(q).unwrap() < i, "q_i must lie in T_(i-1)");
                prop_assert!(filt.link(i) < i);
            }
        }
        prop_assert_eq!(filt.len(), d.vertex_count() - n);
        prop_assert_eq!(map.vertex_image(filt.root()), filt.root());

        for (id, e) in d.edges().iter().enumerate() {
            prop_assert_eq!(d.normalize(map.edge_action(d, id, 0.0)), DPoint::Vertex(map.vertex_image(e.parent)));
            prop_assert_eq!(d.normalize(map.edge_action(d, id, 1.0)), DPoint::Vertex(map.vertex_image(e.child)));
            // no folding inside one edge: the image offset moves one way only
            let offsets: Vec<f64> = (0..=64).map(|k| map.image_offset(d, id, k as f64 / 64.0)).collect();
            let reversed = matches!(map.rule(id), EdgeRule::Arc { from_child: true, .. });
            let monotone = offsets.windows(2).all(|w| if reversed { w[0] >= w[1] } else { w[0] <= w[1] });
            prop_assert!(monotone, "edge {} folds", id);
        }

        for _ in 0..100 {
            let x = d.sample_point(&mut rng);
            let budget = match filt.stage_of(d, x) {
                Stage::Endpoint => continue,
                Stage::Tree(i) => i,
                Stage::Ladder { level } => level as usize + filt.len(),
            };
            prop_assert!(map.steps_to_fixed_point(d, x, budget).is_some(), "{:?} not fixed within {}", x, budget);
        }
    }

    #[test]
    fn adding_machine_is_an_isometry(a in any::<u64>(), b in any::<u64>(), k in 0u64..300) {
        let (mut wa, mut wb) = (OmegaWord::from_u64(a), OmegaWord::from_u64(b));
        prop_assert_eq!(d_omega(&wa, &wb), common::oracle_d_omega(a as u128, b as u128));
        for _ in 0..k {
            wa.tau_in_place();
            wb.tau_in_place();
        }
        prop_assert_eq!(wa.clone(), {
            let v = a as u128 + k as u128;
            let bits: Vec<bool> = (0..128).map(|i| (v >> i) & 1 == 1).collect();
            OmegaWord::from_bits(&bits)
        });
        prop_assert_eq!(d_omega(&wa, &wb), common::oracle_d_omega(a as u128, b as u128));
        prop_assert_eq!(d_omega(&tau(&wa), &tau(&wb)), d_omega(&wa, &wb));
        let shown = wa.to_string();
        prop_assert_eq!(shown.parse::<OmegaWord>().unwrap(), wa);
    }

    #[test]
    fn d_omega_is_an_ultrametric(a in any::<u64>(), b in any::<u64>(), c in any::<u64>()) {
        let (a, b, c) = (OmegaWord::from_u64(a), OmegaWord::from_u64(b), OmegaWord::from_u64(c));
        prop_assert!(d_omega(&a, &c) <= d_omega(&a, &b).max(d_omega(&b, &c)));
    }

    #[test]
    fn tops_ignore_the_half(n in 1u32..=17, w in any::<u64>(), e in any::<u64>()) {
        let top = odometer::top_index(n).unwrap();
        prop_assert_eq!(top, common::oracle_top(n));
        let (w, e) = (OmegaWord::from_u64(w), OmegaWord::from_u64(e));
        prop_assert_eq!(phi(&w, &e, FiberPoint::P(top)).unwrap(), phi(&w, &e, FiberPoint::Q(top)).unwrap());
        let ok = w.low_u64() & ((1u64 << (n + 1)) - 1) == top & ((1u64 << (n + 1)) - 1);
        prop_assert_eq!(timer_ok(&w, n), ok);
    }

    #[test]
    fn profile_shape(ds in prop::collection::vec(0.0f64..5.0, 1..200), grid in prop::collection::btree_set(0u32..50, 1..12)) {
        let thresholds: Vec<f64> = grid.iter().map(|&g| g as f64 / 10.0).collect();
        let cps: Vec<u64> = [1u64, 7, 31, ds.len() as u64].into_iter().filter(|&c| c <= ds.len() as u64).collect::<BTreeSet<_>>().into_iter().collect();
        let p = distribution_profile(ds.iter().copied(), &thresholds, &cps).unwrap();
        for (k, row) in p.freq.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                prop_assert!((0.0..=1.0).contains(&v));
                let direct = ds[..cps[k] as usize].iter().filter(|&&d| d < thresholds[j]).count() as f64 / cps[k] as f64;
                prop_assert_eq!(v, direct);
            }
            prop_assert!(row.windows(2).all(|w| w[0] <= w[1]));
        }
        prop_assert!(p.lower.iter().zip(&p.upper).all(|(l, u)| l <= u));
    }

    #[test]
    fn orbit_distances_respect_the_base_bound(w in any::<u32>(), w2 in any::<u32>(), e in any::<u32>(), e2 in any::<u32>(), t in 0u64..200, upper in any::<bool>()) {
        let params = SequenceParams::default();
        let c = if upper { FiberPoint::P(t) } else { FiberPoint::Q(t) };
        let a = SkewState::new(OmegaWord::from_u64(w as u64), OmegaWord::from_u64(e as u64), c);
        let b = SkewState::new(OmegaWord::from_u64(w2 as u64), OmegaWord::from_u64(e2 as u64), FiberPoint::P(0));
        let bound = d_omega(&a.omega, &b.omega).max(d_omega(&a.eta, &b.eta));
        for d in odometer::orbit_distances(&a, &b, 2000, &params).unwrap() {
            prop_assert!(d.unwrap() >= bound);
        }
    }
}
