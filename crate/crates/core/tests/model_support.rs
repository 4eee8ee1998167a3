mod common;

use std::collections::{BTreeSet, HashSet};

use common::rng;
use metrosets::insertion::{expand_merged, insert_first_viable, insert_split};
use metrosets::model::{condense, parse_set_system, ElementId, InputError, InputFormat, SetSystem};
use metrosets::sample::random_set_system;
use metrosets::support::{
    anneal_tour, best_two_opt_move, c1p_cost_matrix, extract_support_c1p, extract_support_two_opt,
    nearest_neighbor_path, path_cost, support_from_permutation, tour_cost, two_opt_path, AnnealSchedule,
    CostMatrix, Permutation, SupportGraph,
};
use metrosets::Point;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn sys(sets: &[(&str, &[&str])]) -> SetSystem {
    SetSystem::from_named_sets(sets.iter().map(|(n, m)| (*n, m.to_vec()))).unwrap()
}

fn euclid(points: &[Point]) -> CostMatrix {
    CostMatrix::from_fn(points.len(), |i, j| points[i].dist(points[j]))
}

fn random_points(seed: u64, n: usize) -> Vec<Point> {
    let mut r = rng(seed);
    (0..n)
        .map(|_| Point::new(r.random::<f64>() * 10.0, r.random::<f64>() * 10.0))
        .collect()
}

fn line_names(s: &SetSystem, line: &[ElementId]) -> Vec<String> {
    line.iter().map(|&e| s.element_name(e).to_string()).collect()
}

/// Two sets of six sharing v3..v6.
fn eight_element_system() -> SetSystem {
    sys(&[
        ("s1", &["v1", "v2", "v3", "v4", "v5", "v6"]),
        ("s2", &["v3", "v4", "v5", "v6", "v7", "v8"]),
    ])
}

// ---------------------------------------------------------------- model

#[test]
fn parse_examples() {
    let s = parse_set_system(br#"{"sets":{"A":["x","y"],"B":["y","z"]}}"#, InputFormat::Json).unwrap();
    assert_eq!((s.element_count(), s.set_count()), (3, 2));
    let y = s.find_element("y").unwrap();
    assert_eq!(s.degree(y), 2);

    let err = parse_set_system(br#"{"sets":{"A":["x","y"],"B":["z","w"]}}"#, InputFormat::Json).unwrap_err();
    assert!(matches!(err, InputError::Disconnected { .. }), "{err:?}");
    let err = parse_set_system(br#"{"sets":{"A":["x"]}}"#, InputFormat::Json).unwrap_err();
    assert!(matches!(err, InputError::SetTooSmall { .. }), "{err:?}");
}

#[test]
fn csv_and_json_agree() {
    let json = parse_set_system(br#"{"sets":{"A":["x","y"],"B":["y","z"]}}"#, InputFormat::Json).unwrap();
    let csv = parse_set_system(b"x,A\ny,A,B\nz,B\n", InputFormat::Csv { has_header: false }).unwrap();
    assert_eq!(json, csv);
}

#[test]
fn similarity_of_overlapping_memberships() {
    let s = sys(&[
        ("A", &["u", "a"]),
        ("B", &["u", "v"]),
        ("C", &["u", "v"]),
        ("D", &["v", "a"]),
    ]);
    let (u, v) = (s.find_element("u").unwrap(), s.find_element("v").unwrap());
    assert_eq!(s.similarity(u, v).unwrap(), 2);
    assert_eq!(s.similarity(v, u).unwrap(), 2);
    assert_eq!(s.similarity(u, u).unwrap(), s.degree(u));
}

#[test]
fn eight_element_system_rows() {
    let s = eight_element_system();
    let v7 = s.find_element("v7").unwrap();
    assert_eq!(s.signature(v7).unwrap().to_bits(), vec![0, 1]);
    let v4 = s.find_element("v4").unwrap();
    assert_eq!(s.signature(v4).unwrap().to_bits(), vec![1, 1]);
    let c = condense(&s);
    // one merged intersection vertex plus a guard per set
    let merged: Vec<_> = c.merge_map.iter().filter(|m| m.len() > 1).collect();
    assert_eq!(merged.len(), 1);
    assert_eq!(merged[0].len(), 4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn condense_round_trips(n in 10usize..200, h in 2usize..10, seed in any::<u64>()) {
        let s = random_set_system(n, h, seed);
        let c = condense(&s);
        prop_assert_eq!(c.expand(), s.clone());
        let sigs: Vec<_> = c.kernel.elements().map(|k| c.kernel.signature(k).unwrap()).collect();
        let distinct: HashSet<_> = sigs.iter().map(|g| g.to_bits()).collect();
        prop_assert_eq!(distinct.len(), sigs.len());
        for k in c.kernel.elements() {
            // single-set kernel vertices only appear as guards of small sets
            if c.kernel.degree(k) == 1 {
                let set = c.kernel.memberships(k)[0];
                let multi = c.kernel.members(set).iter().filter(|&&e| c.kernel.degree(e) > 1).count();
                prop_assert!(multi < 2);
            }
        }
        // every source element is accounted for exactly once
        let mut seen: Vec<ElementId> = c.merge_map.iter().flatten().chain(c.singles_map.iter().flatten()).copied().collect();
        seen.sort();
        prop_assert_eq!(seen, s.elements().collect::<Vec<_>>());
    }
}

// ---------------------------------------------------------------- support

fn greedy_oracle(c: &CostMatrix, start: usize) -> Vec<usize> {
    let mut path = vec![start];
    let mut left: Vec<usize> = (0..c.len()).filter(|&v| v != start).collect();
    while !left.is_empty() {
        let cur = *path.last().unwrap();
        // strict minimum keeps the earliest (lowest) index on ties
        let mut best = 0;
        for k in 1..left.len() {
            if c.get(cur, left[k]) < c.get(cur, left[best]) {
                best = k;
            }
        }
        path.push(left.remove(best));
    }
    path
}

#[test]
fn nearest_neighbour_matches_greedy_oracle() {
    let c = euclid(&random_points(7, 6));
    for start in 0..6 {
        assert_eq!(nearest_neighbor_path(&c, start), greedy_oracle(&c, start));
    }
    let collinear = euclid(&[Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(3.0, 0.0)]);
    assert_eq!(nearest_neighbor_path(&collinear, 0), vec![0, 1, 2]);
    assert_eq!(nearest_neighbor_path(&CostMatrix::from_fn(1, |_, _| 0.0), 0), vec![0]);
}

#[test]
fn nearest_neighbour_ties_go_low() {
    let c = CostMatrix::from_fn(4, |i, j| if i == j { 0.0 } else { 1.0 });
    assert_eq!(nearest_neighbor_path(&c, 2), vec![2, 0, 1, 3]);
}

#[test]
fn three_vertex_paths_reach_the_optimum() {
    for seed in 0..50 {
        let c = euclid(&random_points(seed, 3));
        let best = [[0, 1, 2], [1, 0, 2], [0, 2, 1]]
            .iter()
            .map(|p| path_cost(p, &c))
            .fold(f64::INFINITY, f64::min);
        for start in [[0, 1, 2], [1, 0, 2], [0, 2, 1], [2, 1, 0]] {
            let out = two_opt_path(&start, &c);
            assert!((path_cost(&out, &c) - best).abs() < 1e-12, "seed {seed}");
        }
    }
}

fn self_crossings(points: &[Point], path: &[usize]) -> usize {
    let mut n = 0;
    for i in 0..path.len() - 1 {
        for j in i + 2..path.len() - 1 {
            let (a, b) = (points[path[i]], points[path[i + 1]]);
            let (c, d) = (points[path[j]], points[path[j + 1]]);
            if common::proper_cross(a, b, c, d) {
                n += 1;
            }
        }
    }
    n
}

#[test]
fn two_opt_removes_a_crossing() {
    // a stroke over the square's diagonal and back
    let pts = [
        Point::new(0.0, 0.0),
        Point::new(2.0, 2.0),
        Point::new(2.0, 0.0),
        Point::new(0.0, 2.0),
    ];
    let c = euclid(&pts);
    let start = [0, 1, 2, 3];
    assert_eq!(self_crossings(&pts, &start), 1);
    let out = two_opt_path(&start, &c);
    assert_eq!(self_crossings(&pts, &out), 0);
    assert!(path_cost(&out, &c) < path_cost(&start, &c) - 1e-9);
}

#[test]
fn euclidean_two_opt_paths_are_planar() {
    for seed in 0..40 {
        let pts = random_points(100 + seed, 12);
        let c = euclid(&pts);
        let out = two_opt_path(&nearest_neighbor_path(&c, 0), &c);
        assert!(best_two_opt_move(&out, &c).is_none());
        assert_eq!(self_crossings(&pts, &out), 0, "seed {seed}");
    }
}

fn exhaustive_min(c: &CostMatrix) -> f64 {
    let mut order: Vec<usize> = (0..c.len()).collect();
    let mut best = f64::INFINITY;
    permute(&mut order, 0, &mut |p| best = best.min(path_cost(p, c)));
    best
}

fn permute(items: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, f);
        items.swap(k, i);
    }
}

#[test]
fn seven_city_gap_is_small() {
    let mut gaps = 0.0;
    for seed in 0..100 {
        let c = euclid(&random_points(1000 + seed, 7));
        let heuristic = path_cost(&two_opt_path(&nearest_neighbor_path(&c, 0), &c), &c);
        let opt = exhaustive_min(&c);
        assert!(heuristic >= opt - 1e-9);
        gaps += heuristic / opt - 1.0;
    }
    let mean = gaps / 100.0;
    assert!(mean <= 0.10, "mean gap {mean}");
}

#[test]
fn similarity_support_keeps_the_strong_pair() {
    let s = sys(&[
        ("A", &["a1", "x", "a2", "y", "a3"]),
        ("B", &["b1", "y", "b2", "x"]),
        ("C", &["x", "c1", "y", "c2", "c3"]),
        ("D", &["a1", "b1", "c1"]),
        ("E", &["a2", "b2", "c2"]),
    ]);
    let g = extract_support_two_opt(&s);
    g.validate(&s).unwrap();
    let (x, y) = (s.find_element("x").unwrap(), s.find_element("y").unwrap());
    for set in ["A", "B", "C"] {
        let line = g.line(s.find_set(set).unwrap());
        let adjacent = line.windows(2).any(|w| (w[0] == x && w[1] == y) || (w[0] == y && w[1] == x));
        assert!(adjacent, "{set}: {:?}", line_names(&s, line));
    }
}

#[test]
fn forced_supports() {
    let s = sys(&[("A", &["p", "q"]), ("B", &["q", "r"])]);
    let g = extract_support_two_opt(&s);
    assert_eq!(g.edges().len(), 2);
    let q = s.find_element("q").unwrap();
    assert_eq!(g.adjacency()[q.0].len(), 2);

    let one = sys(&[("A", &["p", "q"])]);
    assert_eq!(extract_support_two_opt(&one).edges().len(), 1);
}

#[test]
fn support_lines_cover_their_sets() {
    for seed in 0..20 {
        let s = random_set_system(40, 7, seed);
        for g in [
            extract_support_two_opt(&s),
            extract_support_c1p(&s, seed, AnnealSchedule::default()),
        ] {
            g.validate(&s).unwrap();
            for set in s.sets() {
                let on_line: BTreeSet<_> = g.line(set).iter().collect();
                let members: BTreeSet<_> = s.members(set).iter().collect();
                assert_eq!(on_line, members);
                assert_eq!(g.line(set).len(), members.len());
            }
        }
    }
}

fn has_consecutive_ones(s: &SetSystem, order: &[usize]) -> bool {
    s.sets().all(|set| {
        let at: Vec<usize> = order
            .iter()
            .enumerate()
            .filter(|(_, &v)| s.contains(set, ElementId(v)))
            .map(|(i, _)| i)
            .collect();
        at.last().unwrap() - at.first().unwrap() + 1 == at.len()
    })
}

#[test]
fn annealing_finds_consecutive_ones_on_eight_element_system() {
    let s = eight_element_system();
    let c = c1p_cost_matrix(&s);
    let dummy = s.element_count();
    let mut best = f64::INFINITY;
    let mut best_are_c1p = true;
    let mut order: Vec<usize> = (0..dummy).collect();
    let mut results = Vec::new();
    permute(&mut order, 0, &mut |p| {
        let mut tour = p.to_vec();
        tour.push(dummy);
        results.push((tour_cost(&tour, &c), has_consecutive_ones(&s, p)));
    });
    for &(cost, _) in &results {
        best = best.min(cost);
    }
    for &(cost, c1p) in &results {
        if cost < best + 1e-9 {
            best_are_c1p &= c1p;
        }
    }
    assert!(best_are_c1p, "a cost-minimal order without consecutive ones");

    for seed in 0..5 {
        let perm = anneal_tour(&c, seed, AnnealSchedule::default());
        let mut tour = perm.order().to_vec();
        tour.push(dummy);
        assert!((tour_cost(&tour, &c) - best).abs() < 1e-9, "seed {seed}");
        assert!(has_consecutive_ones(&s, perm.order()));
    }
}

#[test]
fn eight_element_system_permutation_support() {
    let s = eight_element_system();
    let perm = Permutation::new((0..8).collect()).unwrap();
    let g = support_from_permutation(&s, &perm);
    assert_eq!(g.edges().len(), 7);
    let usage = g.lines_per_edge();
    let shared: BTreeSet<(String, String)> = g
        .edges()
        .iter()
        .zip(&usage)
        .filter(|(_, u)| u.len() == 2)
        .map(|(&(a, b), _)| {
            let (a, b) = (s.element_name(a).to_string(), s.element_name(b).to_string());
            (a.clone().min(b.clone()), a.max(b))
        })
        .collect();
    let want: BTreeSet<(String, String)> = [("v3", "v4"), ("v4", "v5"), ("v5", "v6")]
        .iter()
        .map(|&(a, b)| (a.to_string(), b.to_string()))
        .collect();
    assert_eq!(shared, want);

    let single = sys(&[("A", &["c", "a", "b"])]);
    let perm = Permutation::new(vec![2, 0, 1]).unwrap();
    let g = support_from_permutation(&single, &perm);
    assert_eq!(line_names(&single, g.line(single.find_set("A").unwrap())), ["b", "c", "a"]);
}

#[test]
fn annealing_beats_its_seed_tour() {
    let mut r = rng(3);
    let cols: Vec<Vec<f64>> = (0..6)
        .map(|_| (0..5).map(|_| if r.random::<bool>() { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut with_dummy = cols.clone();
    with_dummy.push(vec![0.0; 5]);
    let c = CostMatrix::from_fn(7, |i, j| {
        with_dummy[i]
            .iter()
            .zip(&with_dummy[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    });
    let seed_tour = nearest_neighbor_path(&c, 6);
    let perm = anneal_tour(&c, 3, AnnealSchedule::default());
    let mut tour = perm.order().to_vec();
    tour.push(6);
    assert!(tour_cost(&tour, &c) <= tour_cost(&seed_tour, &c) + 1e-12);
}

#[test]
fn c1p_costs_are_column_distances() {
    let s = sys(&[("A", &["i", "j"]), ("B", &["i", "k"])]);
    let (i, j, k) = (0, 1, 2);
    let c = c1p_cost_matrix(&s);
    assert_eq!(c.get(i, j), 1.0);
    assert!((c.get(j, k) - 2f64.sqrt()).abs() < 1e-12);
    assert!((c.get(i, 3) - 2f64.sqrt()).abs() < 1e-12);
}

// ---------------------------------------------------------------- insertion

#[test]
fn merged_chain_is_shared_by_both_lines() {
    let s = sys(&[
        ("A", &["x", "y", "z", "p", "a"]),
        ("B", &["x", "y", "z", "q", "b"]),
        ("C", &["p", "q"]),
    ]);
    let cs = condense(&s);
    let g = expand_merged(&extract_support_two_opt(&cs.kernel), &cs);
    let chain = ["x", "y", "z"].map(|n| s.find_element(n).unwrap());
    for set in ["A", "B"] {
        let line = g.line(s.find_set(set).unwrap());
        let at = line.iter().position(|&e| e == chain[0] || e == chain[2]).unwrap();
        let run: Vec<_> = line[at..at + 3].to_vec();
        assert!(run == chain || run.iter().rev().copied().collect::<Vec<_>>() == chain);
    }
    // the three chain edges carry both lines
    let usage = g.lines_per_edge();
    for w in chain.windows(2) {
        assert_eq!(usage[g.edge_index(w[0], w[1]).unwrap()].len(), 2);
    }
}

/// A: a1..a4 beside kernel path p q r t whose outer edges are A's alone;
/// the other sets have one single each.
fn insertion_toy() -> (SetSystem, SupportGraph) {
    let s = sys(&[
        ("A", &["p", "q", "r", "t", "a1", "a2", "a3", "a4"]),
        ("B", &["p", "t", "b1"]),
        ("C", &["q", "r", "c1"]),
        ("D", &["p", "r", "d1"]),
    ]);
    let id = |n| s.find_element(n).unwrap();
    let g = SupportGraph::from_lines(
        s.element_count(),
        vec![
            vec![id("p"), id("q"), id("r"), id("t")],
            vec![id("p"), id("t")],
            vec![id("q"), id("r")],
            vec![id("p"), id("r")],
        ],
    );
    (s, g)
}

#[test]
fn split_insert_shape() {
    let (s, g) = insertion_toy();
    let cs = condense(&s);
    let out = insert_split(&g, &cs);
    assert_eq!(
        line_names(&s, out.line(s.find_set("A").unwrap())),
        ["a1", "a2", "p", "a3", "q", "r", "a4", "t"]
    );
    // one single each and no exclusive edges: prepended
    assert_eq!(line_names(&s, out.line(s.find_set("C").unwrap())), ["c1", "q", "r"]);
    out.validate(&s).unwrap();
}

#[test]
fn first_viable_shape() {
    let (s, g) = insertion_toy();
    let cs = condense(&s);
    let out = insert_first_viable(&g, &cs);
    let lines: Vec<Vec<String>> = out.lines().iter().map(|l| line_names(&s, l)).collect();
    assert_eq!(lines[0], ["a1", "a2", "a3", "a4", "p", "q", "r", "t"]);
    assert_eq!(lines[1], ["b1", "p", "t"]);
    assert_eq!(lines[2], ["c1", "q", "r"]);
    assert_eq!(lines[3], ["d1", "p", "r"]);
    out.validate(&s).unwrap();
}

#[test]
fn insertion_restores_every_set() {
    let mut r = rng(9);
    for seed in 0..20 {
        let s = random_set_system(30 + r.random_range(0..30), 5, seed);
        let cs = condense(&s);
        let g = expand_merged(&extract_support_two_opt(&cs.kernel), &cs);
        for out in [insert_split(&g, &cs), insert_first_viable(&g, &cs)] {
            out.validate(&s).unwrap();
        }
    }
    // shuffled inputs still validate
    let mut names: Vec<String> = (0..12).map(|i| format!("e{i}")).collect();
    names.shuffle(&mut r);
    let s = SetSystem::from_named_sets([("A", names[..8].to_vec()), ("B", names[6..].to_vec())]).unwrap();
    let cs = condense(&s);
    let g = expand_merged(&extract_support_two_opt(&cs.kernel), &cs);
    insert_split(&g, &cs).validate(&s).unwrap();
}
