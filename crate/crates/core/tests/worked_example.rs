//! The 14-node worked example: two 5-node chains, a 3-cycle and a pendant
//! node. Only 11 of its 12 edges are given; the pendant edge 14 -> 12 is a
//! reconstruction of the remaining one.

use sufficient_control::edcp::{edcp, PlacementReport};
use sufficient_control::graph::parse_edge_list;
use sufficient_control::mcfp::min_controllers_for;

const WORKED_EXAMPLE: &str =
    "1 2\n2 3\n3 4\n4 5\n6 7\n7 8\n8 9\n9 10\n11 12\n12 13\n13 11\n14 12\n";

#[test]
fn cover_has_three_stems_and_one_cycle() {
    let g = parse_edge_list(WORKED_EXAMPLE).unwrap();
    assert_eq!(g.node_count(), 14);
    assert_eq!(g.edge_count(), 12);
    let (mstar, cover) = min_controllers_for(&g, 14).unwrap();
    assert_eq!(mstar, 3);
    let ext = |s: &Vec<usize>| s.iter().map(|&v| g.external_id(v)).collect::<Vec<_>>();
    let paths: Vec<_> = cover.paths.iter().map(ext).collect();
    let cycles: Vec<_> = cover.cycles.iter().map(ext).collect();
    assert_eq!(
        paths,
        vec![vec![1, 2, 3, 4, 5], vec![6, 7, 8, 9, 10], vec![14]]
    );
    assert_eq!(cycles, vec![vec![11, 12, 13]]);
}

#[test]
fn golden_placement() {
    let g = parse_edge_list(WORKED_EXAMPLE).unwrap();
    let r = edcp(&g, 4, 12, 2.0).unwrap();
    let report = PlacementReport::from_edcp(&g, &r);
    assert_eq!(report.drivers, vec![1, 4, 6, 11]);
    assert_eq!(report.controlled.len(), 12);
    assert!(r.e_exact.is_some());
    assert_eq!(
        report.segments,
        vec![
            vec![1, 2, 3],
            vec![4, 5],
            vec![6, 7, 8, 9],
            vec![11, 12, 13]
        ]
    );
}
