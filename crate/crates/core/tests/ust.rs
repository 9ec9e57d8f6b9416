mod common;

use common::*;
use proptest::prelude::*;
use ust3d::geometry::linf_distance;
use ust3d::ust::TreeMeta;
use ust3d::wilson::{sample_window_ust, UstWindowConfig};
use ust3d::{Error, LatticePoint, RngConfig, SpanningTree};

fn star() -> SpanningTree {
    let o = LatticePoint::ORIGIN;
    SpanningTree::from_edges(o, &[(o, p(1, 0, 0)), (o, p(0, 1, 0)), (o, p(0, 0, 1))], TreeMeta::default()).unwrap()
}

#[test]
fn path_examples() {
    let t = SpanningTree::random_growth(200, &RngConfig::new(1, 0));
    let x = t.point(57);
    assert_eq!(t.path_in_tree(&x, &x).unwrap().vertices(), &[x]);
    let parent = t.point(t.parent(57).unwrap());
    assert_eq!(t.path_in_tree(&x, &parent).unwrap().vertices(), &[x, parent]);
    assert!(matches!(t.path_in_tree(&x, &p(999, 0, 0)), Err(Error::VertexAbsent(_))));
}

#[test]
fn paths_match_bfs_on_large_trees() {
    let t = SpanningTree::random_growth(10_000, &RngConfig::new(2, 0));
    let mut dirs = RngConfig::new(3, 0);
    for i in 0..200u64 {
        dirs = dirs.child(i);
        let a = t.point((dirs.seed % 10_000) as u32);
        let b = t.point((dirs.seed.rotate_left(17) % 10_000) as u32);
        let got = t.path_in_tree(&a, &b).unwrap();
        assert_eq!(got.vertices(), &bfs_path(&t, &a, &b)[..]);
        assert_eq!(got.len() as u64, t.distance(&a, &b).unwrap());
    }
}

#[test]
fn window_paths_match_bfs() {
    let t = sample_window_ust(&UstWindowConfig::new(5, 4), &RngConfig::new(4, 0)).unwrap();
    let pts = ust3d::LatticeBox::linf(LatticePoint::ORIGIN, 5).points();
    for (i, a) in pts.iter().enumerate().step_by(37) {
        let b = &pts[(i * 7 + 3) % pts.len()];
        match t.path_in_tree(a, b) {
            Ok(path) => assert_eq!(path.vertices(), &bfs_path(&t, a, b)[..]),
            // the tree path joins the two through the wired boundary
            Err(Error::ThroughBoundary(..)) => {
                assert!(bfs_path_ids(&t, a, b).iter().any(|&id| t.is_boundary(id)))
            }
            Err(e) => panic!("{e}"),
        }
    }
}

#[test]
fn ball_examples() {
    let t = SpanningTree::straight_line(50);
    let o = LatticePoint::ORIGIN;
    let b0 = t.intrinsic_ball(&o, 0).unwrap();
    assert_eq!((b0.vertices, b0.volume), (vec![o], 1));
    for r in [1u64, 5, 20] {
        assert_eq!(t.intrinsic_ball(&o, r).unwrap().volume as u64, 2 * r + 1);
    }
    let prof = t.ball_profile(&o, 60).unwrap();
    assert!(prof.windows(2).all(|w| w[0].volume <= w[1].volume));
    assert_eq!(prof[60].volume, 101);
}

#[test]
fn degree_examples() {
    let t = star();
    assert_eq!(t.degree_measure(&p(1, 0, 0)).unwrap(), 1);
    assert_eq!(t.degree_measure(&LatticePoint::ORIGIN).unwrap(), 3);
    assert!(t.degree_measure(&p(5, 5, 5)).is_err());
    let g = SpanningTree::random_growth(500, &RngConfig::new(9, 0));
    let total: usize = (0..500).map(|i| g.degree_measure(&g.point(i)).unwrap()).sum();
    assert_eq!(total, 2 * 499);
}

#[test]
fn sampled_degrees_are_lattice_bounded() {
    let t = sample_window_ust(&UstWindowConfig::new(6, 3), &RngConfig::new(6, 0)).unwrap();
    for id in 0..t.node_count() as u32 {
        if !t.is_boundary(id) {
            assert!((1..=6).contains(&t.degree(id)));
        }
    }
}

#[test]
fn text_round_trip() {
    let wired = sample_window_ust(&UstWindowConfig::new(3, 4), &RngConfig::new(7, 0)).unwrap();
    let closed = SpanningTree::random_growth(300, &RngConfig::new(7, 1));
    let single = SpanningTree::from_edges(p(2, 3, 4), &[], TreeMeta::closed(5)).unwrap();
    for t in [wired, closed, single] {
        let mut a = Vec::new();
        t.write_text(&mut a).unwrap();
        let back = SpanningTree::read_text(&a[..]).unwrap();
        let mut b = Vec::new();
        back.write_text(&mut b).unwrap();
        assert_eq!(a, b);
        assert_eq!(back.meta(), t.meta());
        assert_eq!(back.vertex_count(), t.vertex_count());
    }
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.tree");
    let t = sample_window_ust(&UstWindowConfig::new(2, 2), &RngConfig::new(8, 0)).unwrap();
    t.save(&path).unwrap();
    let back = SpanningTree::load(&path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), t.vertex_count() + 1);
    for id in 0..t.node_count() as u32 {
        if !t.is_boundary(id) {
            let q = t.point(id);
            assert_eq!(back.distance(&LatticePoint::ORIGIN, &q).ok(), t.distance(&LatticePoint::ORIGIN, &q).ok());
        }
    }
}

#[test]
fn malformed_files_are_rejected() {
    for text in [
        "",
        "not-a-tree\n",
        "ust3d-tree v1 2 0 0 0\n1 0 0 5 0 0\n",
        "ust3d-tree v1 3 0 0 0\n1 0 0 0 0 0\n",
        "ust3d-tree v1 2 0 0 0\n1 0 0 0 0\n",
        "ust3d-tree v1 3 0 0 0\n1 0 0 0 0 0\n1 0 0 0 0 0\n",
    ] {
        assert!(SpanningTree::read_text(text.as_bytes()).is_err(), "{text:?}");
    }
    let err = SpanningTree::read_text("ust3d-tree v1 2 0 0 0\n1 0 0 0 0 x\n".as_bytes()).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 2, .. }));
}

#[test]
fn edges_must_be_lattice_steps() {
    let o = LatticePoint::ORIGIN;
    assert!(SpanningTree::from_edges(o, &[(o, p(2, 0, 0))], TreeMeta::default()).is_err());
    assert!(SpanningTree::from_edges(o, &[(o, p(1, 0, 0)), (p(1, 0, 0), o)], TreeMeta::default()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn intrinsic_metric(seed in 0u64..1000, i in 0u32..300, j in 0u32..300, k in 0u32..300) {
        let t = SpanningTree::random_growth(300, &RngConfig::new(seed, 0));
        let (a, b, c) = (t.point(i), t.point(j), t.point(k));
        let d = |x, y| t.distance(x, y).unwrap();
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        prop_assert!(d(&a, &b) >= linf_distance(&a, &b));
        prop_assert_eq!(d(&a, &a), 0);
    }

    #[test]
    fn ball_boundary_consistency(seed in 0u64..1000, i in 0u32..200, r in 0u64..12) {
        let t = SpanningTree::random_growth(200, &RngConfig::new(seed, 1));
        let x = t.point(i);
        let inner = t.intrinsic_ball(&x, r).unwrap();
        let outer = t.intrinsic_ball(&x, r + 1).unwrap();
        prop_assert!(inner.volume <= outer.volume);
        for q in &outer.vertices {
            if t.distance(&x, q).unwrap() == r + 1 {
                let id = t.id(q).unwrap();
                prop_assert!(t.neighbors(id).iter().any(|&w| t.distance(&x, &t.point(w)).unwrap() == r));
            }
        }
    }
}
