mod support;

use std::collections::BTreeSet;

use odaframe_core::tree::{format_topic_dump, parse_topic_dump};
use odaframe_core::{LevelSpec, SensorTree, Topic};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::*;

#[test]
fn leaves_round_trip_to_topics() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let topics = random_topics(&mut rng, 100);
        let tree = SensorTree::build(&topics, None).unwrap();
        let distinct: BTreeSet<&Topic> = topics.iter().collect();
        assert_eq!(tree.leaf_count(), distinct.len());

        // walk the tree and reconstruct every topic from node path + name
        let mut walked = BTreeSet::new();
        for id in std::iter::once(0).chain(tree.internal_nodes()) {
            let node = tree.node(id);
            for t in node.sensors() {
                assert_eq!(format!("{}{}", node.path, t.name()), t.as_str());
                walked.insert(t.clone());
            }
        }
        assert_eq!(walked.iter().collect::<BTreeSet<_>>(), distinct);
    }
}

#[test]
fn levels_partition_internal_nodes() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..200 {
        let topics = random_topics(&mut rng, 80);
        let tree = SensorTree::build(&topics, None).unwrap();
        let oracle = oracle_levels(&topics);
        let mut seen = 0;
        for depth in 1..=tree.max_depth() {
            let top = LevelSpec::topdown(depth as i64 - 1);
            let bottom = LevelSpec::bottomup((tree.max_depth() - depth) as i64);
            let a: Vec<String> = tree.nodes_at_level(top).into_iter().map(|id| tree.node(id).path.clone()).collect();
            let b: Vec<String> = tree.nodes_at_level(bottom).into_iter().map(|id| tree.node(id).path.clone()).collect();
            assert_eq!(a, b);
            assert_eq!(&a, oracle.get(&depth).unwrap());
            seen += a.len();
        }
        assert_eq!(seen, tree.internal_count());
        for id in tree.internal_nodes() {
            let depth = tree.node(id).depth;
            assert!(tree.nodes_at_level(LevelSpec::topdown(depth as i64 - 1)).contains(&id));
        }
    }
}

#[test]
fn relation_matches_prefix_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checked = 0;
    while checked < 20 {
        let topics = random_topics(&mut rng, 60);
        let tree = SensorTree::build(&topics, None).unwrap();
        if tree.internal_count() < 30 {
            continue;
        }
        checked += 1;
        let ids: Vec<usize> = tree.internal_nodes().collect();
        for &a in &ids {
            for &b in &ids {
                let (pa, pb) = (&tree.node(a).path, &tree.node(b).path);
                let oracle = pa.starts_with(pb.as_str()) || pb.starts_with(pa.as_str());
                assert_eq!(tree.hierarchically_related(a, b), oracle, "{pa} {pb}");
                assert_eq!(tree.hierarchically_related(a, b), tree.hierarchically_related(b, a));
            }
            assert!(tree.hierarchically_related(a, a));
        }
    }
}

#[test]
fn rebuild_from_dump_is_isomorphic() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let topics = random_topics(&mut rng, 150);
        let tree = SensorTree::build(&topics, None).unwrap();
        let dump = format_topic_dump(tree.topics());
        let again = SensorTree::build(&parse_topic_dump(&dump).unwrap(), None).unwrap();
        assert_eq!(format_topic_dump(again.topics()), dump);
        assert_eq!(again.internal_count(), tree.internal_count());
        assert_eq!(again.max_depth(), tree.max_depth());
        let paths = |t: &SensorTree| t.internal_nodes().map(|id| (t.node(id).path.clone(), t.node(id).depth)).collect::<BTreeSet<_>>();
        assert_eq!(paths(&again), paths(&tree));
    }
}
