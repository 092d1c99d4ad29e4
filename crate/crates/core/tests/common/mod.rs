//! Small reference networks shared by the integration tests.

use rnclab_core::netgraph::Network;

fn names(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

/// The two-sink butterfly. Nodes: source s, relays a/b, coding nodes c/d
/// (the two interior nodes), sinks t1/t2.
pub fn butterfly() -> Network {
    let (s, a, b, c, d, t1, t2) = (0, 1, 2, 3, 4, 5, 6);
    let edges = vec![
        (s, a),
        (s, b),
        (a, t1),
        (a, c),
        (b, c),
        (b, t2),
        (c, d),
        (d, t1),
        (d, t2),
    ];
    Network::new(names(&["s", "a", "b", "c", "d", "t1", "t2"]), edges, s, vec![t1, t2])
        .unwrap()
        .with_coding([c, d])
        .unwrap()
}

/// Single path source -> i1 -> ... -> ik -> sink with every interior node
/// coding.
pub fn chain(k: usize) -> Network {
    let mut labels = vec!["s".to_string()];
    for i in 1..=k {
        labels.push(format!("i{i}"));
    }
    labels.push("t".into());
    let edges: Vec<(usize, usize)> = (0..=k).map(|i| (i, i + 1)).collect();
    Network::new(labels, edges, 0, vec![k + 1])
        .unwrap()
        .with_coding(1..=k)
        .unwrap()
}

/// Tandem topology: only the source has multiple outgoing edges; two
/// parallel two-hop coding chains meet at the sink. Every intermediate node
/// has a single outgoing edge, so all three schemes coincide.
pub fn tandem() -> Network {
    let (s, a1, a2, b1, b2, t) = (0, 1, 2, 3, 4, 5);
    let edges = vec![(s, a1), (s, b1), (a1, a2), (b1, b2), (a2, t), (b2, t)];
    Network::new(names(&["s", "a1", "a2", "b1", "b2", "t"]), edges, s, vec![t])
        .unwrap()
        .with_coding([a1, a2, b1, b2])
        .unwrap()
}
