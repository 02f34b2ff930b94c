//! Prints the optimal forwarding table for a small network and the expected
//! cost of forcing the source onto a single relay.

use anypath_core::anypath::{evaluate_table_cost, shortest_anypath_first};
use anypath_core::{parse_topology, NodeId};

const TOPOLOGY: &str = "\
nodes 3
source 1
dest 3
link 1 2 0.8
link 1 3 0.5
link 2 3 1.0
";

fn main() {
    let topo = parse_topology(TOPOLOGY).expect("valid topology");
    let probs = topo.true_probs();
    let table = shortest_anypath_first(&probs, &topo).expect("SAF");
    for entry in &table.entries {
        let set: Vec<String> = entry
            .forwarding_set
            .iter()
            .map(ToString::to_string)
            .collect();
        println!(
            "node {}  D = {:.6}  J = [{}]",
            entry.node,
            entry.distance,
            set.join(", ")
        );
    }

    let mut forced = table.clone();
    forced.entries[0].forwarding_set = vec![NodeId(2)];
    let cost = evaluate_table_cost(&forced, &probs, &topo).expect("evaluate")[0];
    println!("source forced onto relay 2: {cost:.6}");
}
