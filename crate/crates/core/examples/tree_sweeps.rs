// Level-order tree layout, path addressing and the bottom-up / top-down sweeps.

use twoweight::DyadicTree;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tree = DyadicTree::new(2, 3)?;
    println!("{} nodes, {} leaves, first leaf at {}", tree.node_count(), tree.leaf_count(), tree.first_leaf());

    let node = tree.node_from_path("101")?;
    assert_eq!(tree.path(node), "101");
    assert_eq!(tree.level(node), 3);
    println!("path 101 is node {node}, parent {:?}", tree.parent(node));

    let leaves: Vec<f64> = (1..=8).map(f64::from).collect();
    let totals = tree.aggregate(&leaves);
    assert_eq!(totals[0], 36.0);

    let mut marks = vec![0.0; tree.node_count()];
    marks[0] = 1.0;
    marks[tree.node_from_path("1")?] = 10.0;
    let down = tree.ancestor_sum(&marks);
    println!("ancestor sums on leaves: {:?}", tree.leaves(&down));
    assert_eq!(tree.leaves(&down), &[1.0, 1.0, 1.0, 1.0, 11.0, 11.0, 11.0, 11.0]);

    let up = tree.subtree_sum(&marks);
    assert_eq!(up[0], 11.0);
    let quad = DyadicTree::new(4, 2)?;
    println!("quadtree child 3 of the root has path {:?}", quad.path(quad.child(0, 3)));
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
