#![allow(unused_imports)]

pub use exsys::lemmas::{
    bounding_box, exhaustive_embedded_loops, min_linf_filling, random_embedded_loop,
};

use exsys::curves::LatticeLoop;
use std::collections::HashSet;

pub fn is_embedded(l: &LatticeLoop) -> bool {
    let vs = l.vertices();
    let set: HashSet<_> = vs[..vs.len() - 1].iter().collect();
    set.len() == vs.len() - 1
}
