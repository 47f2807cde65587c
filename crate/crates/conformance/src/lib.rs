//! Reference oracles and random workloads used by the acceptance suite.

pub mod generate;
pub mod oracle;

pub use generate::Generator;
pub use oracle::{judge, stages, Verdict};

/// List-insertion reference for feedback: the new titles, in order, ahead of
/// whatever was queued.
pub fn front_insert(queue: &[String], specs: &[String]) -> Vec<String> {
    let mut out = Vec::with_capacity(queue.len() + specs.len());
    for s in specs {
        out.push(s.clone());
    }
    for q in queue {
        out.push(q.clone());
    }
    out
}
