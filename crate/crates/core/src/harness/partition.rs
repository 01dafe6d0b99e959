//! Similarity-controlled non-i.i.d. partitioning.
//!
//! With similarity `s`, `s%` of the samples are dealt uniformly at random and
//! the remaining `(100 - s)%` are sorted by label and handed out as
//! contiguous blocks, so `s = 0` gives label-skewed clients and `s = 100`
//! gives an i.i.d. split.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{Purpose, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSpec {
    /// Client similarity in percent, `0..=100`.
    pub similarity: u8,
    pub clients: usize,
    pub seed: u64,
}

/// Splits `count` into `parts` sizes that differ by at most one, larger first.
fn balanced(count: usize, parts: usize) -> impl Iterator<Item = usize> {
    (0..parts).map(move |i| count / parts + usize::from(i < count % parts))
}

pub fn partition_by_similarity(labels: &[usize], spec: &PartitionSpec) -> Result<Vec<Vec<usize>>> {
    if labels.is_empty() {
        return Err(Error::Empty("cannot partition an empty dataset".into()));
    }
    if spec.similarity > 100 {
        return Err(Error::config(format!("similarity must be in [0, 100], got {}", spec.similarity)));
    }
    if spec.clients == 0 || spec.clients > labels.len() {
        return Err(Error::config(format!(
            "need 1 <= clients <= samples, got {} clients for {} samples",
            spec.clients,
            labels.len()
        )));
    }
    let n = labels.len();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = RngStream::keyed(spec.seed, Purpose::Partition, 0, 0, 0).rng();
    order.shuffle(&mut rng);

    let iid_total = (n * spec.similarity as usize + 50) / 100;
    let (iid, rest) = order.split_at(iid_total);
    let mut sorted = rest.to_vec();
    sorted.sort_by_key(|&i| (labels[i], i));

    let mut clients = Vec::with_capacity(spec.clients);
    let (mut iid_pos, mut sorted_pos) = (0, 0);
    for (quota, iid_share) in balanced(n, spec.clients).zip(balanced(iid_total, spec.clients)) {
        let block = quota - iid_share;
        let mut list = Vec::with_capacity(quota);
        list.extend_from_slice(&iid[iid_pos..iid_pos + iid_share]);
        list.extend_from_slice(&sorted[sorted_pos..sorted_pos + block]);
        iid_pos += iid_share;
        sorted_pos += block;
        clients.push(list);
    }
    Ok(clients)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(similarity: u8, clients: usize) -> PartitionSpec {
        PartitionSpec {
            similarity,
            clients,
            seed: 17,
        }
    }

    fn assert_partition(parts: &[Vec<usize>], n: usize) {
        let mut seen = vec![0u32; n];
        for p in parts {
            for &i in p {
                seen[i] += 1;
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
        let sizes: Vec<usize> = parts.iter().map(Vec::len).collect();
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        assert!(hi - lo <= 1);
    }

    #[test]
    fn zero_similarity_sorts_labels_across_clients() {
        let labels: Vec<usize> = (0..100).map(|i| i % 2).collect();
        let parts = partition_by_similarity(&labels, &spec(0, 2)).unwrap();
        assert!(parts[0].iter().all(|&i| labels[i] == 0));
        assert!(parts[1].iter().all(|&i| labels[i] == 1));
    }

    #[test]
    fn half_similarity_counts() {
        let labels: Vec<usize> = (0..100).map(|i| i % 4).collect();
        let parts = partition_by_similarity(&labels, &spec(50, 2)).unwrap();
        assert_partition(&parts, 100);
        // Brute-force recount: 50 iid indices are the first 25 of each client.
        let mut order: Vec<usize> = (0..100).collect();
        order.shuffle(&mut RngStream::keyed(17, Purpose::Partition, 0, 0, 0).rng());
        let iid: std::collections::HashSet<usize> = order[..50].iter().copied().collect();
        for p in &parts {
            assert_eq!(p.len(), 50);
            assert_eq!(p[..25].iter().filter(|i| iid.contains(i)).count(), 25);
            assert_eq!(p[25..].iter().filter(|i| iid.contains(i)).count(), 0);
        }
    }

    #[test]
    fn full_similarity_is_roughly_balanced_per_label() {
        let labels: Vec<usize> = (0..4000).map(|i| i % 2).collect();
        let parts = partition_by_similarity(&labels, &spec(100, 4)).unwrap();
        for p in parts {
            let ones = p.iter().filter(|&&i| labels[i] == 1).count() as f64 / p.len() as f64;
            assert!((ones - 0.5).abs() < 0.06, "{ones}");
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(partition_by_similarity(&[], &spec(10, 1)), Err(Error::Empty(_))));
        assert!(partition_by_similarity(&[0, 1], &spec(10, 3)).is_err());
        assert!(partition_by_similarity(&[0, 1], &spec(101, 1)).is_err());
        assert!(partition_by_similarity(&[0, 1], &spec(10, 0)).is_err());
    }

    proptest! {
        #[test]
        fn always_a_balanced_partition(
            n in 1usize..300,
            k in 1usize..6,
            s in 0u8..=100,
            clients in 1usize..12,
            seed in any::<u64>(),
        ) {
            prop_assume!(clients <= n);
            let labels: Vec<usize> = (0..n).map(|i| (i * 7 + 3) % k).collect();
            let parts = partition_by_similarity(&labels, &PartitionSpec { similarity: s, clients, seed }).unwrap();
            prop_assert_eq!(parts.len(), clients);
            assert_partition(&parts, n);
        }
    }
}
