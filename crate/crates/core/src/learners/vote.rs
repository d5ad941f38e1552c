use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

pub fn vote_counts(votes: &[usize]) -> Vec<usize> {
    let n = votes.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![0; n];
    for &v in votes {
        counts[v] += 1;
    }
    counts
}

/// Most frequent class, lowest class on ties.
pub fn majority_vote(votes: &[usize]) -> Result<usize> {
    if votes.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(argmax_lowest(&vote_counts(votes)))
}

pub(crate) fn argmax_lowest(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &n) in counts.iter().enumerate() {
        if n > counts[best] {
            best = c;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(majority_vote(&[0, 0, 1]).unwrap(), 0);
        assert_eq!(majority_vote(&[0, 1]).unwrap(), 0);
        assert_eq!(majority_vote(&[1, 0]).unwrap(), 0);
        let mut v = vec![2; 51];
        v.extend(vec![0; 30]);
        v.extend(vec![1; 20]);
        assert_eq!(majority_vote(&v).unwrap(), 2);
        assert_eq!(majority_vote(&[]), Err(Error::EmptyInput));
    }
}
