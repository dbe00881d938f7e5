use crate::error::{Error, Result};

/// Multiple-query unique relevance of an item with labels `ell`.
///
/// With `β` the union of the query label sets and `u_i` the labels of query
/// `i` shared with no other query, the score is `|ℓ ∧ β| / |β|` when `ℓ`
/// meets every `u_i`, and 0 otherwise.
pub fn mq_uniq_rel<L: AsRef<[bool]>>(ell: &[bool], query_labels: &[L]) -> Result<f64> {
    let c = ell.len();
    if query_labels.is_empty() {
        return Err(Error::UndefinedMetric("no query labels".into()));
    }
    if let Some(q) = query_labels.iter().find(|q| q.as_ref().len() != c) {
        return Err(Error::Dimension {
            expected: c,
            actual: q.as_ref().len(),
        });
    }
    let any = |j: usize, skip: Option<usize>| {
        query_labels
            .iter()
            .enumerate()
            .any(|(i, q)| Some(i) != skip && q.as_ref()[j])
    };
    let beta = (0..c).filter(|&j| any(j, None)).count();
    if beta == 0 {
        return Err(Error::UndefinedMetric("queries carry no labels".into()));
    }
    for (i, q) in query_labels.iter().enumerate() {
        let q = q.as_ref();
        let hits_unique = (0..c).any(|j| ell[j] && q[j] && !any(j, Some(i)));
        if !hits_unique {
            return Ok(0.0);
        }
    }
    let covered = (0..c).filter(|&j| ell[j] && any(j, None)).count();
    Ok(covered as f64 / beta as f64)
}

fn check_k(len: usize, k: usize) -> Result<()> {
    if k < 1 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if k > len {
        return Err(Error::Config(format!("k = {k} exceeds {len} relevance values")));
    }
    Ok(())
}

/// `rel_1 + Σ_{i=2..k} rel_i / log2(i)` (1-based positions).
pub fn dcg_at_k(rels: &[f64], k: usize) -> Result<f64> {
    check_k(rels.len(), k)?;
    Ok(rels[0] + (2..=k).map(|i| rels[i - 1] / (i as f64).log2()).sum::<f64>())
}

/// DCG of an all-ones list of length `k`.
pub fn ideal_dcg(k: usize) -> f64 {
    1.0 + (2..=k).map(|i| 1.0 / (i as f64).log2()).sum::<f64>()
}

/// [`dcg_at_k`] divided by [`ideal_dcg`]; lies in `[0, 1]` when every
/// relevance does.
pub fn ndcg_at_k(rels: &[f64], k: usize) -> Result<f64> {
    Ok(dcg_at_k(rels, k)? / ideal_dcg(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn hand_evaluated_relevance() {
        let q = [bits("1000"), bits("0100")];
        assert_eq!(mq_uniq_rel(&bits("1100"), &q).unwrap(), 1.0);
        assert_eq!(mq_uniq_rel(&bits("1000"), &q).unwrap(), 0.0);
        let q = [bits("1100"), bits("0110")];
        assert_eq!(mq_uniq_rel(&bits("1110"), &q).unwrap(), 1.0);
        // Covers the unique labels but not the shared one: 2 of 3.
        assert!((mq_uniq_rel(&bits("1010"), &q).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        // Only the shared label: no unique relation to either query.
        assert_eq!(mq_uniq_rel(&bits("0100"), &q).unwrap(), 0.0);
    }

    #[test]
    fn relevance_errors() {
        let q = [bits("0000"), bits("0000")];
        assert!(matches!(mq_uniq_rel(&bits("1000"), &q), Err(Error::UndefinedMetric(_))));
        assert!(mq_uniq_rel(&bits("10"), &[bits("100")]).is_err());
        assert!(mq_uniq_rel::<Vec<bool>>(&bits("10"), &[]).is_err());
    }

    #[test]
    fn dcg_values() {
        let want = 1.0 + 1.0 + 1.0 / 3f64.log2();
        assert!((dcg_at_k(&[1.0, 1.0, 1.0], 3).unwrap() - want).abs() < 1e-12);
        assert!((want - 2.6309297535714573).abs() < 1e-12);
        assert_eq!(dcg_at_k(&[0.0; 4], 4).unwrap(), 0.0);
        assert_eq!(dcg_at_k(&[0.7, 1.0], 1).unwrap(), 0.7);
        assert!(dcg_at_k(&[1.0], 0).is_err());
        assert!(dcg_at_k(&[1.0], 2).is_err());
    }

    #[test]
    fn ndcg_values() {
        assert!((ndcg_at_k(&[1.0; 10], 10).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(ndcg_at_k(&[0.0; 3], 3).unwrap(), 0.0);
        let v = ndcg_at_k(&[1.0, 0.0, 0.0], 3).unwrap();
        assert!((v - 1.0 / 2.6309297535714573).abs() < 1e-12);
        assert!((v - 0.3801).abs() < 5e-5);
    }
}
