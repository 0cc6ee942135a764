//! Negative sampling by head/tail corruption under the local closed-world
//! assumption. Negatives are not checked against known positives during
//! training; filtering happens only at evaluation time.

use rand::Rng;

use crate::error::{Error, Result};
use crate::kg::Triple;

/// For each positive, draw `eta` corruptions. Each corruption replaces
/// exactly one of head/tail (a fair coin per draw) with a uniformly sampled
/// entity different from the one it replaces. Output is grouped: the
/// corruptions of positive `i` occupy `[i * eta, (i + 1) * eta)`.
pub fn sample_negatives<R: Rng>(
    batch: &[Triple],
    eta: usize,
    num_entities: usize,
    rng: &mut R,
) -> Result<Vec<Triple>> {
    if num_entities < 2 {
        return Err(Error::invalid(
            "negative sampling needs at least 2 entities",
        ));
    }
    let mut negatives = Vec::with_capacity(batch.len() * eta);
    for positive in batch {
        for _ in 0..eta {
            let corrupt_head = rng.random_range(0..2u8) == 0;
            let original = if corrupt_head {
                positive.subject
            } else {
                positive.object
            };
            // Sample uniformly over the other num_entities - 1 ids.
            let mut replacement = rng.random_range(0..num_entities - 1);
            if replacement >= original {
                replacement += 1;
            }
            let negative = if corrupt_head {
                Triple::new(replacement, positive.predicate, positive.object)
            } else {
                Triple::new(positive.subject, positive.predicate, replacement)
            };
            negatives.push(negative);
        }
    }
    Ok(negatives)
}
