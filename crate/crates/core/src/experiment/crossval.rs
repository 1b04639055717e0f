use std::collections::BTreeMap;

use rand::seq::SliceRandom;

use super::ExperimentError;
use crate::features::RowMeta;
use crate::ingest::SessionRef;
use crate::seed;

/// Row indices of one cross-validation fold, both sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Assigns whole sessions to folds: sorted sessions are shuffled with the
/// cross-validation stream of `seed` and dealt round-robin. Returns the
/// sessions of each fold.
pub fn crossval_sessions(sessions: &[SessionRef], folds: usize, seed_value: u64) -> Result<Vec<Vec<SessionRef>>, ExperimentError> {
    let mut sorted = sessions.to_vec();
    sorted.sort();
    sorted.dedup();
    if folds < 2 || sorted.len() < folds {
        return Err(ExperimentError::TooFewSessions { sessions: sorted.len(), folds });
    }
    let mut rng = seed::rng(seed::derive(seed_value, &[seed::stream::CROSSVAL]));
    sorted.shuffle(&mut rng);
    let mut out = vec![Vec::new(); folds];
    for (i, s) in sorted.into_iter().enumerate() {
        out[i % folds].push(s);
    }
    Ok(out)
}

/// Session-level folds over feature rows. A session's rows never straddle folds.
pub fn crossval_split(meta: &[RowMeta], folds: usize, seed_value: u64) -> Result<Vec<Fold>, ExperimentError> {
    let sessions: Vec<SessionRef> = meta.iter().map(|m| m.session.clone()).collect();
    let assignment = crossval_sessions(&sessions, folds, seed_value)?;
    let fold_of: BTreeMap<&SessionRef, usize> =
        assignment.iter().enumerate().flat_map(|(f, ss)| ss.iter().map(move |s| (s, f))).collect();
    Ok((0..folds)
        .map(|f| {
            let (test, train): (Vec<usize>, Vec<usize>) = (0..meta.len()).partition(|&r| fold_of[&meta[r].session] == f);
            Fold { train, test }
        })
        .collect())
}
