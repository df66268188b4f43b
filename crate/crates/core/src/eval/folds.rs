use crate::error::{Error, Result};
use crate::model::VideoId;

/// One leave-one-video-out split, as indices into the subject's trials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fold {
    pub test: usize,
    pub train: Vec<usize>,
}

/// One fold per trial, ordered by video id.
pub fn lovo_folds(videos: &[VideoId]) -> Result<Vec<Fold>> {
    if videos.len() < 2 {
        return Err(Error::InsufficientTrials(format!(
            "leave-one-video-out needs at least 2 trials, got {}",
            videos.len()
        )));
    }
    let mut order: Vec<usize> = (0..videos.len()).collect();
    order.sort_by(|&a, &b| videos[a].cmp(&videos[b]).then(a.cmp(&b)));
    Ok(order
        .into_iter()
        .map(|test| Fold {
            test,
            train: (0..videos.len()).filter(|&i| i != test).collect(),
        })
        .collect())
}
