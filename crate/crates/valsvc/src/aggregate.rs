use anpkit_core::{AnpRecord, AnpStatus};
use serde::{Deserialize, Serialize};

use crate::job::Job;
use crate::state::JobState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Majority {
    Yes,
    No,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnpAggregate {
    pub adj: String,
    pub noun: String,
    pub yes: u64,
    pub no: u64,
    pub majority: Majority,
    /// `max(yes, no) / (yes + no)`; absent without votes.
    pub agreement: Option<f64>,
    /// Fewer than the job's minimum number of judgments.
    pub incomplete: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateResult {
    pub job_id: String,
    pub anps: Vec<AnpAggregate>,
    pub n_complete: usize,
    /// Fraction of complete pairs whose majority is yes.
    pub percent_correct: Option<f64>,
    /// Mean agreement over complete pairs.
    pub mean_agreement: Option<f64>,
}

pub fn majority(yes: u64, no: u64) -> Majority {
    match yes.cmp(&no) {
        std::cmp::Ordering::Greater => Majority::Yes,
        std::cmp::Ordering::Less => Majority::No,
        std::cmp::Ordering::Equal => Majority::Undecided,
    }
}

pub fn agreement(yes: u64, no: u64) -> Option<f64> {
    let total = yes + no;
    (total > 0).then(|| yes.max(no) as f64 / total as f64)
}

pub fn aggregate(job: &Job, state: &JobState) -> AggregateResult {
    let mut anps = Vec::with_capacity(job.spec.anps.len());
    let (mut complete, mut correct, mut agree_sum) = (0usize, 0usize, 0.0f64);
    for (i, r) in job.spec.anps.iter().enumerate() {
        let (yes, no) = state.votes(i);
        let incomplete = yes + no < job.spec.min_judgments as u64;
        let m = majority(yes, no);
        let a = agreement(yes, no);
        if !incomplete {
            complete += 1;
            correct += usize::from(m == Majority::Yes);
            agree_sum += a.unwrap_or(0.0);
        }
        anps.push(AnpAggregate {
            adj: r.adj.clone(),
            noun: r.noun.clone(),
            yes,
            no,
            majority: m,
            agreement: a,
            incomplete,
        });
    }
    AggregateResult {
        job_id: job.id.clone(),
        anps,
        n_complete: complete,
        percent_correct: (complete > 0).then(|| correct as f64 / complete as f64),
        mean_agreement: (complete > 0).then(|| agree_sum / complete as f64),
    }
}

/// Job pairs with crowd statuses: complete pairs with a yes majority become
/// ACCEPTED, with a no majority REJECTED; the rest stay PRE_CROWD.
pub fn export_records(job: &Job, result: &AggregateResult) -> Vec<AnpRecord> {
    job.spec
        .anps
        .iter()
        .zip(&result.anps)
        .map(|(r, a)| {
            let mut r = r.clone();
            if !a.incomplete {
                match a.majority {
                    Majority::Yes => r.status = AnpStatus::Accepted,
                    Majority::No => r.status = AnpStatus::Rejected,
                    Majority::Undecided => {}
                }
            }
            r
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn definitions() {
        assert_eq!(majority(2, 1), Majority::Yes);
        assert_eq!(agreement(2, 1), Some(2.0 / 3.0));
        assert_eq!(agreement(3, 0), Some(1.0));
        assert_eq!(majority(2, 2), Majority::Undecided);
        assert_eq!(agreement(0, 0), None);
    }

    proptest! {
        #[test]
        fn agreement_bounds(yes in 0u64..50, no in 0u64..50) {
            prop_assume!(yes + no > 0);
            let a = agreement(yes, no).unwrap();
            prop_assert!((0.5..=1.0).contains(&a));
            prop_assert_eq!(a == 1.0, yes == 0 || no == 0);
            prop_assert_eq!(majority(yes, no) == Majority::Undecided, yes == no);
        }
    }
}
