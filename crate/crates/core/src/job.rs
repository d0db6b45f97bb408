use serde::{Deserialize, Serialize};

/// A job as reported by the resource manager (or the desk-scale job registry).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JobInfo {
    pub job_id: String,
    pub user_id: String,
    /// Node paths, e.g. `/r03/c02/s01/`.
    pub node_list: Vec<String>,
    pub start: u64,
    #[serde(default)]
    pub end: Option<u64>,
}

impl JobInfo {
    pub fn validate(&self) -> Result<(), String> {
        if self.node_list.is_empty() {
            return Err(format!("job {} has an empty node list", self.job_id));
        }
        if let Some(end) = self.end {
            if end <= self.start {
                return Err(format!("job {} ends before it starts", self.job_id));
            }
        }
        Ok(())
    }

    /// Active on the half-open interval `[start, end)`.
    pub fn is_active(&self, now: u64) -> bool {
        self.start <= now && self.end.is_none_or(|end| now < end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn job(id: &str, start: u64, end: Option<u64>) -> JobInfo {
        JobInfo {
            job_id: id.into(),
            user_id: "u".into(),
            node_list: vec!["/n1/".into()],
            start,
            end,
        }
    }

    #[test]
    fn activity_window() {
        let a = job("A", 10, Some(20));
        assert!(!a.is_active(9));
        assert!(a.is_active(10));
        assert!(a.is_active(19));
        assert!(!a.is_active(20));
        assert!(job("B", 15, None).is_active(u64::MAX));
    }

    #[test]
    fn validation() {
        assert!(job("A", 10, Some(10)).validate().is_err());
        let mut j = job("A", 1, None);
        j.node_list.clear();
        assert!(j.validate().is_err());
    }
}
