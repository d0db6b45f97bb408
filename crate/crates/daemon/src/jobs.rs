//! Desk-scale stand-in for a resource manager's job list.

use std::path::Path;
use std::sync::Arc;

use odaframe_core::JobInfo;
use parking_lot::RwLock;

#[derive(Default)]
pub struct JobRegistry {
    jobs: RwLock<Vec<JobInfo>>,
}

impl JobRegistry {
    pub fn new() -> Arc<Self> {
        Arc::default()
    }

    /// One JSON object per line; blank lines are skipped.
    pub fn load_jsonl(&self, text: &str) -> Result<usize, String> {
        let mut n = 0;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let job: JobInfo = serde_json::from_str(line).map_err(|e| format!("line {}: {e}", i + 1))?;
            self.submit(job).map_err(|e| format!("line {}: {e}", i + 1))?;
            n += 1;
        }
        Ok(n)
    }

    pub fn load_file(&self, path: &Path) -> Result<usize, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        self.load_jsonl(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Adds a job or replaces the one with the same id.
    pub fn submit(&self, job: JobInfo) -> Result<(), String> {
        job.validate()?;
        let mut jobs = self.jobs.write();
        match jobs.iter_mut().find(|j| j.job_id == job.job_id) {
            Some(slot) => *slot = job,
            None => jobs.push(job),
        }
        Ok(())
    }

    pub fn finish(&self, id: &str, end: u64) -> Result<(), String> {
        let mut jobs = self.jobs.write();
        let job = jobs
            .iter_mut()
            .find(|j| j.job_id == id)
            .ok_or_else(|| format!("unknown job {id:?}"))?;
        if end <= job.start {
            return Err(format!("job {id} ends before it starts"));
        }
        job.end = Some(end);
        Ok(())
    }

    pub fn snapshot(&self) -> Vec<JobInfo> {
        self.jobs.read().clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_and_replaces() {
        let r = JobRegistry::new();
        let text = r#"{"job_id":"1","user_id":"u","node_list":["/n1/"],"start":5}

{"job_id":"2","user_id":"u","node_list":["/n2/"],"start":5,"end":9}
{"job_id":"1","user_id":"v","node_list":["/n3/"],"start":6}"#;
        assert_eq!(r.load_jsonl(text).unwrap(), 3);
        let jobs = r.snapshot();
        assert_eq!(jobs.len(), 2);
        assert_eq!(jobs[0].user_id, "v");
        r.finish("1", 10).unwrap();
        assert!(r.finish("1", 2).is_err());
        assert!(r.load_jsonl("{").unwrap_err().starts_with("line 1"));
    }
}
