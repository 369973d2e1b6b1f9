//! Running one child process under a time limit while recording its wall
//! time, CPU time and peak resident memory.
//!
//! The child is started in its own process group. A sampler polls the
//! group's resident set every few milliseconds; the final figure is the
//! larger of the sampled peak and the kernel's `ru_maxrss` for the reaped
//! child. On timeout the whole group is killed.

use std::ffi::OsString;
use std::fs::File;
use std::io::{Read, Seek, SeekFrom};
use std::os::unix::process::CommandExt;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use causalbench_core::model::{Resources, Timing};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

const SAMPLE_INTERVAL: Duration = Duration::from_millis(5);
pub const STDOUT_LOG: &str = "stdout.log";
pub const STDERR_LOG: &str = "stderr.log";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionLimits {
    /// Per plugin invocation.
    pub timeout_s: f64,
    /// Cap on the log excerpt kept per scenario.
    pub max_output_bytes: usize,
    pub working_dir_root: PathBuf,
}

impl ExecutionLimits {
    pub fn new(working_dir_root: impl Into<PathBuf>) -> Self {
        ExecutionLimits { timeout_s: 600.0, max_output_bytes: 16 * 1024, working_dir_root: working_dir_root.into() }
    }

    pub fn with_timeout(mut self, timeout_s: f64) -> Self {
        self.timeout_s = timeout_s;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.timeout_s.is_finite() && self.timeout_s > 0.0) {
            return Err(HarnessError::InvalidLimits(format!("timeout_s must be > 0, got {}", self.timeout_s)));
        }
        if self.max_output_bytes == 0 {
            return Err(HarnessError::InvalidLimits("max_output_bytes must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandSpec {
    pub program: OsString,
    pub args: Vec<OsString>,
    pub workdir: PathBuf,
}

impl CommandSpec {
    pub fn new(program: impl Into<OsString>, workdir: impl Into<PathBuf>) -> Self {
        CommandSpec { program: program.into(), args: Vec::new(), workdir: workdir.into() }
    }

    pub fn arg(mut self, arg: impl Into<OsString>) -> Self {
        self.args.push(arg.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "code", rename_all = "lowercase")]
pub enum ExitStatus {
    Exited(i32),
    Signaled(i32),
    Timeout,
}

impl ExitStatus {
    pub fn success(self) -> bool {
        self == ExitStatus::Exited(0)
    }
}

impl std::fmt::Display for ExitStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExitStatus::Exited(c) => write!(f, "exit code {c}"),
            ExitStatus::Signaled(s) => write!(f, "killed by signal {s}"),
            ExitStatus::Timeout => f.write_str("timed out"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub status: ExitStatus,
    pub timing: Timing,
    pub resources: Resources,
    pub log_excerpt: String,
}

/// Runs `command` to completion or timeout. Standard output and error go
/// to `stdout.log` and `stderr.log` in the working directory; their tails
/// form the log excerpt.
pub fn measure_execution(command: &CommandSpec, limits: &ExecutionLimits) -> Result<Measurement> {
    limits.validate()?;
    let spawn_err = |detail: String| HarnessError::SpawnFailure {
        program: command.program.to_string_lossy().into_owned(),
        detail,
    };
    let stdout = File::create(command.workdir.join(STDOUT_LOG)).map_err(|e| spawn_err(e.to_string()))?;
    let stderr = File::create(command.workdir.join(STDERR_LOG)).map_err(|e| spawn_err(e.to_string()))?;

    let start = Instant::now();
    let child = Command::new(&command.program)
        .args(&command.args)
        .current_dir(&command.workdir)
        .stdin(Stdio::null())
        .stdout(stdout)
        .stderr(stderr)
        .process_group(0)
        .spawn()
        .map_err(|e| spawn_err(e.to_string()))?;
    let pid = child.id() as libc::pid_t;
    let deadline = start + Duration::from_secs_f64(limits.timeout_s);

    let mut peak_sampled = 0u64;
    let mut timed_out = false;
    let (raw_status, usage) = loop {
        let mut status: libc::c_int = 0;
        // SAFETY: rusage is plain old data; wait4 fills it in.
        let mut usage: libc::rusage = unsafe { std::mem::zeroed() };
        // SAFETY: pid is our own unreaped child.
        let r = unsafe { libc::wait4(pid, &mut status, libc::WNOHANG, &mut usage) };
        if r == pid {
            break (status, usage);
        }
        if r < 0 {
            let err = std::io::Error::last_os_error();
            if err.kind() == std::io::ErrorKind::Interrupted {
                continue;
            }
            return Err(err.into());
        }
        peak_sampled = peak_sampled.max(group_rss_bytes(pid));
        if !timed_out && Instant::now() >= deadline {
            // SAFETY: signalling the process group we created.
            unsafe { libc::killpg(pid, libc::SIGKILL) };
            timed_out = true;
        }
        std::thread::sleep(SAMPLE_INTERVAL);
    };
    let wall = start.elapsed();
    // Descendants that outlived the child would keep writing to the logs.
    // SAFETY: as above; ESRCH when the group is already gone is fine.
    unsafe { libc::killpg(pid, libc::SIGKILL) };
    drop(child);

    let status = if timed_out {
        ExitStatus::Timeout
    } else if libc::WIFEXITED(raw_status) {
        ExitStatus::Exited(libc::WEXITSTATUS(raw_status))
    } else {
        ExitStatus::Signaled(libc::WTERMSIG(raw_status))
    };
    let seconds = |t: libc::timeval| t.tv_sec as f64 + t.tv_usec as f64 * 1e-6;
    let cpu_time_s = seconds(usage.ru_utime) + seconds(usage.ru_stime);
    let maxrss_bytes = (usage.ru_maxrss.max(0) as u64) * 1024;

    let mut log_excerpt = excerpt(&command.workdir, limits.max_output_bytes);
    if timed_out {
        push_line(&mut log_excerpt, &format!("killed after the {} s timeout", limits.timeout_s));
    }
    Ok(Measurement {
        status,
        timing: Timing { wall_time_s: wall.as_secs_f64(), cpu_time_s, gpu_time_s: None },
        resources: Resources { peak_cpu_memory_bytes: peak_sampled.max(maxrss_bytes), peak_gpu_memory_bytes: None },
        log_excerpt,
    })
}

pub(crate) fn push_line(log: &mut String, line: &str) {
    if !log.is_empty() && !log.ends_with('\n') {
        log.push('\n');
    }
    log.push_str(line);
}

fn excerpt(workdir: &Path, max_bytes: usize) -> String {
    let half = (max_bytes / 2).max(1);
    let mut out = String::new();
    for name in [STDOUT_LOG, STDERR_LOG] {
        let tail = tail(&workdir.join(name), half);
        if !tail.trim().is_empty() {
            push_line(&mut out, tail.trim_end());
        }
    }
    out
}

/// The last `max` bytes of a file, lossily decoded.
pub(crate) fn tail(path: &Path, max: usize) -> String {
    let Ok(mut f) = File::open(path) else { return String::new() };
    let len = f.metadata().map(|m| m.len()).unwrap_or(0);
    let skip = len.saturating_sub(max as u64);
    if f.seek(SeekFrom::Start(skip)).is_err() {
        return String::new();
    }
    let mut buf = Vec::new();
    let _ = f.read_to_end(&mut buf);
    String::from_utf8_lossy(&buf).into_owned()
}

/// Sum of resident set sizes over every process in group `pgid`.
fn group_rss_bytes(pgid: libc::pid_t) -> u64 {
    // SAFETY: sysconf has no preconditions.
    let page = unsafe { libc::sysconf(libc::_SC_PAGESIZE) }.max(1) as u64;
    let Ok(entries) = std::fs::read_dir("/proc") else { return 0 };
    let mut total = 0;
    for entry in entries.flatten() {
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        if !name.bytes().all(|b| b.is_ascii_digit()) {
            continue;
        }
        let Ok(stat) = std::fs::read_to_string(entry.path().join("stat")) else { continue };
        // Fields after the parenthesised command name start at `state`.
        let Some(rest) = stat.rfind(')').map(|i| &stat[i + 1..]) else { continue };
        let fields: Vec<&str> = rest.split_whitespace().collect();
        // state=0 ppid=1 pgrp=2 ... rss=21
        if fields.get(2).and_then(|s| s.parse::<i64>().ok()) != Some(pgid as i64) {
            continue;
        }
        if let Some(rss) = fields.get(21).and_then(|s| s.parse::<u64>().ok()) {
            total += rss * page;
        }
    }
    total
}
