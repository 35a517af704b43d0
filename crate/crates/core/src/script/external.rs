use std::fs::File;
use std::os::unix::process::CommandExt;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use tempfile::TempDir;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, thiserror::Error)]
pub enum ExternalError {
    #[error("runner exited with status {status:?}: {stderr}")]
    NonzeroExit { status: Option<i32>, stderr: String },
    #[error("runner timed out after {0:?}")]
    Timeout(Duration),
    #[error("runner produced no output file")]
    NoOutputFile,
    #[error("command template must contain {{code}} and {{out}}")]
    BadTemplate,
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl ExternalError {
    pub fn code(&self) -> &'static str {
        match self {
            ExternalError::NonzeroExit { .. } => "nonzero-exit",
            ExternalError::Timeout(_) => "timeout",
            ExternalError::NoOutputFile => "no-output-file",
            ExternalError::BadTemplate => "bad-template",
            ExternalError::Io(_) => "io-error",
        }
    }
}

/// The produced patch file. The scratch directory lives as long as this value.
#[derive(Debug)]
pub struct ExternalOutput {
    pub path: PathBuf,
    scratch: TempDir,
}

impl ExternalOutput {
    pub fn scratch_dir(&self) -> &Path {
        self.scratch.path()
    }

    pub fn read(&self) -> std::io::Result<Vec<u8>> {
        std::fs::read(&self.path)
    }
}

fn shell_quote(p: &Path) -> String {
    format!("'{}'", p.display().to_string().replace('\'', r"'\''"))
}

/// Runs an external metaprogramming runner through `sh -c`. `{code}` and
/// `{out}` in the template are replaced by the quoted code path and the path
/// the runner must write its patch to. On timeout the whole process group is
/// killed.
pub fn run_external(template: &str, code_file: &Path, timeout: Duration) -> Result<ExternalOutput, ExternalError> {
    if !template.contains("{code}") || !template.contains("{out}") {
        return Err(ExternalError::BadTemplate);
    }
    let scratch = tempfile::tempdir()?;
    let out = scratch.path().join("output.json");
    let code = std::fs::canonicalize(code_file)?;
    let command = template
        .replace("{code}", &shell_quote(&code))
        .replace("{out}", &shell_quote(&out));
    let stderr_path = scratch.path().join("stderr.txt");
    let mut child = Command::new("sh")
        .arg("-c")
        .arg(&command)
        .current_dir(scratch.path())
        .stdin(Stdio::null())
        .stdout(File::create(scratch.path().join("stdout.txt"))?)
        .stderr(File::create(&stderr_path)?)
        .process_group(0)
        .spawn()?;
    let deadline = Instant::now() + timeout;
    let status = loop {
        if let Some(status) = child.try_wait()? {
            break status;
        }
        if Instant::now() >= deadline {
            // SAFETY: kill(2) on our own child's process group.
            unsafe {
                libc::kill(-(child.id() as i32), libc::SIGKILL);
            }
            let _ = child.wait();
            return Err(ExternalError::Timeout(timeout));
        }
        thread::sleep(Duration::from_millis(10));
    };
    if !status.success() {
        let stderr = std::fs::read_to_string(&stderr_path).unwrap_or_default();
        return Err(ExternalError::NonzeroExit {
            status: status.code(),
            stderr: stderr.trim().to_string(),
        });
    }
    if !out.is_file() {
        return Err(ExternalError::NoOutputFile);
    }
    Ok(ExternalOutput { path: out, scratch })
}
