//! File-handoff adapter that lets any executable stand behind the operator
//! contracts.
//!
//! Invocation protocol: the input volume is written to a temp rvol file and
//! the command is run as `command <in> <out> [sigma]`. Denoiser calls pass
//! the conditioning sigma both as the third argument and as a sidecar JSON
//! (`<in>.json` containing `{"sigma_e": ...}`) so wrappers can pick either.
//! The command must write an rvol to `<out>` with unchanged dims.
//!
//! A denoiser command implements `raw_predict`: it writes the scaled
//! residual prediction, not the denoised image; the framework performs the
//! subtraction. A corrector command writes the corrected volume directly,
//! so a plain file copy behaves as the identity corrector.
//!
//! The command string is split on whitespace: first token program, the rest
//! leading arguments. Paths with spaces need a wrapper script.

use crate::error::{Error, Result};
use crate::io::rvol::{read_rvol, write_rvol};
use crate::operators::{Corrector, Denoiser};
use crate::volume::Volume;
use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

const POLL_INTERVAL: Duration = Duration::from_millis(5);

/// An external executable behind the denoiser and corrector contracts.
#[derive(Clone, Debug)]
pub struct ExternalOperator {
    program: String,
    base_args: Vec<String>,
    display: String,
    timeout: Duration,
}

impl ExternalOperator {
    pub fn new(command: &str) -> Self {
        let mut parts = command.split_whitespace().map(str::to_string);
        let program = parts.next().unwrap_or_default();
        ExternalOperator {
            program,
            base_args: parts.collect(),
            display: format!("external:{command}"),
            timeout: Duration::from_secs(300),
        }
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    fn run(&self, x: &Volume, sigma_e: Option<f64>) -> Result<Volume> {
        let dir = tempfile::tempdir()?;
        let in_path = dir.path().join("in.rvol");
        let out_path = dir.path().join("out.rvol");
        write_rvol(x, &in_path)?;
        let mut cmd = Command::new(&self.program);
        cmd.args(&self.base_args)
            .arg(&in_path)
            .arg(&out_path)
            .stdin(Stdio::null());
        if let Some(sigma) = sigma_e {
            let sidecar = serde_json::json!({ "sigma_e": sigma });
            std::fs::write(
                sidecar_path(&in_path),
                serde_json::to_vec(&sidecar)?,
            )?;
            cmd.arg(format!("{sigma}"));
        }
        let mut child = cmd.spawn()?;
        let started = Instant::now();
        let status = loop {
            if let Some(status) = child.try_wait()? {
                break status;
            }
            if started.elapsed() >= self.timeout {
                let _ = child.kill();
                let _ = child.wait();
                return Err(Error::Timeout(self.timeout));
            }
            std::thread::sleep(POLL_INTERVAL);
        };
        if !status.success() {
            return Err(Error::ProcessFailed(status.code()));
        }
        if !out_path.exists() {
            return Err(Error::OperatorContractViolation(format!(
                "`{}` exited cleanly but wrote no output volume",
                self.display
            )));
        }
        let out = read_rvol(&out_path)?;
        if out.dims() != x.dims() {
            return Err(Error::OperatorContractViolation(format!(
                "`{}` returned dims {:?} for input {:?}",
                self.display,
                out.dims(),
                x.dims()
            )));
        }
        Ok(out)
    }
}

fn sidecar_path(in_path: &Path) -> std::path::PathBuf {
    let mut os = in_path.as_os_str().to_os_string();
    os.push(".json");
    std::path::PathBuf::from(os)
}

impl Denoiser for ExternalOperator {
    fn raw_predict(&self, x: &Volume, sigma_e: f64) -> Result<Volume> {
        self.run(x, Some(sigma_e))
    }

    fn name(&self) -> &str {
        &self.display
    }
}

impl Corrector for ExternalOperator {
    fn correct(&self, x: &Volume) -> Result<Volume> {
        self.run(x, None)
    }

    fn name(&self) -> &str {
        &self.display
    }
}
