//! `init-demo`: a self-contained lamp workspace for `serve`.
//!
//! ```text
//! <dir>/code.git          bare code repository, `main` holds a README
//! <dir>/dev               clone with the buggy and the fixed lamp, unpushed
//! <dir>/analysis          analysis repository
//! <dir>/stubs             canned native reports of the two stub tools
//! <dir>/asef.global.xml   configuration of the lamp task
//! <dir>/asef.conf         service configuration
//! <dir>/state/store       resource store with one minicheck case
//! ```

use std::path::{Path, PathBuf};

use asef_core::parse_config;
use asef_toolchain::git;
use asef_toolchain::resources::Store;

use crate::CliError;

const BUGGY: &str = include_str!("../../../fixtures/lamp/src/lamp.mc");
const FIXED: &str = include_str!("../../../fixtures/lamp/fixed/src/lamp.mc");
const CONFIG: &str = include_str!("../../../fixtures/lamp/asef.global.xml");
const ASTREE_STUB: &str = include_str!("../../../fixtures/lamp/stubs/astree-stub.native");
const QPR_STUB: &str = include_str!("../../../fixtures/lamp/stubs/qpr-stub.native");

#[derive(Debug, Clone)]
pub struct Demo {
    pub dir: PathBuf,
    pub conf: PathBuf,
    pub code: PathBuf,
    pub dev: PathBuf,
    pub base: String,
    pub case_uri: String,
    pub buggy: String,
    pub fixed: String,
}

fn git_error(e: git::GitError) -> CliError {
    CliError::Tool(e.to_string())
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn conf_text(port: u16) -> String {
    format!(
        "# asef demo service\n\
         base_url = http://localhost:{port}\n\
         bind = 127.0.0.1:{port}\n\
         state_dir = state\n\
         store_dir = state/store\n\
         workers = 2\n\
         poll_interval = 0\n\
         analysis.path = analysis\n\
         code.lamp.path = code.git\n\
         code.lamp.branch = main\n\
         tool.minicheck.kind = builtin-minicheck\n\
         tool.astree-stub.kind = canned-stub\n\
         tool.astree-stub.report = stubs/astree-stub.native\n\
         tool.qpr-stub.kind = canned-stub\n\
         tool.qpr-stub.report = stubs/qpr-stub.native\n"
    )
}

/// Creates the demo workspace in `dir`, which must be absent or empty.
pub fn init_demo(dir: &Path, port: u16) -> Result<Demo, CliError> {
    if dir.exists() && std::fs::read_dir(dir).map(|mut d| d.next().is_some()).unwrap_or(true) {
        return Err(CliError::Usage(format!("{} exists and is not empty", dir.display())));
    }
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let dir = std::path::absolute(dir).map_err(|e| CliError::Io(e.to_string()))?;
    let base = format!("http://localhost:{port}");

    let code = dir.join("code.git");
    git::init(&code, true).map_err(git_error)?;
    git::git(&dir, &["clone", "--quiet", "code.git", "dev"]).map_err(git_error)?;
    let dev = dir.join("dev");
    git::git(&dev, &["checkout", "--quiet", "-B", "main"]).map_err(git_error)?;
    write(&dev.join("README.md"), "# lamp\n\nTimer-controlled lamp.\n")?;
    git::commit_paths(&dev, &["README.md"], "Initial commit").map_err(git_error)?;
    git::git(&dev, &["push", "--quiet", "origin", "main"]).map_err(git_error)?;
    write(&dev.join("src/lamp.mc"), BUGGY)?;
    let buggy = git::commit_paths(&dev, &["src/lamp.mc"], "Add lamp controller").map_err(git_error)?;
    write(&dev.join("src/lamp.mc"), FIXED)?;
    let fixed = git::commit_paths(&dev, &["src/lamp.mc"], "Fix timer arithmetic").map_err(git_error)?;

    let analysis = dir.join("analysis");
    git::init(&analysis, false).map_err(git_error)?;
    write(&analysis.join("README.md"), "Analysis results of the lamp repository.\n")?;
    git::commit_paths(&analysis, &["README.md"], "Initial commit").map_err(git_error)?;

    write(&dir.join("stubs/astree-stub.native"), ASTREE_STUB)?;
    write(&dir.join("stubs/qpr-stub.native"), QPR_STUB)?;
    let config_xml = CONFIG.replace("http://localhost:8080", &base);
    write(&dir.join("asef.global.xml"), &config_xml)?;
    let conf = dir.join("asef.conf");
    write(&conf, &conf_text(port))?;

    let config = parse_config(&config_xml).map_err(|e| CliError::Config(e.to_string()))?;
    let mut store = Store::open(dir.join("state/store"), &base).map_err(|e| CliError::Io(e.to_string()))?;
    let case = store
        .create_case("lamp runtime errors", "minicheck", "lamp", None, &config, &["src/*.mc".to_string()])
        .map_err(|e| CliError::Io(e.to_string()))?;

    Ok(Demo {
        dir,
        conf,
        code,
        dev,
        base,
        case_uri: case.uri,
        buggy,
        fixed,
    })
}

impl Demo {
    /// What to do next, for the terminal.
    pub fn instructions(&self) -> String {
        let d = self.dir.display();
        let dev = self.dev.display();
        let b = &self.base;
        format!(
            "demo workspace in {d}\n\
             case {case}\n\
             \n\
             1. start the service:\n\
             \x20  asef serve --config {d}/asef.conf\n\
             2. push the buggy lamp and notify the service:\n\
             \x20  git -C {dev} push origin {buggy}:main\n\
             \x20  curl -X POST {b}/webhook/code -H 'content-type: application/json' \\\n\
             \x20    -d '{{\"repoId\":\"lamp\",\"commit\":\"{buggy}\",\"changedPaths\":[\"src/lamp.mc\"]}}'\n\
             3. inspect the result:\n\
             \x20  curl {case}/results\n\
             4. push the fix the same way:\n\
             \x20  git -C {dev} push origin {fixed}:main\n\
             \x20  curl -X POST {b}/webhook/code -H 'content-type: application/json' \\\n\
             \x20    -d '{{\"repoId\":\"lamp\",\"commit\":\"{fixed}\",\"changedPaths\":[\"src/lamp.mc\"]}}'\n",
            case = self.case_uri,
            buggy = self.buggy,
            fixed = self.fixed,
        )
    }
}
