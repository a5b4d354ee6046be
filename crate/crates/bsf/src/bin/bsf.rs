// SPDX-License-Identifier: Apache-2.0 OR MIT

use std::process::ExitCode;

fn main() -> ExitCode {
    let code = bsf::cli::run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr());
    ExitCode::from(code)
}
