#![allow(dead_code)]

use fta_cli::{run, Io};

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the command line in process with an empty environment.
pub fn fta(args: &[&str]) -> Output {
    fta_with_stdin(args, "")
}

pub fn fta_with_stdin(args: &[&str], stdin: &str) -> Output {
    fta_full(args, stdin, &[])
}

pub fn fta_with_env(args: &[&str], vars: &[(&str, &str)]) -> Output {
    fta_full(args, "", vars)
}

fn fta_full(args: &[&str], stdin: &str, vars: &[(&str, &str)]) -> Output {
    let env = |k: &str| vars.iter().find(|(name, _)| *name == k).map(|(_, v)| v.to_string());
    let mut input = stdin.as_bytes();
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let argv = std::iter::once("fta").chain(args.iter().copied());
    let code = run(
        argv,
        Io {
            env: &env,
            stdin: &mut input,
            stdout: &mut stdout,
            stderr: &mut stderr,
        },
    );
    Output {
        code,
        stdout: String::from_utf8(stdout).unwrap(),
        stderr: String::from_utf8(stderr).unwrap(),
    }
}
