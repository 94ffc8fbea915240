// Copyright 2026 The gatefid Authors
// SPDX-License-Identifier: Apache-2.0

use clap::Parser;

fn main() {
    let cli = gatefid::cli::Cli::parse();
    std::process::exit(gatefid::cli::run(cli));
}
