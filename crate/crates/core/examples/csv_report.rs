// Builds the same report as the `run` subcommand from an in-memory CSV and
// prints both renderings.

use clap::Parser;
use monotone_lrt::cli::io::read_input;
use monotone_lrt::cli::{build_report, render_text, Cli, Command};

const SUMMARY: &str = "level,n,mean,var
0,340,0.815,0.035
1,211,0.833,0.024
2,54,0.870,0.017
3,18,0.854,0.022
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let data = read_input(SUMMARY.as_bytes())?;
    let cli = Cli::try_parse_from([
        "monotone-lrt", "run", "-", "--scenario", "ordered", "--replicates", "5000", "--seed", "1",
    ])?;
    let Command::Run(args) = cli.command else {
        unreachable!("parsed a run command")
    };
    let report = build_report(&args, &data)?;
    print!("{}", render_text(&report));
    let json = serde_json::to_string(&report)?;
    println!("\nJSON report: {} bytes, statistic {}", json.len(), report.statistic.value);
    Ok(())
}
