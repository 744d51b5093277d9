use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dclab_core::{Center, DivisorComponent, Parameters};

#[derive(Debug, Parser)]
#[command(name = "dclab", version, about = "Bifurcations of the Lotka-Volterra double center")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the artifact here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate a Melnikov function on a grid of levels.
    Melnikov {
        #[arg(long, value_parser = parse_center)]
        center: Center,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        order: u8,
        /// `lo:hi:n`
        #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
        h_grid: HGrid,
        /// `l1,l2,l3,l4,l5`; required for order 1.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_lambda)]
        lambda: Option<Parameters>,
        /// Also evaluate the numerical oracle (residues or iterated integrals).
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Shuffle identities for all tracked pairs on all loops.
    ShuffleCheck {
        #[arg(long, allow_hyphen_values = true)]
        h: f64,
        /// Seeds the basepoint rotation of the loops.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Iterated integral over the commutator of the small loops, both ways.
    Commutator {
        #[arg(long, allow_hyphen_values = true, value_parser = parse_lambda)]
        lambda: Parameters,
        #[arg(long, allow_hyphen_values = true)]
        h: f64,
        /// Imaginary part of the level.
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        h_im: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Count limit cycles in both annuli by direct integration.
    Census {
        #[arg(long, allow_hyphen_values = true, value_parser = parse_lambda)]
        lambda: Parameters,
        /// `lo:hi`, levels of the first annulus.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
        h1: Option<(f64, f64)>,
        /// `lo:hi`, levels of the second annulus.
        #[arg(long, allow_hyphen_values = true, value_parser = parse_range)]
        h2: Option<(f64, f64)>,
        #[arg(long, default_value_t = 256)]
        grid: usize,
        #[arg(long, default_value_t = 1e-11)]
        tol: f64,
    },
    /// Limit point of an arc on the exceptional divisor.
    ClassifyArc {
        /// `l1=<poly>;l2=<poly>;l3=<poly>;l4=<poly>;l5=<poly>`, polynomials in `e`.
        #[arg(long)]
        arc: String,
    },
    /// Zero-count histogram of random bifurcation pairs on each divisor component.
    SweepComponents {
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Restrict to one component.
        #[arg(long, value_parser = parse_component)]
        component: Option<DivisorComponent>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl HGrid {
    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        (0..self.n)
            .map(|k| {
                let t = k as f64 / (self.n - 1) as f64;
                self.lo * (1.0 - t) + self.hi * t
            })
            .collect()
    }
}

fn parse_f64(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

fn parse_center(s: &str) -> Result<Center, String> {
    match s {
        "1" | "first" => Ok(Center::First),
        "2" | "second" => Ok(Center::Second),
        _ => Err(format!("center must be 1 or 2, got '{s}'")),
    }
}

fn parse_component(s: &str) -> Result<DivisorComponent, String> {
    match s.to_ascii_uppercase().as_str() {
        "E1" => Ok(DivisorComponent::E1),
        "E2" => Ok(DivisorComponent::E2),
        "E3" => Ok(DivisorComponent::E3),
        _ => Err(format!("component must be E1, E2 or E3, got '{s}'")),
    }
}

pub fn parse_lambda(s: &str) -> Result<Parameters, String> {
    let v = s.split(',').map(parse_f64).collect::<Result<Vec<f64>, String>>()?;
    let arr: [f64; 5] = v
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected 5 comma separated values, got {}", v.len()))?;
    Ok(Parameters::from_array(arr))
}

pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi] = parts[..] else {
        return Err(format!("expected lo:hi, got '{s}'"));
    };
    let (lo, hi) = (parse_f64(lo)?, parse_f64(hi)?);
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err(format!("empty range {lo}:{hi}"))
    }
}

pub fn parse_grid(s: &str) -> Result<HGrid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts[..] else {
        return Err(format!("expected lo:hi:n, got '{s}'"));
    };
    let (lo, hi) = (parse_f64(lo)?, parse_f64(hi)?);
    let n: usize = n.trim().parse().map_err(|_| format!("'{n}' is not a point count"))?;
    if n == 0 || (n > 1 && lo >= hi) {
        return Err(format!("grid {s} is empty"));
    }
    Ok(HGrid { lo, hi, n })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_and_ranges() {
        let g = parse_grid("-2:-0.1:20").unwrap();
        assert_eq!(g.points().len(), 20);
        assert_eq!(g.points()[19], -0.1);
        assert!(parse_grid("1:0:3").is_err());
        assert!(parse_grid("0:1").is_err());
        assert_eq!(parse_range("1.01:5").unwrap(), (1.01, 5.0));
        assert!(parse_lambda("0,0,0,0").is_err());
        assert_eq!(parse_lambda("-0.1,0,0,0,2").unwrap().l5, 2.0);
        assert!(parse_lambda("0,0,nan,0,0").is_err());
    }

    #[test]
    fn command_line_shape() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
