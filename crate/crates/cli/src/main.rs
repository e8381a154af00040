use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use zklab::{preset, run, CliError, ExperimentConfig, Kind, OneOrMany, Parameters, RunOptions, PRESETS};
use zklab_flow::Scheme;

#[derive(Parser)]
#[command(name = "zklab", version, about = "Soliton laboratory for the generalized ZK equation")]
struct Cli {
    /// Directory for artifacts and the manifest.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,

    /// Worker threads.
    #[arg(long, global = true, env = "ZKLAB_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the ground state and write its profile.
    Groundstate(ParamArgs),
    /// Spectral value and negative-eigenvalue count over a grid of powers.
    Scan(ParamArgs),
    /// Bisection for the zero of the spectral value in p.
    Crossing(ParamArgs),
    /// Audit of the integral identities.
    Identities(ParamArgs),
    /// Group-velocity geometry of the linear flow.
    Dispersion(ParamArgs),
    /// Time evolution: a single soliton, the linearized flow or a soliton train.
    Evolve {
        #[arg(long, value_enum, default_value = "soliton")]
        mode: EvolveMode,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Localized mass and energy functionals on a perturbed soliton.
    Probe(ParamArgs),
    /// Lowest modes of the weighted bilinear form.
    Coercivity(ParamArgs),
    /// Run a frozen preset, or list them.
    Preset {
        name: Option<String>,
        #[arg(long)]
        list: bool,
    },
    /// Run a TOML config file.
    Run { config: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum EvolveMode {
    Soliton,
    Linearized,
    Multisoliton,
}

/// One flag per config key; keys a kind does not use are rejected.
#[derive(Args, Default)]
struct ParamArgs {
    #[arg(long, value_delimiter = ',')]
    d: Vec<usize>,
    #[arg(long)]
    p: Option<f64>,
    /// start,stop,step
    #[arg(long, value_delimiter = ',', num_args = 3)]
    p_grid: Vec<f64>,
    /// lo,hi
    #[arg(long, value_delimiter = ',', num_args = 2)]
    bracket: Vec<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    c: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 2)]
    center: Vec<f64>,
    #[arg(long)]
    rmax: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    /// l1,l2
    #[arg(long = "box", value_delimiter = ',', num_args = 2)]
    box_size: Vec<f64>,
    /// n1,n2
    #[arg(long, value_delimiter = ',', num_args = 2)]
    grid: Vec<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    output_every: Option<usize>,
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<Scheme>,
    #[arg(long)]
    dealias: Option<bool>,
    #[arg(long, value_delimiter = ',')]
    y0: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    theta: Vec<f64>,
    #[arg(long = "M")]
    m: Option<f64>,
    #[arg(long = "L")]
    l: Option<f64>,
    #[arg(long = "A")]
    a: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    samples: Option<usize>,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    match s {
        "etdrk4" => Ok(Scheme::Etdrk4),
        "imex-bdf2" => Ok(Scheme::ImexBdf2),
        _ => Err(format!("unknown scheme `{s}` (etdrk4, imex-bdf2)")),
    }
}

fn list<T: Clone>(v: &[T]) -> Option<OneOrMany<T>> {
    match v {
        [] => None,
        [x] => Some(OneOrMany::One(x.clone())),
        _ => Some(OneOrMany::Many(v.to_vec())),
    }
}

fn pair<T: Copy>(v: &[T]) -> Option<[T; 2]> {
    (v.len() == 2).then(|| [v[0], v[1]])
}

impl ParamArgs {
    fn into_parameters(self) -> Parameters {
        Parameters {
            d: list(&self.d),
            p: self.p,
            p_grid: (self.p_grid.len() == 3).then(|| OneOrMany::One([self.p_grid[0], self.p_grid[1], self.p_grid[2]])),
            bracket: pair(&self.bracket).map(OneOrMany::One),
            tol: self.tol,
            c: list(&self.c),
            center: pair(&self.center),
            rmax: self.rmax,
            n: self.n,
            box_size: pair(&self.box_size),
            grid: pair(&self.grid),
            dt: self.dt,
            t_end: self.t_end,
            output_every: self.output_every,
            scheme: self.scheme,
            dealias: self.dealias,
            y0: list(&self.y0),
            theta: list(&self.theta),
            m: self.m,
            l: self.l,
            a: self.a,
            eps: self.eps,
            k: self.k,
            seed: self.seed,
            samples: self.samples,
        }
    }
}

fn config_for(command: Command) -> Result<Option<ExperimentConfig>, CliError> {
    let make = |kind: Kind, p: ParamArgs| Ok(Some(ExperimentConfig::new(kind, p.into_parameters())));
    match command {
        Command::Groundstate(p) => make(Kind::Groundstate, p),
        Command::Scan(p) => make(Kind::SpectralScan, p),
        Command::Crossing(p) => make(Kind::Crossing, p),
        Command::Identities(p) => make(Kind::Identities, p),
        Command::Dispersion(p) => make(Kind::Dispersion, p),
        Command::Evolve { mode, params } => {
            let kind = match mode {
                EvolveMode::Soliton => Kind::EvolveSoliton,
                EvolveMode::Linearized => Kind::EvolveLinearized,
                EvolveMode::Multisoliton => Kind::EvolveMultisoliton,
            };
            make(kind, params)
        }
        Command::Probe(p) => make(Kind::ProbeSuite, p),
        Command::Coercivity(p) => make(Kind::Coercivity, p),
        Command::Preset { name, list } => match name {
            Some(name) if !list => preset(&name).map(Some),
            _ => {
                for (name, about) in PRESETS {
                    println!("{name:<18} {about}");
                }
                Ok(None)
            }
        },
        Command::Run { config } => ExperimentConfig::load(&config).map(Some),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = RunOptions { threads: cli.threads };
    let result = config_for(cli.command).and_then(|cfg| {
        let Some(cfg) = cfg else { return Ok(()) };
        let dir = cli
            .output_dir
            .clone()
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("zklab-out").join(cfg.kind.as_str()));
        let report = run(&cfg, &dir, opts)?;
        print!("{}", report.manifest.to_text());
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.class());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
