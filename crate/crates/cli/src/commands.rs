use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use dendrite_core::chaos::{
    classify_distances, classify_pair_profiled, scrambled_family, threshold_grid, verify_family, ClassifyConfig,
    DistributionProfile, PairVerdict, DEFAULT_MIN_GAP, DC3_WINDOW,
};
use dendrite_core::dendrite::DPoint;
use dendrite_core::extension::{build_filtration, extend_map, Stage};
use dendrite_core::odometer::{self, column_horizon, d_omega, FiberPoint, OmegaWord};
use dendrite_core::spaces::{generate_space, SpaceKind};
use dendrite_core::{build_cell_hierarchy, build_dendrite, verify_dendrite, MetricSpace, SequenceParams, SkewState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CliError, Result};
use crate::formats::{
    self, DendriteFile, ExtensionFile, FamilyJson, MapFile, SpaceFile, VerdictJson, VerifyJson,
};
use crate::io::{read_json, read_text, to_json, write_atomic, write_json};
use crate::svg::render_profile;

pub const SEED_ENV: &str = "DENDRITE_SEED";

#[derive(Debug, Parser)]
#[command(name = "dendrite", version, about = "Dendrites over finite metric spaces, endpoint-map extension, and DC3 experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Finite metric spaces.
    #[command(subcommand)]
    Space(SpaceCmd),
    /// Build and verify skeleton dendrites.
    #[command(subcommand)]
    Dendrite(DendriteCmd),
    /// Extend endpoint maps.
    #[command(subcommand)]
    Map(MapCmd),
    /// Simulate the skew product.
    #[command(subcommand)]
    Skew(SkewCmd),
    /// Distribution functions and control families.
    #[command(subcommand)]
    Chaos(ChaosCmd),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Kind {
    Harmonic,
    Cantor,
    Fiber,
    Product,
}

#[derive(Debug, Subcommand)]
pub enum SpaceCmd {
    /// Generate a named space and write it as JSON.
    Gen {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Number of reciprocals for `harmonic`.
        #[arg(long)]
        k: Option<u32>,
        /// Depth for `cantor`.
        #[arg(long)]
        depth: Option<u32>,
        /// Number of columns for `fiber`.
        #[arg(long)]
        n_max: Option<u32>,
        /// Space files multiplied together by `product`.
        #[arg(long = "factor")]
        factors: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum DendriteCmd {
    /// Build the skeleton dendrite of a space.
    Build {
        space: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dot: Option<PathBuf>,
    },
    /// Check the endpoint isometry, sampled metric axioms and tree shape.
    Verify {
        dendrite: PathBuf,
        #[arg(long)]
        space: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        triples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the skeleton of a dendrite file in another format.
    Export {
        dendrite: PathBuf,
        #[arg(long)]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum MapCmd {
    /// Extend an endpoint map to the whole dendrite.
    Extend {
        #[arg(long)]
        space: PathBuf,
        /// JSON object mapping each label to its image label.
        #[arg(long)]
        map: PathBuf,
        /// Filtration root (a non-leaf vertex id); defaults to the whole-space cell.
        #[arg(long)]
        root: Option<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dendrite_out: Option<PathBuf>,
        /// Random points checked for eventual fixing.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct PairArgs {
    /// Timer word, position 0 first.
    #[arg(long, value_parser = parse_word)]
    pub omega: Option<OmegaWord>,
    #[arg(long, value_parser = parse_word)]
    pub eta: Option<OmegaWord>,
    #[arg(long, value_parser = parse_fiber)]
    pub fiber: Option<FiberPoint>,
    /// Second state; each part defaults to the first state's.
    #[arg(long, value_parser = parse_word)]
    pub omega2: Option<OmegaWord>,
    #[arg(long, value_parser = parse_word)]
    pub eta2: Option<OmegaWord>,
    #[arg(long, value_parser = parse_fiber)]
    pub fiber2: Option<FiberPoint>,
}

impl PairArgs {
    fn given(&self) -> bool {
        self.omega.is_some() || self.eta.is_some() || self.fiber.is_some()
    }

    fn states(&self) -> (SkewState, SkewState) {
        let omega = self.omega.clone().unwrap_or_default();
        let eta = self.eta.clone().unwrap_or_default();
        let fiber = self.fiber.unwrap_or(FiberPoint::P(0));
        let b = SkewState::new(
            self.omega2.clone().unwrap_or_else(|| omega.clone()),
            self.eta2.clone().unwrap_or_else(|| eta.clone()),
            self.fiber2.unwrap_or(fiber),
        );
        (SkewState::new(omega, eta, fiber), b)
    }
}

#[derive(Debug, Subcommand)]
pub enum SkewCmd {
    /// Write the orbit distances of a pair of states as CSV.
    Simulate {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, conflicts_with = "col_checkpoints")]
        horizon: Option<u64>,
        /// Columns n; the horizon becomes T_n + 1 for the largest.
        #[arg(long, value_delimiter = ',')]
        col_checkpoints: Vec<u32>,
        #[arg(long)]
        csv: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
pub enum ChaosCmd {
    /// Estimate distribution functions and classify a pair.
    Classify {
        /// Orbit CSV (t,dist) instead of simulating states.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        pair: PairArgs,
        /// Explicit thresholds.
        #[arg(long = "s", value_delimiter = ',')]
        thresholds: Vec<f64>,
        /// Grid size over (s-lo, s-hi] when no thresholds are given.
        #[arg(long, default_value_t = 30)]
        grid: usize,
        #[arg(long, default_value_t = DC3_WINDOW.0)]
        s_lo: f64,
        #[arg(long, default_value_t = DC3_WINDOW.1)]
        s_hi: f64,
        /// Raw checkpoint horizons N.
        #[arg(long, value_delimiter = ',')]
        checkpoints: Vec<u64>,
        /// Checkpoints T_n + 1 for the given columns.
        #[arg(long, value_delimiter = ',')]
        col_checkpoints: Vec<u32>,
        #[arg(long, default_value_t = DEFAULT_MIN_GAP)]
        min_gap: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        profile_csv: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Control sequences sharing one pattern of positions.
    Family {
        /// `even`, `odd`, or `mod:M:R` (coding positions p with p % M == R).
        #[arg(long)]
        pattern: String,
        #[arg(long)]
        count: usize,
        #[arg(long, default_value_t = 64)]
        depth: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_word(s: &str) -> std::result::Result<OmegaWord, String> {
    s.parse().map_err(|e: odometer::OdometerError| e.to_string())
}

fn parse_fiber(s: &str) -> std::result::Result<FiberPoint, String> {
    s.parse().map_err(|e: odometer::OdometerError| e.to_string())
}

/// `DENDRITE_SEED` wins over `--seed`.
pub fn resolve_seed(flag: u64) -> Result<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(flag),
    }
}

/// Parses `argv` and runs it; returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { out.write_all(rendered.as_bytes()) } else { err.write_all(rendered.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn load_space(path: &Path) -> Result<MetricSpace> {
    read_json::<SpaceFile>(path)?.into_space().map_err(|e| match e {
        CliError::Space(s) => CliError::parse(path, s),
        CliError::Invalid(m) => CliError::parse(path, m),
        other => other,
    })
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Space(SpaceCmd::Gen {
            kind,
            k,
            depth,
            n_max,
            factors,
            out: path,
        }) => {
            let need = |v: Option<u32>, flag: &str| v.ok_or_else(|| CliError::Usage(format!("--kind needs --{flag}")));
            let kind = match kind {
                Kind::Harmonic => SpaceKind::Harmonic { k: need(k, "k")? },
                Kind::Cantor => SpaceKind::Cantor { depth: need(depth, "depth")? },
                Kind::Fiber => SpaceKind::FiberC {
                    n_max: need(n_max, "n-max")?,
                    params: SequenceParams::default(),
                },
                Kind::Product => {
                    if factors.is_empty() {
                        return Err(CliError::Usage("--kind product needs at least one --factor".into()));
                    }
                    SpaceKind::Product(factors.iter().map(|p| load_space(p)).collect::<Result<_>>()?)
                }
            };
            let space = generate_space(&kind)?;
            write_json(&path, &SpaceFile::from_space(&space))?;
            emit(out, &format!("wrote {} points to {}\n", space.len(), path.display()))
        }

        Command::Dendrite(DendriteCmd::Build { space, out: path, dot }) => {
            let space = load_space(&space)?;
            let d = build_dendrite(&build_cell_hierarchy(&space)?, &space)?;
            write_json(&path, &DendriteFile::from_dendrite(&d))?;
            if let Some(dot) = dot {
                write_atomic(&dot, formats::to_dot(&d).as_bytes())?;
            }
            emit(
                out,
                &format!("{} vertices, {} edges -> {}\n", d.vertex_count(), d.edge_count(), path.display()),
            )
        }

        Command::Dendrite(DendriteCmd::Verify {
            dendrite,
            space,
            triples,
            seed,
            out: path,
        }) => {
            let d = read_json::<DendriteFile>(&dendrite)?.into_dendrite()?;
            let space = load_space(&space)?;
            let mut rng = ChaCha8Rng::seed_from_u64(resolve_seed(seed)?);
            let report = verify_dendrite(&d, &space, triples, &mut rng);
            let json = VerifyJson::from(&report);
            match path {
                Some(p) => write_json(&p, &json)?,
                None => emit(out, &to_json(&json))?,
            }
            if report.passed() {
                Ok(())
            } else {
                Err(CliError::Verification(format!("{json:?}")))
            }
        }

        Command::Dendrite(DendriteCmd::Export { dendrite, format, out: path }) => {
            let d = read_json::<DendriteFile>(&dendrite)?.into_dendrite()?;
            let text = formats::export_skeleton(&d, &format)?;
            match path {
                Some(p) => write_atomic(&p, text.as_bytes()),
                None => emit(out, &text),
            }
        }

        Command::Map(MapCmd::Extend {
            space,
            map,
            root,
            out: path,
            dendrite_out,
            samples,
            seed,
        }) => {
            let space = load_space(&space)?;
            let f = formats::map_from_file(&space, &read_json::<MapFile>(&map)?)
                .map_err(|e| CliError::parse(&map, e))?;
            let d = build_dendrite(&build_cell_hierarchy(&space)?, &space)?;
            let filtration = build_filtration(&d, root.unwrap_or(d.root()))?;
            let ext = extend_map(&d, &filtration, &f)?;
            let correspondence = (0..space.len()).map(|x| d.leaf_of_point(x)).collect();
            let emb = dendrite_core::Embedding {
                dendrite: d,
                filtration,
                map: ext,
                correspondence,
            };
            write_json(&path, &ExtensionFile::from_embedding(&emb))?;
            if let Some(p) = dendrite_out {
                write_json(&p, &DendriteFile::from_dendrite(&emb.dendrite))?;
            }

            let (d, filt, m) = (&emb.dendrite, &emb.filtration, &emb.map);
            let conjugacy = (0..space.len())
                .all(|x| m.evaluate(d, DPoint::Vertex(emb.correspondence[x])) == DPoint::Vertex(emb.correspondence[f[x]]));
            let mut rng = ChaCha8Rng::seed_from_u64(resolve_seed(seed)?);
            let mut late = 0;
            for _ in 0..samples {
                let x = d.sample_point(&mut rng);
                let budget = match filt.stage_of(d, x) {
                    Stage::Endpoint => continue,
                    Stage::Tree(i) => i,
                    Stage::Ladder { level } => level as usize + filt.len(),
                };
                if m.steps_to_fixed_point(d, x, budget).is_none() {
                    late += 1;
                }
            }
            emit(
                out,
                &format!(
                    "extension over {} interior vertices -> {}; conjugacy {conjugacy}; {late}/{samples} samples not fixed within budget\n",
                    filt.len(),
                    path.display()
                ),
            )?;
            if conjugacy && late == 0 {
                Ok(())
            } else {
                Err(CliError::Verification("extension contract violated".into()))
            }
        }

        Command::Skew(SkewCmd::Simulate {
            pair,
            horizon,
            col_checkpoints,
            csv,
        }) => {
            let horizon = match (horizon, col_checkpoints.iter().max()) {
                (Some(h), _) => h,
                (None, Some(&n)) => column_horizon(n)
                    .ok_or_else(|| CliError::Usage(format!("column {n} is beyond {}", odometer::MAX_COLUMN)))?,
                (None, None) => return Err(CliError::Usage("give --horizon or --col-checkpoints".into())),
            };
            let (a, b) = pair.states();
            let params = SequenceParams::default();
            let distances = odometer::orbit_distances(&a, &b, horizon, &params)?.collect::<std::result::Result<Vec<f64>, _>>()?;
            write_atomic(&csv, &formats::orbit_csv(&distances)?)?;
            emit(out, &format!("{} distances -> {}\n", distances.len(), csv.display()))
        }

        Command::Chaos(ChaosCmd::Classify {
            csv,
            pair,
            thresholds,
            grid,
            s_lo,
            s_hi,
            checkpoints,
            col_checkpoints,
            min_gap,
            out: path,
            profile_csv,
            svg,
        }) => {
            let thresholds = if thresholds.is_empty() {
                if grid == 0 || s_lo.is_nan() || s_hi.is_nan() || s_lo >= s_hi {
                    return Err(CliError::Usage("need --grid >= 1 and --s-lo < --s-hi".into()));
                }
                threshold_grid(s_lo, s_hi, grid)
            } else {
                thresholds
            };
            let mut cps = checkpoints;
            for n in col_checkpoints {
                cps.push(column_horizon(n).ok_or_else(|| CliError::Usage(format!("column {n} out of range")))?);
            }
            cps.sort_unstable();
            cps.dedup();

            let (verdict, profile): (PairVerdict, DistributionProfile) = match (&csv, pair.given()) {
                (Some(_), true) => return Err(CliError::Usage("give either --csv or state flags, not both".into())),
                (Some(file), false) => {
                    let distances = formats::read_orbit_csv(file, &read_text(file)?)?;
                    if distances.is_empty() {
                        return Err(CliError::parse(file, "no distances"));
                    }
                    if cps.is_empty() {
                        cps = (1..=odometer::MAX_COLUMN)
                            .filter_map(column_horizon)
                            .filter(|&h| h <= distances.len() as u64)
                            .collect();
                    }
                    if cps.is_empty() {
                        cps.push(distances.len() as u64);
                    }
                    let bound = distances.iter().copied().fold(f64::INFINITY, f64::min);
                    let config = ClassifyConfig {
                        horizon: distances.len() as u64,
                        thresholds,
                        checkpoints: cps,
                        min_gap,
                    };
                    classify_distances(&distances, bound, &config)?
                }
                (None, true) => {
                    if cps.is_empty() {
                        return Err(CliError::Usage("state classification needs --checkpoints or --col-checkpoints".into()));
                    }
                    let (a, b) = pair.states();
                    let config = ClassifyConfig {
                        horizon: *cps.last().expect("nonempty"),
                        thresholds,
                        checkpoints: cps,
                        min_gap,
                    };
                    let (v, p) = classify_pair_profiled(&a, &b, &SequenceParams::default(), &config)?;
                    debug_assert_eq!(v.proximal_lower_bound, d_omega(&a.omega, &b.omega).max(d_omega(&a.eta, &b.eta)));
                    (v, p)
                }
                (None, false) => return Err(CliError::Usage("give --csv or --omega/--eta/--fiber".into())),
            };
            let json = VerdictJson::from(&verdict);
            match path {
                Some(p) => write_json(&p, &json)?,
                None => emit(out, &to_json(&json))?,
            }
            if let Some(p) = profile_csv {
                write_atomic(&p, &formats::profile_csv(&profile)?)?;
            }
            if let Some(p) = svg {
                write_atomic(&p, render_profile(&profile).as_bytes())?;
            }
            Ok(())
        }

        Command::Chaos(ChaosCmd::Family {
            pattern,
            count,
            depth,
            out: path,
        }) => {
            let coding = parse_pattern(&pattern)?;
            let words = scrambled_family(&coding, count, depth)?;
            let check = verify_family(&words, 0, depth);
            let json = FamilyJson::new(&pattern, depth, &words, &check);
            match path {
                Some(p) => write_json(&p, &json)?,
                None => emit(out, &to_json(&json))?,
            }
            if check.distinct && (count < 2 || (check.min_agreements > 0 && check.min_disagreements > 0)) {
                Ok(())
            } else {
                Err(CliError::Verification(format!("family check failed: {check:?}")))
            }
        }
    }
}

/// Coding-position predicate from `even`, `odd` or `mod:M:R`.
pub fn parse_pattern(spec: &str) -> Result<Box<dyn Fn(u64) -> bool>> {
    let bad = || CliError::Usage(format!("bad --pattern {spec:?}; use even, odd or mod:M:R"));
    match spec {
        "even" => Ok(Box::new(|p| p % 2 == 0)),
        "odd" => Ok(Box::new(|p| p % 2 == 1)),
        _ => {
            let mut parts = spec.split(':');
            match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some("mod"), Some(m), Some(r), None) => {
                    let m: u64 = m.parse().ok().filter(|&m| m >= 1).ok_or_else(bad)?;
                    let r: u64 = r.parse().ok().filter(|&r| r < m).ok_or_else(bad)?;
                    Ok(Box::new(move |p| p % m == r))
                }
                _ => Err(bad()),
            }
        }
    }
}
