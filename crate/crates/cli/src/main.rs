use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use quadsim::dynamics::ModelVariant;
use quadsim::propulsion::{blade_velocity_field, write_field_csv, BladeFieldSpec, PiMode};
use quadsim::radio::{receiver_test, ChannelTrace, RangeCheck};
use quadsim::sim::{csv_export, endurance_sim, run_scenario, Scenario, ScenarioError, SimError};
use quadsim_link::{LinkError, SessionError};

#[derive(Parser)]
#[command(name = "quadsim", version, about = "Quadcopter flight simulator with a KK2-style controller")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario offline and write its telemetry CSV.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the scenario model variant.
        #[arg(long, value_parser = parse_variant)]
        variant: Option<ModelVariant>,
    },
    /// Fly a scenario's craft live over WebSocket.
    Serve {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        port: u16,
        #[arg(long, default_value_t = 20.0)]
        rate_hz: f64,
    },
    /// Sample the resultant rotor blade velocity field.
    Bladefield {
        #[arg(long)]
        rpm: f64,
        /// Forward speed, mph.
        #[arg(long)]
        vmph: f64,
        #[arg(long)]
        radius_ft: f64,
        /// Radial stations and azimuth steps.
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
        /// Use π = 3.14 in the rpm conversion, like the original script.
        #[arg(long)]
        appendix_pi: bool,
    },
    /// Print the receiver test screen for every row of a stick trace.
    ReceiverTest {
        #[arg(long)]
        trace: PathBuf,
    },
    /// Constant-draw discharge of a full 3S pack.
    Endurance {
        #[arg(long)]
        capacity_ah: f64,
        #[arg(long)]
        current_a: f64,
        /// Peukert exponent.
        #[arg(long, default_value_t = 1.0)]
        k: f64,
    },
}

fn parse_variant(s: &str) -> Result<ModelVariant, String> {
    match s {
        "corrected" => Ok(ModelVariant::Corrected),
        "as-printed" => Ok(ModelVariant::AsPrinted),
        other => Err(format!("expected `corrected` or `as-printed`, got `{other}`")),
    }
}

enum Failure {
    /// Bad input: exit code 2.
    Invalid(String),
    /// Anything else: exit code 1.
    Runtime(String),
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        match e {
            ScenarioError::Io { .. } => Failure::Runtime(e.to_string()),
            _ => Failure::Invalid(e.to_string()),
        }
    }
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    Scenario::from_path(path).map_err(|e| match e {
        ScenarioError::Io { .. } => Failure::Runtime(e.to_string()),
        other => Failure::Invalid(format!("{}: {other}", path.display())),
    })
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn run(scenario: &Path, out: &Path, seed: Option<u64>, variant: Option<ModelVariant>) -> Result<(), Failure> {
    let mut s = load(scenario)?;
    if let Some(seed) = seed {
        s.seed = seed;
    }
    if let Some(v) = variant {
        s.variant = v;
    }
    let log = run_scenario(&s).map_err(|e| match e {
        SimError::Scenario(se) => Failure::from(se),
        other => Failure::Runtime(other.to_string()),
    })?;
    let bytes = csv_export(&log.records, create(out)?).map_err(|e| Failure::Runtime(e.to_string()))?;
    println!(
        "{} records, {bytes} bytes -> {}\ndigest {}",
        log.len(),
        out.display(),
        log.digest
    );
    Ok(())
}

fn serve(scenario: &Path, port: u16, rate_hz: f64) -> Result<(), Failure> {
    let s = load(scenario)?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::Runtime(e.to_string()))?;
    eprintln!("serving on ws://0.0.0.0:{port} at {rate_hz} Hz");
    runtime.block_on(quadsim_link::serve(&s, port, rate_hz)).map_err(|e| match e {
        LinkError::Session(SessionError::Scenario(se)) => Failure::from(se),
        LinkError::Session(other) => Failure::Invalid(other.to_string()),
        other => Failure::Runtime(other.to_string()),
    })
}

fn bladefield(spec: BladeFieldSpec<f64>, out: &Path) -> Result<(), Failure> {
    if !(spec.rpm.is_finite() && spec.rpm >= 0.0) {
        return Err(Failure::Invalid(format!("--rpm must be a non-negative number, got {}", spec.rpm)));
    }
    if !spec.forward_speed.is_finite() {
        return Err(Failure::Invalid("--vmph must be finite".into()));
    }
    if !(spec.radius.is_finite() && spec.radius > 0.0) {
        return Err(Failure::Invalid(format!("--radius-ft must be positive, got {}", spec.radius)));
    }
    if spec.grid_n < 2 {
        return Err(Failure::Invalid(format!("--n must be at least 2, got {}", spec.grid_n)));
    }
    let field = blade_velocity_field(&spec);
    write_field_csv(&field, create(out)?).map_err(|e| Failure::Runtime(format!("{}: {e}", out.display())))?;
    let (lo, hi) = field
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| (lo.min(s.u), hi.max(s.u)));
    println!("{} samples -> {}\nU min {lo:.3} ft/s, max {hi:.3} ft/s", field.len(), out.display());
    Ok(())
}

fn receiver(trace: &Path) -> Result<(), Failure> {
    let tr = ChannelTrace::from_path(trace).map_err(|e| Failure::Invalid(e.to_string()))?;
    let mut range = RangeCheck::default();
    let mut stdout = std::io::stdout().lock();
    for (t, ch) in tr.rows() {
        range.observe(ch);
        // A closed pipe (e.g. `| head`) just ends the listing.
        if writeln!(stdout, "{t:>9.3}  {}", receiver_test(ch)).is_err() {
            return Ok(());
        }
    }
    let [r, p, y] = range.status();
    let _ = writeln!(stdout, "travel: roll {r:?}, pitch {p:?}, yaw {y:?}");
    Ok(())
}

fn endurance(capacity_ah: f64, current_a: f64, k: f64) -> Result<(), Failure> {
    if !(capacity_ah.is_finite() && capacity_ah > 0.0) {
        return Err(Failure::Invalid(format!("--capacity-ah must be positive, got {capacity_ah}")));
    }
    if !(current_a.is_finite() && current_a > 0.0) {
        return Err(Failure::Invalid(format!("--current-a must be positive, got {current_a}")));
    }
    if !(k.is_finite() && k >= 1.0) {
        return Err(Failure::Invalid(format!("--k must be at least 1, got {k}")));
    }
    let r = endurance_sim(capacity_ah, current_a, k);
    match r.alarm_min() {
        Some(m) => println!("alarm at 10.8 V: {m:.3} min"),
        None => println!("alarm at 10.8 V: never"),
    }
    let cause = if r.brownout { "brownout" } else { "empty" };
    println!("{cause}: {:.3} min ({:.1} s)", r.depletion_min(), r.depletion_s);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, out, seed, variant } => run(&scenario, &out, seed, variant),
        Command::Serve { scenario, port, rate_hz } => serve(&scenario, port, rate_hz),
        Command::Bladefield { rpm, vmph, radius_ft, n, out, appendix_pi } => bladefield(
            BladeFieldSpec {
                rpm,
                forward_speed: vmph,
                radius: radius_ft,
                grid_n: n,
                pi_mode: if appendix_pi { PiMode::Truncated } else { PiMode::Exact },
            },
            &out,
        ),
        Command::ReceiverTest { trace } => receiver(&trace),
        Command::Endurance { capacity_ah, current_a, k } => endurance(capacity_ah, current_a, k),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
