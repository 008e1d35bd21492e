use std::f64::consts::FRAC_PI_2;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rhg_core::elliptic::mesh::MeshOptions;
use rhg_core::export::{sample_surface, write_csv, write_json, write_pgm, DEFAULT_PER_TILE};
use rhg_core::pipeline::Pipeline;
use rhg_core::verify::{full_report_with, Profile};
use rhg_core::{Complex64, MeshDims};

#[derive(Parser, Debug)]
#[command(name = "rhg", version, about = "Green's function on flat rhombic tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write G over a 3x3 tiling of the fundamental rectangle
    Surface(RunConfig),
    /// Print periods, invariants, zeta constants and correction constants
    Constants(RunConfig),
    /// Run the accuracy checks; exit status 1 if any fails
    Verify(RunConfig),
    /// Write the ℘ mesh, the ζ image and the torus mesh
    MeshDump(RunConfig),
}

#[derive(Args, Debug, Clone)]
struct RunConfig {
    /// Shape parameter, strictly between -pi/2 and pi/2
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true, value_parser = parse_rho)]
    rho: f64,
    #[arg(long, value_enum, default_value_t = ProfileArg::Rh)]
    profile: ProfileArg,
    /// Mesh dimensions (angular, radial), overriding the profile
    #[arg(long, num_args = 2, value_names = ["ROWS", "COLS"])]
    mesh: Option<Vec<usize>>,
    /// Output file
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum ProfileArg {
    Rh,
    Rh4,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
    Pgm,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Pgm => "pgm",
        }
    }
}

fn parse_rho(s: &str) -> std::result::Result<f64, String> {
    let rho: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !(rho.abs() < FRAC_PI_2) {
        return Err(format!(
            "rho = {rho} is outside the admissible shapes; choose a value with |rho| < pi/2 \
             (results are checked for |rho| <= pi/3)"
        ));
    }
    Ok(rho)
}

impl RunConfig {
    fn profile(&self) -> Profile {
        match self.profile {
            ProfileArg::Rh => Profile::Rh,
            ProfileArg::Rh4 => Profile::Rh4,
        }
    }

    fn dims(&self) -> Result<MeshDims> {
        match self.mesh.as_deref() {
            None => Ok(self.profile().standard()),
            Some([r, c]) => Ok(MeshDims::new(*r, *c)),
            Some(_) => bail!("--mesh takes two numbers"),
        }
    }

    fn pipeline(&self) -> Result<Pipeline> {
        let p = Pipeline::run_unchecked(self.rho, self.dims()?, MeshOptions::default())
            .with_context(|| format!("pipeline failed for rho = {}", self.rho))?;
        if let Err(e) = p.green.check_minimum() {
            log::warn!("{e}");
        }
        Ok(p)
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn surface(cfg: &RunConfig) -> Result<()> {
    let p = cfg.pipeline()?;
    let grid = sample_surface(&p.green, DEFAULT_PER_TILE);
    let out = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("surface.{}", cfg.format.extension())));
    let mut w = create(&out)?;
    match cfg.format {
        Format::Csv => write_csv(&grid, &mut w)?,
        Format::Json => write_json(&grid, &mut w)?,
        Format::Pgm => {
            let scale = write_pgm(&grid, &mut w)?;
            let mut side = out.clone().into_os_string();
            side.push(".json");
            let side = PathBuf::from(side);
            write_json(&scale, create(&side)?)?;
        }
    }
    w.flush()?;
    let corr = &p.green.correction;
    println!("A = {:.12e}", corr.a);
    println!("B = {:.12e}", corr.b);
    println!("k = {:.12e}", p.params.k);
    println!("|T| = {:.12e}", p.params.area);
    println!("wrote {}", out.display());
    Ok(())
}

#[derive(Serialize)]
struct Constants {
    rho: f64,
    a: f64,
    b: f64,
    omega1: Complex64,
    omega2: Complex64,
    area: f64,
    k: f64,
    tau: Complex64,
    e1: Complex64,
    e2: Complex64,
    e3: Complex64,
    g2: Complex64,
    g3: Complex64,
    c: Complex64,
    d: Complex64,
    d_over_c: Complex64,
    c_frak: Complex64,
    eta1: Complex64,
    eta2: Complex64,
    eta1_classical: Complex64,
    eta2_classical: Complex64,
    #[serde(rename = "A")]
    big_a: f64,
    #[serde(rename = "B")]
    big_b: f64,
    #[serde(rename = "C")]
    big_c: f64,
}

impl Constants {
    fn rows(&self) -> Vec<(&'static str, Complex64)> {
        let r = |x: f64| Complex64::new(x, 0.0);
        vec![
            ("rho", r(self.rho)),
            ("a", r(self.a)),
            ("b", r(self.b)),
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("area", r(self.area)),
            ("k", r(self.k)),
            ("tau", self.tau),
            ("e1", self.e1),
            ("e2", self.e2),
            ("e3", self.e3),
            ("g2", self.g2),
            ("g3", self.g3),
            ("c", self.c),
            ("d", self.d),
            ("d_over_c", self.d_over_c),
            ("c_frak", self.c_frak),
            ("eta1", self.eta1),
            ("eta2", self.eta2),
            ("eta1_classical", self.eta1_classical),
            ("eta2_classical", self.eta2_classical),
            ("A", r(self.big_a)),
            ("B", r(self.big_b)),
            ("C", r(self.big_c)),
        ]
    }
}

fn constants(cfg: &RunConfig) -> Result<()> {
    let p = cfg.pipeline()?;
    let (t, e, z, corr) = (&p.params, &p.consts, &p.zeta_constants, &p.green.correction);
    let k = Constants {
        rho: t.rho,
        a: t.a,
        b: t.b,
        omega1: t.omega1,
        omega2: t.omega2,
        area: t.area,
        k: t.k,
        tau: t.tau,
        e1: e.e1,
        e2: e.e2,
        e3: e.e3,
        g2: e.g2,
        g3: e.g3,
        c: e.c,
        d: z.d,
        d_over_c: z.d / e.c,
        c_frak: z.c_frak,
        eta1: z.eta1,
        eta2: z.eta2,
        eta1_classical: z.eta1_classical,
        eta2_classical: z.eta2_classical,
        big_a: corr.a,
        big_b: corr.b,
        big_c: corr.c,
    };
    let mut w: Box<dyn Write> = match &cfg.out {
        Some(path) => Box::new(create(path)?),
        None => Box::new(io::stdout().lock()),
    };
    match cfg.format {
        Format::Json => {
            write_json(&k, &mut w)?;
            writeln!(w)?;
        }
        Format::Csv => {
            writeln!(w, "name,re,im")?;
            for (name, v) in k.rows() {
                writeln!(w, "{name},{:e},{:e}", v.re, v.im)?;
            }
        }
        Format::Pgm => bail!("constants cannot be written as pgm"),
    }
    w.flush()?;
    Ok(())
}

fn verify(cfg: &RunConfig) -> Result<bool> {
    let profile = cfg.profile();
    let standard = cfg.dims()?;
    let refined = match cfg.mesh {
        // doubling the intervals keeps the coarse nodes
        Some(_) => MeshDims::new(2 * standard.rows - 1, 2 * standard.cols - 1),
        None => profile.refined(),
    };
    let report = full_report_with(cfg.rho, profile, standard, refined);
    match (&cfg.out, cfg.format) {
        (Some(path), _) => {
            let mut w = create(path)?;
            write_json(&report, &mut w)?;
            w.flush()?;
            print!("{}", report.table());
        }
        (None, Format::Json) => {
            write_json(&report, io::stdout().lock())?;
            println!();
        }
        (None, _) => print!("{}", report.table()),
    }
    Ok(report.pass)
}

#[derive(Serialize)]
struct MeshDump<'a> {
    rows: usize,
    cols: usize,
    split: usize,
    /// ℘-values (domain) and torus points (value) on both copies
    wp_mesh: [&'a rhg_core::MeshField; 2],
    /// ζ on both copies
    zeta: [&'a rhg_core::MeshField; 2],
}

fn mesh_dump(cfg: &RunConfig) -> Result<()> {
    let p = cfg.pipeline()?;
    let out = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("mesh.{}", cfg.format.extension())));
    let mut w = create(&out)?;
    match cfg.format {
        Format::Json => {
            let dump = MeshDump {
                rows: p.mesh.rows(),
                cols: p.mesh.cols(),
                split: p.mesh.split,
                wp_mesh: [&p.mesh.half, &p.mesh.mirror],
                zeta: [&p.zeta.half, &p.zeta.mirror],
            };
            write_json(&dump, &mut w)?;
        }
        Format::Csv => {
            writeln!(w, "part,row,col,wp_re,wp_im,z_re,z_im,zeta_re,zeta_im")?;
            for (name, m, zf) in [("half", &p.mesh.half, &p.zeta.half), ("mirror", &p.mesh.mirror, &p.zeta.mirror)] {
                for k in 0..m.rows {
                    for j in 0..m.cols {
                        let (wp, z) = m.at(k, j);
                        let (_, zeta) = zf.at(k, j);
                        writeln!(
                            w,
                            "{name},{k},{},{:e},{:e},{:e},{:e},{:e},{:e}",
                            j + m.col_offset,
                            wp.re,
                            wp.im,
                            z.re,
                            z.im,
                            zeta.re,
                            zeta.im
                        )?;
                    }
                }
            }
        }
        Format::Pgm => bail!("meshes cannot be written as pgm"),
    }
    w.flush()?;
    println!("wrote {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Surface(c) => surface(c).map(|_| true),
        Command::Constants(c) => constants(c).map(|_| true),
        Command::Verify(c) => verify(c),
        Command::MeshDump(c) => mesh_dump(c).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
