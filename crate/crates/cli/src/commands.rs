use std::path::{Path, PathBuf};

use clap::Args;
use serde_json::json;
use tnkit::decomp::{self, rank_for_tolerance, Factorization};
use tnkit::manifest::{self, Network};
use tnkit::netcon::{contract_network, search_sequence, ContractionTree, Method, Nested, NetworkSpec};
use tnkit::ttn::{self, GaugeMethod, TreeNetwork, CENTER_TOL};
use tnkit::{tnt, Bipartition, DenseTensor};

use crate::report::{Failure, Outcome, RunReport};

#[derive(Args)]
pub struct ContractArgs {
    pub manifest: PathBuf,
    /// `auto` (the manifest's sequence if it has one, else a search),
    /// `dp`, `greedy`, or `file:<path>` holding a nested JSON array.
    #[arg(long, default_value = "auto")]
    pub sequence: String,
    /// Output tensor; defaults to `contracted.tnt` next to the manifest.
    #[arg(short, long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct SequenceArgs {
    pub manifest: PathBuf,
    #[arg(long, default_value = "dp")]
    pub method: String,
}

#[derive(Args)]
pub struct DecompArgs {
    pub tensor: PathBuf,
    /// `svd`, `qr` or `eig`.
    #[arg(long)]
    pub kind: String,
    /// Row and column index groups, e.g. `0,1/2,3`.
    #[arg(long)]
    pub partition: String,
    #[arg(long, conflicts_with = "tol")]
    pub rank: Option<usize>,
    /// Largest acceptable truncation error.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Path prefix of the factor files; defaults to the input minus `.tnt`.
    #[arg(long)]
    pub prefix: Option<PathBuf>,
}

#[derive(Args)]
pub struct OrthogonalizeArgs {
    pub manifest: PathBuf,
    #[arg(long)]
    pub center: String,
    /// `pull` or `direct`.
    #[arg(long, default_value = "direct")]
    pub method: String,
    /// Directory for the transformed tensors and `manifest.json`.
    #[arg(short, long)]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct TruncateArgs {
    pub manifest: PathBuf,
    #[arg(long)]
    pub center: String,
    #[arg(long)]
    pub partition: String,
    #[arg(long, conflicts_with = "tol", required_unless_present = "tol")]
    pub rank: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, default_value = "direct")]
    pub method: String,
    /// Contract the old and new networks and report the global error.
    #[arg(long)]
    pub verify_global: bool,
    #[arg(short, long)]
    pub out_dir: PathBuf,
}

#[derive(Args)]
pub struct VerifyArgs {
    pub manifest: PathBuf,
    /// Defaults to the manifest's `center`.
    #[arg(long)]
    pub center: Option<String>,
    #[arg(long, default_value_t = CENTER_TOL)]
    pub tol: f64,
}

fn tree_json(tree: &ContractionTree) -> serde_json::Value {
    serde_json::to_value(tree.to_nested()).expect("nested tree")
}

fn report_tree(report: &mut RunReport, tree: &ContractionTree) {
    report.set("sequence", tree_json(tree));
    report.set("step_costs", tree.step_costs());
    report.set("total_cost", tree.total_cost());
}

fn choose_sequence(spec: &NetworkSpec, choice: &str) -> Result<ContractionTree, Failure> {
    if let Some(path) = choice.strip_prefix("file:") {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::invalid(format!("{path}: {e}")))?;
        let nested: Nested =
            serde_json::from_str(&text).map_err(|e| Failure::invalid(format!("{path}: not a nested sequence: {e}")))?;
        return Ok(ContractionTree::annotate(spec, &nested)?);
    }
    match choice {
        "auto" => match &spec.sequence {
            Some(t) => Ok(t.clone()),
            None => Ok(tnkit::netcon::default_sequence(spec)?),
        },
        other => Ok(search_sequence(spec, other.parse::<Method>()?)?),
    }
}

pub fn contract(a: &ContractArgs, report: &mut RunReport) -> Outcome {
    let net = manifest::load(&a.manifest)?;
    let tree = choose_sequence(&net.spec, &a.sequence)?;
    report_tree(report, &tree);
    let result = contract_network(&net.spec, &net.tensors, Some(&tree))?;
    let out = a.out.clone().unwrap_or_else(|| sibling(&a.manifest, "contracted.tnt"));
    tnt::write(&result, &out)?;
    eprintln!("contracted {} tensors, cost {} -> {}", net.spec.len(), tree.total_cost(), out.display());
    report.set("output", out.display().to_string());
    report.set("shape", result.shape().to_vec());
    report.set("norm", result.frobenius_norm());
    Ok(())
}

pub fn sequence(a: &SequenceArgs, report: &mut RunReport) -> Outcome {
    let net = manifest::load(&a.manifest)?;
    let method: Method = a.method.parse()?;
    let tree = search_sequence(&net.spec, method)?;
    eprintln!("{} cost {}", tree, tree.total_cost());
    report.set("method", a.method.clone());
    report_tree(report, &tree);
    Ok(())
}

fn sibling(path: &Path, name: &str) -> PathBuf {
    path.parent().map(|p| p.join(name)).unwrap_or_else(|| PathBuf::from(name))
}

fn factor_names(f: &Factorization) -> &'static [&'static str] {
    match f.kind {
        decomp::FactorKind::Svd => &["U", "S", "V"],
        decomp::FactorKind::Qr => &["Q", "R"],
        decomp::FactorKind::Spectral => &["U", "D"],
    }
}

pub fn decomp(a: &DecompArgs, report: &mut RunReport) -> Outcome {
    let t = tnt::read(&a.tensor)?;
    let p = Bipartition::parse(&a.partition, t.order())?;
    let mut f = match a.kind.as_str() {
        "svd" => decomp::svd(&t, &p)?,
        "qr" => decomp::qr(&t, &p)?,
        "eig" => decomp::spectral(&t, &p)?,
        other => return Err(Failure::invalid(format!("unknown decomposition kind {other:?} (svd, qr or eig)"))),
    };
    if a.rank.is_some() || a.tol.is_some() {
        if f.kind == decomp::FactorKind::Qr {
            return Err(Failure::invalid("--rank and --tol apply to svd and eig"));
        }
        f = match (a.rank, a.tol) {
            (Some(r), _) => decomp::truncate(&f, r)?,
            (None, Some(e)) => decomp::truncate_by_tolerance(&f, e)?,
            _ => unreachable!(),
        };
    }
    let prefix = a.prefix.clone().unwrap_or_else(|| a.tensor.with_extension(""));
    let mut files = Vec::new();
    for (factor, name) in f.factors.iter().zip(factor_names(&f)) {
        let path = PathBuf::from(format!("{}.{name}.tnt", prefix.display()));
        tnt::write(factor, &path)?;
        files.push(path.display().to_string());
    }
    eprintln!("{} across {}: rank {}, error {:.3e}", a.kind, p, f.rank(), f.report.error);
    report.set("kind", a.kind.clone());
    report.set("partition", p.to_string());
    report.set("files", files);
    report.set("rank", f.rank());
    report.set("spectrum", f.spectrum.clone());
    if f.kind == decomp::FactorKind::Spectral {
        report.set("eigenvalues", f.eigenvalues.clone());
    }
    report.set("error", f.report.error);
    report.set("discarded_weight", f.report.discarded_weight);
    report.set("degenerate", f.report.degenerate);
    if let Some(e) = a.tol {
        report.set("tolerance", e);
    }
    Ok(())
}

fn load_tree(path: &Path) -> Result<TreeNetwork, Failure> {
    Ok(TreeNetwork::from_network(&manifest::load(path)?)?)
}

fn save_tree(tn: &TreeNetwork, dir: &Path, report: &mut RunReport) -> Outcome {
    let path = dir.join("manifest.json");
    let net: Network = tn.to_network();
    manifest::save(&net, &path)?;
    report.set("manifest", path.display().to_string());
    Ok(())
}

fn center_check(tn: &TreeNetwork, center: &str, tol: f64, report: &mut RunReport) -> Result<bool, Failure> {
    let check = ttn::verify_center(tn, center, tol)?;
    report.set_json("verify", &check);
    Ok(check.passed)
}

pub fn orthogonalize(a: &OrthogonalizeArgs, report: &mut RunReport) -> Outcome {
    let tn = load_tree(&a.manifest)?;
    let method: GaugeMethod = a.method.parse()?;
    let (out, ortho) = ttn::orthogonalize(&tn, &a.center, method)?;
    report.set_json("gauge", &ortho);
    let passed = center_check(&out, &a.center, CENTER_TOL, report)?;
    save_tree(&out, &a.out_dir, report)?;
    eprintln!("centered at {:?} by the {} method", a.center, a.method);
    if !passed {
        return Err(Failure::numerical("orthogonalization did not reach the center tolerance"));
    }
    Ok(())
}

pub fn truncate(a: &TruncateArgs, report: &mut RunReport) -> Outcome {
    let tn = load_tree(&a.manifest)?;
    let method: GaugeMethod = a.method.parse()?;
    let (centered, ortho) = ttn::orthogonalize(&tn, &a.center, method)?;
    report.set_json("gauge", &ortho);
    let slot = centered.spec().slot(&a.center).expect("center exists");
    let p = Bipartition::parse(&a.partition, slot.labels.len())?;
    let rank = match (a.rank, a.tol) {
        (Some(r), _) => r,
        (None, Some(e)) => {
            let f = decomp::svd(centered.tensor(&a.center).expect("center"), &p)?;
            report.set("tolerance", e);
            rank_for_tolerance(&f.spectrum, e)
        }
        _ => unreachable!("clap requires one of --rank and --tol"),
    };
    let (cut, split) = ttn::truncate_at_center(&centered, &a.center, &p, rank)?;
    report.set_json("split", &split);
    report.set("local_error", split.local_error);
    if a.verify_global {
        let global = ttn::global_error(&tn, &cut)?;
        report.set("global_error", global);
        eprintln!("global error {global:.6e}, local error {:.6e}", split.local_error);
    }
    save_tree(&cut, &a.out_dir, report)?;
    eprintln!("split {:?} at rank {rank}, local error {:.3e}", a.center, split.local_error);
    Ok(())
}

pub fn norm(path: &Path, report: &mut RunReport) -> Outcome {
    if path.as_os_str().is_empty() {
        return Err(Failure::invalid("no tensor path given"));
    }
    let t: DenseTensor = tnt::read(path)?;
    let n = t.frobenius_norm();
    eprintln!("{n}");
    report.set("norm", n);
    report.set("shape", t.shape().to_vec());
    Ok(())
}

pub fn verify_center(a: &VerifyArgs, report: &mut RunReport) -> Outcome {
    let net = manifest::load(&a.manifest)?;
    let center = a
        .center
        .clone()
        .or_else(|| net.center.clone())
        .ok_or_else(|| Failure::invalid("no --center given and the manifest names none"))?;
    let tn = TreeNetwork::from_network(&net)?;
    report.set("tol", a.tol);
    if !center_check(&tn, &center, a.tol, report)? {
        return Err(Failure::numerical(format!("{center:?} is not an orthogonality center within {:.1e}", a.tol)));
    }
    // read the norm off the center directly: --tol may be looser than center_norm's check
    let n = tn.tensor(&center).expect("verified").frobenius_norm();
    eprintln!("{center:?} is an orthogonality center; network norm {n}");
    report.set("network_norm", n);
    report.set("center", json!(center));
    Ok(())
}
