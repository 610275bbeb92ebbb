use std::path::PathBuf;

use clap::{Args, ValueEnum};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use tnkit::manifest::{self, Network};
use tnkit::{tnt, DenseTensor, C64};

use crate::report::{Failure, Outcome, RunReport};

#[derive(Clone, Copy, ValueEnum)]
pub enum Kind {
    /// Matrix-matrix-vector network `A(-1,1) B(1,2) C(2)`.
    Mmv,
    /// Seven-tensor tree: A joined to B, C, F; B to D, E; C to G.
    Tree7,
    /// A one-tensor network.
    Single,
    /// A lone `.tnt` file.
    Tensor,
}

#[derive(Args)]
pub struct ExampleArgs {
    #[arg(value_enum)]
    pub kind: Kind,
    /// Bond dimension.
    #[arg(long, default_value_t = 3)]
    pub chi: usize,
    /// Dimension of open indices (tree7).
    #[arg(long, default_value_t = 2)]
    pub open: usize,
    #[arg(long)]
    pub complex: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Shape for `single` and `tensor`, e.g. `2,2,2`.
    #[arg(long, value_delimiter = ',')]
    pub shape: Vec<usize>,
    /// Explicit row-major real entries for `tensor`; random otherwise, or
    /// all ones with `--ones`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub values: Vec<f64>,
    #[arg(long)]
    pub ones: bool,
    /// Output directory (manifest kinds) or file (`tensor`).
    #[arg(short, long)]
    pub out: PathBuf,
}

fn random(rng: &mut StdRng, shape: Vec<usize>, complex: bool) -> DenseTensor {
    let n: usize = shape.iter().product();
    let data = (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), if complex { rng.gen_range(-1.0..1.0) } else { 0.0 }))
        .collect();
    if complex {
        DenseTensor::from_complex(shape, data).expect("shape")
    } else {
        DenseTensor::from_real(shape, data.iter().map(|z: &C64| z.re).collect()).expect("shape")
    }
}

fn network(items: Vec<(&str, Vec<i64>, DenseTensor)>) -> Network {
    Network::from_tensors(items.into_iter().map(|(id, l, t)| (id.to_string(), l, t)).collect())
}

pub fn run(a: &ExampleArgs, report: &mut RunReport) -> Outcome {
    let mut rng = StdRng::seed_from_u64(a.seed);
    let chi = a.chi;
    if chi == 0 || a.open == 0 {
        return Err(Failure::invalid("dimensions must be positive"));
    }
    let net = match a.kind {
        Kind::Mmv => network(vec![
            ("A", vec![-1, 1], random(&mut rng, vec![chi, chi], a.complex)),
            ("B", vec![1, 2], random(&mut rng, vec![chi, chi], a.complex)),
            ("C", vec![2], random(&mut rng, vec![chi], a.complex)),
        ]),
        Kind::Tree7 => {
            let layout: [(&str, Vec<i64>); 7] = [
                ("A", vec![1, 2, 3, -1]),
                ("B", vec![1, 4, 5, -2]),
                ("C", vec![2, 6, -3]),
                ("D", vec![4, -4]),
                ("E", vec![5, -5]),
                ("F", vec![3, -6]),
                ("G", vec![6, -7]),
            ];
            let items = layout
                .into_iter()
                .map(|(id, labels)| {
                    let shape = labels.iter().map(|&l| if l > 0 { chi } else { a.open }).collect();
                    (id, labels, random(&mut rng, shape, a.complex))
                })
                .collect();
            network(items)
        }
        Kind::Single | Kind::Tensor => {
            let shape = if a.shape.is_empty() { vec![chi, chi] } else { a.shape.clone() };
            let n: usize = shape.iter().product();
            let t = if a.ones {
                DenseTensor::from_real(shape.clone(), vec![1.0; n])?
            } else if !a.values.is_empty() {
                DenseTensor::from_real(shape.clone(), a.values.clone())?
            } else {
                random(&mut rng, shape.clone(), a.complex)
            };
            if let Kind::Tensor = a.kind {
                tnt::write(&t, &a.out)?;
                report.set("output", a.out.display().to_string());
                report.set("shape", shape);
                return Ok(());
            }
            let labels = (1..=shape.len() as i64).map(|l| -l).collect();
            network(vec![("T", labels, t)])
        }
    };
    let path = a.out.join("manifest.json");
    manifest::save(&net, &path)?;
    eprintln!("wrote {} tensors to {}", net.spec.len(), a.out.display());
    report.set("manifest", path.display().to_string());
    report.set("seed", a.seed);
    Ok(())
}
