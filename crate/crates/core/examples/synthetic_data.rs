//! Synthetic graphs, Gibbs sampling, empirical statistics and file formats.

use bbpl::model::io::{load_samples, save_samples, ModelFile};
use bbpl::model::{empirical_statistics, frontier_marginals};
use bbpl::synth::{gibbs_sample, GeneratorConfig, GibbsConfig};

fn main() -> bbpl::Result<()> {
    let dir = std::env::temp_dir().join("bbpl-synthetic-example");
    std::fs::create_dir_all(&dir)?;
    for kind in ["grid:5x5", "ba:25:2"] {
        let cfg = GeneratorConfig {
            kind: kind.parse()?,
            k: 2,
            seed: 4,
            param_scale: 0.5,
        };
        let (g, theta) = cfg.generate()?;
        let samples = gibbs_sample(
            &g,
            &theta,
            &GibbsConfig {
                samples: 2000,
                seed: 9,
                ..GibbsConfig::default()
            },
        )?;
        let empirical = empirical_statistics(&g, &samples)?;
        let exact = frontier_marginals(&g, &theta)?;
        let gap = empirical
            .iter()
            .zip(exact.as_slice())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        println!(
            "{kind:<9} {} vertices, {} edges; 2000 samples, max |empirical - exact| = {gap:.3}",
            g.num_vertices(),
            g.num_edges()
        );

        let stem = kind.replace(':', "_");
        let model_path = dir.join(format!("{stem}.toml"));
        let data_path = dir.join(format!("{stem}.csv"));
        ModelFile::new(g.clone(), theta.clone()).save(&model_path)?;
        save_samples(&data_path, &samples, Some(kind))?;
        let back = ModelFile::load(&model_path)?;
        assert_eq!(back.potentials, theta);
        assert_eq!(load_samples(&data_path)?, samples);
    }
    println!("wrote models and datasets under {}", dir.display());
    Ok(())
}
