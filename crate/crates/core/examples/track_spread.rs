//! Terminal-value dispersion of raw and selected generated tracks on a simulated history.

use ganmc::baselines::{GbmParams, GbmSampler};
use ganmc::eval::{fit_generator, ExperimentConfig};
use ganmc::market_data::PriceSeries;
use ganmc::sampler::{Track, TrackSampler};
use ganmc::similarity::rank_and_select;
use ganmc::windowing::partition;

fn log_ret_std(tracks: &[Vec<f64>], k: usize) -> (f64, f64) {
    let r: Vec<f64> = tracks.iter().map(|t| (t[k] / t[0]).ln()).collect();
    let m = r.iter().sum::<f64>() / r.len() as f64;
    let v = r.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (r.len() - 1) as f64;
    (m, v.sqrt())
}

fn level_std(tracks: &[Vec<f64>], k: usize) -> (f64, f64) {
    let r: Vec<f64> = tracks.iter().map(|t| t[k]).collect();
    let m = r.iter().sum::<f64>() / r.len() as f64;
    let v = r.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (r.len() - 1) as f64;
    (m, v.sqrt())
}

fn main() -> ganmc::Result<()> {
    env_logger::init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seed: u64 = args.first().and_then(|s| s.parse().ok()).unwrap_or(7);
    let extra = args.iter().skip(1).cloned().collect::<Vec<_>>().join("\n");
    let gbm = GbmSampler::new(100.0, GbmParams::new(0.05, 0.2)?, 1.0 / 252.0, 699)?;
    let mut path = vec![100.0];
    path.extend(gbm.sample(1, seed)?.remove(0).values);
    let series = PriceSeries::from_values("SYN", path.clone())?;
    let cfg = ExperimentConfig::parse(&format!(
        "[data]\nprices = p.csv\n[model]\nwindow_len = 64\nn_samples = 2048\n{extra}\n[run]\nseed = {seed}\n"
    ))?;
    let (model, report) = fit_generator(&cfg, &series)?;
    println!(
        "stride {} epochs {} d_loss {:?} g_loss {:?}",
        report.stride,
        report.epochs_run,
        report.discriminator_loss.last(),
        report.generator_loss.last()
    );
    let data: Vec<Vec<f64>> = partition(&series, 1, 64)?.windows().to_vec();
    let raw: Vec<Track<f64>> = model.sample(2048, 1)?;
    let rawv: Vec<Vec<f64>> = raw.iter().map(|t| t.values.clone()).collect();
    let reference = &path[path.len() - 64..];
    let ranking = rank_and_select(&raw, reference, 0.8)?;
    let sel: Vec<Vec<f64>> = ranking.select(&raw).into_iter().map(|t| t.values).collect();
    let data_tracks: Vec<Track<f64>> = data.iter().map(|w| Track::new(w.clone())).collect();
    let data_sel: Vec<Vec<f64>> = rank_and_select(&data_tracks, reference, 0.8)?
        .select(&data_tracks)
        .into_iter()
        .map(|t| t.values)
        .collect();
    let gbm_tracks = GbmSampler::new(*path.last().unwrap(), GbmParams::new(0.05, 0.2)?, 1.0 / 252.0, 64)?.sample(2048, 3)?;
    let gbm_sel: Vec<Vec<f64>> = rank_and_select(&gbm_tracks, reference, 0.8)?
        .select(&gbm_tracks)
        .into_iter()
        .map(|t| t.values)
        .collect();
    for (name, set) in [("data", &data), ("data-sel", &data_sel), ("gbm-sel", &gbm_sel), ("raw", &rawv), ("selected", &sel)] {
        println!(
            "{name:9} n={:5} logret63 {:?} level0 {:?} level62 {:?}",
            set.len(),
            log_ret_std(set, 62),
            level_std(set, 0),
            level_std(set, 62)
        );
    }
    println!("spot {} ref mean {}", path.last().unwrap(), reference.iter().sum::<f64>() / 64.0);
    Ok(())
}
