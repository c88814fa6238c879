//! Lifecycle, peak-hour share, hourly gini and the 48-hour profile for each
//! channel of an hourly view-count CSV. Without an argument a two-channel
//! synthetic dataset is analyzed.
//!
//! `cargo run --example channel_analysis -- views.csv`

use std::fs::File;

use junk_bubbles::empirical::{average_temporal_profile, channel_summary, load_dataset};

fn synthetic() -> String {
    let mut csv = String::from("channel_id,video_id,published_at,t_hour,views\n");
    for k in 0..4 {
        let published = format!("2019-12-{:02}T00:00:00Z", 9 + k);
        for (h, v) in [(0, 400), (1, 80), (2, 15), (3, 5), (167, 0)] {
            csv.push_str(&format!("tabloid,t{k},{published},{h},{v}\n"));
        }
        for h in 0..168 {
            csv.push_str(&format!("broadsheet,b{k},{published},{h},{}\n", 20 - (h / 12)));
        }
    }
    csv
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let channels = match std::env::args().nth(1) {
        Some(path) => load_dataset(File::open(path)?)?,
        None => load_dataset(synthetic().as_bytes())?,
    };
    for channel in &channels {
        let s = channel_summary(channel);
        let profile = average_temporal_profile(channel)?;
        let first_day: f64 = profile.mean_share.iter().take(24).sum();
        println!(
            "{}: {} videos, {} views, mean lifecycle {:?} h, mean peak-hour share {:?}, mean hourly gini {:.3}, first-day share {:.3}",
            s.channel_id,
            s.videos,
            s.total_views,
            s.mean_lifecycle_hours,
            s.mean_peak_hour_share,
            s.mean_gini_hourly,
            first_day
        );
    }
    Ok(())
}
