//! Regenerates `data/case_study_synthetic.csv`, a synthetic two-arm trial
//! with 2,373 treated (385 events) and 2,371 control participants (500 events).
//!
//! Event times follow an exponentiated-uniform model with proportional risks;
//! follow-up is uniform on [8, 27.6] months. Times are rounded to three
//! decimals. The first seed whose draw hits both event counts exactly is used.

use nppr::io::write_dataset_csv;
use nppr::parametric::{eu_quantile, EuParams};
use nppr::rng::{substream, Domain};
use nppr::{Dataset, Group, Observation};
use rand::seq::SliceRandom;
use rand::Rng;

const N_TREATMENT: usize = 2373;
const N_CONTROL: usize = 2371;
const EVENTS_TREATMENT: usize = 385;
const EVENTS_CONTROL: usize = 500;
const ALPHA: f64 = 0.859;
const THETA0: f64 = 0.009245;
const FOLLOW_UP: (f64, f64) = (8.0, 27.6);

fn draw(seed: u64) -> Vec<Observation> {
    // proportional risks with RR equal to the target event-count ratio
    let rr = (EVENTS_TREATMENT as f64 / N_TREATMENT as f64) / (EVENTS_CONTROL as f64 / N_CONTROL as f64);
    let params = EuParams::new(ALPHA, THETA0 * rr.powf(1.0 / ALPHA), THETA0);
    let mut rng = substream(seed, Domain::Simulation, 0);
    let mut groups: Vec<Group> = std::iter::repeat_n(Group::Treatment, N_TREATMENT)
        .chain(std::iter::repeat_n(Group::Control, N_CONTROL))
        .collect();
    groups.shuffle(&mut rng);
    groups
        .into_iter()
        .map(|group| {
            let u: f64 = rng.random_range(f64::EPSILON..1.0);
            let t = eu_quantile(&params, group, u).unwrap();
            let c = rng.random_range(FOLLOW_UP.0..FOLLOW_UP.1);
            let time = ((t.min(c) * 1000.0).round() / 1000.0).max(0.001);
            Observation::new(time, t <= c, group)
        })
        .collect()
}

fn main() -> nppr::Result<()> {
    let rows = (0u64..)
        .map(draw)
        .find(|rows| {
            let events = |g| rows.iter().filter(|o| o.group == g && o.event).count();
            events(Group::Treatment) == EVENTS_TREATMENT && events(Group::Control) == EVENTS_CONTROL
        })
        .unwrap();
    write_dataset_csv(&Dataset::from_observations(rows)?, std::io::stdout().lock())
}
