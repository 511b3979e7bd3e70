use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{FleetSpec, Instance, Node, Point};

/// Side of the square service area, km.
pub const AREA_KM: f64 = 15.0;
pub const MIN_WEIGHT: f64 = 0.5;
pub const MAX_WEIGHT: f64 = 10.0;

/// Random instance with the depot and customers uniform over the service
/// area. The stream is ChaCha8 seeded with `seed`; draws are depot x, y, then
/// per customer x, y, weight.
pub fn generate_instance(size: usize, seed: u64, fleet: &FleetSpec) -> Instance {
    generate_instance_with(size, seed, fleet, 0.0).expect("fraction 0 is always valid")
}

/// As [`generate_instance`], additionally marking each customer unreachable
/// by truck with probability `unreachable_frac` (one extra draw per customer
/// when the fraction is positive).
pub fn generate_instance_with(size: usize, seed: u64, fleet: &FleetSpec, unreachable_frac: f64) -> Result<Instance> {
    if !(0.0..=1.0).contains(&unreachable_frac) {
        return Err(Error::Config(format!("unreachable fraction {unreachable_frac} is outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let depot = Point::new(rng.gen_range(0.0..=AREA_KM), rng.gen_range(0.0..=AREA_KM));
    let customers = (1..=size)
        .map(|id| {
            let x = rng.gen_range(0.0..=AREA_KM);
            let y = rng.gen_range(0.0..=AREA_KM);
            let weight = rng.gen_range(MIN_WEIGHT..=MAX_WEIGHT);
            let truck_reachable = unreachable_frac <= 0.0 || rng.gen::<f64>() >= unreachable_frac;
            Node { id, x, y, weight, truck_reachable }
        })
        .collect();
    Instance::new(depot, customers, fleet.clone(), seed)
}
