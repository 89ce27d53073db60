//! Prints the road network built from a scenario file (or the built-in
//! layout): routes, where they cross junction boxes and zebra crossings.
//!
//!     cargo run --release --example scenario_layout -- [scenario.toml]

use cv2i::mobility::{RoadNetwork, Scenario};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = match std::env::args().nth(1) {
        Some(p) => Scenario::load(p.as_ref())?,
        None => Scenario::default(),
    };
    let net = RoadNetwork::build(&scenario);
    for r in &net.vehicle_routes {
        println!(
            "{} from ({:.0}, {:.0}) heading {:.0}°, {:.0} m",
            r.name,
            r.origin.x,
            r.origin.y,
            r.heading.to_degrees(),
            r.length
        );
        for j in &r.junctions {
            println!(
                "  junction {} over s ∈ [{:.1}, {:.1}]{}",
                j.junction,
                j.enter,
                j.exit,
                if j.priority { " (priority)" } else { "" }
            );
        }
        for c in &r.crosswalks {
            println!("  crossing {} over s ∈ [{:.1}, {:.1}]", c.crosswalk, c.enter, c.exit);
        }
    }
    for p in &net.ped_routes {
        println!("pedestrian route {}, {:.0} m", p.name, p.length());
        for c in &p.crossings {
            println!("  crossing {} over s ∈ [{:.1}, {:.1}]", c.crosswalk, c.enter, c.exit);
        }
    }
    Ok(())
}
