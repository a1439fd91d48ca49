use std::time::Instant;
use rankdiff::closedform::HarmonicCache;
use rankdiff::oracle::dp_optimal_multi;
use rankdiff::thresholds::ThresholdTables;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let what = args.get(1).map(|s| s.as_str()).unwrap_or("all");
    if what == "build" || what == "all" {
        for n in [500usize, 1000, 2000] {
            let t0 = Instant::now();
            let _ = ThresholdTables::build(n).unwrap();
            println!("build({n}): {:?}", t0.elapsed());
        }
    }
    if what == "build10k" {
        let t0 = Instant::now();
        let _ = ThresholdTables::build(10_000).unwrap();
        println!("build(10000): {:?}", t0.elapsed());
    }
    if what == "dp" || what == "all" {
        for n in [100usize, 200, 300] {
            let t0 = Instant::now();
            let _ = dp_optimal_multi(n).unwrap();
            println!("dp_multi({n}): {:?}", t0.elapsed());
        }
    }
    if what == "harm" || what == "all" {
        let t0 = Instant::now();
        let _ = HarmonicCache::up_to(10_000);
        println!("harmonic cache to 10000: {:?}", t0.elapsed());
    }
}
