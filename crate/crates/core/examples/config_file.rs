//! Resolve an experiment from `key = value` text, as the command line does.

use pinchsim::config::Settings;
use pinchsim::experiments::ExperimentId;

const TEXT: &str = "
# full-scale sample counts for the WMMSE vs ZF comparison
seed = 17
samples = 100
outer_iters = 20
pmax-list = 30, 35, 40
trials = 20
";

fn main() -> pinchsim::Result<()> {
    let settings = Settings::parse(TEXT)?;
    let config = settings.experiment(ExperimentId::Fig4WmmseVsZf)?;
    for (k, v) in config.entries() {
        println!("{k} = {v}");
    }
    Ok(())
}
