macro_rules! example {
    ($name:ident) => {
        mod $name {
            include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/", stringify!($name), ".rs"));
        }
    };
}

example!(tree_sweeps);
example!(instance_io);
example!(mixed_norms);
example!(operator_norm);
example!(domination_transforms);
example!(wolff_potential);
example!(characterization);
example!(maurey_round_trip);
example!(series_classifier);
example!(large_gamma_chain);
example!(small_gamma_chain);
example!(verification_suite);

#[test]
fn tree_sweeps_runs() {
    tree_sweeps::run_example().unwrap();
}

#[test]
fn instance_io_runs() {
    instance_io::run_example().unwrap();
}

#[test]
fn mixed_norms_runs() {
    mixed_norms::run_example().unwrap();
}

#[test]
fn operator_norm_runs() {
    operator_norm::run_example().unwrap();
}

#[test]
fn domination_transforms_runs() {
    domination_transforms::run_example().unwrap();
}

#[test]
fn wolff_potential_runs() {
    wolff_potential::run_example().unwrap();
}

#[test]
fn characterization_runs() {
    characterization::run_example().unwrap();
}

#[test]
fn maurey_round_trip_runs() {
    maurey_round_trip::run_example().unwrap();
}

#[test]
fn series_classifier_runs() {
    series_classifier::run_example().unwrap();
}

#[test]
fn large_gamma_chain_runs() {
    large_gamma_chain::run_example().unwrap();
}

#[test]
fn small_gamma_chain_runs() {
    small_gamma_chain::run_example().unwrap();
}

#[test]
fn verification_suite_runs() {
    verification_suite::run_example().unwrap();
}
