//! Thin binary wrapper: all logic lives in [`nodal_lab::cli`].

fn main() {
    std::process::exit(nodal_lab::cli::run_from_env());
}
