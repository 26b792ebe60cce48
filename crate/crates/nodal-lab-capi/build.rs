//! Regenerates `include/nodal_lab.h` from the crate's public items. The
//! header is committed so C consumers can use the crate without running
//! cbindgen; generation failures degrade to a build warning rather than
//! breaking the (already correct) committed header.

use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").expect("cargo sets manifest dir"));
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");

    let config = match cbindgen::Config::from_file(crate_dir.join("cbindgen.toml")) {
        Ok(config) => config,
        Err(err) => {
            println!("cargo:warning=cbindgen.toml not usable ({err}); keeping committed header");
            return;
        }
    };
    match cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(config)
        .generate()
    {
        Ok(bindings) => {
            bindings.write_to_file(crate_dir.join("include").join("nodal_lab.h"));
        }
        Err(err) => {
            println!("cargo:warning=header generation failed ({err}); keeping committed header");
        }
    }
}
