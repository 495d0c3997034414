use std::env;
use std::fs;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(env::var("CARGO_MANIFEST_DIR").expect("CARGO_MANIFEST_DIR"));
    let header_path = crate_dir.join("include").join("offlang.h");
    fs::create_dir_all(header_path.parent().expect("include dir")).expect("create include dir");

    let header = cbindgen::Builder::new()
        .with_crate(&crate_dir)
        .with_config(cbindgen::Config::from_file(crate_dir.join("cbindgen.toml")).expect("cbindgen.toml"))
        .generate()
        .expect("generate C header");

    // write only on change so incremental builds stay quiet
    let mut rendered = Vec::new();
    header.write(&mut rendered);
    let current = fs::read(&header_path).unwrap_or_default();
    if current != rendered {
        fs::write(&header_path, rendered).expect("write offlang.h");
    }

    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=cbindgen.toml");
}
