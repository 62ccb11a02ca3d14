use std::env;
use std::path::PathBuf;

fn main() {
    let crate_dir = env::var("CARGO_MANIFEST_DIR").expect("CARGO_MANIFEST_DIR");
    let out = PathBuf::from(&crate_dir).join("include").join("lizorkin.h");
    std::fs::create_dir_all(out.parent().unwrap()).expect("include directory");
    let mut config = cbindgen::Config::default();
    // C enumerators share one namespace: emit LzStatus_Ok, ...
    config.enumeration.prefix_with_name = true;
    cbindgen::Builder::new()
        .with_config(config)
        .with_crate(crate_dir)
        .with_language(cbindgen::Language::C)
        .with_include_guard("LIZORKIN_H")
        .with_cpp_compat(true)
        .generate()
        .expect("unable to generate the C header")
        .write_to_file(out);
    println!("cargo:rerun-if-changed=src/lib.rs");
    println!("cargo:rerun-if-changed=build.rs");
}
