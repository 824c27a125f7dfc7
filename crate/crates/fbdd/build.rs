fn main() {
    // ndarray-linalg is used without a bundled LAPACK backend; link the
    // system OpenBLAS, which provides BLAS, CBLAS and LAPACK symbols.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
