//! Prints the three-component splitting library for a few penalties.

fn main() {
    for lambda in [0.0, 1e-4, 1e-3, 1e-2] {
        let lib = uqprop::gmm::build_split_library(lambda).expect("library");
        println!(
            "lambda={lambda:e} w={:.10} m={:.10} sigma={:.10} variance={:.6} l2={:.3e}",
            lib.w,
            lib.m,
            lib.sigma,
            lib.mixture_variance(),
            lib.l2_distance()
        );
    }
}
