// Fit embeddings on a synthetic bilinear sample set and report how close
// they land to the planted subspaces.

#include "jdr/jdr.hpp"
#include "jdr/metrics.hpp"
#include "jdr/synth.hpp"

#include <iostream>

int main() {
    jdr::SyntheticSpec spec;
    spec.n1 = 30;
    spec.n2 = 20;
    spec.r = 3;
    spec.m = 5000;
    spec.seed = 7;

    const auto truth = jdr::make_ground_truth(spec);
    const auto samples = jdr::generate(spec, truth);

    const auto exact = jdr::fit_jdr(samples, spec.r, jdr::Normalization::Full);
    const auto fast = jdr::fit_fast_jdr(samples, spec.r, /*seed=*/1);

    std::cout << "leading singular values: " << exact.sigma.transpose() << "\n";
    std::cout << "exact NSEE " << jdr::nsee(truth.U, exact.U, truth.V, exact.V) << "\n";
    std::cout << "fast  NSEE " << jdr::nsee(truth.U, fast.U, truth.V, fast.V) << "\n";
}
