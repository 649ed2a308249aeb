#pragma once

#include <cstddef>

#include "rnnls/core.hpp"
#include "rnnls/rng.hpp"
#include "rnnls/sketch.hpp"

namespace rnnls {

struct LeverageProfile {
    Vector row_norms_sq;        // ||U_(i)||^2 for an orthonormal basis U of range(Phi)
    double max_leverage = 0;    // coherence
    double coherence_bound = 0; // 4.2 d log2(n) / n
};

/// Squared row norms of an orthonormal basis of the column space (thin QR).
/// Throws InvalidArgument for rows < cols or numerically rank-deficient input.
LeverageProfile leverage_scores(const DenseMatrix& phi);

/// Orthonormal basis of the column space (thin Q factor); same preconditions.
DenseMatrix orthonormal_basis(const DenseMatrix& phi);

/// n x d matrix with orthonormal columns: QR of a Gaussian matrix.
DenseMatrix random_orthonormal(std::size_t n, std::size_t d, RngStream& rng);

/// H D applied to the columns of `a` with D drawn from rng.
DenseMatrix randomized_hadamard(const DenseMatrix& a, RngStream& rng);

struct CoherenceReport {
    double max_row_norm_sq = 0;  // max_i ||(H D U)_(i)||^2
    double bound = 0;            // 4.2 d log2(n) / n
    bool within_bound = false;
    double frobenius_sq = 0;     // sum of all row norms, d for orthonormal U
};

/// Row coherence of H D U for a fresh sign draw. Requires n a power of two and
/// n >= 20 unless `force` is set.
CoherenceReport coherence_after_hd(const DenseMatrix& u, RngStream& rng, bool force = false);

struct DistortionReport {
    std::size_t r = 0;
    std::size_t trials = 0;
    /// Over every probe direction and trial: | |Phi y|^2 - |Phi~ y|^2 | / |Phi y|^2.
    double max_relative_distortion = 0;
    double median_relative_distortion = 0;
    /// Per-trial worst case over all y (the spectral norm of U^T S^T S U - I).
    double max_spectral_distortion = 0;
    double median_spectral_distortion = 0;
    double epsilon_target = 0;  // echoed from the caller, 0 when not given
    double mean_kept_rows = 0;
};

/// Probe set per trial: canonical basis vectors, `random_probes` random unit
/// vectors, the right singular vectors of Phi, and the worst-case direction from
/// the symmetric eigenproblem of the sampled-minus-exact Gram difference.
/// Trials run in parallel on streams rng.derive(t).
DistortionReport measure_distortion(const DenseMatrix& phi, std::size_t r, const SamplingProbabilities& p,
                                    std::size_t trials, const RngStream& rng, double epsilon_target = 0.0,
                                    std::size_t random_probes = 8);

/// Smallest r with r / log2(r) >= 9 c_o^2 d / (beta eps^2).
std::size_t subspace_sample_size(std::size_t d, double eps, double beta = 1.0, double c_o = 1.0);

}  // namespace rnnls
