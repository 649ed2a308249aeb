#include "rnnls/diagnostics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "rnnls/errors.hpp"
#include "rnnls/fwht.hpp"

namespace rnnls {

namespace {

using EMat = Eigen::MatrixXd;
using EVec = Eigen::VectorXd;

Eigen::Map<const EMat> view(const DenseMatrix& m) {
    return {m.data().data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

DenseMatrix from_eigen(const EMat& m) {
    return {static_cast<std::size_t>(m.rows()), static_cast<std::size_t>(m.cols()),
            Vector(m.data(), m.data() + m.size())};
}

double median_of(Vector v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

double coherence_bound_for(std::size_t n, std::size_t d) {
    return 4.2 * static_cast<double>(d) * std::log2(static_cast<double>(n)) / static_cast<double>(n);
}

}  // namespace

DenseMatrix orthonormal_basis(const DenseMatrix& phi) {
    if (phi.rows() < phi.cols() || phi.cols() == 0) {
        throw InvalidArgument("orthonormal_basis: need rows >= cols >= 1");
    }
    Eigen::ColPivHouseholderQR<EMat> qr(view(phi));
    if (qr.rank() < static_cast<Eigen::Index>(phi.cols())) {
        throw InvalidArgument("orthonormal_basis: input is rank deficient (rank " + std::to_string(qr.rank()) + " < " +
                              std::to_string(phi.cols()) + ")");
    }
    const EMat q = qr.householderQ() * EMat::Identity(qr.rows(), static_cast<Eigen::Index>(phi.cols()));
    return from_eigen(q);
}

LeverageProfile leverage_scores(const DenseMatrix& phi) {
    const DenseMatrix u = orthonormal_basis(phi);
    LeverageProfile out;
    out.row_norms_sq.assign(u.rows(), 0.0);
    for (std::size_t j = 0; j < u.cols(); ++j) {
        const auto c = u.col(j);
        for (std::size_t i = 0; i < u.rows(); ++i) out.row_norms_sq[i] += c[i] * c[i];
    }
    out.max_leverage = *std::max_element(out.row_norms_sq.begin(), out.row_norms_sq.end());
    out.coherence_bound = coherence_bound_for(u.rows(), u.cols());
    return out;
}

DenseMatrix random_orthonormal(std::size_t n, std::size_t d, RngStream& rng) {
    Vector g(n * d);
    for (auto& v : g) v = rng.normal();
    return orthonormal_basis(DenseMatrix(n, d, std::move(g)));
}

DenseMatrix randomized_hadamard(const DenseMatrix& a, RngStream& rng) {
    const std::size_t n = a.rows();
    if (n < 2 || !is_power_of_two(n)) throw InvalidArgument("randomized_hadamard: rows must be a power of two");
    Vector sign(n);
    for (auto& s : sign) s = rng.sign();
    Vector buf(a.data().begin(), a.data().end());
    for (std::size_t j = 0; j < a.cols(); ++j)
        for (std::size_t i = 0; i < n; ++i) buf[j * n + i] *= sign[i];
    fwht_columns_inplace(buf, n, a.cols());
    return {n, a.cols(), std::move(buf)};
}

CoherenceReport coherence_after_hd(const DenseMatrix& u, RngStream& rng, bool force) {
    const std::size_t n = u.rows();
    if (n < 2 || !is_power_of_two(n)) throw InvalidArgument("coherence_after_hd: n must be a power of two");
    if (!force && (n < 20 || n < u.cols())) {
        throw InvalidArgument("coherence_after_hd: the bound assumes n >= 20 and n >= d (pass force to override)");
    }
    const DenseMatrix hdu = randomized_hadamard(u, rng);
    Vector norms(n, 0.0);
    for (std::size_t j = 0; j < hdu.cols(); ++j) {
        const auto c = hdu.col(j);
        for (std::size_t i = 0; i < n; ++i) norms[i] += c[i] * c[i];
    }
    CoherenceReport out;
    out.max_row_norm_sq = *std::max_element(norms.begin(), norms.end());
    for (double v : norms) out.frobenius_sq += v;
    out.bound = coherence_bound_for(n, u.cols());
    out.within_bound = out.max_row_norm_sq <= out.bound;
    return out;
}

DistortionReport measure_distortion(const DenseMatrix& phi, std::size_t r, const SamplingProbabilities& p,
                                    std::size_t trials, const RngStream& rng, double epsilon_target,
                                    std::size_t random_probes) {
    if (trials == 0) throw InvalidArgument("measure_distortion: trials must be positive");
    if (r == 0) throw InvalidArgument("measure_distortion: r must be positive");
    if (p.size() != phi.rows()) throw DimensionError("measure_distortion: probabilities length differs from rows");
    const auto d = static_cast<Eigen::Index>(phi.cols());

    if (Eigen::ColPivHouseholderQR<EMat>(view(phi)).rank() < d) {
        throw InvalidArgument("measure_distortion: Phi is rank deficient");
    }
    // Phi = Q R with R upper triangular, so Phi^T Phi = R^T R.
    const EMat rf = Eigen::HouseholderQR<EMat>(view(phi)).matrixQR().topRows(d).triangularView<Eigen::Upper>();
    const auto upper = rf.triangularView<Eigen::Upper>();
    const DenseMatrix g_exact = gram(phi);
    const EMat g = view(g_exact);

    // Probe directions, one per column.
    Eigen::JacobiSVD<EMat> svd(rf, Eigen::ComputeFullV);
    EMat probes(d, d + static_cast<Eigen::Index>(random_probes) + d);
    probes.leftCols(d).setIdentity();
    RngStream probe_rng = rng.derive(~std::uint64_t{0});
    for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(random_probes); ++k) {
        EVec y(d);
        for (Eigen::Index i = 0; i < d; ++i) y[i] = probe_rng.normal();
        probes.col(d + k) = y.normalized();
    }
    probes.rightCols(d) = svd.matrixV();
    const EVec denom = (probes.transpose() * g * probes).diagonal();

    std::vector<Vector> per_trial(trials);
    Vector spectral(trials);
    Vector kept(trials);
    const auto ntrials = static_cast<std::ptrdiff_t>(trials);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t tt = 0; tt < ntrials; ++tt) {
        const auto t = static_cast<std::size_t>(tt);
        RngStream stream = rng.derive(t);
        const SketchPlan plan = draw_subspace_plan(p, r, stream);
        const DenseMatrix sampled = select_rows(plan, phi);
        kept[t] = static_cast<double>(plan.kept());
        const DenseMatrix g_sampled = gram(sampled);
        const EMat diff = view(g_sampled) - g;

        // Worst case over y: extreme eigenvalue of R^-T diff R^-1.
        const EMat left = upper.transpose().solve(diff);
        const EMat m = upper.transpose().solve(left.transpose());
        const EMat sym = 0.5 * (m + m.transpose());
        Eigen::SelfAdjointEigenSolver<EMat> eig(sym);
        const EVec& lam = eig.eigenvalues();
        const Eigen::Index worst = std::abs(lam[0]) >= std::abs(lam[d - 1]) ? 0 : d - 1;
        spectral[t] = std::abs(lam[worst]);

        Vector& out = per_trial[t];
        out.reserve(static_cast<std::size_t>(probes.cols()) + 1);
        for (Eigen::Index k = 0; k < probes.cols(); ++k) {
            if (denom[k] > 0.0) {
                const auto y = probes.col(k);
                out.push_back(std::abs(y.dot(diff * y)) / denom[k]);
            }
        }
        const EVec y_star = upper.solve(EVec(eig.eigenvectors().col(worst)));
        const double den = y_star.dot(g * y_star);
        if (den > 0.0) out.push_back(std::abs(y_star.dot(diff * y_star)) / den);
    }

    DistortionReport rep;
    rep.r = r;
    rep.trials = trials;
    rep.epsilon_target = epsilon_target;
    Vector all;
    for (const auto& v : per_trial) all.insert(all.end(), v.begin(), v.end());
    rep.max_relative_distortion = all.empty() ? 0.0 : *std::max_element(all.begin(), all.end());
    rep.median_relative_distortion = median_of(all);
    rep.max_spectral_distortion = *std::max_element(spectral.begin(), spectral.end());
    rep.median_spectral_distortion = median_of(spectral);
    double kept_sum = 0.0;
    for (double k : kept) kept_sum += k;
    rep.mean_kept_rows = kept_sum / static_cast<double>(trials);
    return rep;
}

std::size_t subspace_sample_size(std::size_t d, double eps, double beta, double c_o) {
    if (!(eps > 0.0) || eps > 1.0 || !(beta > 0.0) || beta > 1.0 || !(c_o > 0.0) || d == 0) {
        throw InvalidArgument("subspace_sample_size: need eps in (0, 1], beta in (0, 1], c_o > 0, d >= 1");
    }
    const double alpha = 9.0 * c_o * c_o * static_cast<double>(d) / (beta * eps * eps);
    auto ok = [&](std::size_t r) { return static_cast<double>(r) / std::log2(static_cast<double>(r)) >= alpha; };
    // r / log2(r) increases for r >= 3.
    std::size_t hi = 4;
    while (!ok(hi)) hi *= 2;
    std::size_t lo = std::max<std::size_t>(3, hi / 2);
    if (ok(lo)) return lo;
    while (hi - lo > 1) {
        const std::size_t mid = lo + (hi - lo) / 2;
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

}  // namespace rnnls
