#include "difreg/features/pca.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <string>

#include "difreg/core/error.hpp"
#include "difreg/core/log.hpp"

namespace difreg {

double PcaBasis::explained_fraction() const {
    double kept = 0.0, total = 0.0;
    for (double v : variances) kept += v;
    for (double v : all_variances) total += v;
    return total > 0.0 ? kept / total : 1.0;
}

PcaBasis fit_pca(std::span<const FeatureMap* const> maps, int out_dim) {
    if (maps.empty()) fail(ErrorCode::InvalidInput, "fit_pca: no maps");
    if (out_dim < 1) fail(ErrorCode::InvalidInput, "fit_pca: out_dim must be >= 1");
    const int c = maps.front()->channels;
    std::size_t n = 0;
    for (const auto* m : maps) {
        m->validate();
        if (m->channels != c) fail(ErrorCode::InvalidInput, "fit_pca: channel count differs between maps");
        n += m->pixel_count();
    }

    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), c);
    Eigen::Index row = 0;
    for (const auto* m : maps)
        for (std::size_t p = 0; p < m->pixel_count(); ++p, ++row)
            for (int k = 0; k < c; ++k) x(row, k) = m->data[p * static_cast<std::size_t>(c) + k];

    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;

    // Eigen-decompose whichever of XᵀX (C×C) or XXᵀ (N×N) is smaller.
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd axes;  // columns are unit axes in channel space
    const double inv_n = 1.0 / static_cast<double>(n);
    if (static_cast<std::size_t>(c) <= n) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((x.transpose() * x) * inv_n);
        eigenvalues = es.eigenvalues().reverse();
        axes = es.eigenvectors().rowwise().reverse();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((x * x.transpose()) * inv_n);
        eigenvalues = es.eigenvalues().reverse();
        const Eigen::MatrixXd u = es.eigenvectors().rowwise().reverse();
        axes = x.transpose() * u;
        for (Eigen::Index j = 0; j < axes.cols(); ++j) {
            const double norm = axes.col(j).norm();
            if (norm > 0.0) axes.col(j) /= norm;
        }
    }

    PcaBasis basis;
    basis.mean.assign(mean.data(), mean.data() + c);
    const double top = eigenvalues.size() > 0 ? std::max(eigenvalues(0), 0.0) : 0.0;
    const double tol = std::max(top * 1e-10, 1e-300);
    for (Eigen::Index j = 0; j < eigenvalues.size(); ++j) {
        const double lambda = std::max(eigenvalues(j), 0.0);
        basis.all_variances.push_back(lambda);
        if (lambda > tol) ++basis.rank;
    }

    const auto kept = std::min<std::size_t>(basis.rank, static_cast<std::size_t>(out_dim));
    for (std::size_t j = 0; j < static_cast<std::size_t>(out_dim); ++j) {
        std::vector<double> axis(static_cast<std::size_t>(c), 0.0);
        double variance = 0.0;
        if (j < kept) {
            const auto col = axes.col(static_cast<Eigen::Index>(j));
            Eigen::Index arg = 0;
            col.cwiseAbs().maxCoeff(&arg);
            const double sign = col(arg) < 0.0 ? -1.0 : 1.0;
            for (int k = 0; k < c; ++k) axis[k] = sign * col(k);
            variance = basis.all_variances[j];
        }
        basis.axes.push_back(std::move(axis));
        basis.variances.push_back(variance);
    }
    if (kept < static_cast<std::size_t>(out_dim))
        log::warn("pca: requested " + std::to_string(out_dim) + " components but rank is " +
                  std::to_string(basis.rank) + "; padding with zero channels");
    return basis;
}

FeatureMap project_pca(const FeatureMap& fm, const PcaBasis& basis) {
    const auto c = static_cast<std::size_t>(fm.channels);
    if (basis.mean.size() != c) fail(ErrorCode::InvalidInput, "project_pca: basis channel mismatch");
    const int out_dim = static_cast<int>(basis.axes.size());
    FeatureMap out(fm.height, fm.width, out_dim, fm.layer_id, fm.source_height, fm.source_width);
    std::vector<double> centered(c);
    for (std::size_t p = 0; p < fm.pixel_count(); ++p) {
        for (std::size_t k = 0; k < c; ++k) centered[k] = fm.data[p * c + k] - basis.mean[k];
        for (int j = 0; j < out_dim; ++j) {
            const auto& axis = basis.axes[static_cast<std::size_t>(j)];
            double s = 0.0;
            for (std::size_t k = 0; k < c; ++k) s += axis[k] * centered[k];
            out.data[p * static_cast<std::size_t>(out_dim) + j] = static_cast<float>(s);
        }
    }
    return out;
}

FeatureMap pca_reduce(const FeatureMap& fm, int out_dim) {
    const FeatureMap* maps[] = {&fm};
    return project_pca(fm, fit_pca(maps, out_dim));
}

std::vector<FeatureMap> pca_reduce_joint(std::span<const FeatureMap> maps, int out_dim) {
    std::vector<const FeatureMap*> ptrs;
    for (const auto& m : maps) ptrs.push_back(&m);
    const PcaBasis basis = fit_pca(ptrs, out_dim);
    std::vector<FeatureMap> out;
    for (const auto& m : maps) out.push_back(project_pca(m, basis));
    return out;
}

}  // namespace difreg
