// SPDX-License-Identifier: Apache-2.0
#include "erddci/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "erddci/errors.hpp"

namespace erddci {

double mse(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "mse");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s / static_cast<double>(a.size());
}

double psnr(const Tensor& a, const Tensor& b, double peak) {
    if (!(peak > 0.0)) throw ParameterError("psnr peak must be positive");
    const double m = mse(a, b);
    if (m == 0.0) return kPsnrCapDb;
    return 10.0 * std::log10(peak * peak / m);
}

bool is_ssim_image(const Tensor& t) {
    const auto& s = t.shape();
    if (s.size() == 2) return s[0] >= 8 && s[1] >= 8;
    if (s.size() == 3) return s[0] == 1 && s[1] >= 8 && s[2] >= 8;
    return false;
}

double ssim(const Tensor& a, const Tensor& b, double peak) {
    require_same_shape(a, b, "ssim");
    if (!(peak > 0.0)) throw ParameterError("ssim peak must be positive");
    if (!is_ssim_image(a)) {
        throw ShapeError("ssim needs a single-channel image with sides >= 8, got " + shape_to_string(a.shape()));
    }
    const auto& s = a.shape();
    const std::size_t h = s[s.size() - 2];
    const std::size_t w = s[s.size() - 1];
    constexpr std::size_t win = 8;
    constexpr double n = win * win;
    const double c1 = (0.01 * peak) * (0.01 * peak);
    const double c2 = (0.03 * peak) * (0.03 * peak);

    double total = 0.0;
    std::size_t windows = 0;
    for (std::size_t r = 0; r + win <= h; ++r) {
        for (std::size_t c = 0; c + win <= w; ++c) {
            double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
            for (std::size_t i = 0; i < win; ++i) {
                for (std::size_t j = 0; j < win; ++j) {
                    const double x = a[(r + i) * w + c + j];
                    const double y = b[(r + i) * w + c + j];
                    sa += x;
                    sb += y;
                    saa += x * x;
                    sbb += y * y;
                    sab += x * y;
                }
            }
            const double mu_a = sa / n, mu_b = sb / n;
            const double var_a = saa / n - mu_a * mu_a;
            const double var_b = sbb / n - mu_b * mu_b;
            const double cov = sab / n - mu_a * mu_b;
            total += ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
                     ((mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2));
            ++windows;
        }
    }
    return total / static_cast<double>(windows);
}

MethodScores score(const Tensor& reference, const Tensor& result, double peak) {
    MethodScores s;
    s.mse = mse(reference, result);
    s.psnr = psnr(reference, result, peak);
    s.max_abs = max_abs_diff(reference, result);
    if (is_ssim_image(reference)) s.ssim = ssim(reference, result, peak);
    return s;
}

TrajectoryProjection pca_project(std::span<const NamedTrajectory> trajectories, std::size_t k) {
    if (k == 0) throw ParameterError("pca_project needs k >= 1");
    std::vector<const Tensor*> points;
    TrajectoryProjection out;
    for (const auto& nt : trajectories) {
        out.names.push_back(nt.name);
        for (const auto& p : nt.trajectory.points()) {
            if (!points.empty()) require_same_shape(p.latent, *points.front(), "pca_project");
            points.push_back(&p.latent);
        }
    }
    const auto count = static_cast<Eigen::Index>(points.size());
    if (count < 2) throw ParameterError("pca_project needs at least two points");
    const std::size_t dim = points.front()->size();

    Eigen::MatrixXd x(count, static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < count; ++i) {
        for (std::size_t j = 0; j < dim; ++j) x(i, static_cast<Eigen::Index>(j)) = (*points[static_cast<std::size_t>(i)])[j];
    }
    x.rowwise() -= x.colwise().mean();
    const Eigen::MatrixXd gram = x * x.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) throw Error("eigen-decomposition of the Gram matrix failed");

    const double top = std::max(eig.eigenvalues()(count - 1), 0.0);
    const double floor = top * 1e-12;
    out.degenerate = top <= 0.0;
    std::vector<std::vector<double>> flat(static_cast<std::size_t>(count), std::vector<double>(k, 0.0));
    for (std::size_t c = 0; c < k; ++c) {
        const Eigen::Index col = count - 1 - static_cast<Eigen::Index>(c);
        double lambda = col >= 0 ? eig.eigenvalues()(col) : 0.0;
        if (out.degenerate || col < 0 || lambda <= floor) {
            out.explained_variance.push_back(0.0);
            continue;
        }
        Eigen::VectorXd u = eig.eigenvectors().col(col);
        Eigen::Index arg = 0;
        u.cwiseAbs().maxCoeff(&arg);
        if (u(arg) < 0) u = -u;
        const double scale = std::sqrt(lambda);
        for (Eigen::Index i = 0; i < count; ++i) flat[static_cast<std::size_t>(i)][c] = scale * u(i);
        out.explained_variance.push_back(lambda / static_cast<double>(count));
    }

    std::size_t next = 0;
    for (const auto& nt : trajectories) {
        std::vector<std::vector<double>> coords;
        for (std::size_t i = 0; i < nt.trajectory.size(); ++i) coords.push_back(flat[next++]);
        out.coords.push_back(std::move(coords));
    }
    return out;
}

std::vector<double> distance_series(const Trajectory& a, const Trajectory& b) {
    if (a.size() != b.size()) throw ShapeError("distance_series needs trajectories of equal length");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = l2_distance(a[i].latent, b[i].latent);
    return d;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> rank(v.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t m = i; m <= j; ++m) rank[idx[m]] = r;
        i = j + 1;
    }
    return rank;
}

}  // namespace

double spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ParameterError("spearman needs two equal series of length >= 2");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace erddci
