#include "janglab/fit.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "janglab/errors.hpp"

namespace janglab {

double fit_decay_exponent(std::span<const double> r, std::span<const double> y, Window window) {
    if (r.size() != y.size()) throw DomainError("fit_decay_exponent: size mismatch");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    int sign = 0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!window.contains(r[i])) continue;
        if (!(r[i] > 0.0)) throw DomainError("fit_decay_exponent: radii must be positive");
        const int sg = y[i] > 0 ? 1 : (y[i] < 0 ? -1 : 0);
        if (sg == 0 || (sign != 0 && sg != sign))
            throw NumericalError("series vanishes or changes sign inside the fit window",
                                 fmt::format("r={} y={}", r[i], y[i]));
        sign = sg;
        const double lx = std::log(r[i]), ly = std::log(std::abs(y[i]));
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++count;
    }
    if (count < 3)
        throw NumericalError("fit window holds fewer than 3 samples",
                             fmt::format("[{}, {}]", window.lo, window.hi));
    const double den = count * sxx - sx * sx;
    return (count * sxy - sx * sy) / den;
}

std::vector<double> fit_inverse_powers(std::span<const double> r, std::span<const double> y,
                                       std::span<const double> powers) {
    if (r.size() != y.size()) throw DomainError("fit_inverse_powers: size mismatch");
    const std::size_t cols = powers.size() + 1;
    if (r.size() < cols) throw NumericalError("fit_inverse_powers: too few samples");
    Eigen::MatrixXd A(r.size(), cols);
    Eigen::VectorXd b(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) {
        A(i, 0) = 1.0;
        for (std::size_t j = 0; j < powers.size(); ++j) A(i, j + 1) = std::pow(r[i], -powers[j]);
        b(i) = y[i];
    }
    // Column scaling keeps the QR well conditioned when the powers differ a lot.
    Eigen::VectorXd scale = A.colwise().norm().transpose();
    for (Eigen::Index j = 0; j < A.cols(); ++j) A.col(j) /= scale(j);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < static_cast<Eigen::Index>(cols))
        throw NumericalError("fit_inverse_powers: design matrix is rank deficient");
    Eigen::VectorXd c = qr.solve(b);
    std::vector<double> out(cols);
    for (std::size_t j = 0; j < cols; ++j) out[j] = c(j) / scale(j);
    return out;
}

Extrapolation richardson_extrapolate(std::span<const std::pair<double, double>> pairs,
                                     double order) {
    if (pairs.size() < 3) throw DomainError("richardson_extrapolate needs at least 3 pairs");
    for (std::size_t i = 1; i < pairs.size(); ++i)
        if (!(pairs[i].first > pairs[i - 1].first))
            throw DomainError("richardson_extrapolate needs increasing radii");
    Extrapolation out;
    for (std::size_t i = 0; i + 1 < pairs.size(); ++i) {
        const double w0 = std::pow(pairs[i].first, order);
        const double w1 = std::pow(pairs[i + 1].first, order);
        out.eliminated.push_back((w1 * pairs[i + 1].second - w0 * pairs[i].second) / (w1 - w0));
    }
    out.limit = out.eliminated.back();
    out.residual = std::abs(out.eliminated.back() - out.eliminated[out.eliminated.size() - 2]);
    double prev = std::abs(pairs.front().second - out.limit);
    for (std::size_t i = 1; i < pairs.size(); ++i) {
        const double e = std::abs(pairs[i].second - out.limit);
        if (e > prev) out.monotone = false;
        prev = e;
    }
    return out;
}

}  // namespace janglab
