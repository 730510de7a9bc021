#include "janglab/radial.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "janglab/errors.hpp"

namespace janglab {

RadialGrid RadialGrid::stretched(double r_in, double r_out, int intervals, double stretch,
                                 InnerMode mode) {
    if (intervals < kMinIntervals)
        throw DomainError(fmt::format("radial grid needs at least {} intervals, got {}",
                                      kMinIntervals, intervals));
    if (!(r_out > r_in) || r_in < 0.0) throw DomainError("radial grid needs 0 <= r_in < r_out");
    if (!(stretch >= 1.0)) throw DomainError("grid stretch must be >= 1");
    if (mode == InnerMode::Origin && r_in != 0.0)
        throw DomainError("origin-regular grids start at r = 0");

    RadialGrid g;
    g.mapped_ = true;
    g.mode_ = mode;
    g.stretch_ = stretch;
    g.h_ = 1.0 / intervals;
    const double L = r_out - r_in;
    const double beta = std::log(stretch);
    const std::size_t m = static_cast<std::size_t>(intervals) + 1;
    g.r_.resize(m);
    g.rx_.resize(m);
    g.rxx_.resize(m);
    g.rxxx_.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double xi = static_cast<double>(i) / intervals;
        if (beta == 0.0) {
            g.r_[i] = r_in + L * xi;
            g.rx_[i] = L;
            g.rxx_[i] = 0.0;
            g.rxxx_[i] = 0.0;
        } else {
            const double scale = L / std::expm1(beta);
            g.r_[i] = r_in + scale * std::expm1(beta * xi);
            g.rx_[i] = scale * beta * std::exp(beta * xi);
            g.rxx_[i] = beta * g.rx_[i];
            g.rxxx_[i] = beta * g.rxx_[i];
        }
    }
    g.r_.back() = r_out;
    return g;
}

RadialGrid RadialGrid::from_nodes(std::vector<double> nodes, InnerMode mode) {
    if (nodes.size() < 8) throw DomainError("radial grid needs at least 8 nodes");
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (!(nodes[i] > nodes[i - 1]))
            throw DomainError("radial grid nodes must be strictly increasing");
    RadialGrid g;
    g.r_ = std::move(nodes);
    g.mode_ = mode;
    return g;
}

std::size_t RadialGrid::locate(double r) const {
    const auto it = std::upper_bound(r_.begin(), r_.end(), r);
    if (it == r_.begin()) return 0;
    return std::min<std::size_t>(static_cast<std::size_t>(it - r_.begin()) - 1, r_.size() - 2);
}

std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> x,
                                                  int max_order) {
    const std::size_t np = x.size();
    const int m = max_order;
    std::vector<std::vector<double>> c(np, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0, c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < np; ++i) {
        const int mn = std::min<int>(static_cast<int>(i), m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<std::vector<double>> out(m + 1, std::vector<double>(np));
    for (std::size_t i = 0; i < np; ++i)
        for (int k = 0; k <= m; ++k) out[k][i] = c[i][k];
    return out;
}

RadialField::RadialField(std::shared_ptr<const RadialGrid> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (!grid_ || grid_->size() != values_.size())
        throw DomainError("radial field values do not match the grid");
}

namespace {

// Stencil window [start, start+size) around node i.
std::pair<std::size_t, std::size_t> window(std::size_t i, std::size_t n_nodes, int order) {
    std::size_t size = order == 3 ? 7 : 5;
    std::size_t half = size / 2;
    const bool centred = i >= half && i + half < n_nodes;
    if (!centred && order == 2) size = 6;
    size = std::min(size, n_nodes);
    std::size_t start = i >= size / 2 ? i - size / 2 : 0;
    if (start + size > n_nodes) start = n_nodes - size;
    return {start, size};
}

// Derivative in xi from a stencil at integer offsets.
double xi_derivative(std::span<const double> v, std::size_t i, int order, double h) {
    const auto [start, size] = window(i, v.size(), order);
    std::vector<double> offsets(size);
    for (std::size_t k = 0; k < size; ++k)
        offsets[k] = static_cast<double>(start + k) - static_cast<double>(i);
    const auto w = fornberg_weights(0.0, offsets, order);
    double acc = 0.0;
    for (std::size_t k = 0; k < size; ++k) acc += w[order][k] * v[start + k];
    return acc / std::pow(h, order);
}

}  // namespace

double RadialField::derivative_at(int order, std::size_t i) const {
    if (order < 1 || order > 3) throw DomainError("derivative order must be 1, 2 or 3");
    const RadialGrid& g = *grid_;
    if (!g.mapped()) {
        const auto [start, size] = window(i, values_.size(), order);
        const auto w = fornberg_weights(g[i], g.nodes().subspan(start, size), order);
        double acc = 0.0;
        for (std::size_t k = 0; k < size; ++k) acc += w[order][k] * values_[start + k];
        return acc;
    }
    const double h = g.xi_step();
    const double rx = g.r_xi(i), rxx = g.r_xixi(i), rxxx = g.r_xixixi(i);
    const double d1 = xi_derivative(values_, i, 1, h) / rx;
    if (order == 1) return d1;
    const double d2 = (xi_derivative(values_, i, 2, h) - rxx * d1) / (rx * rx);
    if (order == 2) return d2;
    return (xi_derivative(values_, i, 3, h) - 3 * rx * rxx * d2 - rxxx * d1) / (rx * rx * rx);
}

std::vector<double> RadialField::derivative(int order) const {
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < values_.size(); ++i) out[i] = derivative_at(order, i);
    return out;
}

double RadialField::interpolate(double r) const {
    const RadialGrid& g = *grid_;
    if (r < g.front() || r > g.back())
        throw DomainError(fmt::format("interpolation point {} outside [{}, {}]", r, g.front(),
                                      g.back()));
    const std::size_t n = g.size();
    const std::size_t size = std::min<std::size_t>(6, n);
    const std::size_t i = g.locate(r);
    std::size_t start = i >= 2 ? i - 2 : 0;
    if (start + size > n) start = n - size;
    const auto w = fornberg_weights(r, g.nodes().subspan(start, size), 0);
    double acc = 0.0;
    for (std::size_t k = 0; k < size; ++k) acc += w[0][k] * values_[start + k];
    return acc;
}

}  // namespace janglab
