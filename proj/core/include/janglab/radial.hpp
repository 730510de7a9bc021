#pragma once

#include <memory>
#include <span>
#include <vector>

namespace janglab {

enum class InnerMode { Origin, Anchored };

/// Radial mesh. Either the image of a uniform xi-grid under
///   r(xi) = r_in + (r_out - r_in) expm1(beta xi) / expm1(beta),  beta = log(stretch),
/// or an arbitrary strictly increasing node list.
class RadialGrid {
public:
    static constexpr int kMinIntervals = 64;

    /// stretch is the ratio of the last to the first spacing; 1 gives a uniform mesh.
    static RadialGrid stretched(double r_in, double r_out, int intervals, double stretch,
                                InnerMode mode = InnerMode::Anchored);
    static RadialGrid from_nodes(std::vector<double> nodes, InnerMode mode = InnerMode::Anchored);

    int intervals() const noexcept { return static_cast<int>(r_.size()) - 1; }
    std::size_t size() const noexcept { return r_.size(); }
    std::span<const double> nodes() const noexcept { return r_; }
    double operator[](std::size_t i) const noexcept { return r_[i]; }
    double front() const noexcept { return r_.front(); }
    double back() const noexcept { return r_.back(); }
    InnerMode inner_mode() const noexcept { return mode_; }

    bool mapped() const noexcept { return mapped_; }
    double xi_step() const noexcept { return h_; }
    double stretch() const noexcept { return stretch_; }
    /// dr/dxi and higher xi-derivatives of the map at node i (mapped grids only).
    double r_xi(std::size_t i) const { return rx_[i]; }
    double r_xixi(std::size_t i) const { return rxx_[i]; }
    double r_xixixi(std::size_t i) const { return rxxx_[i]; }

    /// Index of the last node with r_i <= r, clamped to an interval start in [0, intervals - 1].
    std::size_t locate(double r) const;

private:
    std::vector<double> r_, rx_, rxx_, rxxx_;
    double h_ = 0.0;
    double stretch_ = 1.0;
    bool mapped_ = false;
    InnerMode mode_ = InnerMode::Anchored;
};

/// Finite-difference weights for derivatives 0..max_order at x0 from the nodes x (Fornberg).
/// Row k of the result holds the weights of the k-th derivative.
std::vector<std::vector<double>> fornberg_weights(double x0, std::span<const double> x,
                                                  int max_order);

/// Samples of a radial function with fourth-order derivative reconstruction.
///
/// Centred stencils in the interior (5 points for first and second, 7 for third
/// derivatives) and shifted one-sided stencils of the same order near the ends.
/// On mapped grids the stencils act in xi and the chain rule brings them back to r.
class RadialField {
public:
    RadialField() = default;
    RadialField(std::shared_ptr<const RadialGrid> grid, std::vector<double> values);

    const RadialGrid& grid() const noexcept { return *grid_; }
    std::shared_ptr<const RadialGrid> grid_ptr() const noexcept { return grid_; }
    std::span<const double> values() const noexcept { return values_; }
    std::vector<double>& mutable_values() noexcept { return values_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    /// Derivative of order 1..3 at node i.
    double derivative_at(int order, std::size_t i) const;
    std::vector<double> derivative(int order) const;

    /// Local 6-point Lagrange interpolation; throws DomainError outside the grid.
    double interpolate(double r) const;

private:
    std::shared_ptr<const RadialGrid> grid_;
    std::vector<double> values_;
};

}  // namespace janglab
