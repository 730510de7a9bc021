#pragma once

#include <span>
#include <utility>
#include <vector>

namespace janglab {

struct Window {
    double lo = 0, hi = 0;
    bool contains(double r) const noexcept { return r >= lo && r <= hi; }
};

/// Slope of log|y| against log r over the samples inside the window.
/// Throws NumericalError if y changes sign or vanishes there, or fewer than 3 samples fall inside.
double fit_decay_exponent(std::span<const double> r, std::span<const double> y, Window window);

/// Least-squares fit y ~ c0 + c1 r^{-p1} + c2 r^{-p2} + ...; returns c.
std::vector<double> fit_inverse_powers(std::span<const double> r, std::span<const double> y,
                                       std::span<const double> powers);

struct Extrapolation {
    double limit = 0;
    double residual = 0;      ///< change between the last two eliminated values
    bool monotone = true;     ///< successive errors shrink in magnitude
    std::vector<double> eliminated;
};

/// Removes the leading R^{-order} term from (R, value) pairs; needs >= 3 pairs with R increasing.
Extrapolation richardson_extrapolate(std::span<const std::pair<double, double>> pairs,
                                     double order);

}  // namespace janglab
