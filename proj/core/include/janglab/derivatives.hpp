#pragma once

#include <functional>

namespace janglab {

/// First and second derivative from centered differences with one Richardson level.
struct CentralDerivatives {
    double d1 = 0, d2 = 0;
    double d1_error = 0, d2_error = 0;  ///< size of the Richardson correction
};

/// Step defaults to r * 1e-4. Throws NumericalError if any sample is non-finite.
CentralDerivatives richardson_derivatives(const std::function<double(double)>& fn, double x,
                                          double step = 0.0);

}  // namespace janglab
