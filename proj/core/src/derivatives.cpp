#include "janglab/derivatives.hpp"

#include <cmath>

#include <fmt/format.h>

#include "janglab/errors.hpp"

namespace janglab {

CentralDerivatives richardson_derivatives(const std::function<double(double)>& fn, double x,
                                          double step) {
    const double h = step > 0.0 ? step : std::abs(x) * 1e-4;
    if (!(h > 0.0)) throw DomainError("richardson_derivatives needs a nonzero step");
    const double h2 = 0.5 * h;
    const double f0 = fn(x);
    const double fp = fn(x + h), fm = fn(x - h);
    const double fp2 = fn(x + h2), fm2 = fn(x - h2);
    for (double v : {f0, fp, fm, fp2, fm2})
        if (!std::isfinite(v))
            throw NumericalError("non-finite sample in derivative refinement",
                                 fmt::format("x={} h={}", x, h));
    const double d1h = (fp - fm) / (2 * h);
    const double d1h2 = (fp2 - fm2) / (2 * h2);
    const double d2h = (fp - 2 * f0 + fm) / (h * h);
    const double d2h2 = (fp2 - 2 * f0 + fm2) / (h2 * h2);
    CentralDerivatives out;
    out.d1 = (4 * d1h2 - d1h) / 3;
    out.d2 = (4 * d2h2 - d2h) / 3;
    out.d1_error = std::abs(d1h2 - d1h) / 3;
    out.d2_error = std::abs(d2h2 - d2h) / 3;
    return out;
}

}  // namespace janglab
