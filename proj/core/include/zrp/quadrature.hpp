#pragma once

#include <functional>

namespace zrp {

// Adaptive Simpson integration on [a, b] to absolute tolerance tol.
// Targets in the experiment reports are computed with tol = 1e-8.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-8);

}  // namespace zrp
