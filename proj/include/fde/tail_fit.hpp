#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fde {

/// One correction term f(s) in a tail model y(s) = L + sum_k c_k f_k(s).
struct TailBasis {
    std::string label;
    std::function<double(double)> f;
};

struct TailFit {
    double limit = 0;                 ///< L
    std::vector<double> corrections;  ///< c_k in basis order
    double rms_residual = 0;
    std::size_t samples = 0;
};

/// Least-squares fit of y(s) = L + sum c_k f_k(s) over the samples with
/// s in [s_lo, s_hi]. With an empty basis this reduces to the mean.
/// Throws DomainError when fewer samples than unknowns fall in the window.
TailFit fit_tail(std::span<const double> s, std::span<const double> y, const std::vector<TailBasis>& basis,
                 double s_lo, double s_hi);

namespace basis {
TailBasis inv_s();            ///< 1/s
TailBasis log_s_over_s();     ///< log s / s
TailBasis inv_s2();           ///< 1/s^2
TailBasis log_s_over_s2();    ///< log s / s^2
TailBasis inv_log_s();        ///< 1/log s
TailBasis inv_s_log_s();      ///< 1/(s log s)
}  // namespace basis

}  // namespace fde
