#include "fde/tail_fit.hpp"

#include <cmath>

#include <Eigen/Dense>

#include "fde/error.hpp"

namespace fde {

TailFit fit_tail(std::span<const double> s, std::span<const double> y, const std::vector<TailBasis>& basis,
                 double s_lo, double s_hi) {
    if (s.size() != y.size()) throw Error(ErrorCode::DomainError, "fit_tail: s and y differ in length");

    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s[i] >= s_lo && s[i] <= s_hi) rows.push_back(i);

    const auto cols = static_cast<Eigen::Index>(basis.size() + 1);
    if (static_cast<Eigen::Index>(rows.size()) < cols + 1)
        throw Error(ErrorCode::DomainError, "fit_tail: " + std::to_string(rows.size()) +
                                                " samples in window for " + std::to_string(cols) + " unknowns");

    // Columns are scaled to unit max-norm before the QR so that 1/s^2-type
    // terms do not vanish against the constant column.
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows.size()), cols);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(rows.size()));
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        const double sv = s[rows[static_cast<std::size_t>(r)]];
        X(r, 0) = 1.0;
        for (std::size_t k = 0; k < basis.size(); ++k) X(r, static_cast<Eigen::Index>(k + 1)) = basis[k].f(sv);
        rhs(r) = y[rows[static_cast<std::size_t>(r)]];
    }
    Eigen::VectorXd scale = X.cwiseAbs().colwise().maxCoeff().transpose();
    for (Eigen::Index c = 0; c < cols; ++c)
        if (scale(c) == 0.0) scale(c) = 1.0;
    const Eigen::MatrixXd Xs = X * scale.cwiseInverse().asDiagonal();
    const Eigen::VectorXd coef = Xs.colPivHouseholderQr().solve(rhs).cwiseQuotient(scale);

    TailFit fit;
    fit.limit = coef(0);
    fit.corrections.assign(coef.data() + 1, coef.data() + coef.size());
    fit.samples = rows.size();
    fit.rms_residual = std::sqrt((X * coef - rhs).squaredNorm() / static_cast<double>(rows.size()));
    return fit;
}

namespace basis {
TailBasis inv_s() { return {"1/s", [](double s) { return 1.0 / s; }}; }
TailBasis log_s_over_s() { return {"log(s)/s", [](double s) { return std::log(s) / s; }}; }
TailBasis inv_s2() { return {"1/s^2", [](double s) { return 1.0 / (s * s); }}; }
TailBasis log_s_over_s2() { return {"log(s)/s^2", [](double s) { return std::log(s) / (s * s); }}; }
TailBasis inv_log_s() { return {"1/log(s)", [](double s) { return 1.0 / std::log(s); }}; }
TailBasis inv_s_log_s() { return {"1/(s log(s))", [](double s) { return 1.0 / (s * std::log(s)); }}; }
}  // namespace basis

}  // namespace fde
