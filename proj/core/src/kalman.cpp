#include "impactor/kalman.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "impactor/error.hpp"

namespace impactor::kalman {

namespace {

constexpr double kNegativeDiagTolerance = 1e-10;

[[noreturn]] void numeric_fail(const std::string& what) {
    throw NumericError("kalman: " + what);
}

void tidy_covariance(Eigen::MatrixXd& P, const char* where) {
    P = 0.5 * (P + P.transpose());
    for (Eigen::Index i = 0; i < P.rows(); ++i) {
        if (!std::isfinite(P(i, i))) numeric_fail(std::string("non-finite covariance in ") + where);
        if (P(i, i) < 0.0) {
            if (P(i, i) < -kNegativeDiagTolerance) numeric_fail(std::string("negative variance in ") + where);
            P(i, i) = 0.0;
        }
    }
}

void check_inputs(const SsmSpec& spec, const InitialState& init, std::span<const double> y) {
    const auto n = spec.state_dim();
    if (init.mean.size() != n || init.cov.rows() != n || init.cov.cols() != n)
        throw ValidationError("kalman: initial state has wrong dimension");
    if (!init.mean.allFinite() || !init.cov.allFinite()) throw ValidationError("kalman: initial state must be finite");
    if (static_cast<Eigen::Index>(y.size()) != spec.horizon())
        throw ValidationError("kalman: observation count " + std::to_string(y.size()) + " does not match model horizon " +
                              std::to_string(spec.horizon()));
    for (std::size_t t = 0; t < y.size(); ++t)
        if (std::isinf(y[t])) throw ValidationError("kalman: infinite observation at index " + std::to_string(t));
}

// Moore-Penrose inverse of a symmetric PSD matrix.
Eigen::MatrixXd psd_pinv(const Eigen::MatrixXd& A) {
    if (A.rows() == 1) {
        Eigen::MatrixXd out(1, 1);
        out(0, 0) = A(0, 0) > 0.0 ? 1.0 / A(0, 0) : 0.0;
        return out;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
    const auto& d = eig.eigenvalues();
    const double tol = static_cast<double>(A.rows()) * std::numeric_limits<double>::epsilon() *
                       std::max(d.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
    Eigen::VectorXd inv(d.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) inv[i] = d[i] > tol ? 1.0 / d[i] : 0.0;
    return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Eigen::VectorXd sample_gaussian(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, Rng& rng) {
    const auto n = mean.size();
    Eigen::VectorXd u(n);
    for (Eigen::Index i = 0; i < n; ++i) u[i] = rng.normal();
    if (n == 1) return mean + Eigen::VectorXd::Constant(1, std::sqrt(std::max(cov(0, 0), 0.0)) * u[0]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return mean + eig.eigenvectors() * (root.asDiagonal() * u);
}

FilterResult filter(const SsmSpec& spec, const InitialState& init, std::span<const double> y) {
    check_inputs(spec, init, y);
    const auto n = spec.state_dim();
    const auto& F = spec.transition();
    const auto& W = spec.process_cov();
    const double obs_var = spec.obs_var();
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);

    FilterResult out;
    out.initial = init;
    out.steps.resize(y.size());
    Eigen::VectorXd m = init.mean;
    Eigen::MatrixXd P = init.cov;
    for (std::size_t t = 0; t < y.size(); ++t) {
        FilterStep& step = out.steps[t];
        step.predicted_mean = F * m;
        step.predicted_cov = F * P * F.transpose() + W;
        tidy_covariance(step.predicted_cov, "prediction");

        const Eigen::VectorXd h = spec.observation().row(static_cast<Eigen::Index>(t)).transpose();
        const Eigen::VectorXd Ph = step.predicted_cov * h;
        step.obs_mean = h.dot(step.predicted_mean);
        step.obs_var = h.dot(Ph) + obs_var;
        if (!std::isfinite(step.obs_mean) || !std::isfinite(step.obs_var) || step.obs_var <= 0.0)
            numeric_fail("non-finite predictive moments at step " + std::to_string(t + 1));
        if (step.obs_var < obs_var) step.obs_var = obs_var;

        step.observed = !std::isnan(y[t]);
        if (!step.observed) {
            step.filtered_mean = step.predicted_mean;
            step.filtered_cov = step.predicted_cov;
        } else {
            const double innovation = y[t] - step.obs_mean;
            const Eigen::VectorXd K = Ph / step.obs_var;
            const Eigen::MatrixXd A = I - K * h.transpose();
            step.filtered_mean = step.predicted_mean + K * innovation;
            step.filtered_cov = A * step.predicted_cov * A.transpose() + obs_var * K * K.transpose();
            tidy_covariance(step.filtered_cov, "update");
            out.loglik += -0.5 * (std::log(2.0 * std::numbers::pi * step.obs_var) + innovation * innovation / step.obs_var);
        }
        if (!step.filtered_mean.allFinite()) numeric_fail("non-finite filtered mean at step " + std::to_string(t + 1));
        m = step.filtered_mean;
        P = step.filtered_cov;
    }
    if (!std::isfinite(out.loglik)) numeric_fail("non-finite log-likelihood");
    return out;
}

std::vector<SmoothedState> smooth(const SsmSpec& spec, const FilterResult& filtered) {
    const auto& F = spec.transition();
    const auto T = filtered.steps.size();
    std::vector<SmoothedState> out(T);
    if (T == 0) return out;
    out[T - 1] = {filtered.steps[T - 1].filtered_mean, filtered.steps[T - 1].filtered_cov};
    for (std::size_t t = T - 1; t-- > 0;) {
        const FilterStep& cur = filtered.steps[t];
        const FilterStep& next = filtered.steps[t + 1];
        const Eigen::MatrixXd J = cur.filtered_cov * F.transpose() * psd_pinv(next.predicted_cov);
        out[t].mean = cur.filtered_mean + J * (out[t + 1].mean - next.predicted_mean);
        out[t].cov = cur.filtered_cov + J * (out[t + 1].cov - next.predicted_cov) * J.transpose();
        tidy_covariance(out[t].cov, "smoothing");
    }
    return out;
}

std::vector<SmoothedState> smooth(const SsmSpec& spec, const InitialState& init, std::span<const double> y) {
    return smooth(spec, filter(spec, init, y));
}

StateDraw simulate_states(const SsmSpec& spec, const InitialState& init, std::span<const double> y, Rng& rng) {
    const FilterResult filtered = filter(spec, init, y);
    const auto& F = spec.transition();
    const auto n = spec.state_dim();
    const auto T = filtered.steps.size();
    StateDraw draw{Eigen::VectorXd(n), Eigen::MatrixXd(static_cast<Eigen::Index>(T), n)};

    auto backward = [&](const Eigen::VectorXd& m, const Eigen::MatrixXd& P, const FilterStep& next,
                        const Eigen::VectorXd& z_next) {
        const Eigen::MatrixXd J = P * F.transpose() * psd_pinv(next.predicted_cov);
        const Eigen::VectorXd mean = m + J * (z_next - next.predicted_mean);
        Eigen::MatrixXd cov = P - J * next.predicted_cov * J.transpose();
        tidy_covariance(cov, "backward sampling");
        return sample_gaussian(mean, cov, rng);
    };

    if (T == 0) {
        draw.initial = sample_gaussian(init.mean, init.cov, rng);
        return draw;
    }
    Eigen::VectorXd z = sample_gaussian(filtered.steps[T - 1].filtered_mean, filtered.steps[T - 1].filtered_cov, rng);
    draw.trajectory.row(static_cast<Eigen::Index>(T - 1)) = z.transpose();
    for (std::size_t t = T - 1; t-- > 0;) {
        z = backward(filtered.steps[t].filtered_mean, filtered.steps[t].filtered_cov, filtered.steps[t + 1], z);
        draw.trajectory.row(static_cast<Eigen::Index>(t)) = z.transpose();
    }
    draw.initial = backward(init.mean, init.cov, filtered.steps[0], z);
    if (!draw.trajectory.allFinite() || !draw.initial.allFinite()) numeric_fail("non-finite state draw");
    return draw;
}

double loglik(const SsmSpec& spec, const InitialState& init, std::span<const double> y) {
    return filter(spec, init, y).loglik;
}

}  // namespace impactor::kalman
