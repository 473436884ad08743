#include "coastnav/detect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace coastnav {

namespace {

constexpr double kVarianceFloor = 1e-6;   // meters^2
constexpr double kDensityFloor = 1e-300;

struct GaussianFit {
    double mean = 0.0;
    double var = 0.0;
};

GaussianFit fit_gaussian(std::span<const double> w) {
    GaussianFit f;
    for (double x : w) f.mean += x;
    f.mean /= static_cast<double>(w.size());
    for (double x : w) f.var += (x - f.mean) * (x - f.mean);
    f.var = std::max(f.var / static_cast<double>(w.size()), kVarianceFloor);
    return f;
}

double log_normal_pdf(double x, const GaussianFit& f) {
    const double d = x - f.mean;
    return -0.5 * std::log(2.0 * kPi * f.var) - 0.5 * d * d / f.var;
}

}  // namespace

void DetectorConfig::validate() const {
    if (lambda < 2 || mu < 2) throw std::invalid_argument("DetectorConfig: window lengths >= 2");
    if (gap < 0) throw std::invalid_argument("DetectorConfig: gap >= 0");
    if (!(h > 0.0)) throw std::invalid_argument("DetectorConfig: bandwidth h > 0");
}

double residual(const GeodeticPoint& x_gnss, const GeodeticPoint& x_r) {
    return to_ned(x_r, x_gnss).norm();
}

double gaussian_glrt(std::span<const double> window_l, std::span<const double> window_m) {
    if (window_l.empty() || window_m.empty())
        throw std::invalid_argument("gaussian_glrt: empty window");
    const GaussianFit fit_l = fit_gaussian(window_l);
    const GaussianFit fit_m = fit_gaussian(window_m);
    double g = 0.0;
    for (double r : window_m) g += log_normal_pdf(r, fit_m) - log_normal_pdf(r, fit_l);
    return g;
}

double kde_glrt(std::span<const double> window_l, std::span<const double> window_m, double h,
                bool leave_one_out) {
    if (window_l.empty() || window_m.empty())
        throw std::invalid_argument("kde_glrt: empty window");
    if (!(h > 0.0)) throw std::invalid_argument("kde_glrt: bandwidth must be positive");

    const double norm = 1.0 / std::sqrt(2.0 * kPi);
    auto density = [&](double r, std::span<const double> w, bool skip_self) {
        double sum = 0.0;
        int n = 0;
        bool skipped = false;
        for (double ri : w) {
            if (skip_self && !skipped && ri == r) {
                skipped = true;
                continue;
            }
            const double z = (r - ri) / h;
            sum += std::exp(-0.5 * z * z);
            ++n;
        }
        if (n == 0) return kDensityFloor;
        return std::max(sum * norm / (n * h), kDensityFloor);
    };

    double g = 0.0;
    for (double r : window_m)
        g += std::log(density(r, window_m, leave_one_out)) - std::log(density(r, window_l, false));
    return g;
}

Threshold calibrate_threshold(std::vector<double> g_samples, double p_fa) {
    if (g_samples.empty()) throw std::invalid_argument("calibrate_threshold: no samples");
    std::sort(g_samples.begin(), g_samples.end());
    const std::size_t n = g_samples.size();
    // smallest index i (1-based) with i/n >= 1 - p_fa
    const double target = (1.0 - p_fa) * static_cast<double>(n);
    std::size_t i = static_cast<std::size_t>(std::ceil(target));
    i = std::clamp<std::size_t>(i, 1, n);
    return {g_samples[i - 1], p_fa < 1.0 / static_cast<double>(n)};
}

StepDecision DetectorState::step(const ResidualSample& sample, const DetectorConfig& config) {
    config.validate();
    if (last_t_ && sample.t <= *last_t_)
        throw std::invalid_argument("DetectorState::step: non-increasing timestamp");
    last_t_ = sample.t;

    buffer_.push_back(sample.r);
    const std::size_t span = static_cast<std::size_t>(config.span());
    while (buffer_.size() > span) buffer_.pop_front();

    exceeded_gauss_ = exceeded_kde_ = false;
    if (buffer_.size() < span) {
        g_gauss_.reset();
        g_kde_.reset();
        return StepDecision::warming_up;
    }

    // oldest-to-newest: [ L | gap | M ]
    std::vector<double> window_l(buffer_.begin(), buffer_.begin() + config.lambda);
    std::vector<double> window_m(buffer_.end() - config.mu, buffer_.end());

    g_gauss_ = gaussian_glrt(window_l, window_m);
    g_kde_ = kde_glrt(window_l, window_m, config.h, config.kde_leave_one_out);

    exceeded_gauss_ = *g_gauss_ > config.gamma_gauss;
    exceeded_kde_ = *g_kde_ > config.gamma_kde;
    if (exceeded_gauss_ || exceeded_kde_) {
        alarm_ = true;
        const bool add_gauss = exceeded_gauss_;
        const bool add_kde = exceeded_kde_;
        const bool had_gauss = source_ == AlarmSource::gauss || source_ == AlarmSource::both;
        const bool had_kde = source_ == AlarmSource::kde || source_ == AlarmSource::both;
        const bool now_gauss = had_gauss || add_gauss;
        const bool now_kde = had_kde || add_kde;
        source_ = now_gauss && now_kde ? AlarmSource::both
                  : now_gauss          ? AlarmSource::gauss
                                       : AlarmSource::kde;
    }
    return alarm_ ? StepDecision::alarm : StepDecision::nominal;
}

void DetectorState::reset() {
    buffer_.clear();
    last_t_.reset();
    g_gauss_.reset();
    g_kde_.reset();
    alarm_ = false;
    exceeded_gauss_ = exceeded_kde_ = false;
    source_ = AlarmSource::none;
}

}  // namespace coastnav
