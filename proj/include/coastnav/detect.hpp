#pragma once

#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "coastnav/geodesy.hpp"

// Residual generation and the parallel double-window GLRT change detectors
// (Gaussian and KDE) with ECDF threshold calibration.
//
// Window layout over the residual series: the short test window M holds the
// most recent mu samples, a gap of `gap` samples precedes it, and the long
// reference window L of lambda samples precedes the gap.

namespace coastnav {

struct ResidualSample {
    double t = 0.0;  // seconds
    double r = 0.0;  // meters, >= 0
};

struct DetectorConfig {
    int lambda = 218;          // reference window length, samples
    int mu = 109;              // test window length, samples
    int gap = 121;             // samples between the windows
    double h = 10.0;           // KDE bandwidth, meters
    double gamma_gauss = 0.0;  // alarm threshold for the Gaussian GLRT
    double gamma_kde = 0.0;    // alarm threshold for the KDE GLRT
    bool kde_leave_one_out = false;

    int span() const { return lambda + gap + mu; }
    void validate() const;
};

/// Distance in meters between a reported and an estimated position, taken in
/// the tangent plane at the reported position.
double residual(const GeodeticPoint& x_gnss, const GeodeticPoint& x_r);

/// Gaussian GLRT statistic: per-window Gaussian MLE fits, then the summed
/// log-likelihood ratio of the test window under (fit on M) vs (fit on L).
/// Variances are floored at 1e-6 m^2.
double gaussian_glrt(std::span<const double> window_l, std::span<const double> window_m);

/// KDE GLRT statistic with a standard normal kernel of bandwidth h. The
/// evaluation point is included in its own window's estimate unless
/// leave_one_out is set. Densities are floored before the log.
double kde_glrt(std::span<const double> window_l, std::span<const double> window_m, double h,
                bool leave_one_out = false);

struct Threshold {
    double gamma = 0.0;
    bool extrapolated = false;  // requested quantile beyond the ECDF resolution
};

/// Smallest sample whose ECDF reaches 1 - p_fa. When p_fa < 1/n the largest
/// sample is returned and flagged as extrapolated.
Threshold calibrate_threshold(std::vector<double> g_samples, double p_fa);

enum class AlarmSource { none, gauss, kde, both };
enum class StepDecision { warming_up, nominal, alarm };

/// Single-owner streaming state over the residual series. The alarm latches
/// once raised; reset() rearms the detector.
class DetectorState {
public:
    /// Pushes one sample and recomputes both statistics once the buffer is
    /// full. Throws on a non-increasing timestamp.
    StepDecision step(const ResidualSample& sample, const DetectorConfig& config);

    void reset();

    bool alarm() const { return alarm_; }
    AlarmSource source() const { return source_; }
    std::optional<double> g_gauss() const { return g_gauss_; }
    std::optional<double> g_kde() const { return g_kde_; }
    /// Instantaneous threshold exceedances at the last step (unlatched).
    bool exceeded_gauss() const { return exceeded_gauss_; }
    bool exceeded_kde() const { return exceeded_kde_; }

private:
    std::deque<double> buffer_;
    std::optional<double> last_t_;
    std::optional<double> g_gauss_, g_kde_;
    bool alarm_ = false;
    bool exceeded_gauss_ = false, exceeded_kde_ = false;
    AlarmSource source_ = AlarmSource::none;
};

}  // namespace coastnav
