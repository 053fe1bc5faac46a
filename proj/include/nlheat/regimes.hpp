#pragma once

#include "nlheat/common.hpp"
#include "nlheat/heatkernel.hpp"
#include "nlheat/kernels.hpp"

#include <string>
#include <vector>

namespace nlheat {

enum class Region { Standard, Moderate, Large, ExtraLarge };
std::string to_string(Region r);

enum class PredictorKind {
    LocalLimit,           // ln c(sigma) - (d/2) ln t - (sigma^{-1}x, x)/2t
    Quadratic,            // -(sigma^{-1}x, x)/2t
    RateExponent,         // -Phi(x/t) t
    GaussianExtraLarge,   // -|x| sqrt(ln(|x|/t))
    StretchedExpBound,    // -|x| (ln t)^{(p-1)/p}, unit constant
    CompactSupportBound,  // -(|x|/mu) ln(|x|/t)
};
std::string to_string(PredictorKind k);

Region classify(double xnorm, double t, double band = 2.0);
inline Region classify(const Vec& x, double t, double band = 2.0) { return classify(x.norm(), t, band); }

struct Prediction {
    double log_v = 0.0;
    PredictorKind kind = PredictorKind::LocalLimit;
    bool bound_only = false;
    bool boundary = false;
};

Prediction predict_log_v(const KernelFamily& family, const Vec& x, double t, double band = 2.0,
                         bool gaussian_closed_phi = false);

struct RegimeReport {
    Vec x;
    double t = 0.0;
    Region region = Region::Standard;
    double delta_effective = 0.0;  // |x| = t^{(1+delta)/2}; NaN when undefined
    double predicted_log_v = 0.0;
    PredictorKind predictor_kind = PredictorKind::LocalLimit;
    bool bound_only = false;
    bool boundary = false;
    double log_v = 0.0;
    double ratio = 0.0;       // ln v / predicted; NaN for bound-only regions
    bool bound_holds = true;  // bound-only regions: ln v <= predicted
    bool interpolated = false;
};

double delta_effective(double xnorm, double t);

// Report for a known ln v(x, t).
RegimeReport regime_report(const KernelFamily& family, const Vec& x, double t, double log_v, double band = 2.0);
RegimeReport ratio_diagnostic(const HeatKernelResult& result, const KernelFamily& family, const Vec& x,
                              double band = 2.0);

// Sweep over |x| along the first axis for each t; Gaussian uses the exact series,
// other families a series-route lattice sized per t.
std::vector<RegimeReport> regime_sweep(const KernelFamily& family, const std::vector<double>& ts,
                                       const std::vector<double>& xs, double band = 2.0);
void write_sweep_csv(const std::vector<RegimeReport>& rows, const std::string& path);

}  // namespace nlheat
