#include "nlheat/regimes.hpp"

#include "nlheat/io.hpp"
#include "nlheat/ldp.hpp"

#include <cmath>

namespace nlheat {

std::string to_string(Region r) {
    switch (r) {
        case Region::Standard: return "standard";
        case Region::Moderate: return "moderate";
        case Region::Large: return "large";
        case Region::ExtraLarge: return "extra_large";
    }
    return "?";
}

std::string to_string(PredictorKind k) {
    switch (k) {
        case PredictorKind::LocalLimit: return "local_limit";
        case PredictorKind::Quadratic: return "quadratic";
        case PredictorKind::RateExponent: return "rate_exponent";
        case PredictorKind::GaussianExtraLarge: return "gaussian_extra_large";
        case PredictorKind::StretchedExpBound: return "stretched_exp_bound";
        case PredictorKind::CompactSupportBound: return "compact_support_bound";
    }
    return "?";
}

Region classify(double xn, double t, double band) {
    if (!(t > 1.0)) throw DomainError("classify requires t > 1");
    if (!(band > 0.0)) throw DomainError("band must be > 0");
    xn = std::abs(xn);
    if (xn <= band * std::sqrt(t)) return Region::Standard;
    if (xn > band * t) return Region::ExtraLarge;
    if (xn >= t / band) return Region::Large;
    return Region::Moderate;
}

double delta_effective(double xn, double t) {
    if (!(t > 1.0) || !(xn > 0.0)) return std::nan("");
    return 2.0 * std::log(xn) / std::log(t) - 1.0;
}

Prediction predict_log_v(const KernelFamily& fam, const Vec& x, double t, double band, bool closed_phi) {
    if (!(t > 1.0)) throw DomainError("predict_log_v requires t > 1");
    const int d = fam.dimension();
    const double xn = x.norm(), s1 = fam.sigma1();
    const double quad = xn * xn / (2.0 * s1 * t);
    Prediction p;
    switch (classify(xn, t, band)) {
        case Region::Standard:
            p.kind = PredictorKind::LocalLimit;
            p.log_v = -0.5 * d * std::log(2.0 * kPi * s1) - 0.5 * d * std::log(t) - quad;
            break;
        case Region::Moderate:
            p.kind = PredictorKind::Quadratic;
            p.log_v = -quad;
            break;
        case Region::Large: {
            p.kind = PredictorKind::RateExponent;
            double r = xn / t;
            if (closed_phi && fam.tail_class() == TailClass::Gaussian) {
                p.log_v = -phi_gaussian(r).phi * t;
            } else {
                PhiExponent pe(fam);
                auto res = pe.ray(r);
                p.log_v = -res.phi * t;
                p.boundary = fam.bounded_support() && xn / t >= fam.mu();
            }
            break;
        }
        case Region::ExtraLarge:
            if (fam.tail_class() == TailClass::Gaussian) {
                p.kind = PredictorKind::GaussianExtraLarge;
                p.log_v = -xn * std::sqrt(std::log(xn / t));
            } else if (fam.bounded_support()) {
                p.kind = PredictorKind::CompactSupportBound;
                p.bound_only = true;
                p.log_v = -(xn / fam.mu()) * std::log(xn / t);
            } else {
                p.kind = PredictorKind::StretchedExpBound;
                p.bound_only = true;
                double pp = fam.p();
                p.log_v = -xn * std::pow(std::log(t), (pp - 1.0) / pp);
            }
            break;
    }
    return p;
}

RegimeReport regime_report(const KernelFamily& fam, const Vec& x, double t, double log_v, double band) {
    RegimeReport r;
    r.x = x;
    r.t = t;
    r.region = classify(x, t, band);
    r.delta_effective = delta_effective(x.norm(), t);
    auto p = predict_log_v(fam, x, t, band);
    r.predicted_log_v = p.log_v;
    r.predictor_kind = p.kind;
    r.bound_only = p.bound_only;
    r.boundary = p.boundary;
    r.log_v = log_v;
    if (p.bound_only) {
        r.ratio = std::nan("");
        r.bound_holds = log_v <= p.log_v;
    } else if (std::isfinite(log_v) && std::isfinite(p.log_v) && p.log_v != 0.0) {
        r.ratio = log_v / p.log_v;
    } else {
        r.ratio = std::nan("");
    }
    return r;
}

RegimeReport ratio_diagnostic(const HeatKernelResult& res, const KernelFamily& fam, const Vec& x, double band) {
    bool interp = false;
    double lv = res.log_v_at(x, &interp);
    auto r = regime_report(fam, x, res.t, lv, band);
    r.interpolated = interp;
    return r;
}

std::vector<RegimeReport> regime_sweep(const KernelFamily& fam, const std::vector<double>& ts,
                                       const std::vector<double>& xs, double band) {
    std::vector<RegimeReport> rows;
    const int d = fam.dimension();
    auto axis_point = [&](double xv) {
        Vec x = Vec::Zero(d);
        x[0] = xv;
        return x;
    };
    for (double t : ts) {
        if (fam.tail_class() == TailClass::Gaussian) {
            for (double xv : xs) rows.push_back(regime_report(fam, axis_point(xv), t, gaussian_log_v(std::abs(xv), t, d), band));
            continue;
        }
        double xmax = 0.0;
        for (double xv : xs) xmax = std::max(xmax, std::abs(xv));
        double L = 16.0;
        while (L < 1.25 * xmax + 8.0 * std::sqrt(fam.sigma1() * t)) L *= 2.0;
        std::size_t n = 256;
        double hmax = 0.25 * std::sqrt(fam.sigma1());
        while (2.0 * L / double(n) > hmax && n < (d == 1 ? (1u << 16) : 512u)) n *= 2;
        auto res = v_series(fam, Lattice::make(d, n, L), t, 1e-12);
        for (double xv : xs) rows.push_back(ratio_diagnostic(res, fam, axis_point(xv), band));
    }
    return rows;
}

void write_sweep_csv(const std::vector<RegimeReport>& rows, const std::string& path) {
    CsvWriter csv(path, {"t", "abs_x", "region", "ln_v", "predicted", "ratio", "predictor", "bound_only", "bound_holds"});
    for (const auto& r : rows) {
        csv.cell(r.t).cell(r.x.norm()).cell(to_string(r.region)).cell(r.log_v).cell(r.predicted_log_v).cell(r.ratio);
        csv.cell(to_string(r.predictor_kind)).cell((long long)r.bound_only).cell((long long)r.bound_holds);
        csv.end_row();
    }
}

}  // namespace nlheat
