#include "nlheat/ldp.hpp"

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <sstream>

namespace nlheat {

// ---------------------------------------------------------------- cumulant

CumulantFunction::CumulantFunction(KernelFamily family) : fam_(std::move(family)) {
    auto tc = fam_.tail_class();
    cache_ = !(tc == TailClass::Gaussian || (tc == TailClass::StretchedExp && (fam_.p() == 1.0 || fam_.p() == 2.0)));
}

RayCumulant CumulantFunction::ray(double g) const {
    g = std::abs(g);
    if (!cache_) return fam_.ray_cumulant(g);
    {
        std::lock_guard<std::mutex> lk(mu_);
        auto it = memo_.find(g);
        if (it != memo_.end()) return it->second;
    }
    auto rc = fam_.ray_cumulant(g);
    std::lock_guard<std::mutex> lk(mu_);
    if (memo_.size() > 100000) memo_.clear();
    memo_.emplace(g, rc);
    return rc;
}

double CumulantFunction::value(const Vec& gamma) const {
    if (!in_domain(gamma)) return kInf;
    return ray(gamma.norm()).value;
}

Vec CumulantFunction::gradient(const Vec& gamma) const {
    if (!in_domain(gamma)) throw DomainError("cumulant gradient outside domain");
    double g = gamma.norm();
    if (g == 0.0) return Vec::Zero(gamma.size());
    return ray(g).d1 * gamma / g;
}

Mat CumulantFunction::hessian(const Vec& gamma) const {
    if (!in_domain(gamma)) throw DomainError("cumulant hessian outside domain");
    const int d = int(gamma.size());
    double g = gamma.norm();
    auto rc = ray(g);
    if (g < 1e-12) return rc.d2 * Mat::Identity(d, d);
    Vec th = gamma / g;
    Mat P = th * th.transpose();
    return rc.d2 * P + (rc.d1 / g) * (Mat::Identity(d, d) - P);
}

double CumulantFunction::support_function(const Vec&) const { return fam_.mu(); }

// ---------------------------------------------------------------- rate

RateFunction::RateFunction(KernelFamily family) : cum_(std::make_shared<CumulantFunction>(std::move(family))) {}

RateResult RateFunction::ray(double s) const {
    s = std::abs(s);
    RateResult res;
    res.gradient = vec1(0.0);
    if (s == 0.0) return res;
    const double mu = family().mu();
    if (s >= mu * (1.0 - 1e-6)) {
        res.value = kInf;
        res.infinite = true;
        res.boundary = s < mu;
        res.gradient = vec1(kInf);
        return res;
    }
    const double gb = cum_->domain_radius();
    // bracket ell'(g) = s
    double lo = 0.0, hi = s / family().sigma1();
    if (hi >= gb) hi = 0.5 * gb;
    int guard = 0;
    while (cum_->ray(hi).d1 < s) {
        lo = hi;
        hi = std::isfinite(gb) ? 0.5 * (hi + gb) : 2.0 * hi;
        if (++guard > 4000) throw NumericError("rate: cannot bracket grad L = " + std::to_string(s));
        if (std::isfinite(gb) && hi >= gb) break;
    }
    // safeguarded Newton inside [lo, hi]
    double g = 0.5 * (lo + hi);
    RayCumulant rc = cum_->ray(g);
    int it = 0;
    for (; it < 300; ++it) {
        double f = rc.d1 - s;
        if (std::abs(f) <= 1e-14 * std::max(1.0, s)) break;
        (f > 0 ? hi : lo) = g;
        double gn = g - f / rc.d2;
        if (!(gn > lo && gn < hi) || !std::isfinite(gn)) gn = 0.5 * (lo + hi);
        if (gn == g || hi - lo <= 4e-16 * hi) break;
        g = gn;
        rc = cum_->ray(g);
    }
    res.residual = std::abs(rc.d1 - s);
    if (!(res.residual <= 1e-8 * std::max(1.0, s)))
        throw NumericError("rate: Newton did not converge at s=" + std::to_string(s) +
                           " (last gamma=" + std::to_string(g) + ", residual=" + std::to_string(res.residual) + ")");
    res.iterations = it;
    res.value = std::max(0.0, g * s - rc.value);
    res.gradient = vec1(g);
    return res;
}

RateResult RateFunction::evaluate(const Vec& r) const {
    if (r.size() != family().dimension()) throw DomainError("rate: dimension mismatch");
    const double s = r.norm();
    const int d = int(r.size());
    if (s == 0.0) {
        RateResult z;
        z.gradient = Vec::Zero(d);
        return z;
    }
    if (s >= family().mu() * (1.0 - 1e-6)) {
        auto res = ray(s);
        res.gradient = Vec::Constant(d, kInf);
        return res;
    }
    // damped Newton on grad L(gamma) = r, staying inside the domain
    const double gb = cum_->domain_radius();
    Vec gam = r / family().sigma1();
    if (gam.norm() >= gb) gam *= 0.5 * gb / gam.norm();
    auto objective = [&](const Vec& g) { return cum_->value(g) - g.dot(r); };
    bool ok = false;
    int it = 0;
    for (; it < 60; ++it) {
        Vec f = cum_->gradient(gam) - r;
        if (f.norm() <= 1e-14 * std::max(1.0, s)) {
            ok = true;
            break;
        }
        Vec step = cum_->hessian(gam).ldlt().solve(f);
        double t = 1.0, f0 = objective(gam);
        Vec next = gam - step;
        while (t > 1e-12) {
            next = gam - t * step;
            if (next.norm() < gb && objective(next) <= f0 + 1e-16 * std::abs(f0)) break;
            t *= 0.5;
        }
        if (t <= 1e-12) break;
        gam = next;
    }
    if (ok) {
        RateResult res;
        res.value = std::max(0.0, gam.dot(r) - cum_->value(gam));
        res.gradient = gam;
        res.residual = (cum_->gradient(gam) - r).norm();
        res.iterations = it;
        return res;
    }
    // radial families: the maximizer lies on the ray through r
    auto res = ray(s);
    res.gradient = res.gradient[0] * r / s;
    return res;
}

// ---------------------------------------------------------------- Phi

PhiExponent::PhiExponent(KernelFamily family) : rate_(std::move(family)) {}

PhiResult PhiExponent::ray(double s) const {
    s = std::abs(s);
    PhiResult out;
    if (s == 0.0) return out;
    const auto& cum = rate_.cumulant();
    // ln xi = I(xi r) - xi r.grad I(xi r) = -L(gamma*(xi r))
    auto F = [&](double xi) {
        auto rr = rate_.ray(xi * s);
        if (rr.infinite) return -kInf;
        return -cum.ray(rr.gradient[0]).value - std::log(xi);
    };
    double lo = 1e-8, hi = 1.0;
    const double mu = rate_.family().mu();
    if (std::isfinite(mu)) hi = std::min(1.0, mu * (1.0 - 1e-6) / s * (1.0 - 1e-12));
    while (F(lo) <= 0.0) {
        lo *= 1e-4;
        if (lo < 1e-300) throw NumericError("xi_solve: no sign change (r=" + std::to_string(s) + ")");
    }
    if (F(hi) > 0.0) throw NumericError("xi_solve: no sign change at the upper bracket (r=" + std::to_string(s) + ")");
    // bisection in ln xi
    double a = std::log(lo), b = std::log(hi);
    for (int it = 0; it < 200 && b - a > 1e-16 * std::max(1.0, std::abs(a)); ++it) {
        double m = 0.5 * (a + b);
        (F(std::exp(m)) > 0.0 ? a : b) = m;
    }
    double xi = std::exp(0.5 * (a + b));
    auto rr = rate_.ray(xi * s);
    out.xi = xi;
    out.residual = std::abs(F(xi));
    out.phi = 1.0 - (1.0 + std::log(xi) - rr.value) / xi;
    return out;
}

PhiResult PhiExponent::evaluate(const Vec& r) const {
    if (r.size() != rate_.family().dimension()) throw DomainError("phi: dimension mismatch");
    if (!r.allFinite()) throw DomainError("phi: non-finite r");
    return ray(r.norm());
}

GaussianPhi phi_gaussian(double r) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("phi_gaussian requires finite r >= 0");
    if (r == 0.0) return {1.0, 0.0};
    // solve (1+u)^2 log1p(u) = r^2/4 for u = xi - 1 > 0
    const double target = 0.25 * r * r;
    auto f = [&](double u) { return (1.0 + u) * (1.0 + u) * std::log1p(u) - target; };
    double lo = 0.0, hi = r;
    while (f(hi) < 0.0) hi *= 2.0;
    auto tol = [](double a, double b) { return b - a <= 1e-17 * b; };
    auto [a, b] = boost::math::tools::bisect(f, lo, hi, tol);
    double u = 0.5 * (a + b);
    GaussianPhi g;
    g.xi_hat = 1.0 + u;
    g.phi = 2.0 * (1.0 + u) * std::log1p(u) - u;
    return g;
}

// ---------------------------------------------------------------- Chernoff

ChernoffBound ChernoffBound::make(const KernelFamily& fam) {
    if (fam.tail_class() != TailClass::Gaussian && fam.tail_class() != TailClass::StretchedExp)
        throw ConfigError("Chernoff bound requires a Gaussian or stretched-exponential tail");
    CumulantFunction cum(fam);
    ChernoffBound cb;
    cb.p = fam.p();
    cb.b = fam.b();
    auto maximize = [&](auto ratio, double lo, double hi, bool logscale) {
        const int N = 4000;
        double best = -kInf, arg = lo;
        for (int i = 0; i <= N; ++i) {
            double m = logscale ? lo * std::pow(hi / lo, double(i) / N) : lo + (hi - lo) * double(i) / N;
            if (m <= 0.0) continue;
            double v = ratio(m);
            if (v > best) best = v, arg = m;
        }
        // refine around the grid maximum
        double step = logscale ? arg * (std::pow(hi / lo, 1.0 / N) - 1.0) : (hi - lo) / N;
        double a = std::max(lo, arg - step), b = std::min(hi, arg + step);
        auto r = boost::math::tools::brent_find_minima([&](double m) { return -ratio(m); }, a, b, 52);
        return std::max(best, -r.second);
    };
    if (cb.p == 1.0) {
        cb.h = maximize([&](double m) { return cum.ray(m).value / (m * m); }, 1e-6 * cb.b, 0.5 * cb.b, false);
        cb.kappa = cb.b / 4.0;
        cb.alpha = 1.0 / (2.0 * cb.h * cb.b);
    } else {
        double q = cb.p / (cb.p - 1.0);
        cb.c4 = maximize([&](double m) { return cum.ray(m).value / std::pow(m, q); }, 1.0, 1e3, true);
        cb.kappa = std::pow(cb.c4, 1.0 - cb.p) * std::pow(q, -cb.p) / (cb.p - 1.0);
        cb.alpha = 1.0 / (2.0 * q * cb.c4);
    }
    return cb;
}

double ChernoffBound::log_tail(long k, double x) const {
    if (!in_regime(k, x)) {
        std::ostringstream os;
        os << "Chernoff bound not claimed for k=" << k << " > alpha_p x = " << alpha * x;
        throw DomainError(os.str());
    }
    return -kappa * std::pow(x / double(k), p) * double(k);
}

double ChernoffBound::tail(long k, double x) const { return std::exp(log_tail(k, x)); }

}  // namespace nlheat
