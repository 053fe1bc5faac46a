#pragma once

#include "nlheat/common.hpp"
#include "nlheat/kernels.hpp"

#include <map>
#include <memory>
#include <mutex>

namespace nlheat {

// L(gamma) = ln E e^{gamma.X}; +inf outside the domain.
class CumulantFunction {
public:
    explicit CumulantFunction(KernelFamily family);
    const KernelFamily& family() const { return fam_; }

    double value(const Vec& gamma) const;
    Vec gradient(const Vec& gamma) const;
    Mat hessian(const Vec& gamma) const;
    // radial restriction ell(g), cached for quadrature-backed families
    RayCumulant ray(double g) const;
    bool in_domain(const Vec& gamma) const { return gamma.norm() < fam_.gamma_bound(); }
    double domain_radius() const { return fam_.gamma_bound(); }
    // mu(theta): support radius in direction theta (inf for unbounded support)
    double support_function(const Vec& theta) const;

private:
    KernelFamily fam_;
    bool cache_;
    mutable std::mutex mu_;
    mutable std::map<double, RayCumulant> memo_;
};

struct RateResult {
    double value = 0.0;  // I(r), may be +inf
    Vec gradient;        // grad I(r) = gamma*
    double residual = 0.0;
    bool infinite = false;
    bool boundary = false;  // |r| within 1e-6 relative of the support edge
    int iterations = 0;
};

// I(r) = sup_gamma (gamma.r - L(gamma)).
class RateFunction {
public:
    explicit RateFunction(KernelFamily family);
    const CumulantFunction& cumulant() const { return *cum_; }
    const KernelFamily& family() const { return cum_->family(); }

    RateResult evaluate(const Vec& r) const;
    double rate(const Vec& r) const { return evaluate(r).value; }
    Vec gradient(const Vec& r) const { return evaluate(r).gradient; }
    // along a ray: returns I(s theta) and |grad I| for s >= 0
    RateResult ray(double s) const;
    // radius of the effective domain (convex hull of supp a)
    double effective_radius() const { return family().mu(); }

private:
    std::shared_ptr<CumulantFunction> cum_;
};

struct PhiResult {
    double xi = 1.0;
    double phi = 0.0;
    double residual = 0.0;
};

// Phi(r) = 1 - (1/xi_r)(1 + ln xi_r - I(xi_r r)).
class PhiExponent {
public:
    explicit PhiExponent(KernelFamily family);
    const RateFunction& rate() const { return rate_; }

    double xi_solve(const Vec& r) const { return evaluate(r).xi; }
    PhiResult evaluate(const Vec& r) const;
    double phi(const Vec& r) const { return evaluate(r).phi; }
    PhiResult ray(double s) const;

private:
    RateFunction rate_;
};

struct GaussianPhi {
    double xi_hat = 1.0;  // root of xi^2 ln xi = r^2/4, > 1
    double phi = 0.0;     // 1 + 2 xi ln xi - xi
};

GaussianPhi phi_gaussian(double r);

// P{S_k > x} <= exp(-kappa_p (x/k)^p k) for k <= alpha_p x.
class ChernoffBound {
public:
    static ChernoffBound make(const KernelFamily& family);
    double p = 1.0, b = 1.0;
    double kappa = 0.0, alpha = 0.0;
    double h = 0.0;  // p = 1: E e^{mX} <= e^{h m^2} on (0, b/2]
    double c4 = 0.0; // p > 1: max_{m >= 1} L(m)/m^q

    bool in_regime(long k, double x) const { return k >= 1 && double(k) <= alpha * x * (1.0 + 1e-12); }
    double tail(long k, double x) const;
    double log_tail(long k, double x) const;
};

}  // namespace nlheat
