#pragma once

#include "nlheat/common.hpp"

#include <json.hpp>

#include <complex>
#include <memory>
#include <string>
#include <vector>

namespace nlheat {

enum class TailClass { Gaussian, StretchedExp, CompactSupport, Tabulated };
enum class Profile { Tent, Epanechnikov, RaisedCosine };

std::string to_string(TailClass c);
std::string to_string(Profile p);
Profile profile_from_string(const std::string& s);

struct ConditionFlags {
    bool A1 = false;   // E e^{b1 X.theta} = inf for some b1
    bool A1s = false;  // symmetric version of A1
    bool Ap = false;   // two-sided power-law cumulant growth, p > 1
};

struct Moments {
    double mass = 1.0;
    Mat sigma;
};

// ell(g), ell'(g), ell''(g) for the cumulant restricted to a ray, g = |gamma| >= 0.
struct RayCumulant {
    double value = 0.0;
    double d1 = 0.0;
    double d2 = 0.0;
};

struct QuadNode {
    double s;     // radius
    double w;     // weight (includes surface factor 2 pi s in d = 2)
    double lrho;  // ln a at radius s, -inf allowed
};

class TiltedKernel;

// Symmetric probability density on R^d (d = 1, 2). Immutable; copies are cheap.
class KernelFamily {
public:
    static KernelFamily gaussian(int d = 1);
    static KernelFamily stretched_exp(int d, double b, double p);
    static KernelFamily laplace(double b = 1.0) { return stretched_exp(1, b, 1.0); }
    static KernelFamily compact_support(int d, double mu, Profile profile);
    // 1-D table on a symmetric grid; linearly interpolated and renormalized.
    static KernelFamily tabulated(std::vector<double> x, std::vector<double> a);
    static KernelFamily tabulated_csv(const std::string& path);

    static KernelFamily from_json(const nlohmann::json& j, const std::string& base_dir = "");
    nlohmann::json to_json() const;
    std::string name() const;

    int dimension() const { return d_; }
    TailClass tail_class() const { return tail_; }
    double b() const { return b_; }
    double p() const { return p_; }
    double mu() const { return mu_; }
    Profile profile() const { return profile_; }
    double normalizer() const { return norm_; }
    double c1() const { return c1_; }
    ConditionFlags conditions() const { return flags_; }
    bool bounded_support() const { return mu_ < kInf; }
    // Per-coordinate variance (all families are isotropic).
    double sigma1() const { return sigma1_; }
    double max_value() const { return amax_; }
    const std::vector<double>& table_x() const;
    const std::vector<double>& table_a() const;

    double radial(double s) const;
    double log_radial(double s) const;
    double evaluate(const Vec& x) const;
    double log_evaluate(const Vec& x) const;

    double fourier(const Vec& p) const;
    double fourier(double p) const { return fourier(vec1(p)); }

    // Symbol of the tilted density, a_gamma^(p) = a^(p - i gamma)/Lambda(gamma).
    bool has_complex_symbol() const;
    std::complex<double> tilted_symbol(const Vec& p, const Vec& gamma) const;
    // 1-D batch over p = p0 + j dp, j < count.
    std::vector<std::complex<double>> tilted_symbol_line(double p0, double dp, std::size_t count,
                                                         double gamma) const;

    RayCumulant ray_cumulant(double g) const;
    // Largest admissible |gamma|; inf when the cumulant is finite everywhere.
    double gamma_bound() const;
    double log_mgf(const Vec& gamma) const;
    Vec mean_tilted(const Vec& gamma) const;
    Mat hessian_tilted(const Vec& gamma) const;

    Moments covariance() const;
    TiltedKernel tilt(const Vec& gamma) const;

    // Radius beyond which the tilted integrand is negligible (rel. 1e-14 or smaller).
    double truncation_radius(double g) const;
    // Radial quadrature rule on [0, truncation_radius(g)].
    std::vector<QuadNode> radial_nodes(double g) const;

private:
    KernelFamily() = default;
    void finish();
    RayCumulant ray_cumulant_quad(double g) const;
    double fourier_quad(double pnorm) const;

    int d_ = 1;
    TailClass tail_ = TailClass::Gaussian;
    double b_ = 0.25, p_ = 2.0;
    double mu_ = kInf;
    Profile profile_ = Profile::Tent;
    double norm_ = 1.0, c1_ = 1.0, sigma1_ = 2.0, amax_ = 1.0;
    ConditionFlags flags_;
    std::shared_ptr<const std::vector<double>> tx_, ta_;
    std::string source_;
};

class TiltedKernel {
public:
    TiltedKernel(KernelFamily base, Vec gamma);
    const KernelFamily& base() const { return base_; }
    const Vec& gamma() const { return gamma_; }
    double log_mgf() const { return log_mgf_; }
    const Vec& mean() const { return mean_; }
    double density(const Vec& x) const;

private:
    KernelFamily base_;
    Vec gamma_;
    double log_mgf_;
    Vec mean_;
};

// e^{-z} I_nu(z) for nu in {0, 1, 2}, z >= 0.
double bessel_i_scaled(int nu, double z);

}  // namespace nlheat
