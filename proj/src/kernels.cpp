#include "nlheat/kernels.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace nlheat {

using cd = std::complex<double>;

std::string to_string(TailClass c) {
    switch (c) {
        case TailClass::Gaussian: return "gaussian";
        case TailClass::StretchedExp: return "stretched_exp";
        case TailClass::CompactSupport: return "compact_support";
        case TailClass::Tabulated: return "tabulated";
    }
    return "?";
}

std::string to_string(Profile p) {
    switch (p) {
        case Profile::Tent: return "tent";
        case Profile::Epanechnikov: return "epanechnikov";
        case Profile::RaisedCosine: return "raised_cosine";
    }
    return "?";
}

Profile profile_from_string(const std::string& s) {
    if (s == "tent") return Profile::Tent;
    if (s == "epanechnikov") return Profile::Epanechnikov;
    if (s == "raised_cosine") return Profile::RaisedCosine;
    throw ConfigError("unknown compact-support profile '" + s + "'");
}

namespace {

// 16-point Gauss-Legendre on [lo, hi].
template <class F>
void gl16(double lo, double hi, F&& f) {
    using G = boost::math::quadrature::gauss<double, 16>;
    const auto& xs = G::abscissa();
    const auto& ws = G::weights();
    double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        f(c - r * xs[i], r * ws[i]);
        f(c + r * xs[i], r * ws[i]);
    }
}

// Profile phi(s) on s in [0, 1].
double profile_shape(Profile pr, double s) {
    if (s < 0.0 || s > 1.0) return 0.0;
    switch (pr) {
        case Profile::Tent: return 1.0 - s;
        case Profile::Epanechnikov: return 1.0 - s * s;
        case Profile::RaisedCosine: return 1.0 + std::cos(kPi * s);
    }
    return 0.0;
}

// int_0^1 phi(s) s^{d-1} ds
double profile_moment(Profile pr, int d) {
    if (d == 1) {
        switch (pr) {
            case Profile::Tent: return 0.5;
            case Profile::Epanechnikov: return 2.0 / 3.0;
            case Profile::RaisedCosine: return 1.0;
        }
    }
    switch (pr) {
        case Profile::Tent: return 1.0 / 6.0;
        case Profile::Epanechnikov: return 0.25;
        case Profile::RaisedCosine: return 0.5 - 2.0 / (kPi * kPi);
    }
    return 1.0;
}

cd sinc(cd z) {
    if (std::abs(z) < 0.2) {
        cd z2 = z * z;
        return 1.0 - z2 / 6.0 + z2 * z2 / 120.0 - z2 * z2 * z2 / 5040.0 + z2 * z2 * z2 * z2 / 362880.0;
    }
    return std::sin(z) / z;
}

// 1-D Fourier transforms of the unit-radius profiles, analytic in q.
cd profile_symbol(Profile pr, cd q) {
    switch (pr) {
        case Profile::Tent: {
            cd s = sinc(0.5 * q);
            return s * s;
        }
        case Profile::Epanechnikov: {
            if (std::abs(q) < 0.5) {
                cd q2 = q * q, term = 1.0, sum = 0.0;
                double fact = 1.0;  // (2k+1)!
                for (int k = 1; k <= 9; ++k) {
                    fact *= (2.0 * k) * (2.0 * k + 1.0);
                    double c = 3.0 * 2.0 * k / fact * ((k % 2) ? 1.0 : -1.0);
                    sum += c * term;
                    term *= q2;
                }
                return sum;
            }
            return 3.0 * (std::sin(q) - q * std::cos(q)) / (q * q * q);
        }
        case Profile::RaisedCosine: {
            if (std::real(q) < 0.0) q = -q;
            if (std::abs(q - kPi) < 1e-3) return kPi * sinc(q - kPi) / (q * (1.0 + q / kPi));
            return sinc(q) / (1.0 - q * q / (kPi * kPi));
        }
    }
    return 1.0;
}

double log_or_ninf(double v) { return v > 0.0 ? std::log(v) : -kInf; }

}  // namespace

double bessel_i_scaled(int nu, double z) {
    if (z < 0.0) z = -z;
    if (z < 50.0) return boost::math::cyl_bessel_i(nu, z) * std::exp(-z);
    // Hankel asymptotic series; terms decrease until k ~ 2z, 30 terms is plenty.
    double mu = 4.0 * nu * nu, term = 1.0, sum = 1.0;
    for (int k = 1; k <= 30; ++k) {
        term *= -(mu - (2.0 * k - 1) * (2.0 * k - 1)) / (k * 8.0 * z);
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return sum / std::sqrt(2.0 * kPi * z);
}

// ---------------------------------------------------------------- construction

KernelFamily KernelFamily::gaussian(int d) {
    if (d != 1 && d != 2) throw ConfigError("dimension must be 1 or 2");
    KernelFamily k;
    k.d_ = d;
    k.tail_ = TailClass::Gaussian;
    k.b_ = 0.25;
    k.p_ = 2.0;
    k.norm_ = std::pow(4.0 * kPi, -0.5 * d);
    k.sigma1_ = 2.0;
    k.flags_ = {false, false, true};
    k.finish();
    return k;
}

KernelFamily KernelFamily::stretched_exp(int d, double b, double p) {
    if (d != 1 && d != 2) throw ConfigError("dimension must be 1 or 2");
    if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("stretched_exp: b must be > 0");
    if (!(p >= 1.0) || !std::isfinite(p)) throw ConfigError("stretched_exp: p must be >= 1");
    KernelFamily k;
    k.d_ = d;
    k.tail_ = TailClass::StretchedExp;
    k.b_ = b;
    k.p_ = p;
    if (d == 1) {
        k.norm_ = p * std::pow(b, 1.0 / p) / (2.0 * std::tgamma(1.0 / p));
        k.sigma1_ = 2.0 * k.norm_ * std::tgamma(3.0 / p) / (p * std::pow(b, 3.0 / p));
    } else {
        k.norm_ = p * std::pow(b, 2.0 / p) / (2.0 * kPi * std::tgamma(2.0 / p));
        k.sigma1_ = kPi * k.norm_ * std::tgamma(4.0 / p) / (p * std::pow(b, 4.0 / p));
    }
    if (p == 1.0)
        k.flags_ = {true, true, false};
    else
        k.flags_ = {false, false, true};
    k.finish();
    return k;
}

KernelFamily KernelFamily::compact_support(int d, double mu, Profile profile) {
    if (d != 1 && d != 2) throw ConfigError("dimension must be 1 or 2");
    if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("compact_support: mu must be > 0");
    KernelFamily k;
    k.d_ = d;
    k.tail_ = TailClass::CompactSupport;
    k.mu_ = mu;
    k.profile_ = profile;
    double area = (d == 1 ? 2.0 * mu : 2.0 * kPi * mu * mu) * profile_moment(profile, d);
    k.norm_ = 1.0 / area;
    k.finish();
    k.sigma1_ = k.ray_cumulant_quad(0.0).d2;
    return k;
}

KernelFamily KernelFamily::tabulated(std::vector<double> x, std::vector<double> a) {
    const std::size_t n = x.size();
    if (n < 3 || a.size() != n) throw ConfigError("tabulated: need >= 3 (x, a) rows");
    double amax = 0.0, xmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(a[i])) throw ConfigError("tabulated: non-finite sample");
        if (i && !(x[i] > x[i - 1])) throw ConfigError("tabulated: x must be strictly increasing");
        if (a[i] < 0.0) throw ConfigError("tabulated: negative sample at x=" + std::to_string(x[i]));
        amax = std::max(amax, a[i]);
        xmax = std::max(xmax, std::abs(x[i]));
    }
    if (!(amax > 0.0)) throw ConfigError("tabulated: all samples are zero");
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = n - 1 - i;
        if (std::abs(x[i] + x[j]) > 1e-12 * xmax || std::abs(a[i] - a[j]) > 1e-12 * amax)
            throw ConfigError("tabulated: samples are not symmetric about 0");
    }
    double z = 0.0;
    for (std::size_t i = 1; i < n; ++i) z += 0.5 * (a[i] + a[i - 1]) * (x[i] - x[i - 1]);
    for (auto& v : a) v /= z;
    KernelFamily k;
    k.d_ = 1;
    k.tail_ = TailClass::Tabulated;
    k.norm_ = 1.0 / z;
    // Support radius: the interpolant is positive up to the first zero sample past the last positive one.
    std::size_t last = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (a[i] > 0.0) last = i;
    k.mu_ = x[std::min(last + 1, n - 1)];
    k.tx_ = std::make_shared<const std::vector<double>>(std::move(x));
    k.ta_ = std::make_shared<const std::vector<double>>(std::move(a));
    k.finish();
    k.sigma1_ = k.ray_cumulant_quad(0.0).d2;
    return k;
}

KernelFamily KernelFamily::tabulated_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open tabulated kernel csv '" + path + "'");
    std::vector<double> x, a;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw ConfigError("tabulated csv: expected 'x,a' rows");
        try {
            double xv = std::stod(line.substr(0, comma));
            double av = std::stod(line.substr(comma + 1));
            x.push_back(xv);
            a.push_back(av);
        } catch (const std::invalid_argument&) {
            if (!x.empty()) throw ConfigError("tabulated csv: unparseable row '" + line + "'");
            // header row
        }
    }
    auto k = tabulated(std::move(x), std::move(a));
    k.source_ = path;
    return k;
}

void KernelFamily::finish() {
    switch (tail_) {
        case TailClass::Gaussian:
        case TailClass::StretchedExp:
            c1_ = norm_;
            amax_ = norm_;
            break;
        case TailClass::CompactSupport:
            amax_ = norm_ * profile_shape(profile_, 0.0);
            c1_ = amax_;
            break;
        case TailClass::Tabulated:
            amax_ = *std::max_element(ta_->begin(), ta_->end());
            c1_ = amax_;
            break;
    }
}

const std::vector<double>& KernelFamily::table_x() const {
    static const std::vector<double> empty;
    return tx_ ? *tx_ : empty;
}
const std::vector<double>& KernelFamily::table_a() const {
    static const std::vector<double> empty;
    return ta_ ? *ta_ : empty;
}

std::string KernelFamily::name() const {
    std::ostringstream os;
    switch (tail_) {
        case TailClass::Gaussian: os << "gaussian"; break;
        case TailClass::StretchedExp:
            if (p_ == 1.0)
                os << "laplace_b" << b_;
            else
                os << "stretched_exp_b" << b_ << "_p" << p_;
            break;
        case TailClass::CompactSupport: os << to_string(profile_) << "_mu" << mu_; break;
        case TailClass::Tabulated: os << "tabulated"; break;
    }
    os << "_d" << d_;
    return os.str();
}

// ---------------------------------------------------------------- json

nlohmann::json KernelFamily::to_json() const {
    nlohmann::json j;
    j["dimension"] = d_;
    j["tail_class"] = to_string(tail_);
    nlohmann::json par = nlohmann::json::object();
    switch (tail_) {
        case TailClass::Gaussian: break;
        case TailClass::StretchedExp:
            par["b"] = b_;
            par["p"] = p_;
            break;
        case TailClass::CompactSupport:
            par["mu"] = mu_;
            par["profile"] = to_string(profile_);
            break;
        case TailClass::Tabulated:
            if (!source_.empty()) {
                par["csv"] = source_;
            } else {
                par["x"] = *tx_;
                std::vector<double> raw(ta_->begin(), ta_->end());
                par["a"] = raw;
            }
            break;
    }
    j["parameters"] = par;
    j["normalizer"] = norm_;
    j["c1"] = c1_;
    j["condition_flags"] = {{"A1", flags_.A1}, {"A1s", flags_.A1s}, {"Ap", flags_.Ap}};
    return j;
}

KernelFamily KernelFamily::from_json(const nlohmann::json& j, const std::string& base_dir) {
    try {
        int d = j.value("dimension", 1);
        std::string tc = j.at("tail_class").get<std::string>();
        nlohmann::json par = j.value("parameters", nlohmann::json::object());
        if (tc == "gaussian") return gaussian(d);
        if (tc == "laplace") return stretched_exp(d, par.value("b", 1.0), 1.0);
        if (tc == "stretched_exp") return stretched_exp(d, par.at("b").get<double>(), par.at("p").get<double>());
        if (tc == "compact_support")
            return compact_support(d, par.at("mu").get<double>(),
                                   profile_from_string(par.value("profile", std::string("tent"))));
        if (tc == "tabulated") {
            if (d != 1) throw ConfigError("tabulated kernels are 1-D only");
            if (par.contains("csv")) {
                std::string path = par["csv"].get<std::string>();
                if (!base_dir.empty() && !path.empty() && path[0] != '/') path = base_dir + "/" + path;
                return tabulated_csv(path);
            }
            return tabulated(par.at("x").get<std::vector<double>>(), par.at("a").get<std::vector<double>>());
        }
        throw ConfigError("unknown tail_class '" + tc + "'");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("kernel descriptor: ") + e.what());
    }
}

// ---------------------------------------------------------------- evaluation

double KernelFamily::radial(double s) const {
    s = std::abs(s);
    switch (tail_) {
        case TailClass::Gaussian: return norm_ * std::exp(-0.25 * s * s);
        case TailClass::StretchedExp: return norm_ * std::exp(-b_ * std::pow(s, p_));
        case TailClass::CompactSupport: return s > mu_ ? 0.0 : norm_ * profile_shape(profile_, s / mu_);
        case TailClass::Tabulated: {
            const auto& x = *tx_;
            const auto& a = *ta_;
            if (s > x.back() * (1.0 + 1e-15))
                throw DomainError("tabulated kernel evaluated outside its stored lattice (|x|=" +
                                  std::to_string(s) + ")");
            auto it = std::upper_bound(x.begin(), x.end(), s);
            if (it == x.end()) return a.back();
            std::size_t i = std::size_t(it - x.begin());
            if (i == 0) return a.front();
            double w = (s - x[i - 1]) / (x[i] - x[i - 1]);
            return std::max(0.0, (1.0 - w) * a[i - 1] + w * a[i]);
        }
    }
    return 0.0;
}

double KernelFamily::log_radial(double s) const {
    s = std::abs(s);
    switch (tail_) {
        case TailClass::Gaussian: return std::log(norm_) - 0.25 * s * s;
        case TailClass::StretchedExp: return std::log(norm_) - b_ * std::pow(s, p_);
        default: return log_or_ninf(radial(s));
    }
}

double KernelFamily::evaluate(const Vec& x) const {
    if (x.size() != d_) throw DomainError("point dimension does not match kernel dimension");
    if (!x.allFinite()) throw DomainError("evaluate: non-finite point");
    return radial(x.norm());
}

double KernelFamily::log_evaluate(const Vec& x) const {
    if (x.size() != d_) throw DomainError("point dimension does not match kernel dimension");
    return log_radial(x.norm());
}

// ---------------------------------------------------------------- quadrature

double KernelFamily::truncation_radius(double g) const {
    if (mu_ < kInf) return mu_;
    g = std::abs(g);
    // exponent of the radial integrand (surface factor included)
    auto f = [&](double s) { return -b_ * std::pow(s, p_) + g * s + (d_ - 1) * std::log(std::max(s, 1e-300)); };
    double scale = std::pow(b_, -1.0 / p_);
    double speak = p_ > 1.0 ? std::pow(g / (b_ * p_), 1.0 / (p_ - 1.0)) : 0.0;
    double s0 = std::max(speak, scale);
    double fmax = std::max(f(s0), f(speak > 0 ? speak : scale));
    double hi = 2.0 * s0;
    while (f(hi) > fmax - 50.0) hi *= 2.0;
    double lo = s0;
    for (int it = 0; it < 60; ++it) {
        double mid = 0.5 * (lo + hi);
        (f(mid) > fmax - 50.0 ? lo : hi) = mid;
    }
    return hi;
}

std::vector<QuadNode> KernelFamily::radial_nodes(double g) const {
    std::vector<QuadNode> out;
    auto push = [&](double s, double w) {
        double ws = d_ == 2 ? w * 2.0 * kPi * s : w;
        out.push_back({s, ws, log_radial(s)});
    };
    if (tail_ == TailClass::Tabulated) {
        std::vector<double> br{0.0};
        for (double x : *tx_)
            if (x > 0.0 && x <= mu_) br.push_back(x);
        // geometric refinement toward the support edge, where large tilts concentrate mass
        double last = br.size() > 1 ? br[br.size() - 2] : 0.0;
        br.pop_back();
        for (int j = 1; j <= 45; ++j) br.push_back(mu_ - (mu_ - last) * std::ldexp(1.0, -j));
        br.push_back(mu_);
        for (std::size_t i = 1; i < br.size(); ++i) gl16(br[i - 1], br[i], push);
        return out;
    }
    double R = truncation_radius(g);
    if (tail_ == TailClass::CompactSupport) {
        const int N = 32;
        std::vector<double> br;
        for (int i = 0; i < N; ++i) br.push_back(R * i / N);
        for (int j = 0; j <= 45; ++j) br.push_back(R - R / N * std::ldexp(1.0, -j));
        br.push_back(R);
        for (std::size_t i = 1; i < br.size(); ++i) gl16(br[i - 1], br[i], push);
        return out;
    }
    // graded mesh: s^p is not smooth at 0 for non-integer p
    const int N = 128;
    for (int i = 0; i < N; ++i) {
        double a = R * double(i) * i / (double(N) * N), b = R * double(i + 1) * (i + 1) / (double(N) * N);
        gl16(a, b, push);
    }
    return out;
}

RayCumulant KernelFamily::ray_cumulant_quad(double g) const {
    g = std::abs(g);
    auto nodes = radial_nodes(g);
    double emax = -kInf;
    for (auto& q : nodes) emax = std::max(emax, std::log(q.w) + q.lrho + g * q.s);
    if (!std::isfinite(emax)) throw NumericError("cumulant quadrature: empty integrand");
    double s0 = 0.0, s1 = 0.0;
    if (d_ == 1) {
        for (auto& q : nodes) {
            double e = std::exp(std::log(q.w) + q.lrho + g * q.s - emax);
            double m = std::exp(-2.0 * g * q.s);
            s0 += e * (1.0 + m);
            s1 += e * q.s * (1.0 - m);
        }
        double m1 = s1 / s0, s2 = 0.0;
        for (auto& q : nodes) {
            double e = std::exp(std::log(q.w) + q.lrho + g * q.s - emax);
            double m = std::exp(-2.0 * g * q.s);
            s2 += e * ((q.s - m1) * (q.s - m1) + (q.s + m1) * (q.s + m1) * m);
        }
        return {emax + std::log(s0), m1, s2 / s0};
    }
    double s2 = 0.0;
    for (auto& q : nodes) {
        double e = std::exp(std::log(q.w) + q.lrho + g * q.s - emax);
        double z = g * q.s;
        double i0 = bessel_i_scaled(0, z), i1 = bessel_i_scaled(1, z), i2 = bessel_i_scaled(2, z);
        s0 += e * i0;
        s1 += e * q.s * i1;
        s2 += e * q.s * q.s * 0.5 * (i0 + i2);
    }
    double m1 = s1 / s0;
    return {emax + std::log(s0), m1, s2 / s0 - m1 * m1};
}

double KernelFamily::gamma_bound() const {
    if (tail_ == TailClass::StretchedExp && p_ == 1.0) return b_ * (1.0 - 1e-9);
    return kInf;
}

RayCumulant KernelFamily::ray_cumulant(double g) const {
    g = std::abs(g);
    switch (tail_) {
        case TailClass::Gaussian: return {g * g, 2.0 * g, 2.0};
        case TailClass::StretchedExp:
            if (p_ == 1.0) {
                if (g >= gamma_bound()) return {kInf, kInf, kInf};
                double f = 0.5 * (d_ + 1), b2 = b_ * b_, den = b2 - g * g;
                return {-f * std::log1p(-g * g / b2), f * 2.0 * g / den, f * 2.0 * (b2 + g * g) / (den * den)};
            }
            if (p_ == 2.0) return {g * g / (4.0 * b_), g / (2.0 * b_), 1.0 / (2.0 * b_)};
            return ray_cumulant_quad(g);
        default: return ray_cumulant_quad(g);
    }
}

double KernelFamily::log_mgf(const Vec& gamma) const { return ray_cumulant(gamma.norm()).value; }

Vec KernelFamily::mean_tilted(const Vec& gamma) const {
    double g = gamma.norm();
    if (g == 0.0) return Vec::Zero(d_);
    return ray_cumulant(g).d1 * gamma / g;
}

Mat KernelFamily::hessian_tilted(const Vec& gamma) const {
    double g = gamma.norm();
    auto rc = ray_cumulant(g);
    if (g < 1e-12) return rc.d2 * Mat::Identity(d_, d_);
    Vec th = gamma / g;
    Mat P = th * th.transpose();
    return rc.d2 * P + (rc.d1 / g) * (Mat::Identity(d_, d_) - P);
}

Moments KernelFamily::covariance() const {
    Moments m;
    if (tail_ == TailClass::Gaussian || tail_ == TailClass::StretchedExp) {
        m.mass = 1.0;
    } else {
        m.mass = std::exp(ray_cumulant_quad(0.0).value);
    }
    if (!(sigma1_ > 0.0) || !std::isfinite(sigma1_))
        throw NumericError("covariance quadrature did not converge (sigma=" + std::to_string(sigma1_) + ")");
    m.sigma = sigma1_ * Mat::Identity(d_, d_);
    return m;
}

TiltedKernel KernelFamily::tilt(const Vec& gamma) const { return TiltedKernel(*this, gamma); }

// ---------------------------------------------------------------- Fourier

double KernelFamily::fourier_quad(double pn) const {
    auto nodes = radial_nodes(0.0);
    double s = 0.0;
    for (auto& q : nodes) {
        double a = std::exp(q.lrho);
        s += q.w * a * (d_ == 1 ? 2.0 * std::cos(pn * q.s) : boost::math::cyl_bessel_j(0, pn * q.s));
    }
    return s;
}

double KernelFamily::fourier(const Vec& p) const {
    if (p.size() != d_) throw DomainError("frequency dimension does not match kernel dimension");
    double pn = p.norm(), p2 = pn * pn;
    switch (tail_) {
        case TailClass::Gaussian: return std::exp(-p2);
        case TailClass::StretchedExp:
            if (p_ == 1.0) {
                double r = b_ * b_ / (b_ * b_ + p2);
                return d_ == 1 ? r : r * std::sqrt(r);
            }
            if (p_ == 2.0) return std::exp(-p2 / (4.0 * b_));
            return fourier_quad(pn);
        case TailClass::CompactSupport:
            if (d_ == 1) return std::real(profile_symbol(profile_, cd(pn * mu_, 0.0)));
            if (profile_ == Profile::Epanechnikov) {
                double q = pn * mu_;
                if (q < 1e-3) return 1.0 - q * q / 12.0;
                return 8.0 * boost::math::cyl_bessel_j(2, q) / (q * q);
            }
            return fourier_quad(pn);
        case TailClass::Tabulated: return fourier_quad(pn);
    }
    return 0.0;
}

bool KernelFamily::has_complex_symbol() const {
    if (d_ == 1) return true;
    return tail_ == TailClass::Gaussian || (tail_ == TailClass::StretchedExp && (p_ == 1.0 || p_ == 2.0));
}

std::complex<double> KernelFamily::tilted_symbol(const Vec& p, const Vec& gamma) const {
    if (p.size() != d_ || gamma.size() != d_) throw DomainError("tilted_symbol: dimension mismatch");
    double g = gamma.norm();
    if (g == 0.0) return fourier(p);
    if (!has_complex_symbol()) throw DomainError("no complex symbol for tilted 2-D " + name());
    if (g >= gamma_bound()) throw DomainError("tilt |gamma| must be < b = " + std::to_string(b_));
    // q.q with q = p - i gamma
    cd qq(p.squaredNorm() - gamma.squaredNorm(), -2.0 * p.dot(gamma));
    switch (tail_) {
        case TailClass::Gaussian: return std::exp(cd(-p.squaredNorm(), 2.0 * p.dot(gamma)));
        case TailClass::StretchedExp:
            if (p_ == 1.0) {
                double b2 = b_ * b_;
                cd r = (b2 - g * g) / (b2 + qq);
                return d_ == 1 ? r : r * std::sqrt(r);
            }
            if (p_ == 2.0) return std::exp(cd(-p.squaredNorm(), 2.0 * p.dot(gamma)) / (4.0 * b_));
            break;
        case TailClass::CompactSupport: {
            cd q = mu_ * cd(p[0], -gamma[0]);
            return profile_symbol(profile_, q) / std::exp(ray_cumulant(g).value);
        }
        default: break;
    }
    return tilted_symbol_line(p[0], 0.0, 1, gamma[0])[0];
}

std::vector<std::complex<double>> KernelFamily::tilted_symbol_line(double p0, double dp, std::size_t count,
                                                                   double gamma) const {
    std::vector<cd> out(count);
    bool quad = d_ == 1 && (tail_ == TailClass::Tabulated ||
                            (tail_ == TailClass::StretchedExp && p_ != 1.0 && p_ != 2.0));
    if (d_ != 1) throw DomainError("tilted_symbol_line is 1-D only");
    if (!quad && tail_ == TailClass::CompactSupport) {
        // ell(gamma) is a quadrature here; evaluate it once per line
        const double Lam = std::exp(ray_cumulant(std::abs(gamma)).value);
        for (std::size_t j = 0; j < count; ++j)
            out[j] = profile_symbol(profile_, mu_ * cd(p0 + dp * double(j), -gamma)) / Lam;
        return out;
    }
    if (!quad) {
        Vec g = vec1(gamma);
        for (std::size_t j = 0; j < count; ++j) out[j] = tilted_symbol(vec1(p0 + dp * double(j)), g);
        return out;
    }
    if (std::abs(gamma) >= gamma_bound()) throw DomainError("tilt outside cumulant domain");
    double ell = ray_cumulant(gamma).value;
    auto nodes = radial_nodes(gamma);
    for (auto& q : nodes) {
        for (int sgn : {-1, 1}) {
            double x = sgn * q.s;
            double W = q.w * std::exp(q.lrho + gamma * x - ell);
            if (W == 0.0) continue;
            cd step = std::polar(1.0, dp * x);
            cd z;
            for (std::size_t j = 0; j < count; ++j) {
                if (j % 256 == 0) z = std::polar(1.0, (p0 + dp * double(j)) * x);
                out[j] += W * z;
                z *= step;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------- tilted kernel

TiltedKernel::TiltedKernel(KernelFamily base, Vec gamma) : base_(std::move(base)), gamma_(std::move(gamma)) {
    if (gamma_.size() != base_.dimension()) throw DomainError("tilt: gamma dimension mismatch");
    double g = gamma_.norm();
    if (!(g < base_.gamma_bound()))
        throw DomainError("tilt |gamma|=" + std::to_string(g) + " outside cumulant domain |gamma| < b = " +
                          std::to_string(base_.b()));
    log_mgf_ = base_.log_mgf(gamma_);
    mean_ = base_.mean_tilted(gamma_);
}

double TiltedKernel::density(const Vec& x) const {
    double la = base_.log_evaluate(x);
    if (!std::isfinite(la)) return 0.0;
    return std::exp(la + gamma_.dot(x) - log_mgf_);
}

}  // namespace nlheat
