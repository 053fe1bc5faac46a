#include "nlheat/mcsim.hpp"

#include "nlheat/io.hpp"
#include "nlheat/parallel.hpp"

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include <algorithm>
#include <cmath>

namespace nlheat {

namespace {

// 53-bit uniform on [0, 1); fully specified, unlike std::generate_canonical.
inline double u01(std::mt19937_64& rng) { return double(rng() >> 11) * 0x1.0p-53; }
inline double exp1(std::mt19937_64& rng) { return -std::log1p(-u01(rng)); }
inline double normal(std::mt19937_64& rng, double sd) {
    boost::random::normal_distribution<double> nd(0.0, sd);
    return nd(rng);
}

std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t tag) {
    std::seed_seq seq{std::uint32_t(seed), std::uint32_t(seed >> 32), std::uint32_t(stream),
                      std::uint32_t(stream >> 32), std::uint32_t(tag)};
    return std::mt19937_64(seq);
}

Vec random_direction(int d, std::mt19937_64& rng) {
    if (d == 1) return vec1(u01(rng) < 0.5 ? -1.0 : 1.0);
    double th = 2.0 * kPi * u01(rng);
    return vec2(std::cos(th), std::sin(th));
}

}  // namespace

long sample_poisson(double mean, std::mt19937_64& rng) {
    if (!(mean >= 0.0)) throw DomainError("poisson mean must be >= 0");
    if (mean == 0.0) return 0;
    if (mean <= 30.0) {
        double u = u01(rng), p = std::exp(-mean), F = p;
        long k = 0;
        while (u > F && k < 1000) {
            ++k;
            p *= mean / double(k);
            F += p;
        }
        return k;
    }
    boost::random::poisson_distribution<long, double> pd(mean);
    return pd(rng);
}

// ---------------------------------------------------------------- jump sampler

JumpSampler::JumpSampler(const KernelFamily& fam, const Vec& gamma) : fam_(fam), gamma_(gamma) {
    if (gamma_.size() != fam_.dimension()) throw DomainError("tilt dimension mismatch");
    double g = gamma_.norm();
    if (!(g < fam_.gamma_bound()))
        throw DomainError("tilt |gamma| outside the cumulant domain |gamma| < b = " + std::to_string(fam_.b()));
    ell_ = g == 0.0 ? 0.0 : fam_.ray_cumulant(g).value;
    const auto tc = fam_.tail_class();
    if (fam_.bounded_support()) {
        accept_max_ = fam_.max_value() * std::exp(g * fam_.mu() - ell_);
        return;
    }
    if (tc == TailClass::StretchedExp && fam_.p() != 1.0 && fam_.p() != 2.0 && g != 0.0) {
        if (fam_.dimension() != 1) throw DomainError("tilted stretched-exponential sampling is 1-D only");
        double p = fam_.p(), b = fam_.b(), gs = gamma_[0];
        mode_ = (gs < 0 ? -1.0 : 1.0) * std::pow(std::abs(gs) / (b * p), 1.0 / (p - 1.0));
        fmode_ = std::exp(fam_.log_radial(mode_) + gs * mode_ - ell_);
    }
    if (tc == TailClass::StretchedExp && fam_.p() == 1.0 && fam_.dimension() == 2 && g != 0.0)
        throw DomainError("tilted 2-D Laplace-type sampling is not supported");
}

Vec JumpSampler::operator()(std::mt19937_64& rng) const {
    const int d = fam_.dimension();
    const auto tc = fam_.tail_class();
    if (tc == TailClass::Gaussian) {
        Vec x(d);
        for (int i = 0; i < d; ++i) x[i] = normal(rng, std::sqrt(2.0)) + 2.0 * gamma_[i];
        return x;
    }
    if (fam_.bounded_support()) {
        const double mu = fam_.mu();
        for (;;) {
            Vec x(d);
            for (int i = 0; i < d; ++i) x[i] = mu * (2.0 * u01(rng) - 1.0);
            if (x.norm() > mu) continue;
            double f = fam_.radial(x.norm()) * std::exp(gamma_.dot(x) - ell_);
            if (u01(rng) * accept_max_ <= f) return x;
        }
    }
    // stretched exponential
    const double b = fam_.b(), p = fam_.p();
    if (p == 2.0) {
        Vec x(d);
        double sd = std::sqrt(1.0 / (2.0 * b));
        for (int i = 0; i < d; ++i) x[i] = normal(rng, sd) + gamma_[i] / (2.0 * b);
        return x;
    }
    if (gamma_.norm() == 0.0) {
        // radius^p ~ Gamma(d/p, 1/b)
        boost::random::gamma_distribution<double> gd(double(d) / p, 1.0 / b);
        double r = std::pow(gd(rng), 1.0 / p);
        return r * random_direction(d, rng);
    }
    if (p == 1.0) {
        // asymmetric exponential with rates b - gamma (right) and b + gamma (left)
        double gs = gamma_[0];
        bool right = u01(rng) < (b + gs) / (2.0 * b);
        return vec1(right ? exp1(rng) / (b - gs) : -exp1(rng) / (b + gs));
    }
    // log-concave envelope min(1, e^{1-|y|}) around the mode
    const double gs = gamma_[0];
    for (;;) {
        double y, g;
        if (u01(rng) < 0.5) {
            y = 2.0 * u01(rng) - 1.0;
            g = 1.0;
        } else {
            double e = exp1(rng);
            y = (u01(rng) < 0.5 ? -1.0 : 1.0) * (1.0 + e);
            g = std::exp(-e);
        }
        double x = mode_ + y / fmode_;
        double f = std::exp(fam_.log_radial(x) + gs * x - ell_) / fmode_;
        if (u01(rng) * g <= f) return vec1(x);
    }
}

// ---------------------------------------------------------------- config

void SimConfig::validate() const {
    if (paths < 1) throw ConfigError("paths must be >= 1");
    if (!(t >= 0.0)) throw ConfigError("horizon t must be >= 0");
    if (!(bin_width > 0.0)) throw ConfigError("bin width must be > 0");
    if (batches < 2) throw ConfigError("need at least 2 batches");
    if (tilt) {
        if (tilt->size() != family.dimension()) throw ConfigError("tilt dimension mismatch");
        if (!(tilt->norm() < family.gamma_bound())) throw DomainError("tilt outside the cumulant domain");
    }
}

nlohmann::json SimConfig::to_json() const {
    nlohmann::json j;
    j["kernel"] = family.to_json();
    j["t"] = t;
    j["paths"] = paths;
    j["seed"] = seed;
    j["estimator"] = estimator == EstimatorKind::Histogram ? "histogram" : "tail";
    j["bin_width"] = bin_width;
    j["half_width"] = half_width;
    j["thresholds"] = thresholds;
    j["batches"] = batches;
    if (tilt) j["tilt"] = std::vector<double>(tilt->data(), tilt->data() + tilt->size());
    return j;
}

SimConfig SimConfig::from_json(const nlohmann::json& j, const std::string& base_dir) {
    SimConfig c;
    try {
        c.family = KernelFamily::from_json(j.at("kernel"), base_dir);
        c.t = j.value("t", 1.0);
        c.paths = j.value("paths", 100000L);
        c.seed = j.value("seed", std::uint64_t(1));
        std::string est = j.value("estimator", std::string("histogram"));
        if (est == "histogram")
            c.estimator = EstimatorKind::Histogram;
        else if (est == "tail")
            c.estimator = EstimatorKind::Tail;
        else
            throw ConfigError("unknown estimator '" + est + "'");
        c.bin_width = j.value("bin_width", 0.25);
        c.half_width = j.value("half_width", 0.0);
        c.thresholds = j.value("thresholds", std::vector<double>{});
        c.batches = j.value("batches", 32);
        if (j.contains("tilt")) {
            auto v = j["tilt"].get<std::vector<double>>();
            c.tilt = Eigen::Map<Vec>(v.data(), Eigen::Index(v.size()));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("simulation config: ") + e.what());
    }
    c.validate();
    return c;
}

// ---------------------------------------------------------------- engine

namespace {

struct Batch {
    long n = 0;
    double atom = 0.0, s1 = 0.0, s2 = 0.0;
    std::vector<double> hist, tail;
    double sw = 0.0, sw2 = 0.0, maxlw = -kInf;
};

Estimate batch_estimate(const std::vector<Batch>& bs, long total, const std::function<double(const Batch&)>& num) {
    double all = 0.0;
    for (const auto& b : bs) all += num(b);
    double est = all / double(total);
    double ss = 0.0;
    std::size_t B = 0;
    for (const auto& b : bs) {
        if (b.n == 0) continue;
        double e = num(b) / double(b.n);
        ss += (e - est) * (e - est);
        ++B;
    }
    double se = B > 1 ? std::sqrt(ss / (double(B) * double(B - 1))) : 0.0;
    return {est, se};
}

struct Layout {
    int d;
    double R, w;
    long nb;  // bins per axis
    long index(const Vec& x) const {
        long idx = 0;
        for (int i = 0; i < d; ++i) {
            double u = (x[i] + R) / w;
            if (u < 0.0 || u >= double(nb)) return -1;
            idx = idx * nb + long(u);
        }
        return idx;
    }
    Vec center(long idx) const {
        Vec c(d);
        for (int i = d - 1; i >= 0; --i) {
            c[i] = -R + (double(idx % nb) + 0.5) * w;
            idx /= nb;
        }
        return c;
    }
};

EstimateReport run_engine(const SimConfig& cfg) {
    cfg.validate();
    const int d = cfg.family.dimension();
    const Vec gamma = cfg.tilt ? *cfg.tilt : Vec::Zero(d);
    JumpSampler jump(cfg.family, gamma);
    const double ell = jump.log_mgf();
    const bool tilted = gamma.norm() > 0.0;
    // Esscher transform of the whole process: clock rate Lambda(gamma), jumps a_gamma
    const double clock = tilted ? cfg.t * std::exp(ell) : cfg.t;
    const double lw0 = tilted ? cfg.t * std::expm1(ell) : 0.0;

    Layout lay{d, 0.0, cfg.bin_width, 0};
    if (cfg.estimator == EstimatorKind::Histogram) {
        double R = cfg.half_width > 0.0 ? cfg.half_width
                                        : 4.0 * std::sqrt(cfg.family.sigma1() * std::max(cfg.t, 1.0)) + cfg.bin_width;
        lay.nb = std::max(1L, long(std::ceil(2.0 * R / cfg.bin_width)));
        lay.R = 0.5 * double(lay.nb) * cfg.bin_width;
    }
    const long nbins = cfg.estimator == EstimatorKind::Histogram ? (d == 1 ? lay.nb : lay.nb * lay.nb) : 0;

    std::vector<Batch> batches(std::size_t(cfg.batches));
    const long per = cfg.paths / cfg.batches, extra = cfg.paths % cfg.batches;
    parallel_for(batches.size(), [&](std::size_t bi) {
        auto& B = batches[bi];
        B.n = per + (long(bi) < extra ? 1 : 0);
        B.hist.assign(std::size_t(nbins), 0.0);
        B.tail.assign(cfg.thresholds.size(), 0.0);
        auto rng = substream(cfg.seed, bi, 0x6a75);
        for (long i = 0; i < B.n; ++i) {
            long N = sample_poisson(clock, rng);
            Vec X = Vec::Zero(d);
            for (long k = 0; k < N; ++k) X += jump(rng);
            double lw = tilted ? -gamma.dot(X) + lw0 : 0.0;
            if (lw > 700.0) throw NumericError("importance weight overflow; use a smaller tilt");
            double w = std::exp(lw);
            B.maxlw = std::max(B.maxlw, lw);
            B.sw += w;
            B.sw2 += w * w;
            if (N == 0) {
                B.atom += w;
            } else if (nbins) {
                long idx = lay.index(X);
                if (idx >= 0) B.hist[std::size_t(idx)] += w;
            }
            B.s1 += w * X[0];
            B.s2 += w * X[0] * X[0];
            for (std::size_t j = 0; j < cfg.thresholds.size(); ++j)
                if (X[0] > cfg.thresholds[j]) B.tail[j] += w;
        }
    });

    EstimateReport rep;
    rep.paths = cfg.paths;
    rep.atom_fraction = batch_estimate(batches, cfg.paths, [](const Batch& b) { return b.atom; });
    rep.mean = batch_estimate(batches, cfg.paths, [](const Batch& b) { return b.s1; });
    {
        // variance of X_1 via batch means of the second moment about the global mean
        double m = rep.mean.value;
        rep.variance = batch_estimate(batches, cfg.paths,
                                      [m](const Batch& b) { return b.s2 - 2.0 * m * b.s1 + m * m * b.sw; });
    }
    double sw = 0.0, sw2 = 0.0;
    rep.max_log_weight = -kInf;
    for (const auto& b : batches) sw += b.sw, sw2 += b.sw2, rep.max_log_weight = std::max(rep.max_log_weight, b.maxlw);
    rep.ess = sw2 > 0.0 ? sw * sw / sw2 : 0.0;
    if (nbins) {
        rep.bin_width = cfg.bin_width;
        double vol = std::pow(cfg.bin_width, d);
        for (long j = 0; j < nbins; ++j) {
            auto e = batch_estimate(batches, cfg.paths, [j](const Batch& b) { return b.hist[std::size_t(j)]; });
            rep.histogram_mass += e.value;
            rep.bin_centers.push_back(lay.center(j));
            rep.density.push_back({e.value / vol, e.se / vol});
        }
    }
    rep.thresholds = cfg.thresholds;
    for (std::size_t j = 0; j < cfg.thresholds.size(); ++j)
        rep.tail.push_back(batch_estimate(batches, cfg.paths, [j](const Batch& b) { return b.tail[j]; }));
    return rep;
}

}  // namespace

EstimateReport sample_paths(const SimConfig& cfg) { return run_engine(cfg); }

EstimateReport tilted_tail(const SimConfig& cfg) {
    SimConfig c = cfg;
    c.estimator = EstimatorKind::Tail;
    if (!c.tilt) c.tilt = Vec::Zero(c.family.dimension());
    if (c.thresholds.empty()) throw ConfigError("tilted_tail needs at least one threshold");
    return run_engine(c);
}

EstimateReport sample_sums(const KernelFamily& fam, long k, const std::vector<double>& thresholds, long paths,
                           std::uint64_t seed, int batches) {
    if (k < 1 || paths < 1 || batches < 2) throw ConfigError("sample_sums: invalid k, paths or batches");
    JumpSampler jump(fam, Vec::Zero(fam.dimension()));
    std::vector<Batch> bs(static_cast<std::size_t>(batches));
    const long per = paths / batches, extra = paths % batches;
    parallel_for(bs.size(), [&](std::size_t bi) {
        auto& B = bs[bi];
        B.n = per + (long(bi) < extra ? 1 : 0);
        B.tail.assign(thresholds.size(), 0.0);
        auto rng = substream(seed, bi, 0x5u + std::uint64_t(k) * 1000003u);
        for (long i = 0; i < B.n; ++i) {
            Vec S = Vec::Zero(fam.dimension());
            for (long j = 0; j < k; ++j) S += jump(rng);
            B.s1 += S[0];
            for (std::size_t j = 0; j < thresholds.size(); ++j)
                if (S[0] > thresholds[j]) B.tail[j] += 1.0;
        }
    });
    EstimateReport rep;
    rep.paths = paths;
    rep.thresholds = thresholds;
    rep.mean = batch_estimate(bs, paths, [](const Batch& b) { return b.s1; });
    for (std::size_t j = 0; j < thresholds.size(); ++j)
        rep.tail.push_back(batch_estimate(bs, paths, [j](const Batch& b) { return b.tail[j]; }));
    rep.ess = double(paths);
    return rep;
}

// ---------------------------------------------------------------- output

nlohmann::json EstimateReport::to_json() const {
    auto est = [](const Estimate& e) { return nlohmann::json{{"value", e.value}, {"se", e.se}}; };
    nlohmann::json j;
    j["paths"] = paths;
    j["atom_fraction"] = est(atom_fraction);
    j["mean"] = est(mean);
    j["variance"] = est(variance);
    j["ess"] = ess;
    j["max_log_weight"] = max_log_weight;
    j["histogram_mass"] = histogram_mass;
    j["bins"] = density.size();
    nlohmann::json tails = nlohmann::json::array();
    for (std::size_t i = 0; i < tail.size(); ++i)
        tails.push_back({{"threshold", thresholds[i]}, {"value", tail[i].value}, {"se", tail[i].se}});
    j["tails"] = tails;
    return j;
}

void EstimateReport::write_csv(const std::string& path) const {
    if (!density.empty()) {
        const int d = int(bin_centers.front().size());
        std::vector<std::string> hdr = d == 1 ? std::vector<std::string>{"bin_center"}
                                              : std::vector<std::string>{"bin_center_1", "bin_center_2"};
        hdr.push_back("estimate");
        hdr.push_back("se");
        CsvWriter csv(path, hdr);
        for (std::size_t i = 0; i < density.size(); ++i) {
            for (int k = 0; k < d; ++k) csv.cell(bin_centers[i][k]);
            csv.cell(density[i].value).cell(density[i].se);
            csv.end_row();
        }
        return;
    }
    CsvWriter csv(path, {"threshold", "estimate", "se"});
    for (std::size_t i = 0; i < tail.size(); ++i) {
        csv.cell(thresholds[i]).cell(tail[i].value).cell(tail[i].se);
        csv.end_row();
    }
}

}  // namespace nlheat
