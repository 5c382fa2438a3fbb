#include "socialscope/tailfit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/minima.hpp>

#include "socialscope/errors.hpp"
#include "socialscope/parallel.hpp"
#include "socialscope/text.hpp"

namespace socialscope {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;
constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

// ---------------------------------------------------------------------------
// Special functions

double hurwitz_zeta(double s, double a) {
    if (!(s > 1.0) || !(a > 0.0)) throw ParameterError("hurwitz_zeta needs s > 1 and a > 0");
    // Shift a until the Euler-Maclaurin tail converges quickly, then sum the
    // Bernoulli correction terms B_2j / (2j)! * s(s+1)...(s+2j-2) a^(-s-2j+1).
    static constexpr std::array<double, 8> kBernoulli = {
        1.0 / 12.0,           -1.0 / 720.0,           1.0 / 30240.0,           -1.0 / 1209600.0,
        1.0 / 47900160.0,     -691.0 / 1307674368000.0, 1.0 / 74724249600.0,   -3617.0 / 10670622842880000.0};
    double shift = std::max(10.0, s);
    double sum = 0.0;
    while (a < shift) {
        sum += std::pow(a, -s);
        a += 1.0;
    }
    double a_pow = std::pow(a, -s);
    sum += a * a_pow / (s - 1.0) + 0.5 * a_pow;
    double term = s * a_pow / a;  // s * a^(-s-1)
    for (std::size_t j = 0; j < kBernoulli.size(); ++j) {
        double add = kBernoulli[j] * term;
        sum += add;
        if (std::abs(add) < 1e-17 * sum) break;
        double k = 2.0 * static_cast<double>(j) + 1.0;
        term *= (s + k) * (s + k + 1.0) / (a * a);
    }
    return sum;
}

double log_normal_survival(double z) {
    if (z < 36.0) return std::log(0.5 * std::erfc(z / std::sqrt(2.0)));
    double z2 = z * z;
    return -0.5 * z2 - std::log(z) - kLogSqrt2Pi + std::log1p(-1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2));
}

namespace {

// log(Q(a) - Q(b)) for a < b without cancellation in either tail.
double log_normal_interval(double a, double b) {
    if (a >= 0.0) {
        double la = log_normal_survival(a), lb = log_normal_survival(b);
        return la + std::log1p(-std::exp(lb - la));
    }
    if (b <= 0.0) {
        double la = log_normal_survival(-b), lb = log_normal_survival(-a);
        return la + std::log1p(-std::exp(lb - la));
    }
    return std::log(1.0 - 0.5 * std::erfc(b / std::sqrt(2.0)) - 0.5 * std::erfc(-a / std::sqrt(2.0)));
}

double log_poisson_pmf(std::uint64_t x, double lambda) {
    double xd = static_cast<double>(x);
    return xd * std::log(lambda) - lambda - std::lgamma(xd + 1.0);
}

}  // namespace

double log_poisson_survival(std::uint64_t k, double lambda) {
    if (k == 0) return 0.0;
    double p = 0.0;
    try {
        p = boost::math::gamma_p(static_cast<double>(k), lambda);
    } catch (const std::exception&) {
        // boost gives up for extreme (k, lambda); the series below still works
    }
    if (p > 1e-280) return std::log(p);
    // Deep upper tail: sum the series pmf(k) * (1 + lambda/(k+1) + ...).
    double sum = 1.0, term = 1.0;
    for (std::uint64_t i = 1; i < 100000; ++i) {
        term *= lambda / static_cast<double>(k + i);
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return log_poisson_pmf(k, lambda) + std::log(sum);
}

// ---------------------------------------------------------------------------
// Models

std::string_view to_string(ModelFamily f) {
    switch (f) {
        case ModelFamily::PowerLaw: return "power_law";
        case ModelFamily::LogNormal: return "lognormal";
        case ModelFamily::Exponential: return "exponential";
        case ModelFamily::Poisson: return "poisson";
    }
    return "power_law";
}

ModelFamily parse_model_family(std::string_view s) {
    auto f = text::casefold(text::trim(s));
    for (auto fam : {ModelFamily::PowerLaw, ModelFamily::LogNormal, ModelFamily::Exponential, ModelFamily::Poisson})
        if (to_string(fam) == f) return fam;
    if (f == "powerlaw" || f == "power-law") return ModelFamily::PowerLaw;
    throw ParameterError("unknown model family '" + std::string(s) + "'");
}

ModelKind ModelKind::power_law(double alpha) { return {ModelFamily::PowerLaw, alpha, 0.0}; }
ModelKind ModelKind::lognormal(double mu, double sigma) { return {ModelFamily::LogNormal, mu, sigma}; }
ModelKind ModelKind::exponential(double lambda) { return {ModelFamily::Exponential, lambda, 0.0}; }
ModelKind ModelKind::poisson(double lambda) { return {ModelFamily::Poisson, lambda, 0.0}; }

void ModelKind::validate() const {
    bool ok = std::isfinite(first) && std::isfinite(second);
    switch (family) {
        case ModelFamily::PowerLaw: ok = ok && first > 1.0; break;
        case ModelFamily::LogNormal: ok = ok && second > 0.0; break;
        case ModelFamily::Exponential:
        case ModelFamily::Poisson: ok = ok && first > 0.0; break;
    }
    if (!ok) throw ParameterError("invalid parameters for " + std::string(to_string(family)));
}

nlohmann::ordered_json ModelKind::params_json() const {
    switch (family) {
        case ModelFamily::PowerLaw: return {{"alpha", first}};
        case ModelFamily::LogNormal: return {{"mu", first}, {"sigma", second}};
        case ModelFamily::Exponential:
        case ModelFamily::Poisson: return {{"lambda", first}};
    }
    return {};
}

TailModel::TailModel(ModelKind kind, std::uint64_t xmin) : kind_(kind), xmin_(xmin) {
    kind_.validate();
    if (xmin == 0) throw ParameterError("xmin must be at least 1");
    double x = static_cast<double>(xmin);
    switch (kind_.family) {
        case ModelFamily::PowerLaw: log_norm_ = std::log(hurwitz_zeta(kind_.first, x)); break;
        case ModelFamily::LogNormal:
            log_norm_ = log_normal_survival((std::log(x - 0.5) - kind_.first) / kind_.second);
            break;
        case ModelFamily::Exponential: log_norm_ = 0.0; break;
        case ModelFamily::Poisson: log_norm_ = log_poisson_survival(xmin, kind_.first); break;
    }
}

double TailModel::log_pmf(std::uint64_t x) const {
    if (x < xmin_) return -kInf;
    double xd = static_cast<double>(x);
    switch (kind_.family) {
        case ModelFamily::PowerLaw: return -kind_.first * std::log(xd) - log_norm_;
        case ModelFamily::LogNormal: {
            double a = (std::log(xd - 0.5) - kind_.first) / kind_.second;
            double b = (std::log(xd + 0.5) - kind_.first) / kind_.second;
            return log_normal_interval(a, b) - log_norm_;
        }
        case ModelFamily::Exponential:
            return std::log(-std::expm1(-kind_.first)) - kind_.first * (xd - static_cast<double>(xmin_));
        case ModelFamily::Poisson: return log_poisson_pmf(x, kind_.first) - log_norm_;
    }
    return -kInf;
}

double TailModel::pmf(std::uint64_t x) const { return std::exp(log_pmf(x)); }

double TailModel::log_ccdf(std::uint64_t x) const {
    if (x <= xmin_) return 0.0;
    double xd = static_cast<double>(x);
    switch (kind_.family) {
        case ModelFamily::PowerLaw: return std::log(hurwitz_zeta(kind_.first, xd)) - log_norm_;
        case ModelFamily::LogNormal:
            return log_normal_survival((std::log(xd - 0.5) - kind_.first) / kind_.second) - log_norm_;
        case ModelFamily::Exponential: return -kind_.first * (xd - static_cast<double>(xmin_));
        case ModelFamily::Poisson: return log_poisson_survival(x, kind_.first) - log_norm_;
    }
    return 0.0;
}

double TailModel::ccdf(std::uint64_t x) const { return std::min(1.0, std::exp(log_ccdf(x))); }

double TailModel::cdf(std::uint64_t x) const {
    if (x < xmin_) return 0.0;
    return std::max(0.0, -std::expm1(log_ccdf(x + 1)));
}

// ---------------------------------------------------------------------------
// Sampling

namespace {

constexpr std::size_t kPowerLawTable = 4096;

}  // namespace

TailSampler::TailSampler(const TailModel& model) : model_(model) {
    const auto& k = model.kind();
    std::uint64_t xmin = model.xmin();
    switch (k.family) {
        case ModelFamily::PowerLaw:
            ccdf_table_.reserve(kPowerLawTable);
            for (std::size_t i = 0; i < kPowerLawTable; ++i) ccdf_table_.push_back(model.ccdf(xmin + i));
            break;
        case ModelFamily::LogNormal:
            log_q0_ = log_normal_survival((std::log(static_cast<double>(xmin) - 0.5) - k.first) / k.second);
            break;
        case ModelFamily::Exponential: break;
        case ModelFamily::Poisson: {
            double cum = 0.0;
            for (std::uint64_t x = xmin;; ++x) {
                cum += model.pmf(x);
                cdf_table_.push_back(cum);
                bool past_mode = static_cast<double>(x) > k.first;
                if ((past_mode && 1.0 - cum < 1e-15) || cdf_table_.size() > 50'000'000) break;
            }
            cdf_table_.back() = 1.0;
            break;
        }
    }
}

std::uint64_t TailSampler::draw_power_law(double u) const {
    // smallest x with ccdf(x + 1) < u
    std::uint64_t xmin = model_.xmin();
    if (u > ccdf_table_.back()) {
        // ccdf_table_ is decreasing; find the first entry below u
        auto it = std::upper_bound(ccdf_table_.begin(), ccdf_table_.end(), u, std::greater<>());
        return xmin + static_cast<std::uint64_t>(it - ccdf_table_.begin()) - 1;
    }
    std::uint64_t lo = xmin + ccdf_table_.size() - 1;  // ccdf(lo) >= u
    std::uint64_t hi = lo * 2;
    while (model_.ccdf(hi) >= u) {
        lo = hi;
        if (hi > (std::uint64_t{1} << 52)) return hi;
        hi *= 2;
    }
    while (hi - lo > 1) {
        std::uint64_t mid = lo + (hi - lo) / 2;
        if (model_.ccdf(mid) >= u)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

std::uint64_t TailSampler::draw(Rng& rng) const {
    const auto& k = model_.kind();
    std::uint64_t xmin = model_.xmin();
    switch (k.family) {
        case ModelFamily::PowerLaw: return draw_power_law(rng.uniform_pos());
        case ModelFamily::LogNormal: {
            // continuous draw truncated to x >= xmin - 1/2, rounded to the nearest integer
            double log_q = log_q0_ + std::log(rng.uniform_pos());
            double z = std::sqrt(2.0) * boost::math::erfc_inv(2.0 * std::exp(log_q));
            double x = std::exp(k.first + k.second * z);
            double rounded = std::floor(x + 0.5);
            if (!(rounded < 9.0e15)) return std::uint64_t{9'000'000'000'000'000};
            return std::max(xmin, static_cast<std::uint64_t>(rounded));
        }
        case ModelFamily::Exponential: {
            double steps = std::floor(-std::log(rng.uniform_pos()) / k.first);
            if (!(steps < 9.0e15)) return std::uint64_t{9'000'000'000'000'000};
            return xmin + static_cast<std::uint64_t>(steps);
        }
        case ModelFamily::Poisson: {
            double u = rng.uniform();
            auto it = std::upper_bound(cdf_table_.begin(), cdf_table_.end(), u);
            return xmin + static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(
                              it - cdf_table_.begin(), static_cast<std::ptrdiff_t>(cdf_table_.size()) - 1));
        }
    }
    return xmin;
}

DegreeSample DegreeSample::make(std::vector<std::uint64_t> values) {
    for (auto v : values)
        if (v == 0) throw ParameterError("degree samples hold positive integers only");
    return DegreeSample{std::move(values)};
}

DegreeSample DegreeSample::from_degrees(std::span<const std::size_t> degrees) {
    DegreeSample s;
    for (auto d : degrees)
        if (d > 0) s.values.push_back(d);
    return s;
}

DegreeSample DegreeSample::parse(std::string_view content) {
    std::vector<std::uint64_t> values;
    std::istringstream in{std::string(content)};
    std::string line;
    while (std::getline(in, line)) {
        auto t = text::trim(line);
        if (t.empty() || t.front() == '#') continue;
        std::uint64_t v = 0;
        for (char c : t) {
            if (c < '0' || c > '9') throw ParameterError("degree sample line '" + std::string(t) + "' is not an integer");
            v = v * 10 + static_cast<std::uint64_t>(c - '0');
        }
        values.push_back(v);
    }
    return make(std::move(values));
}

DegreeSample sample_model(const ModelKind& kind, std::uint64_t xmin, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw ParameterError("sample size must be at least 1");
    TailSampler sampler(TailModel(kind, xmin));
    Rng rng(seed);
    DegreeSample s;
    s.values.reserve(n);
    for (std::size_t i = 0; i < n; ++i) s.values.push_back(sampler.draw(rng));
    return s;
}

// ---------------------------------------------------------------------------
// Fitting

namespace {

// Distinct values with multiplicities and suffix sums, so every candidate tail
// x >= value[i] is a suffix.
struct Tally {
    std::vector<std::uint64_t> value;
    std::vector<double> count;
    std::vector<double> suffix_n, suffix_log, suffix_x;

    explicit Tally(std::vector<std::uint64_t> data) {
        std::sort(data.begin(), data.end());
        for (std::size_t i = 0; i < data.size();) {
            std::size_t j = i;
            while (j < data.size() && data[j] == data[i]) ++j;
            value.push_back(data[i]);
            count.push_back(static_cast<double>(j - i));
            i = j;
        }
        std::size_t k = value.size();
        suffix_n.assign(k + 1, 0.0);
        suffix_log.assign(k + 1, 0.0);
        suffix_x.assign(k + 1, 0.0);
        for (std::size_t i = k; i-- > 0;) {
            double x = static_cast<double>(value[i]);
            suffix_n[i] = suffix_n[i + 1] + count[i];
            suffix_log[i] = suffix_log[i + 1] + count[i] * std::log(x);
            suffix_x[i] = suffix_x[i + 1] + count[i] * x;
        }
    }

    std::size_t first_at_least(std::uint64_t x) const {
        return static_cast<std::size_t>(std::lower_bound(value.begin(), value.end(), x) - value.begin());
    }
};

struct Tail {
    const Tally& t;
    std::size_t begin;
    std::uint64_t xmin;

    double n() const { return t.suffix_n[begin]; }
    std::size_t distinct() const { return t.value.size() - begin; }
};

[[noreturn]] void fit_error(ModelFamily f, const std::string& why) {
    throw FitError(std::string(to_string(f)) + " fit failed: " + why);
}

double power_law_approx(const Tail& tail) {
    double denom = tail.t.suffix_log[tail.begin] - tail.n() * std::log(static_cast<double>(tail.xmin) - 0.5);
    return 1.0 + tail.n() / denom;
}

ModelKind fit_power_law(const Tail& tail) {
    if (tail.distinct() == 1 && tail.t.value[tail.begin] == tail.xmin)
        fit_error(ModelFamily::PowerLaw, "degenerate tail, all values equal xmin");
    double n = tail.n(), sum_log = tail.t.suffix_log[tail.begin];
    double x0 = static_cast<double>(tail.xmin);
    auto neg_loglik = [&](double alpha) { return alpha * sum_log + n * std::log(hurwitz_zeta(alpha, x0)); };
    // the closed-form estimate seeds the bracket
    double guess = power_law_approx(tail);
    double lo = 1.0 + 1e-9;
    double hi = std::min(60.0, std::max(4.0, 1.0 + 3.0 * (guess - 1.0)));
    while (hi < 60.0 && neg_loglik(hi) < neg_loglik(std::min(60.0, hi * 1.5))) hi = std::min(60.0, hi * 1.5);
    auto [alpha, value] = boost::math::tools::brent_find_minima(neg_loglik, lo, hi, 50);
    (void)value;
    if (alpha > 59.9) fit_error(ModelFamily::PowerLaw, "scaling exponent diverges");
    return ModelKind::power_law(alpha);
}

ModelKind fit_exponential(const Tail& tail) {
    double excess = tail.t.suffix_x[tail.begin] / tail.n() - static_cast<double>(tail.xmin);
    if (!(excess > 0.0)) fit_error(ModelFamily::Exponential, "degenerate tail, all values equal xmin");
    return ModelKind::exponential(std::log1p(1.0 / excess));
}

ModelKind fit_poisson(const Tail& tail) {
    double mean = tail.t.suffix_x[tail.begin] / tail.n();
    std::uint64_t k = tail.xmin;
    if (!(mean > static_cast<double>(k))) fit_error(ModelFamily::Poisson, "degenerate tail, all values equal xmin");
    // Truncated Poisson is an exponential family: the MLE matches the truncated
    // mean lambda * P(X >= k-1) / P(X >= k) to the sample mean. It increases in lambda.
    auto truncated_mean = [&](double lambda) {
        return lambda * std::exp(log_poisson_survival(k - 1, lambda) - log_poisson_survival(k, lambda));
    };
    double lo = std::log(1e-12), hi = std::log(mean) + 1e-9;
    if (truncated_mean(std::exp(lo)) >= mean) fit_error(ModelFamily::Poisson, "mean too close to xmin");
    for (int i = 0; i < 200 && hi - lo > 1e-14; ++i) {
        double mid = 0.5 * (lo + hi);
        if (truncated_mean(std::exp(mid)) < mean)
            lo = mid;
        else
            hi = mid;
    }
    return ModelKind::poisson(std::exp(0.5 * (lo + hi)));
}

double tail_loglik(const Tail& tail, const TailModel& model) {
    double ll = 0.0;
    for (std::size_t i = tail.begin; i < tail.t.value.size(); ++i) ll += tail.t.count[i] * model.log_pmf(tail.t.value[i]);
    return ll;
}

struct Objective2 {
    double value = kInf;
    std::array<double, 2> grad{0.0, 0.0};
};

// Damped Newton minimization in two dimensions. The Hessian is taken from
// forward differences of the analytic gradient; a Levenberg term keeps the
// step a descent direction.
template <typename F>
std::array<double, 2> damped_newton(F&& f, std::array<double, 2> x) {
    Objective2 cur = f(x);
    if (!std::isfinite(cur.value)) return x;
    double damping = 1e-3;
    for (int iter = 0; iter < 200; ++iter) {
        std::array<std::array<double, 2>, 2> h{};
        for (int j = 0; j < 2; ++j) {
            double step = 1e-6 * std::max(1.0, std::abs(x[j]));
            auto xp = x;
            xp[j] += step;
            auto gp = f(xp);
            if (!std::isfinite(gp.value)) return x;
            for (int i = 0; i < 2; ++i) h[i][j] = (gp.grad[i] - cur.grad[i]) / step;
        }
        double h01 = 0.5 * (h[0][1] + h[1][0]);
        bool moved = false;
        for (int attempt = 0; attempt < 40; ++attempt) {
            double a = h[0][0] + damping * std::max(1.0, std::abs(h[0][0]));
            double d = h[1][1] + damping * std::max(1.0, std::abs(h[1][1]));
            double det = a * d - h01 * h01;
            if (a > 0 && det > 0) {
                std::array<double, 2> dx{-(d * cur.grad[0] - h01 * cur.grad[1]) / det,
                                         -(a * cur.grad[1] - h01 * cur.grad[0]) / det};
                std::array<double, 2> nx{x[0] + dx[0], x[1] + dx[1]};
                auto next = f(nx);
                if (std::isfinite(next.value) && next.value <= cur.value) {
                    bool done = std::abs(dx[0]) < 1e-10 * (1.0 + std::abs(x[0])) &&
                                std::abs(dx[1]) < 1e-10 * (1.0 + std::abs(x[1]));
                    bool flat = cur.value - next.value < 1e-13 * (1.0 + std::abs(cur.value));
                    x = nx;
                    cur = next;
                    damping = std::max(damping * 0.1, 1e-12);
                    moved = true;
                    if (done || (flat && iter > 0)) return x;
                    break;
                }
            }
            damping *= 10.0;
        }
        if (!moved) return x;
    }
    return x;
}

ModelKind fit_lognormal(const Tail& tail) {
    if (tail.distinct() < 2) fit_error(ModelFamily::LogNormal, "degenerate tail, sigma requires two distinct values");
    const auto& t = tail.t;
    std::size_t k = t.value.size();
    double n = tail.n();
    double mean = t.suffix_log[tail.begin] / n;
    double var = 0.0;
    for (std::size_t i = tail.begin; i < k; ++i) {
        double d = std::log(static_cast<double>(t.value[i])) - mean;
        var += t.count[i] * d * d;
    }
    var /= n;
    double sd = std::max(std::sqrt(var), 0.05);

    // per-distinct-value log boundaries, shared by every objective evaluation
    std::vector<double> lower(k - tail.begin), upper(k - tail.begin);
    for (std::size_t i = tail.begin; i < k; ++i) {
        double x = static_cast<double>(t.value[i]);
        lower[i - tail.begin] = std::log(x - 0.5);
        upper[i - tail.begin] = std::log(x + 0.5);
    }
    double log_boundary = std::log(static_cast<double>(tail.xmin) - 0.5);
    auto log_phi = [](double z) { return -0.5 * z * z - kLogSqrt2Pi; };

    // negative log-likelihood in (mu, log sigma) with its gradient
    auto objective = [&](const std::array<double, 2>& th) {
        Objective2 out;
        double mu = th[0], sigma = std::exp(th[1]);
        if (!(sigma > 1e-6) || !(sigma < 1e6) || std::abs(mu) > 1e6) return out;
        double z0 = (log_boundary - mu) / sigma;
        double lq0 = log_normal_survival(z0);
        double h0 = std::exp(log_phi(z0) - lq0);
        double ll = -n * lq0, d_mu = -n * h0 / sigma, d_s = -n * h0 * z0;
        for (std::size_t i = 0; i < lower.size(); ++i) {
            double c = t.count[tail.begin + i];
            double a = (lower[i] - mu) / sigma, b = (upper[i] - mu) / sigma;
            double lp = log_normal_interval(a, b);
            double wa = std::exp(log_phi(a) - lp), wb = std::exp(log_phi(b) - lp);
            ll += c * lp;
            d_mu += c * (wa - wb) / sigma;
            d_s += c * (a * wa - b * wb);
        }
        if (!std::isfinite(ll) || !std::isfinite(d_mu) || !std::isfinite(d_s)) return out;
        out.value = -ll;
        out.grad = {-d_mu, -d_s};
        return out;
    };
    auto th = damped_newton(objective, {mean, std::log(sd)});
    return ModelKind::lognormal(th[0], std::exp(th[1]));
}

ModelKind fit_family(const Tail& tail, ModelFamily family) {
    if (tail.n() < 2) fit_error(family, "tail has fewer than two points");
    switch (family) {
        case ModelFamily::PowerLaw: return fit_power_law(tail);
        case ModelFamily::LogNormal: return fit_lognormal(tail);
        case ModelFamily::Exponential: return fit_exponential(tail);
        case ModelFamily::Poisson: return fit_poisson(tail);
    }
    fit_error(family, "unknown family");
}

double tail_ks(const Tail& tail, const TailModel& model) {
    const auto& t = tail.t;
    double n = tail.n();
    double cum = 0.0, d = 0.0;
    for (std::size_t i = tail.begin; i < t.value.size(); ++i) {
        std::uint64_t x = t.value[i];
        // empirical CDF is flat on [previous value, x); the model CDF rises, so
        // compare just before the jump and just after it.
        if (x > tail.xmin) d = std::max(d, std::abs(cum / n - model.cdf(x - 1)));
        cum += t.count[i];
        d = std::max(d, std::abs(cum / n - model.cdf(x)));
    }
    return std::min(1.0, d);
}

FitResult fit_tail(const Tail& tail, ModelFamily family) {
    FitResult r;
    r.model = fit_family(tail, family);
    r.xmin = tail.xmin;
    r.n_tail = static_cast<std::size_t>(tail.n());
    TailModel model(r.model, tail.xmin);
    r.ks = tail_ks(tail, model);
    r.loglik = tail_loglik(tail, model);
    return r;
}

FitResult fit_tally(const Tally& tally, ModelFamily family, std::optional<std::uint64_t> xmin_override) {
    if (tally.suffix_n[0] < 2) throw ParameterError("fitting needs at least two sample values");
    if (xmin_override) {
        // below the sample minimum is fine: the whole sample is the tail
        if (*xmin_override == 0 || *xmin_override > tally.value.back())
            throw ParameterError("xmin override " + std::to_string(*xmin_override) + " outside the sample range");
        Tail tail{tally, tally.first_at_least(*xmin_override), *xmin_override};
        auto r = fit_tail(tail, family);
        if (r.n_tail < kSmallTailWarning)
            r.warnings.push_back("tail has only " + std::to_string(r.n_tail) + " points");
        return r;
    }
    std::optional<FitResult> best;
    std::string last_error;
    for (std::size_t i = 0; i < tally.value.size() && tally.suffix_n[i] >= 2; ++i) {
        try {
            auto r = fit_tail(Tail{tally, i, tally.value[i]}, family);
            if (!best || r.ks < best->ks) best = std::move(r);
        } catch (const FitError& e) {
            last_error = e.what();
        } catch (const ParameterError& e) {
            last_error = e.what();
        }
    }
    if (!best)
        throw FitError(last_error.empty() ? std::string(to_string(family)) + " fit failed: no usable xmin" : last_error);
    if (best->n_tail < kSmallTailWarning)
        best->warnings.push_back("chosen tail has only " + std::to_string(best->n_tail) + " points");
    return *best;
}

}  // namespace

double power_law_alpha_approx(std::span<const std::uint64_t> tail, std::uint64_t xmin) {
    if (tail.empty() || xmin == 0) throw ParameterError("power-law estimate needs a non-empty tail and xmin >= 1");
    double denom = 0.0;
    for (auto x : tail) denom += std::log(static_cast<double>(x) / (static_cast<double>(xmin) - 0.5));
    return 1.0 + static_cast<double>(tail.size()) / denom;
}

FitResult fit_model(const DegreeSample& sample, ModelFamily family, std::optional<std::uint64_t> xmin_override) {
    return fit_tally(Tally(sample.values), family, xmin_override);
}

double ks_distance(const DegreeSample& sample, const TailModel& model) {
    Tally tally(sample.values);
    Tail tail{tally, tally.first_at_least(model.xmin()), model.xmin()};
    if (tail.n() == 0) throw ParameterError("no sample values at or above xmin");
    return tail_ks(tail, model);
}

// ---------------------------------------------------------------------------
// Goodness of fit

GofResult goodness_of_fit(const DegreeSample& sample, const FitResult& fit, int n_sims, std::uint64_t seed,
                          const GofOptions& options) {
    if (n_sims < 100) throw ParameterError("goodness_of_fit needs at least 100 simulations");
    std::vector<std::uint64_t> below;
    for (auto v : sample.values)
        if (v < fit.xmin) below.push_back(v);
    std::sort(below.begin(), below.end());
    std::size_t n = sample.values.size();
    double tail_share = static_cast<double>(n - below.size()) / static_cast<double>(n);

    TailModel model(fit.model, fit.xmin);
    TailSampler sampler(model);
    std::vector<double> synthetic_ks(static_cast<std::size_t>(n_sims), 1.0);
    std::vector<char> failed(static_cast<std::size_t>(n_sims), 0);

    parallel_for(static_cast<std::size_t>(n_sims), options.workers, [&](std::size_t r) {
        Rng rng(derive_seed(seed, r));
        std::vector<std::uint64_t> data;
        data.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (below.empty() || rng.uniform() < tail_share)
                data.push_back(sampler.draw(rng));
            else
                data.push_back(below[rng.below(below.size())]);
        }
        try {
            Tally tally(std::move(data));
            auto refit = fit_tally(tally, fit.model.family,
                                   options.pin_xmin ? std::optional<std::uint64_t>(fit.xmin) : std::nullopt);
            synthetic_ks[r] = refit.ks;
        } catch (const Error&) {
            failed[r] = 1;
        }
    });

    GofResult g;
    g.n_sims = n_sims;
    g.seed = seed;
    g.observed_ks = fit.ks;
    int hits = 0;
    for (std::size_t r = 0; r < synthetic_ks.size(); ++r) {
        if (synthetic_ks[r] >= fit.ks) ++hits;
        g.failed_refits += failed[r];
    }
    g.p_value = static_cast<double>(hits) / n_sims;
    return g;
}

// ---------------------------------------------------------------------------
// Vuong

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::FirstFavored: return "first_favored";
        case Verdict::SecondFavored: return "second_favored";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

std::string_view to_string(CommonTail t) { return t == CommonTail::Lower ? "lower" : "upper"; }

CommonTail parse_common_tail(std::string_view s) {
    auto f = text::casefold(text::trim(s));
    if (f == "lower") return CommonTail::Lower;
    if (f == "upper") return CommonTail::Upper;
    throw ParameterError("unknown common tail '" + std::string(s) + "', expected lower or upper");
}

VuongResult vuong_compare(const DegreeSample& sample, const FitResult& a, const FitResult& b, double significance,
                          CommonTail common) {
    std::uint64_t xmin = common == CommonTail::Lower ? std::min(a.xmin, b.xmin) : std::max(a.xmin, b.xmin);
    Tally tally(sample.values);
    Tail tail{tally, tally.first_at_least(xmin), xmin};
    if (tail.n() < 2) throw ParameterError("common tail x >= " + std::to_string(xmin) + " has fewer than two points");

    VuongResult r;
    // a family that cannot be refit on the common tail keeps its own parameters
    auto refit = [&](const FitResult& f) {
        try {
            return fit_family(tail, f.model.family);
        } catch (const FitError& e) {
            r.diagnostic += std::string(r.diagnostic.empty() ? "" : "; ") + e.what() + ", original parameters kept";
            return f.model;
        }
    };
    TailModel ma(refit(a), xmin);
    TailModel mb(refit(b), xmin);

    r.xmin = xmin;
    r.n_common = static_cast<std::size_t>(tail.n());
    double n = tail.n();
    double sum = 0.0, sum_sq = 0.0;
    std::vector<double> diffs;
    for (std::size_t i = tail.begin; i < tally.value.size(); ++i) {
        double l = ma.log_pmf(tally.value[i]) - mb.log_pmf(tally.value[i]);
        diffs.push_back(l);
        sum += tally.count[i] * l;
    }
    double mean = sum / n;
    for (std::size_t i = tail.begin; i < tally.value.size(); ++i) {
        double d = diffs[i - tail.begin] - mean;
        sum_sq += tally.count[i] * d * d;
    }
    r.log_lr = sum;
    double sd = std::sqrt(sum_sq / n);
    if (!(sd > 1e-12 * (1.0 + std::abs(mean)))) {
        r.diagnostic += std::string(r.diagnostic.empty() ? "" : "; ") + "pointwise log-likelihood ratios have zero variance";
        r.normalized_stat = 0.0;
        r.p_value = 1.0;
        r.verdict = Verdict::Inconclusive;
        return r;
    }
    r.normalized_stat = sum / (sd * std::sqrt(n));
    r.p_value = std::erfc(std::abs(r.normalized_stat) / std::sqrt(2.0));
    if (r.p_value > significance)
        r.verdict = Verdict::Inconclusive;
    else
        r.verdict = r.log_lr > 0 ? Verdict::FirstFavored : Verdict::SecondFavored;
    return r;
}

// ---------------------------------------------------------------------------
// Model selection

SelectionReport select_best(const DegreeSample& sample, const std::vector<ModelFamily>& families,
                            const SelectConfig& config) {
    if (families.size() < 2) throw ParameterError("model selection needs at least two families");
    SelectionReport report;
    report.config = config;
    for (std::size_t i = 0; i < families.size(); ++i) {
        FamilyReport fr{families[i], std::nullopt, std::nullopt, {}};
        try {
            fr.fit = fit_model(sample, families[i]);
            fr.gof = goodness_of_fit(sample, *fr.fit, config.n_sims, derive_seed(config.seed, i),
                                     GofOptions{config.pin_xmin, config.workers});
            if (fr.gof->p_value >= config.significance) report.plausible.push_back(families[i]);
        } catch (const Error& e) {
            fr.error = e.what();
        }
        report.families.push_back(std::move(fr));
    }
    std::vector<int> wins(families.size(), 0);
    for (std::size_t i = 0; i < families.size(); ++i) {
        for (std::size_t j = i + 1; j < families.size(); ++j) {
            Comparison c{families[i], families[j], std::nullopt, {}};
            const auto& fi = report.families[i].fit;
            const auto& fj = report.families[j].fit;
            if (!fi || !fj) {
                c.error = "missing fit";
            } else {
                try {
                    c.result = vuong_compare(sample, *fi, *fj, config.significance, config.common_tail);
                    if (c.result->verdict == Verdict::FirstFavored) ++wins[i];
                    if (c.result->verdict == Verdict::SecondFavored) ++wins[j];
                } catch (const Error& e) {
                    c.error = e.what();
                }
            }
            report.comparisons.push_back(std::move(c));
        }
    }
    for (std::size_t i = 0; i < families.size(); ++i)
        if (wins[i] == static_cast<int>(families.size()) - 1) report.best = families[i];
    return report;
}

nlohmann::ordered_json SelectionReport::to_json() const {
    nlohmann::ordered_json out;
    nlohmann::ordered_json fams = nlohmann::ordered_json::object();
    for (const auto& f : families) {
        nlohmann::ordered_json e;
        if (f.fit) {
            e["params"] = f.fit->model.params_json();
            e["xmin"] = f.fit->xmin;
            e["n_tail"] = f.fit->n_tail;
            e["ks"] = f.fit->ks;
            e["loglik"] = f.fit->loglik;
            e["warnings"] = f.fit->warnings;
        }
        if (f.gof) {
            e["gof_p"] = f.gof->p_value;
            e["n_sims"] = f.gof->n_sims;
            e["seed"] = f.gof->seed;
            e["failed_refits"] = f.gof->failed_refits;
        }
        if (!f.error.empty()) e["error"] = f.error;
        fams[std::string(to_string(f.family))] = e;
    }
    out["families"] = fams;
    nlohmann::ordered_json comps = nlohmann::ordered_json::array();
    for (const auto& c : comparisons) {
        nlohmann::ordered_json e;
        e["a"] = to_string(c.first);
        e["b"] = to_string(c.second);
        if (c.result) {
            e["log_lr"] = c.result->log_lr;
            e["stat"] = c.result->normalized_stat;
            e["p"] = c.result->p_value;
            e["verdict"] = to_string(c.result->verdict);
            e["xmin"] = c.result->xmin;
            e["n_common"] = c.result->n_common;
            if (!c.result->diagnostic.empty()) e["diagnostic"] = c.result->diagnostic;
        } else {
            e["error"] = c.error;
        }
        comps.push_back(e);
    }
    out["comparisons"] = comps;
    out["best"] = best ? nlohmann::ordered_json(to_string(*best)) : nlohmann::ordered_json(nullptr);
    nlohmann::ordered_json plaus = nlohmann::ordered_json::array();
    for (auto f : plausible) plaus.push_back(to_string(f));
    out["plausible"] = plaus;
    out["config"] = {{"n_sims", config.n_sims},
                     {"seed", config.seed},
                     {"significance", config.significance},
                     {"pin_xmin", config.pin_xmin},
                     {"common_tail", to_string(config.common_tail)}};
    return out;
}

std::string SelectionReport::ccdf_csv(const DegreeSample& sample) const {
    Tally tally(sample.values);
    double n = tally.suffix_n.empty() ? 0.0 : tally.suffix_n[0];
    std::ostringstream out;
    out.precision(6);
    out << "x,empirical";
    std::vector<std::pair<TailModel, double>> models;
    for (const auto& f : families) {
        if (!f.fit) continue;
        out << ',' << to_string(f.family);
        models.emplace_back(TailModel(f.fit->model, f.fit->xmin), static_cast<double>(f.fit->n_tail) / n);
    }
    out << '\n';
    for (std::size_t i = 0; i < tally.value.size(); ++i) {
        auto x = tally.value[i];
        out << x << ',' << tally.suffix_n[i] / n;
        for (const auto& [m, share] : models) {
            out << ',';
            if (x >= m.xmin()) out << share * m.ccdf(x);
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace socialscope
