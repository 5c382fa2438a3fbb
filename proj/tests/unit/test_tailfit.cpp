#include <cmath>
#include <numbers>

#include "doctest.h"
#include "socialscope/errors.hpp"
#include "socialscope/random.hpp"
#include "socialscope/tailfit.hpp"

using namespace socialscope;

namespace {

double direct_zeta(double s, double a) {
    // plain partial sum plus the integral tail estimate
    double sum = 0.0;
    const int terms = 200000;
    for (int k = 0; k < terms; ++k) sum += std::pow(k + a, -s);
    double x = terms + a;
    return sum + std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s);
}

double power_law_loglik(const std::vector<std::uint64_t>& xs, std::uint64_t xmin, double alpha) {
    double ll = 0.0;
    double z = std::log(direct_zeta(alpha, static_cast<double>(xmin)));
    for (auto x : xs)
        if (x >= xmin) ll += -alpha * std::log(static_cast<double>(x)) - z;
    return ll;
}

}  // namespace

TEST_CASE("special functions") {
    CHECK(hurwitz_zeta(2.0, 1.0) == doctest::Approx(std::numbers::pi * std::numbers::pi / 6).epsilon(1e-12));
    CHECK(hurwitz_zeta(4.0, 1.0) == doctest::Approx(std::pow(std::numbers::pi, 4) / 90).epsilon(1e-12));
    for (double s : {1.3, 2.0, 2.5, 3.7})
        for (double a : {1.0, 2.0, 7.0, 40.0}) {
            CHECK(hurwitz_zeta(s, a) - hurwitz_zeta(s, a + 1) == doctest::Approx(std::pow(a, -s)).epsilon(1e-9));
            CHECK(hurwitz_zeta(s, a) == doctest::Approx(direct_zeta(s, a)).epsilon(1e-7));
        }
    CHECK_THROWS_AS(hurwitz_zeta(1.0, 1.0), ParameterError);

    for (double z : {-5.0, -1.0, 0.0, 0.5, 3.0, 8.0})
        CHECK(log_normal_survival(z) == doctest::Approx(std::log(0.5 * std::erfc(z / std::sqrt(2.0)))).epsilon(1e-10));
    CHECK(std::isfinite(log_normal_survival(60.0)));
    CHECK(log_normal_survival(60.0) < -1700.0);

    for (double lambda : {0.3, 3.0, 25.0})
        for (std::uint64_t k : {0u, 1u, 2u, 5u, 30u}) {
            double tail = 0.0;
            for (std::uint64_t x = k; x < k + 400; ++x)
                tail += std::exp(-lambda + x * std::log(lambda) - std::lgamma(x + 1.0));
            CHECK(log_poisson_survival(k, lambda) == doctest::Approx(std::log(tail)).epsilon(1e-9));
        }
}

TEST_CASE("tail models are normalized and consistent") {
    std::vector<std::pair<ModelKind, std::uint64_t>> models = {
        {ModelKind::power_law(2.5), 1},   {ModelKind::power_law(3.2), 6},   {ModelKind::lognormal(1.0, 1.0), 1},
        {ModelKind::lognormal(0.0, 2.0), 3}, {ModelKind::exponential(0.3), 2}, {ModelKind::poisson(3.0), 1},
        {ModelKind::poisson(12.0), 10}};
    for (const auto& [kind, xmin] : models) {
        TailModel m(kind, xmin);
        CHECK(m.pmf(xmin - 1) == 0.0);
        CHECK(m.ccdf(xmin) == doctest::Approx(1.0));
        double mass = 0.0;
        for (std::uint64_t x = xmin; x < xmin + 2000; ++x) {
            mass += m.pmf(x);
            CHECK(m.ccdf(x) - m.ccdf(x + 1) == doctest::Approx(m.pmf(x)).epsilon(1e-8).scale(1e-12));
        }
        CHECK(mass + m.ccdf(xmin + 2000) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(m.cdf(xmin + 3) + m.ccdf(xmin + 4) == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(TailModel(ModelKind::power_law(1.0), 1), ParameterError);
    CHECK_THROWS_AS(TailModel(ModelKind::lognormal(0.0, 0.0), 1), ParameterError);
    CHECK_THROWS_AS(TailModel(ModelKind::poisson(2.0), 0), ParameterError);
}

TEST_CASE("degree samples") {
    CHECK(DegreeSample::parse("3\n1\n\n4\n").values == std::vector<std::uint64_t>{3, 1, 4});
    CHECK_THROWS_AS(DegreeSample::parse("3\nx\n"), ParameterError);
    CHECK_THROWS_AS(DegreeSample::make({1, 0}), ParameterError);
    std::vector<std::size_t> degs = {0, 2, 0, 5};
    CHECK(DegreeSample::from_degrees(degs).values == std::vector<std::uint64_t>{2, 5});
}

TEST_CASE("sample_model reproduces the model") {
    auto p = sample_model(ModelKind::poisson(3.0), 1, 100000, 4);
    double mean = 0.0;
    for (auto v : p.values) mean += static_cast<double>(v);
    mean /= static_cast<double>(p.size());
    // zero-truncated Poisson(3) mean
    double expected = 3.0 / (1.0 - std::exp(-3.0));
    CHECK(std::abs(mean - expected) / expected < 0.01);

    TailModel pl(ModelKind::power_law(2.5), 1);
    auto s = sample_model(pl.kind(), 1, 100000, 9);
    CHECK(ks_distance(s, pl) < 0.01);
    TailModel ln(ModelKind::lognormal(1.0, 1.0), 2);
    CHECK(ks_distance(sample_model(ln.kind(), 2, 100000, 10), ln) < 0.01);
    TailModel ex(ModelKind::exponential(0.2), 3);
    CHECK(ks_distance(sample_model(ex.kind(), 3, 100000, 11), ex) < 0.01);

    CHECK(sample_model(pl.kind(), 1, 50, 3).values == sample_model(pl.kind(), 1, 50, 3).values);
    CHECK(sample_model(pl.kind(), 1, 50, 3).values != sample_model(pl.kind(), 1, 50, 4).values);
    CHECK_THROWS_AS(sample_model(pl.kind(), 1, 0, 3), ParameterError);
}

TEST_CASE("closed-form power-law estimate") {
    std::vector<std::uint64_t> xs = {1, 1, 1, 2, 4};
    CHECK(power_law_alpha_approx(xs, 1) == doctest::Approx(1.9017).epsilon(1e-4));
    double sum = 3 * std::log(2.0) + std::log(4.0) + std::log(8.0);
    CHECK(power_law_alpha_approx(xs, 1) == doctest::Approx(1.0 + 5.0 / sum).epsilon(1e-14));
    CHECK_THROWS_AS(power_law_alpha_approx({}, 1), ParameterError);
}

TEST_CASE("power-law MLE maximizes the likelihood") {
    auto s = sample_model(ModelKind::power_law(2.3), 1, 3000, 21);
    auto fit = fit_model(s, ModelFamily::PowerLaw, std::uint64_t{1});
    double alpha = fit.model.first;
    double best = power_law_loglik(s.values, 1, alpha);
    CHECK(fit.loglik == doctest::Approx(best).epsilon(1e-7));
    for (double d : {-0.01, -0.001, 0.001, 0.01}) CHECK(power_law_loglik(s.values, 1, alpha + d) < best);
    CHECK(fit.n_tail == s.size());
}

TEST_CASE("exponential and lognormal fits are local maxima") {
    auto s = sample_model(ModelKind::exponential(0.25), 2, 4000, 5);
    auto fe = fit_model(s, ModelFamily::Exponential, std::uint64_t{2});
    // discrete geometric MLE: lambda = log(1 + 1 / (mean - xmin))
    double mean = 0.0;
    for (auto v : s.values) mean += static_cast<double>(v);
    mean /= static_cast<double>(s.size());
    CHECK(fe.model.first == doctest::Approx(std::log1p(1.0 / (mean - 2.0))).epsilon(1e-12));

    auto l = sample_model(ModelKind::lognormal(1.5, 0.8), 1, 4000, 6);
    auto fl = fit_model(l, ModelFamily::LogNormal, std::uint64_t{1});
    auto ll = [&](double mu, double sigma) {
        TailModel m(ModelKind::lognormal(mu, sigma), 1);
        double t = 0.0;
        for (auto v : l.values) t += m.log_pmf(v);
        return t;
    };
    double at = ll(fl.model.first, fl.model.second);
    CHECK(fl.loglik == doctest::Approx(at).epsilon(1e-9));
    for (auto [dm, ds] : {std::pair{0.005, 0.0}, {-0.005, 0.0}, {0.0, 0.005}, {0.0, -0.005}})
        CHECK(ll(fl.model.first + dm, fl.model.second + ds) < at);
    CHECK(fl.model.first == doctest::Approx(1.5).epsilon(0.05));
    CHECK(fl.model.second == doctest::Approx(0.8).epsilon(0.05));
}

TEST_CASE("poisson fit") {
    auto s = sample_model(ModelKind::poisson(6.0), 1, 20000, 8);
    auto f = fit_model(s, ModelFamily::Poisson, std::uint64_t{1});
    CHECK(f.model.first == doctest::Approx(6.0).epsilon(0.02));

    // all values equal k: the fit is truncated at xmin, so with xmin = 1 the MLE
    // solves lambda / (1 - exp(-lambda)) = k, which tends to k
    for (std::uint64_t k : {3u, 8u, 20u}) {
        auto eq = DegreeSample::make(std::vector<std::uint64_t>(50, k));
        auto fk = fit_model(eq, ModelFamily::Poisson, std::uint64_t{1});
        double lambda = fk.model.first;
        CHECK(lambda / (-std::expm1(-lambda)) == doctest::Approx(static_cast<double>(k)).epsilon(1e-9));
        if (k == 20) CHECK(lambda == doctest::Approx(20.0).epsilon(1e-8));
        // with xmin scanned, the only candidate leaves a degenerate tail
        CHECK_THROWS_AS(fit_model(eq, ModelFamily::Poisson), FitError);
    }
}

TEST_CASE("fit errors and xmin scan") {
    CHECK_THROWS_AS(fit_model(DegreeSample::make({4}), ModelFamily::PowerLaw), ParameterError);
    CHECK_THROWS_AS(fit_model(DegreeSample::make({1, 2, 3}), ModelFamily::PowerLaw, std::uint64_t{9}), ParameterError);
    try {
        fit_model(DegreeSample::make({5, 5, 5}), ModelFamily::Exponential);
        FAIL("expected FitError");
    } catch (const FitError& e) {
        CHECK(std::string(e.what()).find("exponential") != std::string::npos);
    }
    // power law above 10 with uniform noise below: the scan should land near 10
    Rng rng(12);
    std::vector<std::uint64_t> v;
    for (int i = 0; i < 3000; ++i) v.push_back(1 + rng.below(9));
    auto tail = sample_model(ModelKind::power_law(2.5), 10, 3000, 13);
    v.insert(v.end(), tail.values.begin(), tail.values.end());
    auto f = fit_model(DegreeSample::make(v), ModelFamily::PowerLaw);
    CHECK(f.xmin >= 8);
    CHECK(f.xmin <= 14);
    CHECK(f.model.first == doctest::Approx(2.5).epsilon(0.06));
}

TEST_CASE("goodness_of_fit is seeded and worker independent") {
    auto s = sample_model(ModelKind::power_law(2.5), 1, 500, 31);
    auto f = fit_model(s, ModelFamily::PowerLaw);
    auto a = goodness_of_fit(s, f, 100, 77, GofOptions{false, 1});
    auto b = goodness_of_fit(s, f, 100, 77, GofOptions{false, 3});
    CHECK(a.p_value == b.p_value);
    CHECK(a.n_sims == 100);
    CHECK(a.observed_ks == f.ks);
    CHECK(a.p_value >= 0.0);
    CHECK(a.p_value <= 1.0);
    auto pinned = goodness_of_fit(s, f, 100, 77, GofOptions{true, 1});
    CHECK(pinned.p_value >= 0.0);
    CHECK_THROWS_AS(goodness_of_fit(s, f, 99, 1), ParameterError);

    // exponential data is not a power law
    auto e = sample_model(ModelKind::exponential(0.1), 1, 2000, 3);
    auto fe = fit_model(e, ModelFamily::PowerLaw, std::uint64_t{1});
    CHECK(goodness_of_fit(e, fe, 100, 5, GofOptions{true, 0}).p_value < 0.05);
}

TEST_CASE("vuong symmetry") {
    auto s = sample_model(ModelKind::lognormal(1.0, 1.0), 1, 2000, 41);
    auto pl = fit_model(s, ModelFamily::PowerLaw);
    auto ln = fit_model(s, ModelFamily::LogNormal);
    auto self = vuong_compare(s, pl, pl);
    CHECK(self.log_lr == 0.0);
    CHECK(self.verdict == Verdict::Inconclusive);
    for (auto tail : {CommonTail::Lower, CommonTail::Upper}) {
        auto ab = vuong_compare(s, pl, ln, 0.1, tail);
        auto ba = vuong_compare(s, ln, pl, 0.1, tail);
        CHECK(ab.log_lr == doctest::Approx(-ba.log_lr).epsilon(1e-12));
        CHECK(ab.p_value == doctest::Approx(ba.p_value).epsilon(1e-12));
        CHECK(ab.xmin == ba.xmin);
        CHECK(ab.xmin == (tail == CommonTail::Lower ? std::min(pl.xmin, ln.xmin) : std::max(pl.xmin, ln.xmin)));
    }
    CHECK(parse_common_tail("Upper") == CommonTail::Upper);
    CHECK_THROWS_AS(parse_common_tail("middle"), ParameterError);
    CHECK(parse_model_family("lognormal") == ModelFamily::LogNormal);
    CHECK_THROWS_AS(parse_model_family("gamma"), ParameterError);
}

TEST_CASE("select_best") {
    auto s = sample_model(ModelKind::power_law(2.5), 1, 2000, 51);
    SelectConfig cfg;
    cfg.n_sims = 100;
    cfg.seed = 3;
    CHECK_THROWS_AS(select_best(s, {ModelFamily::PowerLaw}, cfg), ParameterError);
    auto r = select_best(s, {ModelFamily::PowerLaw, ModelFamily::Exponential, ModelFamily::Poisson}, cfg);
    CHECK(r.families.size() == 3);
    CHECK(r.comparisons.size() == 3);
    REQUIRE(r.best);
    CHECK(*r.best == ModelFamily::PowerLaw);
    auto j = r.to_json();
    CHECK(j.contains("families"));
    CHECK(r.ccdf_csv(s).rfind("x,", 0) == 0);
    auto again = select_best(s, {ModelFamily::PowerLaw, ModelFamily::Exponential, ModelFamily::Poisson}, cfg);
    CHECK(again.to_json().dump() == j.dump());
}
