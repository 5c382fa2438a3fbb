#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "socialscope/random.hpp"

namespace socialscope {

/// Hurwitz zeta function sum_{k>=0} (k + a)^-s for s > 1, a > 0.
double hurwitz_zeta(double s, double a);

/// log of the standard normal survival function Q(z) = P(Z > z), accurate far
/// into both tails.
double log_normal_survival(double z);

/// log P(X >= k) for X ~ Poisson(lambda).
double log_poisson_survival(std::uint64_t k, double lambda);

enum class ModelFamily { PowerLaw, LogNormal, Exponential, Poisson };

std::string_view to_string(ModelFamily f);
/// "power_law", "lognormal", "exponential", "poisson". Throws ParameterError.
ModelFamily parse_model_family(std::string_view s);

/// A model family with its parameters: PowerLaw(alpha), LogNormal(mu, sigma),
/// Exponential(lambda), Poisson(lambda).
struct ModelKind {
    ModelFamily family = ModelFamily::PowerLaw;
    double first = 0.0;
    double second = 0.0;

    static ModelKind power_law(double alpha);
    static ModelKind lognormal(double mu, double sigma);
    static ModelKind exponential(double lambda);
    static ModelKind poisson(double lambda);

    /// Throws ParameterError unless alpha > 1, sigma > 0, lambda > 0.
    void validate() const;
    nlohmann::ordered_json params_json() const;
};

/// Discrete model restricted to x >= xmin and renormalized there. Lognormal and
/// exponential use the continuous CDF differenced at half-integers.
class TailModel {
public:
    TailModel(ModelKind kind, std::uint64_t xmin);

    const ModelKind& kind() const { return kind_; }
    std::uint64_t xmin() const { return xmin_; }

    double log_pmf(std::uint64_t x) const;
    double pmf(std::uint64_t x) const;
    /// P(X >= x); 1 for x <= xmin.
    double ccdf(std::uint64_t x) const;
    /// P(X <= x); 0 for x < xmin.
    double cdf(std::uint64_t x) const;

private:
    double log_ccdf(std::uint64_t x) const;

    ModelKind kind_;
    std::uint64_t xmin_;
    double log_norm_ = 0.0;
};

/// Inverse-transform sampler for a TailModel; tables are built once.
class TailSampler {
public:
    explicit TailSampler(const TailModel& model);
    std::uint64_t draw(Rng& rng) const;

private:
    std::uint64_t draw_power_law(double u) const;

    TailModel model_;
    double log_q0_ = 0.0;               // lognormal: log Q at the lower boundary
    std::vector<double> ccdf_table_;    // power law: ccdf(xmin + i)
    std::vector<double> cdf_table_;     // poisson: cdf(xmin + i)
};

/// Positive integers; zero degrees are stripped before fitting.
struct DegreeSample {
    std::vector<std::uint64_t> values;

    /// Throws ParameterError on a zero value.
    static DegreeSample make(std::vector<std::uint64_t> values);
    /// Drops zeros.
    static DegreeSample from_degrees(std::span<const std::size_t> degrees);
    /// One integer per line.
    static DegreeSample parse(std::string_view content);

    std::size_t size() const { return values.size(); }
};

/// i.i.d. draws from the model truncated to x >= xmin.
DegreeSample sample_model(const ModelKind& kind, std::uint64_t xmin, std::size_t n, std::uint64_t seed);

struct FitResult {
    ModelKind model;
    std::uint64_t xmin = 1;
    std::size_t n_tail = 0;
    double ks = 0.0;
    double loglik = 0.0;
    std::vector<std::string> warnings;
};

/// Tails smaller than this trigger a warning on the chosen fit.
inline constexpr std::size_t kSmallTailWarning = 50;

/// Closed-form discrete power-law estimate 1 + n / sum ln(x / (xmin - 1/2)).
double power_law_alpha_approx(std::span<const std::uint64_t> tail, std::uint64_t xmin);

/// Maximum likelihood fit. Without an override, every distinct sample value with
/// at least two points at or above it is tried as xmin and the one minimizing
/// the KS distance wins. Throws FitError (naming the model) or ParameterError.
FitResult fit_model(const DegreeSample& sample, ModelFamily family, std::optional<std::uint64_t> xmin_override = {});

/// KS distance between the empirical CDF of the values >= model.xmin() and the model.
double ks_distance(const DegreeSample& sample, const TailModel& model);

struct GofOptions {
    /// Keep xmin fixed in replicates instead of rescanning.
    bool pin_xmin = false;
    unsigned workers = 0;
};

struct GofResult {
    double p_value = 0.0;
    int n_sims = 0;
    std::uint64_t seed = 0;
    double observed_ks = 0.0;
    /// Replicates whose refit failed; they count as KS = 1.
    int failed_refits = 0;
};

/// Semi-parametric bootstrap p-value. Throws ParameterError for n_sims < 100.
GofResult goodness_of_fit(const DegreeSample& sample, const FitResult& fit, int n_sims, std::uint64_t seed,
                          const GofOptions& options = {});

enum class Verdict { FirstFavored, SecondFavored, Inconclusive };

std::string_view to_string(Verdict v);

struct VuongResult {
    double log_lr = 0.0;
    double normalized_stat = 0.0;
    double p_value = 1.0;
    Verdict verdict = Verdict::Inconclusive;
    std::uint64_t xmin = 1;
    std::size_t n_common = 0;
    std::string diagnostic;
};

inline constexpr double kDefaultSignificance = 0.1;

/// Where the two models are compared. Lower uses x >= min(xmin_a, xmin_b), so
/// the model with the larger xmin is extended down to the other's; Upper uses
/// x >= max(xmin_a, xmin_b), the region both fits claim.
enum class CommonTail { Lower, Upper };

std::string_view to_string(CommonTail t);
/// "lower" or "upper". Throws ParameterError.
CommonTail parse_common_tail(std::string_view s);

/// Vuong's normalized log-likelihood-ratio test on the common tail, both models'
/// parameters re-estimated there. Throws ParameterError when fewer than two
/// points are shared.
VuongResult vuong_compare(const DegreeSample& sample, const FitResult& a, const FitResult& b,
                          double significance = kDefaultSignificance, CommonTail tail = CommonTail::Lower);

struct SelectConfig {
    int n_sims = 5000;
    std::uint64_t seed = 1;
    double significance = kDefaultSignificance;
    bool pin_xmin = false;
    unsigned workers = 0;
    CommonTail common_tail = CommonTail::Lower;
};

struct FamilyReport {
    ModelFamily family;
    std::optional<FitResult> fit;
    std::optional<GofResult> gof;
    std::string error;
};

struct Comparison {
    ModelFamily first;
    ModelFamily second;
    std::optional<VuongResult> result;
    std::string error;
};

struct SelectionReport {
    std::vector<FamilyReport> families;
    std::vector<Comparison> comparisons;
    /// Set only when one family is significantly favored over every other family.
    std::optional<ModelFamily> best;
    /// Families whose GoF p-value is at least the significance level.
    std::vector<ModelFamily> plausible;
    SelectConfig config;

    nlohmann::ordered_json to_json() const;
    /// x, empirical CCDF and one model CCDF column per fitted family.
    std::string ccdf_csv(const DegreeSample& sample) const;
};

/// Fits every family, runs the bootstrap for each and all pairwise Vuong tests.
/// Per-family fit failures are recorded in the report. Throws ParameterError
/// for fewer than two families.
SelectionReport select_best(const DegreeSample& sample, const std::vector<ModelFamily>& families,
                            const SelectConfig& config);

}  // namespace socialscope
