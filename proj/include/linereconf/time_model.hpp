#pragma once

#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace linereconf {

enum class TimeModelKind { Constant, TruncNormal, LogNormal, Empirical };

std::string_view to_string(TimeModelKind kind);
TimeModelKind time_model_kind_from_string(std::string_view s);

/// Distribution of one agent's duration for one operation, in seconds.
///
/// `mean` and `sd` are the parameters of the underlying distribution; for
/// TruncNormal the distribution is a normal truncated at zero, so expected()
/// is slightly larger than `mean` when sd/mean is large. Empirical models
/// resample uniformly from `samples`.
class TimeModel {
public:
    static TimeModel constant(double seconds);
    static TimeModel trunc_normal(double mean, double sd);
    static TimeModel log_normal(double mean, double sd);
    static TimeModel empirical(std::vector<double> samples);

    TimeModelKind kind() const noexcept { return kind_; }
    double mean_param() const noexcept { return mean_; }
    double sd_param() const noexcept { return sd_; }
    const std::vector<double>& samples() const noexcept { return samples_; }

    double expected() const;
    double stddev() const;

    // Mean and sd both scale by `factor`, so the coefficient of variation is kept.
    TimeModel scaled(double factor) const;

    double sample(std::mt19937_64& rng) const;

    friend bool operator==(const TimeModel&, const TimeModel&) = default;

private:
    TimeModel(TimeModelKind kind, double mean, double sd, std::vector<double> samples);

    TimeModelKind kind_ = TimeModelKind::Constant;
    double mean_ = 0.0;
    double sd_ = 0.0;
    std::vector<double> samples_;
};

}  // namespace linereconf
