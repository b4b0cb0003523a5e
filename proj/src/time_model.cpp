#include "linereconf/time_model.hpp"

#include <cmath>
#include <numeric>
#include <utility>

#include "linereconf/error.hpp"

namespace linereconf {
namespace {

constexpr double kInvSqrt2Pi = 0.39894228040143267794;

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }
double normal_sf(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

void require(bool ok, const std::string& msg) {
    if (!ok) throw Error(ErrorKind::InvalidArgument, msg);
}

}  // namespace

std::string_view to_string(TimeModelKind kind) {
    switch (kind) {
    case TimeModelKind::Constant: return "Constant";
    case TimeModelKind::TruncNormal: return "TruncNormal";
    case TimeModelKind::LogNormal: return "LogNormal";
    case TimeModelKind::Empirical: return "Empirical";
    }
    return "Constant";
}

TimeModelKind time_model_kind_from_string(std::string_view s) {
    if (s == "Constant") return TimeModelKind::Constant;
    if (s == "TruncNormal") return TimeModelKind::TruncNormal;
    if (s == "LogNormal") return TimeModelKind::LogNormal;
    if (s == "Empirical") return TimeModelKind::Empirical;
    throw Error(ErrorKind::Parse, "unknown time model kind '" + std::string(s) + "'");
}

TimeModel::TimeModel(TimeModelKind kind, double mean, double sd, std::vector<double> samples)
    : kind_(kind), mean_(mean), sd_(sd), samples_(std::move(samples)) {}

TimeModel TimeModel::constant(double seconds) {
    require(std::isfinite(seconds) && seconds > 0.0, "constant time must be > 0");
    return TimeModel(TimeModelKind::Constant, seconds, 0.0, {});
}

TimeModel TimeModel::trunc_normal(double mean, double sd) {
    require(std::isfinite(mean) && mean > 0.0, "mean must be > 0");
    require(std::isfinite(sd) && sd >= 0.0, "sd must be >= 0");
    return TimeModel(TimeModelKind::TruncNormal, mean, sd, {});
}

TimeModel TimeModel::log_normal(double mean, double sd) {
    require(std::isfinite(mean) && mean > 0.0, "mean must be > 0");
    require(std::isfinite(sd) && sd >= 0.0, "sd must be >= 0");
    return TimeModel(TimeModelKind::LogNormal, mean, sd, {});
}

TimeModel TimeModel::empirical(std::vector<double> samples) {
    require(!samples.empty(), "empirical model needs samples");
    for (double s : samples) require(std::isfinite(s) && s > 0.0, "empirical samples must be > 0");
    const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / samples.size();
    double ss = 0.0;
    for (double s : samples) ss += (s - mean) * (s - mean);
    const double sd = std::sqrt(ss / samples.size());
    return TimeModel(TimeModelKind::Empirical, mean, sd, std::move(samples));
}

double TimeModel::expected() const {
    if (kind_ == TimeModelKind::TruncNormal && sd_ > 0.0) {
        const double alpha = -mean_ / sd_;
        return mean_ + sd_ * normal_pdf(alpha) / normal_sf(alpha);
    }
    return mean_;
}

double TimeModel::stddev() const {
    if (kind_ == TimeModelKind::TruncNormal && sd_ > 0.0) {
        const double alpha = -mean_ / sd_;
        const double lambda = normal_pdf(alpha) / normal_sf(alpha);
        return sd_ * std::sqrt(std::max(0.0, 1.0 + alpha * lambda - lambda * lambda));
    }
    return sd_;
}

TimeModel TimeModel::scaled(double factor) const {
    require(std::isfinite(factor) && factor > 0.0, "scale factor must be > 0");
    if (kind_ == TimeModelKind::Empirical) {
        std::vector<double> s = samples_;
        for (double& v : s) v *= factor;
        return empirical(std::move(s));
    }
    return TimeModel(kind_, mean_ * factor, sd_ * factor, {});
}

double TimeModel::sample(std::mt19937_64& rng) const {
    switch (kind_) {
    case TimeModelKind::Constant:
        return mean_;
    case TimeModelKind::TruncNormal: {
        if (sd_ == 0.0) return mean_;
        std::normal_distribution<double> dist(mean_, sd_);
        for (int i = 0; i < 100; ++i) {
            const double v = dist(rng);
            if (v > 0.0) return v;
        }
        return mean_ / 100.0;
    }
    case TimeModelKind::LogNormal: {
        if (sd_ == 0.0) return mean_;
        const double s2 = std::log1p((sd_ * sd_) / (mean_ * mean_));
        std::lognormal_distribution<double> dist(std::log(mean_) - 0.5 * s2, std::sqrt(s2));
        return dist(rng);
    }
    case TimeModelKind::Empirical: {
        std::uniform_int_distribution<std::size_t> pick(0, samples_.size() - 1);
        return samples_[pick(rng)];
    }
    }
    return mean_;
}

}  // namespace linereconf
