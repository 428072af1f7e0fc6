#pragma once

// Context features, context spaces and concrete contexts. A context space
// describes the named, bounded, typed parameters of one environment family;
// a context is one full assignment of values.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace crl {

enum class FeatureKind { kContinuous, kInteger, kCategorical };

struct FeatureSpec {
  std::string name;
  double default_value = 0.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  FeatureKind kind = FeatureKind::kContinuous;
  int n_categories = 0;  // kCategorical only

  FeatureSpec() = default;
  FeatureSpec(std::string name_, double def, double lo, double hi,
              FeatureKind kind_ = FeatureKind::kContinuous, int n_cat = 0)
      : name(std::move(name_)),
        default_value(def),
        lower(lo),
        upper(hi),
        kind(kind_),
        n_categories(n_cat) {
    if (!(lower <= default_value && default_value <= upper))
      throw std::invalid_argument("FeatureSpec '" + name +
                                  "': default outside bounds");
    if (kind == FeatureKind::kCategorical) {
      if (n_categories < 1)
        throw std::invalid_argument("categorical feature needs n >= 1");
      const double d = default_value;
      if (d != std::floor(d) || d < 0 || d >= n_categories)
        throw std::invalid_argument("categorical default out of range");
    }
  }
};

class Context {
 public:
  Context() = default;

  void set(const std::string& name, double value) { values_[name] = value; }

  bool has(const std::string& name) const { return values_.count(name) > 0; }

  double get(const std::string& name) const {
    auto it = values_.find(name);
    if (it == values_.end())
      throw std::out_of_range("context has no feature '" + name + "'");
    return it->second;
  }

  const std::map<std::string, double>& values() const { return values_; }

  bool operator==(const Context& other) const = default;

 private:
  std::map<std::string, double> values_;
};

struct ValidationReport {
  std::vector<std::string> clipped;   // features moved onto a bound
  std::vector<std::string> rounded;   // integral features rounded
  std::vector<std::string> defaulted; // missing features filled in
  std::vector<std::string> inert_deviations;  // inert features off-default
};

class ContextSpace {
 public:
  ContextSpace() = default;
  ContextSpace(std::string name, std::vector<FeatureSpec> features,
               std::vector<std::string> inert = {})
      : name_(std::move(name)),
        features_(std::move(features)),
        inert_(std::move(inert)) {
    for (std::size_t i = 0; i < features_.size(); ++i) {
      auto [it, inserted] = index_.emplace(features_[i].name, i);
      if (!inserted)
        throw std::invalid_argument("duplicate feature '" + features_[i].name +
                                    "'");
    }
  }

  const std::string& name() const { return name_; }
  const std::vector<FeatureSpec>& features() const { return features_; }
  std::size_t size() const { return features_.size(); }

  bool has(const std::string& feature) const { return index_.count(feature) > 0; }

  const FeatureSpec& spec(const std::string& feature) const {
    auto it = index_.find(feature);
    if (it == index_.end())
      throw std::out_of_range("space '" + name_ + "' has no feature '" +
                              feature + "'");
    return features_[it->second];
  }

  bool is_inert(const std::string& feature) const {
    return std::find(inert_.begin(), inert_.end(), feature) != inert_.end();
  }

  Context default_context() const {
    Context ctx;
    for (const auto& f : features_) ctx.set(f.name, f.default_value);
    return ctx;
  }

  // Clips into bounds, rounds integral kinds, fills missing features from
  // defaults. Unknown names are a hard error.
  Context validate(const Context& ctx, ValidationReport* report = nullptr) const {
    for (const auto& [k, v] : ctx.values()) {
      (void)v;
      if (!has(k))
        throw std::invalid_argument("unknown feature '" + k + "' for space '" +
                                    name_ + "'");
    }
    Context out;
    for (const auto& f : features_) {
      double v;
      if (ctx.has(f.name)) {
        v = ctx.get(f.name);
      } else {
        v = f.default_value;
        if (report) report->defaulted.push_back(f.name);
      }
      double clipped = std::clamp(v, f.lower, f.upper);
      if (clipped != v && report) report->clipped.push_back(f.name);
      v = clipped;
      if (f.kind != FeatureKind::kContinuous) {
        double r = std::round(v);
        r = std::clamp(r, std::ceil(f.lower), std::floor(f.upper));
        if (f.kind == FeatureKind::kCategorical)
          r = std::clamp(r, 0.0, static_cast<double>(f.n_categories - 1));
        if (r != v && report) report->rounded.push_back(f.name);
        v = r;
      }
      if (report && is_inert(f.name) && v != f.default_value)
        report->inert_deviations.push_back(f.name);
      out.set(f.name, v);
    }
    return out;
  }

  // Values in space order, or in the order of the given subset. With
  // normalize, each value is divided by |default| when the default is nonzero.
  std::vector<double> vectorize(const Context& ctx,
                                const std::vector<std::string>* subset = nullptr,
                                bool normalize = false) const {
    std::vector<double> out;
    auto push = [&](const FeatureSpec& f) {
      double v = ctx.has(f.name) ? ctx.get(f.name) : f.default_value;
      if (normalize && f.default_value != 0.0) v /= std::abs(f.default_value);
      out.push_back(v);
    };
    if (subset) {
      out.reserve(subset->size());
      for (const auto& name : *subset) push(spec(name));
    } else {
      out.reserve(features_.size());
      for (const auto& f : features_) push(f);
    }
    return out;
  }

 private:
  std::string name_;
  std::vector<FeatureSpec> features_;
  std::vector<std::string> inert_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace crl
