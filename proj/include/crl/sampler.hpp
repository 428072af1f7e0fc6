#pragma once

// Context samplers and instance sets. Sampling is seed-deterministic: each
// instance draws from its own substream, so the i-th context of a set does
// not depend on how many other instances exist.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "crl/context.hpp"
#include "crl/rng.hpp"

namespace crl {

enum class SamplerMode { kRelativeNormal, kAbsoluteNormal, kUniform };

inline std::string to_string(SamplerMode m) {
  switch (m) {
    case SamplerMode::kRelativeNormal: return "relative_normal";
    case SamplerMode::kAbsoluteNormal: return "absolute_normal";
    case SamplerMode::kUniform: return "uniform";
  }
  return "?";
}

inline SamplerMode sampler_mode_from_string(const std::string& s) {
  if (s == "relative_normal") return SamplerMode::kRelativeNormal;
  if (s == "absolute_normal") return SamplerMode::kAbsoluteNormal;
  if (s == "uniform") return SamplerMode::kUniform;
  throw std::invalid_argument("unknown sampler mode '" + s + "'");
}

struct SamplerSpec {
  SamplerMode mode = SamplerMode::kRelativeNormal;
  double sigma_rel = 0.0;          // relative mode
  double mu = 0.0, sigma = 0.0;    // absolute mode
  std::vector<std::string> varied_features;
  std::uint64_t seed = 0;

  void check(const ContextSpace& space) const {
    if (varied_features.empty())
      throw std::invalid_argument("sampler: varied_features empty");
    for (const auto& f : varied_features) space.spec(f);
    if (mode == SamplerMode::kRelativeNormal && sigma_rel < 0)
      throw std::invalid_argument("sampler: sigma_rel < 0");
    if (mode == SamplerMode::kAbsoluteNormal && sigma < 0)
      throw std::invalid_argument("sampler: sigma < 0");
  }
};

struct InstanceSet {
  struct Entry {
    int instance_id;
    Context context;
  };
  std::vector<Entry> instances;
  std::vector<double> weights;  // nonnegative, sums to 1

  std::size_t size() const { return instances.size(); }

  void check() const {
    if (weights.size() != instances.size())
      throw std::invalid_argument("instance set: weight/instance length mismatch");
    double sum = 0;
    for (std::size_t i = 0; i < instances.size(); ++i) {
      if (instances[i].instance_id != static_cast<int>(i))
        throw std::invalid_argument("instance ids must be dense from 0");
      if (weights[i] < 0) throw std::invalid_argument("negative weight");
      sum += weights[i];
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("weights must sum to 1");
  }
};

// Draws one context. Unvaried features stay at default; varied features are
// drawn per the spec and clipped into bounds. Categorical features are drawn
// uniformly over their categories under either normal mode.
inline Context sample_context(const ContextSpace& space, const SamplerSpec& spec,
                              Rng& rng) {
  spec.check(space);
  Context ctx = space.default_context();
  for (const auto& name : spec.varied_features) {
    const FeatureSpec& f = space.spec(name);
    double v;
    if (f.kind == FeatureKind::kCategorical &&
        spec.mode != SamplerMode::kUniform) {
      v = static_cast<double>(rng.uniform_int(f.n_categories));
    } else {
      switch (spec.mode) {
        case SamplerMode::kRelativeNormal: {
          if (f.default_value == 0.0)
            throw std::invalid_argument(
                "relative sampling of '" + name +
                "' with zero default: relative std is degenerate, use "
                "absolute_normal");
          v = rng.normal(f.default_value,
                         spec.sigma_rel * std::abs(f.default_value));
          break;
        }
        case SamplerMode::kAbsoluteNormal:
          v = rng.normal(spec.mu, spec.sigma);
          break;
        case SamplerMode::kUniform: {
          if (!std::isfinite(f.lower) || !std::isfinite(f.upper))
            throw std::invalid_argument("uniform sampling of '" + name +
                                        "' needs finite bounds");
          v = rng.uniform(f.lower, f.upper);
          break;
        }
        default:
          throw std::logic_error("unreachable");
      }
    }
    ctx.set(name, v);
  }
  return space.validate(ctx);
}

inline InstanceSet build_instance_set(const ContextSpace& space,
                                      const SamplerSpec& spec, int n) {
  if (n < 1) throw std::invalid_argument("instance set: n must be >= 1");
  spec.check(space);
  InstanceSet set;
  set.instances.reserve(n);
  for (int i = 0; i < n; ++i) {
    Rng rng = Rng::substream(spec.seed, static_cast<std::uint64_t>(i));
    set.instances.push_back({i, sample_context(space, spec, rng)});
  }
  set.weights.assign(n, 1.0 / n);
  set.check();
  return set;
}

// --- serialization: one JSON record per line, header line first -----------

inline void save_instance_set(const InstanceSet& set, const ContextSpace& space,
                              const SamplerSpec& spec, std::ostream& os) {
  nlohmann::json header;
  header["space"] = space.name();
  header["sampler"] = {{"mode", to_string(spec.mode)},
                       {"sigma_rel", spec.sigma_rel},
                       {"mu", spec.mu},
                       {"sigma", spec.sigma},
                       {"varied_features", spec.varied_features}};
  header["seed"] = spec.seed;
  header["n"] = set.size();
  os << header.dump() << "\n";
  for (std::size_t i = 0; i < set.size(); ++i) {
    nlohmann::json rec;
    rec["id"] = set.instances[i].instance_id;
    rec["weight"] = set.weights[i];
    rec["values"] = set.instances[i].context.values();
    os << rec.dump() << "\n";
  }
}

inline void save_instance_set(const InstanceSet& set, const ContextSpace& space,
                              const SamplerSpec& spec, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  save_instance_set(set, space, spec, os);
}

struct LoadedInstanceSet {
  InstanceSet set;
  std::string space_name;
  SamplerSpec spec;
};

inline LoadedInstanceSet load_instance_set(std::istream& is) {
  std::string line;
  if (!std::getline(is, line))
    throw std::runtime_error("instance set file: missing header");
  nlohmann::json header = nlohmann::json::parse(line);
  LoadedInstanceSet out;
  out.space_name = header.at("space").get<std::string>();
  const auto& s = header.at("sampler");
  out.spec.mode = sampler_mode_from_string(s.at("mode").get<std::string>());
  out.spec.sigma_rel = s.at("sigma_rel").get<double>();
  out.spec.mu = s.at("mu").get<double>();
  out.spec.sigma = s.at("sigma").get<double>();
  out.spec.varied_features =
      s.at("varied_features").get<std::vector<std::string>>();
  out.spec.seed = header.at("seed").get<std::uint64_t>();
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    nlohmann::json rec = nlohmann::json::parse(line);
    InstanceSet::Entry e;
    e.instance_id = rec.at("id").get<int>();
    for (const auto& [k, v] : rec.at("values").items())
      e.context.set(k, v.get<double>());
    out.set.instances.push_back(std::move(e));
    out.set.weights.push_back(rec.at("weight").get<double>());
  }
  out.set.check();
  return out;
}

inline LoadedInstanceSet load_instance_set(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return load_instance_set(is);
}

}  // namespace crl
