#include "ecgbench/tsfeat/spec.hpp"

#include <algorithm>
#include <cmath>

#include "ecgbench/errors.hpp"
#include "ecgbench/util/csv.hpp"
#include "ecgbench/util/toml.hpp"

namespace ecgbench::tsfeat {
namespace {

void sort_params(FeatureSpec& spec) {
  std::sort(spec.params.begin(), spec.params.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
}

FeatureSpec make(std::string group,
                 std::vector<std::pair<std::string, ParamValue>> params) {
  FeatureSpec spec{std::move(group), std::move(params)};
  sort_params(spec);
  return spec;
}

}  // namespace

std::string FeatureSpec::name() const {
  std::string out = group;
  for (const auto& [key, value] : params) {
    out += "__" + key + "_";
    if (std::holds_alternative<std::string>(value)) {
      out += std::get<std::string>(value);
    } else {
      out += format_double(std::get<double>(value));
    }
  }
  return out;
}

double FeatureSpec::number(const std::string& key) const {
  for (const auto& [name, value] : params) {
    if (name != key) continue;
    if (!std::holds_alternative<double>(value)) {
      throw SpecError(group + ": parameter '" + key + "' must be numeric");
    }
    return std::get<double>(value);
  }
  throw SpecError(group + ": missing parameter '" + key + "'");
}

long long FeatureSpec::integer(const std::string& key) const {
  const double value = number(key);
  if (std::floor(value) != value || std::abs(value) > 1e15) {
    throw SpecError(group + ": parameter '" + key + "' must be an integer");
  }
  return static_cast<long long>(value);
}

const std::string& FeatureSpec::text(const std::string& key) const {
  for (const auto& [name, value] : params) {
    if (name != key) continue;
    if (!std::holds_alternative<std::string>(value)) {
      throw SpecError(group + ": parameter '" + key + "' must be a string");
    }
    return std::get<std::string>(value);
  }
  throw SpecError(group + ": missing parameter '" + key + "'");
}

const std::vector<std::string>& catalog_groups() {
  static const std::vector<std::string> groups = {
      "fft_coefficient",     "ratio_beyond_r_sigma",
      "autocorrelation",     "energy_ratio_by_chunks",
      "index_mass_quantile", "lempel_ziv_complexity",
      "agg_autocorrelation", "range_count",
      "spkt_welch_density",  "change_quantiles",
      "quantile",            "number_peaks",
      "count_below",         "cwt_coefficients",
      "number_crossing_m",   "maximum",
      "kurtosis",            "skewness",
      "fft_aggregated",      "benford_correlation",
      "binned_entropy",      "count_above"};
  return groups;
}

bool is_catalog_group(const std::string& group) {
  const auto& groups = catalog_groups();
  return std::find(groups.begin(), groups.end(), group) != groups.end();
}

std::vector<FeatureSpec> default_specs() {
  std::vector<FeatureSpec> specs;
  const auto num = [](double v) { return ParamValue(v); };
  const auto str = [](const char* v) { return ParamValue(std::string(v)); };

  for (const char* attr : {"real", "imag", "abs", "angle"}) {
    for (double coeff : {0., 1., 2., 3., 4., 5., 10., 20.}) {
      specs.push_back(make("fft_coefficient",
                           {{"attr", str(attr)}, {"coeff", num(coeff)}}));
    }
  }
  for (double r : {0.5, 1., 1.5, 2., 2.5, 3., 5., 6., 7., 10.}) {
    specs.push_back(make("ratio_beyond_r_sigma", {{"r", num(r)}}));
  }
  for (double lag : {1., 2., 3., 4., 5., 6., 7., 8.}) {
    specs.push_back(make("autocorrelation", {{"lag", num(lag)}}));
  }
  for (double focus : {0., 1., 2., 3., 4., 5., 6., 7., 8., 9.}) {
    specs.push_back(make("energy_ratio_by_chunks",
                         {{"num_segments", num(10.)},
                          {"segment_focus", num(focus)}}));
  }
  for (double q : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
    specs.push_back(make("index_mass_quantile", {{"q", num(q)}}));
  }
  for (double bins : {2., 3., 5., 10., 100.}) {
    specs.push_back(make("lempel_ziv_complexity", {{"bins", num(bins)}}));
  }
  for (const char* agg : {"mean", "median", "var"}) {
    specs.push_back(make("agg_autocorrelation",
                         {{"f_agg", str(agg)}, {"maxlag", num(40.)}}));
  }
  specs.push_back(make("range_count", {{"max", num(1.)}, {"min", num(-1.)}}));
  specs.push_back(make("range_count", {{"max", num(0.)}, {"min", num(-1e12)}}));
  specs.push_back(make("range_count", {{"max", num(1e12)}, {"min", num(0.)}}));
  for (double coeff : {2., 5., 8.}) {
    specs.push_back(make("spkt_welch_density", {{"coeff", num(coeff)}}));
  }
  specs.push_back(make("change_quantiles",
                       {{"f_agg", str("mean")},
                        {"isabs", str("true")},
                        {"qh", num(0.8)},
                        {"ql", num(0.2)}}));
  specs.push_back(make("change_quantiles",
                       {{"f_agg", str("var")},
                        {"isabs", str("false")},
                        {"qh", num(0.8)},
                        {"ql", num(0.2)}}));
  specs.push_back(make("change_quantiles",
                       {{"f_agg", str("mean")},
                        {"isabs", str("false")},
                        {"qh", num(1.0)},
                        {"ql", num(0.0)}}));
  for (double q : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    specs.push_back(make("quantile", {{"q", num(q)}}));
  }
  for (double n : {1., 3., 5., 10., 50.}) {
    specs.push_back(make("number_peaks", {{"n", num(n)}}));
  }
  specs.push_back(make("count_below", {{"t", num(0.)}}));
  specs.push_back(make("count_above", {{"t", num(0.)}}));
  for (double coeff : {0., 5.}) {
    for (double w : {2., 5.}) {
      specs.push_back(
          make("cwt_coefficients", {{"coeff", num(coeff)}, {"w", num(w)}}));
    }
  }
  for (double m : {-1., 0., 1.}) {
    specs.push_back(make("number_crossing_m", {{"m", num(m)}}));
  }
  specs.push_back(make("maximum", {}));
  specs.push_back(make("kurtosis", {}));
  specs.push_back(make("skewness", {}));
  for (const char* aggtype : {"centroid", "variance", "skew", "kurtosis"}) {
    specs.push_back(make("fft_aggregated", {{"aggtype", str(aggtype)}}));
  }
  specs.push_back(make("benford_correlation", {}));
  specs.push_back(make("binned_entropy", {{"max_bins", num(10.)}}));
  return specs;
}

std::vector<FeatureSpec> specs_from_toml(const std::filesystem::path& path) {
  const TomlValue doc = parse_toml_file(path);
  const TomlValue* features = doc.find("feature");
  if (features == nullptr || !features->is_array()) {
    throw SpecError("feature config needs [[feature]] tables");
  }
  std::vector<FeatureSpec> specs;
  for (const TomlValue& item : features->as_array()) {
    const TomlValue* group = item.find("group");
    if (group == nullptr) throw SpecError("[[feature]] missing group");
    FeatureSpec spec;
    spec.group = group->as_string();
    if (!is_catalog_group(spec.group)) {
      throw SpecError("unknown feature group '" + spec.group + "'");
    }
    if (const TomlValue* params = item.find("params")) {
      for (const auto& [key, value] : params->as_table()) {
        switch (value.kind()) {
          case TomlValue::Kind::String:
            spec.params.emplace_back(key, ParamValue(value.as_string()));
            break;
          case TomlValue::Kind::Integer:
          case TomlValue::Kind::Float:
            spec.params.emplace_back(key, ParamValue(value.as_double()));
            break;
          case TomlValue::Kind::Boolean:
            spec.params.emplace_back(
                key, ParamValue(std::string(value.as_bool() ? "true"
                                                            : "false")));
            break;
          default:
            throw SpecError(spec.group + ": parameter '" + key +
                            "' must be a scalar");
        }
      }
    }
    sort_params(spec);
    specs.push_back(std::move(spec));
  }
  if (specs.empty()) throw SpecError("feature config lists no features");
  return specs;
}

}  // namespace ecgbench::tsfeat
