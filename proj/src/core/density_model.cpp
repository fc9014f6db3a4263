// SPDX-License-Identifier: Apache-2.0
#include "projdens/density_model.hpp"

#include "projdens/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace projdens {

namespace {

using nlohmann::json;

constexpr double kNonnegSlack = 1e-12;
constexpr double kSeriesTailTol = 1e-15;
constexpr std::size_t kRhoTableSize = 8192;
constexpr std::size_t kExplicitTerms = 20000;

// sum_{k >= from} k^{-p}, p > 1: explicit terms followed by the midpoint
// Euler-Maclaurin remainder int_{K-1/2}^inf x^{-p} dx + g'(K-1/2)/24.
double zeta_tail(double p, std::size_t from) {
  const std::size_t stop = from + kExplicitTerms;
  double small_to_large = 0.0;
  const double h = static_cast<double>(stop) - 0.5;
  small_to_large += std::pow(h, 1.0 - p) / (p - 1.0) - p * std::pow(h, -p - 1.0) / 24.0;
  for (std::size_t k = stop; k-- > from;)
    small_to_large += std::pow(static_cast<double>(k), -p);
  return small_to_large;
}

std::vector<double> tail_sums(const std::vector<double> &dense) {
  // rho[N] for N = 0..K, accumulated from the back
  std::vector<double> rho(dense.size() + 1, 0.0);
  for (std::size_t N = dense.size(); N-- > 0;) rho[N] = rho[N + 1] + dense[N] * dense[N];
  return rho;
}

[[noreturn]] void schema_error(const std::string &msg) {
  throw Error(Errc::schema, "model spec: " + msg);
}

void reject_unknown_keys(const json &obj, std::initializer_list<const char *> allowed,
                         const char *where) {
  for (const auto &[key, _] : obj.items()) {
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char *a) { return key == a; }))
      schema_error(std::string("unknown key '") + key + "' in " + where);
  }
}

double get_number(const json &obj, const char *key) {
  if (!obj.contains(key) || !obj.at(key).is_number())
    schema_error(std::string("missing numeric field '") + key + "'");
  return obj.at(key).get<double>();
}

std::size_t get_index(const json &obj, const char *key) {
  if (!obj.at(key).is_number_integer() || obj.at(key).get<long long>() < 1)
    schema_error(std::string("field '") + key + "' must be a positive integer");
  return obj.at(key).get<std::size_t>();
}

} // namespace

DensityModel::DensityModel(BasisSystem basis, CoefficientSpec spec)
    : basis_(basis), spec_(std::move(spec)) {
  std::visit(
      [&](const auto &s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ExplicitCoefficients>) {
          std::size_t kmax = 1;
          std::set<std::size_t> seen;
          for (const auto &[k, c] : s.terms) {
            if (k == 0) throw Error(Errc::config, "coefficient index must be >= 1");
            if (!std::isfinite(c)) throw Error(Errc::config, "coefficient must be finite");
            if (!seen.insert(k).second)
              throw Error(Errc::config, "duplicate coefficient index " + std::to_string(k));
            if (k == 1 && c != 1.0)
              throw Error(Errc::config, "c_1 must equal 1 (unit mass)");
            kmax = std::max(kmax, k);
          }
          series_.assign(kmax, 0.0);
          series_[0] = 1.0;
          for (const auto &[k, c] : s.terms) series_[k - 1] = c;
        } else if constexpr (std::is_same_v<T, PowerLawCoefficients>) {
          if (!(s.gamma > 0.0) || !std::isfinite(s.gamma))
            throw Error(Errc::config, "power_law gamma must be positive");
          if (!std::isfinite(s.amplitude))
            throw Error(Errc::config, "power_law amplitude must be finite");
          if (s.k0 < 2) throw Error(Errc::config, "power_law k0 must be >= 2");
          const double p = 0.5 * (1.0 + s.gamma);
          if (s.cutoff) {
            if (*s.cutoff < s.k0) throw Error(Errc::config, "power_law cutoff must be >= k0");
            series_.assign(*s.cutoff, 0.0);
            series_[0] = 1.0;
            for (std::size_t k = s.k0; k <= *s.cutoff; ++k)
              series_[k - 1] = s.amplitude * std::pow(static_cast<double>(k), -p);
          } else {
            if (!(p > 1.0))
              throw Error(Errc::config,
                          "power_law with gamma <= 1 has a non-summable coefficient "
                          "sequence; set a cutoff");
            abs_sum_ = std::fabs(s.amplitude) * zeta_tail(p, s.k0);
            // rho(N) for N < kRhoTableSize, anchored on the analytic remainder
            rho_table_.assign(kRhoTableSize + 1, 0.0);
            rho_table_[kRhoTableSize] = power_law_tail(kRhoTableSize);
            for (std::size_t N = kRhoTableSize; N-- > 0;) {
              const double c = coefficient(N + 1);
              rho_table_[N] = rho_table_[N + 1] + c * c;
            }
            if (!std::isfinite(abs_sum_) || !std::isfinite(rho_table_[0]) ||
                !(rho_table_[kRhoTableSize] > 0.0))
              throw Error(Errc::accuracy, "power_law tail sums could not be evaluated");
          }
        } else {
          if (!(s.ratio > 0.0 && s.ratio < 1.0))
            throw Error(Errc::config, "geometric ratio must lie in (0,1)");
          if (!std::isfinite(s.amplitude))
            throw Error(Errc::config, "geometric amplitude must be finite");
          const double a = std::fabs(s.amplitude), r = s.ratio;
          abs_sum_ = a * r * r / (1.0 - r);
          series_.assign(1, 1.0);
          // keep terms until sqrt2 * (tail of |c_k|) drops below the tolerance
          for (std::size_t k = 2;; ++k) {
            series_.push_back(s.amplitude * std::pow(r, static_cast<double>(k)));
            const double rest = std::numbers::sqrt2 * a *
                                std::pow(r, static_cast<double>(k + 1)) / (1.0 - r);
            if (rest < kSeriesTailTol) break;
          }
        }
      },
      spec_);

  if (!rho_table_.empty()) {
    // untruncated power law: no pointwise representation
  } else if (std::holds_alternative<GeometricCoefficients>(spec_)) {
    last_nonzero_.reset();
  } else {
    rho_table_ = tail_sums(series_);
    abs_sum_ = 0.0;
    for (std::size_t i = 1; i < series_.size(); ++i) abs_sum_ += std::fabs(series_[i]);
    std::size_t last = series_.size();
    while (last > 1 && series_[last - 1] == 0.0) --last;
    last_nonzero_ = last;
  }

  if (basis_.dimension()) {
    const std::size_t limit = last_nonzero_.value_or(SIZE_MAX);
    if (limit > *basis_.dimension())
      throw Error(Errc::config, "model uses coefficients beyond the basis dimension");
  }

  if (std::numbers::sqrt2 * abs_sum_ > 1.0 + kNonnegSlack) {
    std::ostringstream msg;
    msg << "sqrt2 * sum_{k>=2} |c_k| = " << std::numbers::sqrt2 * abs_sum_
        << " exceeds 1; nonnegativity of the density is not guaranteed";
    throw Error(Errc::config, msg.str());
  }
}

DensityModel DensityModel::uniform(BasisKind kind) {
  return DensityModel(BasisSystem(kind), ExplicitCoefficients{});
}

double DensityModel::coefficient(std::size_t k) const {
  if (k == 0) throw Error(Errc::domain, "coefficient index must be >= 1");
  if (k == 1) return 1.0;
  if (const auto *pl = std::get_if<PowerLawCoefficients>(&spec_)) {
    if (k < pl->k0 || (pl->cutoff && k > *pl->cutoff)) return 0.0;
    return pl->amplitude * std::pow(static_cast<double>(k), -0.5 * (1.0 + pl->gamma));
  }
  if (const auto *g = std::get_if<GeometricCoefficients>(&spec_))
    return g->amplitude * std::pow(g->ratio, static_cast<double>(k));
  return k <= series_.size() ? series_[k - 1] : 0.0;
}

double DensityModel::power_law_tail(std::size_t N) const {
  const auto &pl = std::get<PowerLawCoefficients>(spec_);
  const std::size_t from = std::max(N + 1, pl.k0);
  return pl.amplitude * pl.amplitude * zeta_tail(1.0 + pl.gamma, from);
}

double DensityModel::tail_energy(std::size_t N) const {
  if (const auto *g = std::get_if<GeometricCoefficients>(&spec_)) {
    const double a2 = g->amplitude * g->amplitude, r2 = g->ratio * g->ratio;
    const double first = std::max<std::size_t>(N + 1, 2);
    const double tail = a2 * std::pow(r2, first) / (1.0 - r2);
    return N == 0 ? 1.0 + tail : tail;
  }
  if (N < rho_table_.size()) return rho_table_[N];
  if (std::holds_alternative<PowerLawCoefficients>(spec_) && !has_pointwise())
    return power_law_tail(N);
  return 0.0;
}

double DensityModel::density_at(double x) const {
  if (!(x >= 0.0 && x <= 1.0)) throw Error(Errc::domain, "density argument outside [0,1]");
  if (series_.empty())
    throw Error(Errc::model,
                "untruncated power_law model has no pointwise representation; set a cutoff");
  return basis_.series(x, series_);
}

double DensityModel::envelope_bound() const noexcept {
  return 1.0 + std::numbers::sqrt2 * abs_sum_;
}

bool DensityModel::monotone_tail() const noexcept {
  if (const auto *pl = std::get_if<PowerLawCoefficients>(&spec_)) return pl->k0 == 2;
  if (std::holds_alternative<GeometricCoefficients>(spec_)) return true;
  for (std::size_t i = 2; i < series_.size(); ++i)
    if (series_[i] * series_[i] > series_[i - 1] * series_[i - 1]) return false;
  return true;
}

DensityModel DensityModel::from_json(const json &doc) {
  if (!doc.is_object()) schema_error("top level must be an object");
  reject_unknown_keys(doc, {"basis", "coeffs", "name"}, "model");
  BasisKind kind = BasisKind::cosine;
  if (doc.contains("basis")) {
    if (!doc.at("basis").is_string()) schema_error("'basis' must be a string");
    try {
      kind = parse_basis_kind(doc.at("basis").get<std::string>());
    } catch (const Error &e) {
      schema_error(e.what());
    }
  }
  if (!doc.contains("coeffs") || !doc.at("coeffs").is_object())
    schema_error("missing object 'coeffs'");
  const json &c = doc.at("coeffs");
  if (!c.contains("type") || !c.at("type").is_string()) schema_error("missing 'coeffs.type'");
  const std::string type = c.at("type").get<std::string>();
  const BasisSystem basis(kind);

  if (type == "uniform") {
    reject_unknown_keys(c, {"type"}, "coeffs");
    return DensityModel(basis, ExplicitCoefficients{});
  }
  if (type == "explicit") {
    reject_unknown_keys(c, {"type", "terms"}, "coeffs");
    ExplicitCoefficients spec;
    if (c.contains("terms")) {
      if (!c.at("terms").is_array()) schema_error("'terms' must be an array of [k, c_k]");
      for (const auto &t : c.at("terms")) {
        if (!t.is_array() || t.size() != 2 || !t[0].is_number_integer() || !t[1].is_number() ||
            t[0].get<long long>() < 1)
          schema_error("each term must be [k >= 1, c_k]");
        spec.terms.emplace_back(t[0].get<std::size_t>(), t[1].get<double>());
      }
    }
    return DensityModel(basis, std::move(spec));
  }
  if (type == "power_law") {
    reject_unknown_keys(c, {"type", "a", "gamma", "k0", "cutoff"}, "coeffs");
    PowerLawCoefficients spec{get_number(c, "a"), get_number(c, "gamma"), 2, std::nullopt};
    if (c.contains("k0")) spec.k0 = get_index(c, "k0");
    if (c.contains("cutoff")) spec.cutoff = get_index(c, "cutoff");
    return DensityModel(basis, spec);
  }
  if (type == "geometric") {
    reject_unknown_keys(c, {"type", "a", "r"}, "coeffs");
    return DensityModel(basis, GeometricCoefficients{get_number(c, "a"), get_number(c, "r")});
  }
  schema_error("unknown coeffs.type '" + type + "'");
}

DensityModel DensityModel::load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open model file '" + path + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error &e) {
    throw Error(Errc::schema, "model file '" + path + "': " + e.what());
  }
  return from_json(doc);
}

json DensityModel::to_json() const {
  json coeffs = std::visit(
      [](const auto &s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ExplicitCoefficients>) {
          if (s.terms.empty()) return {{"type", "uniform"}};
          json terms = json::array();
          for (const auto &[k, c] : s.terms) terms.push_back({k, c});
          return {{"type", "explicit"}, {"terms", terms}};
        } else if constexpr (std::is_same_v<T, PowerLawCoefficients>) {
          json j = {{"type", "power_law"}, {"a", s.amplitude}, {"gamma", s.gamma}, {"k0", s.k0}};
          if (s.cutoff) j["cutoff"] = *s.cutoff;
          return j;
        } else {
          return {{"type", "geometric"}, {"a", s.amplitude}, {"r", s.ratio}};
        }
      },
      spec_);
  return {{"basis", std::string(basis_kind_name(basis_.kind()))}, {"coeffs", coeffs}};
}

} // namespace projdens
