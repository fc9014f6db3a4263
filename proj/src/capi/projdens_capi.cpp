// SPDX-License-Identifier: Apache-2.0
#include "projdens/projdens.h"

#include "projdens/basis.hpp"
#include "projdens/coefficients.hpp"
#include "projdens/confidence.hpp"
#include "projdens/density_model.hpp"
#include "projdens/error.hpp"
#include "projdens/estimator.hpp"
#include "projdens/experiments.hpp"
#include "projdens/quadrature.hpp"
#include "projdens/sampling.hpp"
#include "projdens/selection.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <memory>
#include <new>
#include <string>

using namespace projdens;

struct pd_model_s {
  std::shared_ptr<const DensityModel> model;
};

struct pd_stream_s {
  std::shared_ptr<const DensityModel> model;
  SampleStream stream;
};

struct pd_accumulator_s {
  CoefficientAccumulator acc;
};

struct pd_snapshot_s {
  CoefficientSnapshot snap;
};

struct pd_estimate_s {
  ProjectionEstimate est;
};

struct pd_trace_s {
  OrderTrace trace;
};

namespace {

thread_local std::string g_last_error;

struct InvalidArgument {
  const char *what;
};

pd_status from_errc(Errc code) {
  switch (code) {
  case Errc::domain: return PD_ERR_DOMAIN;
  case Errc::bounds: return PD_ERR_BOUNDS;
  case Errc::state: return PD_ERR_STATE;
  case Errc::config: return PD_ERR_CONFIG;
  case Errc::schema: return PD_ERR_SCHEMA;
  case Errc::io: return PD_ERR_IO;
  case Errc::accuracy: return PD_ERR_ACCURACY;
  case Errc::search_exhausted: return PD_ERR_SEARCH_EXHAUSTED;
  case Errc::model: return PD_ERR_MODEL;
  }
  return PD_ERR_INTERNAL;
}

template <class F>
pd_status guarded(F &&body) noexcept {
  try {
    body();
    g_last_error.clear();
    return PD_OK;
  } catch (const InvalidArgument &e) {
    g_last_error = e.what;
    return PD_ERR_INVALID_ARGUMENT;
  } catch (const Error &e) {
    g_last_error = e.what();
    return from_errc(e.code());
  } catch (const std::bad_alloc &) {
    g_last_error = "out of memory";
    return PD_ERR_INTERNAL;
  } catch (const std::exception &e) {
    g_last_error = e.what();
    return PD_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return PD_ERR_INTERNAL;
  }
}

template <class T>
T &need(T *p, const char *what = "null handle") {
  if (!p) throw InvalidArgument{what};
  return *p;
}

const char *need(const char *p, const char *what) {
  if (!p) throw InvalidArgument{what};
  return p;
}

template <class T>
T *out_ptr(T *p) {
  if (!p) throw InvalidArgument{"null output pointer"};
  return p;
}

BasisKind to_kind(pd_basis_kind kind) {
  switch (kind) {
  case PD_BASIS_COSINE: return BasisKind::cosine;
  case PD_BASIS_TRIG: return BasisKind::trigonometric;
  }
  throw InvalidArgument{"unknown basis kind"};
}

pd_basis_kind from_kind(BasisKind kind) {
  return kind == BasisKind::cosine ? PD_BASIS_COSINE : PD_BASIS_TRIG;
}

std::optional<std::size_t> zero_as_default(std::size_t v) {
  return v == 0 ? std::nullopt : std::optional<std::size_t>(v);
}

std::ofstream open_output(const char *path) {
  if (!path) throw InvalidArgument{"null path"};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, std::string("cannot write '") + path + "'");
  return out;
}

} // namespace

extern "C" {

const char *pd_version(void) { return library_version().data(); }

const char *pd_last_error(void) { return g_last_error.c_str(); }

const char *pd_status_name(pd_status status) {
  switch (status) {
  case PD_OK: return "ok";
  case PD_ERR_DOMAIN: return "domain error";
  case PD_ERR_BOUNDS: return "bounds error";
  case PD_ERR_STATE: return "state error";
  case PD_ERR_CONFIG: return "configuration error";
  case PD_ERR_SCHEMA: return "schema error";
  case PD_ERR_IO: return "i/o error";
  case PD_ERR_ACCURACY: return "accuracy error";
  case PD_ERR_SEARCH_EXHAUSTED: return "search exhausted";
  case PD_ERR_MODEL: return "model error";
  case PD_ERR_INVALID_ARGUMENT: return "invalid argument";
  case PD_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

// -- basis ------------------------------------------------------------------

pd_status pd_basis_parse(const char *name, pd_basis_kind *out) {
  return guarded([&] { *out_ptr(out) = from_kind(parse_basis_kind(need(name, "null name"))); });
}

pd_status pd_basis_evaluate(pd_basis_kind kind, size_t k, double x, double *out) {
  return guarded([&] { *out_ptr(out) = BasisSystem(to_kind(kind)).evaluate(k, x); });
}

pd_status pd_basis_sup_bound(pd_basis_kind kind, double *out) {
  return guarded([&] { *out_ptr(out) = BasisSystem(to_kind(kind)).sup_bound(); });
}

pd_status pd_basis_gram_entry(pd_basis_kind kind, size_t j, size_t k, size_t panels,
                              size_t nodes_per_panel, double *value, int *resolved) {
  return guarded([&] {
    const auto r = gram_entry(BasisSystem(to_kind(kind)), j, k,
                              QuadratureRule(panels, nodes_per_panel));
    *out_ptr(value) = r.value;
    if (resolved) *resolved = r.resolved ? 1 : 0;
  });
}

// -- densities --------------------------------------------------------------

pd_status pd_model_from_json(const char *json, pd_model *out) {
  return guarded([&] {
    out_ptr(out);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(need(json, "null json"));
    } catch (const nlohmann::json::parse_error &e) {
      throw Error(Errc::schema, std::string("model spec: ") + e.what());
    }
    auto model = std::make_shared<const DensityModel>(DensityModel::from_json(doc));
    *out = new pd_model_s{std::move(model)};
  });
}

pd_status pd_model_load(const char *path, pd_model *out) {
  return guarded([&] {
    out_ptr(out);
    auto model = std::make_shared<const DensityModel>(DensityModel::load(need(path, "null path")));
    *out = new pd_model_s{std::move(model)};
  });
}

pd_status pd_model_with_basis(pd_model model, pd_basis_kind kind, pd_model *out) {
  return guarded([&] {
    out_ptr(out);
    auto doc = need(model).model->to_json();
    doc["basis"] = std::string(basis_kind_name(to_kind(kind)));
    *out = new pd_model_s{std::make_shared<const DensityModel>(DensityModel::from_json(doc))};
  });
}

void pd_model_free(pd_model model) { delete model; }

pd_status pd_model_basis(pd_model model, pd_basis_kind *out) {
  return guarded([&] { *out_ptr(out) = from_kind(need(model).model->basis().kind()); });
}

pd_status pd_model_sup_bound(pd_model model, double *out) {
  return guarded([&] { *out_ptr(out) = need(model).model->basis().sup_bound(); });
}

pd_status pd_model_coefficient(pd_model model, size_t k, double *out) {
  return guarded([&] { *out_ptr(out) = need(model).model->coefficient(k); });
}

pd_status pd_model_tail_energy(pd_model model, size_t N, double *out) {
  return guarded([&] { *out_ptr(out) = need(model).model->tail_energy(N); });
}

pd_status pd_model_density_at(pd_model model, double x, double *out) {
  return guarded([&] { *out_ptr(out) = need(model).model->density_at(x); });
}

pd_status pd_model_envelope_bound(pd_model model, double *out) {
  return guarded([&] { *out_ptr(out) = need(model).model->envelope_bound(); });
}

pd_status pd_model_to_json(pd_model model, char *buf, size_t cap, size_t *len) {
  return guarded([&] {
    const std::string text = need(model).model->to_json().dump();
    *out_ptr(len) = text.size();
    if (buf && cap > 0) {
      const std::size_t n = std::min(cap - 1, text.size());
      std::memcpy(buf, text.data(), n);
      buf[n] = '\0';
    }
  });
}

// -- sampling ---------------------------------------------------------------

pd_status pd_stream_create(pd_model model, uint64_t seed, pd_stream *out) {
  return guarded([&] {
    out_ptr(out);
    auto m = need(model).model;
    SampleStream stream(*m, seed);
    *out = new pd_stream_s{std::move(m), std::move(stream)};
  });
}

void pd_stream_free(pd_stream stream) { delete stream; }

pd_status pd_stream_draw(pd_stream stream, size_t n, double *out) {
  return guarded([&] {
    auto &s = need(stream).stream;
    if (n > 0) out_ptr(out);
    for (size_t i = 0; i < n; ++i) out[i] = s.next();
  });
}

uint64_t pd_derive_seed(uint64_t base, uint64_t replication) {
  return derive_seed(base, replication);
}

// -- coefficients -----------------------------------------------------------

pd_status pd_accumulator_create(pd_basis_kind kind, size_t k_max, pd_accumulator *out) {
  return guarded([&] {
    out_ptr(out);
    *out = new pd_accumulator_s{CoefficientAccumulator(BasisSystem(to_kind(kind)), k_max)};
  });
}

void pd_accumulator_free(pd_accumulator acc) { delete acc; }

size_t pd_accumulator_default_k_max(uint64_t n_planned) {
  return CoefficientAccumulator::default_k_max(n_planned);
}

pd_status pd_accumulator_push(pd_accumulator acc, const double *xs, size_t count) {
  return guarded([&] {
    auto &a = need(acc).acc;
    if (count > 0) need(xs, "null sample array");
    a.push(std::span<const double>(xs, count));
  });
}

pd_status pd_accumulator_count(pd_accumulator acc, uint64_t *out) {
  return guarded([&] { *out_ptr(out) = need(acc).acc.n(); });
}

pd_status pd_accumulator_snapshot(pd_accumulator acc, pd_snapshot *out) {
  return guarded([&] {
    out_ptr(out);
    *out = new pd_snapshot_s{need(acc).acc.snapshot()};
  });
}

void pd_snapshot_free(pd_snapshot snap) { delete snap; }

pd_status pd_snapshot_count(pd_snapshot snap, uint64_t *out) {
  return guarded([&] { *out_ptr(out) = need(snap).snap.n(); });
}

pd_status pd_snapshot_k_max(pd_snapshot snap, size_t *out) {
  return guarded([&] { *out_ptr(out) = need(snap).snap.k_max(); });
}

pd_status pd_snapshot_coefficient(pd_snapshot snap, size_t k, double *out) {
  return guarded([&] { *out_ptr(out) = need(snap).snap.at(k); });
}

pd_status pd_snapshot_write_csv(pd_snapshot snap, const char *path, int has_seed,
                                uint64_t seed) {
  return guarded([&] {
    const auto &s = need(snap).snap;
    auto out = open_output(path);
    s.write_csv(out, has_seed ? std::optional<std::uint64_t>(seed) : std::nullopt);
    if (!out) throw Error(Errc::io, std::string("write failed for '") + path + "'");
  });
}

// -- estimator --------------------------------------------------------------

pd_status pd_estimate_build(pd_snapshot snap, size_t N, pd_estimate *out) {
  return guarded([&] {
    out_ptr(out);
    *out = new pd_estimate_s{ProjectionEstimate::build(need(snap).snap, N)};
  });
}

void pd_estimate_free(pd_estimate est) { delete est; }

pd_status pd_estimate_order(pd_estimate est, size_t *out) {
  return guarded([&] { *out_ptr(out) = need(est).est.order(); });
}

pd_status pd_estimate_evaluate(pd_estimate est, double x, double *out) {
  return guarded([&] { *out_ptr(out) = need(est).est.evaluate_at(x); });
}

pd_status pd_estimate_write_grid_csv(pd_estimate est, const char *path, size_t points,
                                     int clip) {
  return guarded([&] {
    const auto &e = need(est).est;
    auto out = open_output(path);
    e.write_grid_csv(out, points, clip != 0);
    if (!out) throw Error(Errc::io, std::string("write failed for '") + path + "'");
  });
}

pd_status pd_l2_error_sq(pd_estimate est, pd_model model, double *out) {
  return guarded([&] { *out_ptr(out) = l2_error_sq(need(est).est, *need(model).model); });
}

pd_status pd_risk_bound(pd_model model, size_t N, uint64_t n, double *out) {
  return guarded([&] { *out_ptr(out) = risk_bound(*need(model).model, N, n); });
}

// -- selection --------------------------------------------------------------

pd_status pd_batch_optimal_order(pd_model model, uint64_t n, size_t N_max, size_t *out) {
  return guarded([&] {
    *out_ptr(out) = batch_optimal_order(*need(model).model, n, zero_as_default(N_max));
  });
}

pd_status pd_optimal_risk(pd_model model, uint64_t n, double *out) {
  return guarded([&] { *out_ptr(out) = optimal_risk(*need(model).model, n); });
}

pd_status pd_threshold_order(pd_model model, uint64_t n, size_t k_cap, size_t *out) {
  return guarded([&] {
    *out_ptr(out) = threshold_order(*need(model).model, n, zero_as_default(k_cap));
  });
}

pd_status pd_recursive_order_step(size_t Y, uint64_t n, double c_sq_at_Y, double M,
                                  size_t *out) {
  return guarded([&] { *out_ptr(out) = recursive_order_step(Y, n, c_sq_at_Y, M); });
}

pd_status pd_trace_oracle(pd_model model, uint64_t n_max, pd_trace *out) {
  return guarded([&] {
    out_ptr(out);
    *out = new pd_trace_s{recursive_order_trace(*need(model).model, n_max)};
  });
}

pd_status pd_trace_plugin(pd_basis_kind kind, const double *samples, size_t count,
                          size_t k_max, pd_trace *out) {
  return guarded([&] {
    out_ptr(out);
    if (count > 0) need(samples, "null sample array");
    *out = new pd_trace_s{recursive_order_trace(BasisSystem(to_kind(kind)),
                                                std::span<const double>(samples, count), k_max)};
  });
}

void pd_trace_free(pd_trace trace) { delete trace; }

pd_status pd_trace_length(pd_trace trace, uint64_t *out) {
  return guarded([&] { *out_ptr(out) = need(trace).trace.n_max(); });
}

pd_status pd_trace_value(pd_trace trace, uint64_t n, size_t *out) {
  return guarded([&] { *out_ptr(out) = need(trace).trace.at(n); });
}

pd_status pd_q_factor(pd_model model, pd_trace trace, uint64_t n_lo, uint64_t n_hi, double *q,
                      uint64_t *argmax_n) {
  return guarded([&] {
    const auto r = q_factor(*need(model).model, need(trace).trace, n_lo, n_hi);
    *out_ptr(q) = r.value;
    if (argmax_n) *argmax_n = r.argmax_n;
  });
}

pd_status pd_quasi_optimality_ratio(pd_model model, const size_t *orders, uint64_t n_lo,
                                    uint64_t n_hi, double *gamma, uint64_t *argmax_n) {
  return guarded([&] {
    need(orders, "null order array");
    const auto r = quasi_optimality_ratio(
        *need(model).model, [&](std::uint64_t n) { return orders[n - n_lo]; }, n_lo, n_hi);
    *out_ptr(gamma) = r.value;
    if (argmax_n) *argmax_n = r.argmax_n;
  });
}

pd_status pd_adaptive_statistic(pd_snapshot snap, size_t N, double *out) {
  return guarded([&] { *out_ptr(out) = adaptive_statistic(need(snap).snap, N); });
}

pd_status pd_adaptive_order(pd_snapshot snap, size_t *out, int *clipped) {
  return guarded([&] {
    const auto choice = adaptive_order(need(snap).snap);
    *out_ptr(out) = choice.order;
    if (clipped) *clipped = choice.clipped ? 1 : 0;
  });
}

// -- confidence -------------------------------------------------------------

pd_status pd_deviation_statistic(pd_estimate est, pd_model model, double *out) {
  return guarded(
      [&] { *out_ptr(out) = deviation_statistic(need(est).est, *need(model).model); });
}

pd_status pd_tail_bound(double t, double M, double *out) {
  return guarded([&] { *out_ptr(out) = tail_bound(t, M); });
}

pd_status pd_recursive_tail_bound(double t, double M, double Q, double *out) {
  return guarded([&] { *out_ptr(out) = recursive_tail_bound(t, M, Q); });
}

pd_status pd_confidence_radius(size_t N, uint64_t n, double M, double rho, double alpha,
                               pd_rho_source source, pd_confidence_report *out) {
  return guarded([&] {
    out_ptr(out);
    const auto r = confidence_radius(
        N, n, M, rho, alpha, source == PD_RHO_ADAPTIVE ? RhoSource::adaptive : RhoSource::oracle);
    *out = {r.N, r.n, r.M, r.rho, r.alpha, r.t, r.radius_sq, source};
  });
}

// -- experiments ------------------------------------------------------------

pd_status pd_select_write_csv(pd_model model, const uint64_t *n_grid, size_t count,
                              uint64_t seed, size_t k_max, const char *path) {
  return guarded([&] {
    const auto &m = *need(model).model;
    if (count == 0) throw Error(Errc::domain, "empty n grid");
    need(n_grid, "null n grid");
    const auto rows = select_table(m, std::vector<std::uint64_t>(n_grid, n_grid + count), seed,
                                   k_max);
    auto out = open_output(path);
    write_select_csv(out, rows);
    if (!out) throw Error(Errc::io, std::string("write failed for '") + path + "'");
  });
}

pd_status pd_parse_n_grid(const char *text, uint64_t *out, size_t cap, size_t *count) {
  return guarded([&] {
    const auto grid = parse_n_grid(need(text, "null grid text"));
    *out_ptr(count) = grid.size();
    if (out) std::copy_n(grid.begin(), std::min(cap, grid.size()), out);
  });
}

pd_status pd_run_plan(const char *plan_json, const char *base_dir, const char *out_dir,
                      unsigned threads) {
  return guarded([&] {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(need(plan_json, "null plan"));
    } catch (const nlohmann::json::parse_error &e) {
      throw Error(Errc::schema, std::string("experiment plan: ") + e.what());
    }
    if (doc.is_object() && doc.contains("plan") && doc.contains("tool")) doc = doc.at("plan");
    const auto plan = ExperimentPlan::from_json(doc, base_dir ? base_dir : "");
    run_plan(plan, need(out_dir, "null output directory"), threads);
  });
}

pd_status pd_run_plan_file(const char *path, const char *out_dir, unsigned threads) {
  return guarded([&] {
    const auto plan = ExperimentPlan::load(need(path, "null path"));
    run_plan(plan, need(out_dir, "null output directory"), threads);
  });
}

} // extern "C"
