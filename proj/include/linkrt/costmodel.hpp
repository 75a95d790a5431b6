#pragma once

// Runtime approximation families and their fitting.
//   linear: a + b|S| + c|T| + d*theta
//   exp:    exp(a + b|S| + c|T| + d*theta + e*theta^2)
//   mixed:  a + (b + c|S| + d|T| + e|S||T|) * exp(f*theta + g*theta^2)
// linear/exp are solved in closed form by the Moore-Penrose pseudo-inverse
// (minimum-norm least squares); mixed by Levenberg-Marquardt from an all-ones
// start. The loss is the squared L2 norm of the residual vector.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "linkrt/kvfile.hpp"

namespace linkrt {

enum class ModelFamily { linear, exp, mixed };

inline constexpr ModelFamily kAllFamilies[] = {ModelFamily::linear, ModelFamily::exp,
                                               ModelFamily::mixed};

inline std::string_view family_name(ModelFamily f) {
  switch (f) {
    case ModelFamily::linear: return "linear";
    case ModelFamily::exp: return "exp";
    case ModelFamily::mixed: return "mixed";
  }
  throw std::logic_error("family_name: bad enum value");
}

inline ModelFamily family_from_name(std::string_view name) {
  if (name == "linear") return ModelFamily::linear;
  if (name == "exp") return ModelFamily::exp;
  if (name == "mixed") return ModelFamily::mixed;
  throw std::invalid_argument("unknown model family: " + std::string(name));
}

inline std::size_t family_coefficients(ModelFamily f) {
  switch (f) {
    case ModelFamily::linear: return 4;
    case ModelFamily::exp: return 5;
    case ModelFamily::mixed: return 7;
  }
  throw std::logic_error("family_coefficients: bad enum value");
}

struct TrainingSample {
  std::size_t s_size = 0;
  std::size_t t_size = 0;
  double theta = 0.0;
  double runtime_ms = 0.0;
};

struct RuntimeModel {
  ModelFamily family = ModelFamily::linear;
  std::vector<double> coefficients;
  // mixed only: sizes are divided by these before entering the formula.
  double scale_s = 1.0;
  double scale_t = 1.0;
  std::string trained_on;
};

struct FitReport {
  double loss = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> accepted_losses;  // initial loss, then each accepted step
};

namespace detail {

inline void check_samples(const std::vector<TrainingSample>& samples) {
  if (samples.empty()) throw std::invalid_argument("fit: need at least one sample");
  for (const auto& s : samples) {
    if (s.s_size < 1 || s.t_size < 1)
      throw std::invalid_argument("fit: sample sizes must be >= 1");
    if (!(s.theta > 0.0) || s.theta > 1.0)
      throw std::invalid_argument("fit: sample theta must be in (0, 1]");
    if (!std::isfinite(s.runtime_ms) || s.runtime_ms < 0.0)
      throw std::invalid_argument("fit: sample runtime must be finite and nonnegative");
  }
}

// Min-norm least squares: singular values below 1e-12 * sigma_max count as
// zero, which makes solve() the Moore-Penrose pseudo-inverse application.
inline Eigen::VectorXd min_norm_solve(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-12);
  return svd.solve(b);
}

}  // namespace detail

/// Model prediction in milliseconds. linear/mixed may go negative; exp is
/// always positive. Overflowing to a non-finite value is an error.
inline double predict(const RuntimeModel& m, std::size_t s_size, std::size_t t_size, double theta) {
  if (s_size < 1 || t_size < 1) throw std::invalid_argument("predict: sizes must be >= 1");
  if (!(theta > 0.0) || theta > 1.0) throw std::invalid_argument("predict: theta must be in (0, 1]");
  if (m.coefficients.size() != family_coefficients(m.family))
    throw std::invalid_argument("predict: coefficient count does not match family");
  const std::vector<double>& c = m.coefficients;
  const double s = double(s_size);
  const double t = double(t_size);
  double result = 0.0;
  switch (m.family) {
    case ModelFamily::linear:
      result = c[0] + c[1] * s + c[2] * t + c[3] * theta;
      break;
    case ModelFamily::exp:
      result = std::exp(c[0] + c[1] * s + c[2] * t + c[3] * theta + c[4] * theta * theta);
      break;
    case ModelFamily::mixed: {
      const double u = s / m.scale_s;
      const double v = t / m.scale_t;
      result = c[0] + (c[1] + c[2] * u + c[3] * v + c[4] * u * v) *
                          std::exp(c[5] * theta + c[6] * theta * theta);
      break;
    }
  }
  if (!std::isfinite(result)) throw std::runtime_error("prediction overflow");
  return result;
}

/// Closed-form fit of the linear family against rows [1, |S|, |T|, theta].
inline std::pair<RuntimeModel, FitReport> fit_linear(const std::vector<TrainingSample>& samples) {
  detail::check_samples(samples);
  const std::size_t n = samples.size();
  Eigen::MatrixXd a(n, 4);
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = double(samples[i].s_size);
    a(i, 2) = double(samples[i].t_size);
    a(i, 3) = samples[i].theta;
    b(i) = samples[i].runtime_ms;
  }
  const Eigen::VectorXd x = detail::min_norm_solve(a, b);
  RuntimeModel model{ModelFamily::linear, {x(0), x(1), x(2), x(3)}, 1.0, 1.0, ""};
  FitReport report;
  report.loss = (a * x - b).squaredNorm();
  report.iterations = 0;
  report.converged = true;
  report.accepted_losses = {report.loss};
  return {std::move(model), std::move(report)};
}

/// Closed-form fit of the exp family: rows [1, |S|, |T|, theta, theta^2]
/// against log runtimes, with runtimes clamped to >= 1 ms first. The loss is
/// reported in log space.
inline std::pair<RuntimeModel, FitReport> fit_exp(const std::vector<TrainingSample>& samples) {
  detail::check_samples(samples);
  const std::size_t n = samples.size();
  Eigen::MatrixXd a(n, 5);
  Eigen::VectorXd b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = double(samples[i].s_size);
    a(i, 2) = double(samples[i].t_size);
    a(i, 3) = samples[i].theta;
    a(i, 4) = samples[i].theta * samples[i].theta;
    b(i) = std::log(std::max(samples[i].runtime_ms, 1.0));
  }
  const Eigen::VectorXd x = detail::min_norm_solve(a, b);
  RuntimeModel model{ModelFamily::exp, {x(0), x(1), x(2), x(3), x(4)}, 1.0, 1.0, ""};
  FitReport report;
  report.loss = (a * x - b).squaredNorm();
  report.iterations = 0;
  report.converged = true;
  report.accepted_losses = {report.loss};
  return {std::move(model), std::move(report)};
}

namespace detail {

struct MixedEval {
  Eigen::VectorXd residual;
  Eigen::MatrixXd jacobian;
};

// Residual r_i = phi3(p; u_i, v_i, theta_i) - R_i and its Jacobian in the
// scaled coordinates u = |S|/scale_s, v = |T|/scale_t.
inline MixedEval mixed_eval(const Eigen::VectorXd& p, const std::vector<TrainingSample>& samples,
                            double scale_s, double scale_t) {
  const std::size_t n = samples.size();
  MixedEval ev{Eigen::VectorXd(n), Eigen::MatrixXd(n, 7)};
  for (std::size_t i = 0; i < n; ++i) {
    const double u = double(samples[i].s_size) / scale_s;
    const double v = double(samples[i].t_size) / scale_t;
    const double th = samples[i].theta;
    const double e = std::exp(p(5) * th + p(6) * th * th);
    const double poly = p(1) + p(2) * u + p(3) * v + p(4) * u * v;
    ev.residual(i) = p(0) + poly * e - samples[i].runtime_ms;
    ev.jacobian(i, 0) = 1.0;
    ev.jacobian(i, 1) = e;
    ev.jacobian(i, 2) = u * e;
    ev.jacobian(i, 3) = v * e;
    ev.jacobian(i, 4) = u * v * e;
    ev.jacobian(i, 5) = poly * e * th;
    ev.jacobian(i, 6) = poly * e * th * th;
  }
  return ev;
}

}  // namespace detail

/// Analytic Jacobian of the mixed family at scaled inputs; row layout matches
/// the coefficient order a..g. Exposed for gradient checking.
inline Eigen::MatrixXd mixed_jacobian(const std::vector<double>& coefficients,
                                      const std::vector<TrainingSample>& samples,
                                      double scale_s, double scale_t) {
  if (coefficients.size() != 7) throw std::invalid_argument("mixed_jacobian: need 7 coefficients");
  Eigen::VectorXd p(7);
  for (int i = 0; i < 7; ++i) p(i) = coefficients[std::size_t(i)];
  return detail::mixed_eval(p, samples, scale_s, scale_t).jacobian;
}

/// Levenberg-Marquardt fit of the mixed family. All-ones initialization,
/// lambda starts at 1e-3, /10 on accepted steps, *10 on rejections (capped at
/// 1e12), at most 500 iterations. Sizes are scaled by the maximum training
/// size per dimension; the scales are stored in the model.
inline std::pair<RuntimeModel, FitReport> fit_mixed(const std::vector<TrainingSample>& samples) {
  detail::check_samples(samples);
  double scale_s = 1.0, scale_t = 1.0;
  for (const auto& s : samples) {
    scale_s = std::max(scale_s, double(s.s_size));
    scale_t = std::max(scale_t, double(s.t_size));
  }

  Eigen::VectorXd p = Eigen::VectorXd::Ones(7);
  detail::MixedEval ev = detail::mixed_eval(p, samples, scale_s, scale_t);
  if (!ev.residual.allFinite() || !ev.jacobian.allFinite())
    throw std::runtime_error("fit_mixed: non-finite residual or Jacobian at initialization");
  double loss = ev.residual.squaredNorm();

  FitReport report;
  report.accepted_losses = {loss};
  double lambda = 1e-3;
  const int max_iterations = 500;
  bool converged = false;
  int it = 0;
  for (; it < max_iterations; ++it) {
    const Eigen::MatrixXd jtj = ev.jacobian.transpose() * ev.jacobian;
    const Eigen::VectorXd g = ev.jacobian.transpose() * ev.residual;
    if (g.norm() < 1e-10) {
      converged = true;
      break;
    }
    const Eigen::MatrixXd damped = jtj + lambda * Eigen::MatrixXd::Identity(7, 7);
    const Eigen::VectorXd delta = damped.ldlt().solve(-g);
    const Eigen::VectorXd trial = p + delta;
    bool accept = false;
    double trial_loss = 0.0;
    detail::MixedEval trial_ev;
    if (trial.allFinite()) {
      trial_ev = detail::mixed_eval(trial, samples, scale_s, scale_t);
      if (trial_ev.residual.allFinite() && trial_ev.jacobian.allFinite()) {
        trial_loss = trial_ev.residual.squaredNorm();
        accept = std::isfinite(trial_loss) && trial_loss < loss;
      }
    }
    if (accept) {
      const double rel_decrease = (loss - trial_loss) / loss;
      p = trial;
      ev = std::move(trial_ev);
      loss = trial_loss;
      report.accepted_losses.push_back(loss);
      lambda /= 10.0;
      if (rel_decrease < 1e-10) {
        ++it;
        converged = true;
        break;
      }
    } else {
      lambda = std::min(lambda * 10.0, 1e12);
    }
  }

  RuntimeModel model{ModelFamily::mixed, {p(0), p(1), p(2), p(3), p(4), p(5), p(6)},
                     scale_s, scale_t, ""};
  report.loss = loss;
  report.iterations = it;
  report.converged = converged;
  return {std::move(model), std::move(report)};
}

/// Root mean square error between two equal-length series.
inline double rmse(const std::vector<double>& expected, const std::vector<double>& actual) {
  if (expected.size() != actual.size())
    throw std::invalid_argument("rmse: length mismatch");
  if (expected.empty()) throw std::invalid_argument("rmse: need at least one value");
  double sum = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const double d = expected[i] - actual[i];
    sum += d * d;
  }
  return std::sqrt(sum / double(expected.size()));
}

namespace detail {

inline std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_double(const std::string& s, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || (end && *end != '\0'))
    throw std::runtime_error("bad numeric value for " + what + ": " + s);
  return v;
}

}  // namespace detail

/// Writes the flat key-value model document (family, coeff.*, scales,
/// metadata, loss) with 17 significant digits per value.
inline void write_model_file(const RuntimeModel& model, double loss, const std::string& path) {
  if (model.coefficients.size() != family_coefficients(model.family))
    throw std::invalid_argument("write_model_file: coefficient count does not match family");
  KvFile kv;
  kv.set("family", std::string(family_name(model.family)));
  for (std::size_t i = 0; i < model.coefficients.size(); ++i)
    kv.set("coeff." + std::to_string(i), detail::format_g17(model.coefficients[i]));
  kv.set("scale.s", detail::format_g17(model.scale_s));
  kv.set("scale.t", detail::format_g17(model.scale_t));
  kv.set("trained_on", model.trained_on);
  kv.set("loss", detail::format_g17(loss));
  write_kv(kv, path);
}

/// Reads a model document written by write_model_file.
inline std::pair<RuntimeModel, double> read_model_file(const std::string& path) {
  const KvFile kv = read_kv(path);
  RuntimeModel model;
  model.family = family_from_name(kv.get("family"));
  const std::size_t n = family_coefficients(model.family);
  model.coefficients.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string key = "coeff." + std::to_string(i);
    model.coefficients[i] = detail::parse_double(kv.get(key), key);
  }
  if (kv.find("coeff." + std::to_string(n)))
    throw std::runtime_error(path + ": too many coefficients for family " +
                             std::string(family_name(model.family)));
  model.scale_s = detail::parse_double(kv.get("scale.s"), "scale.s");
  model.scale_t = detail::parse_double(kv.get("scale.t"), "scale.t");
  model.trained_on = kv.get("trained_on");
  const double loss = detail::parse_double(kv.get("loss"), "loss");
  for (double c : model.coefficients)
    if (!std::isfinite(c)) throw std::runtime_error(path + ": non-finite coefficient");
  return {std::move(model), loss};
}

}  // namespace linkrt
