#include "geogp/gp.hpp"

#include "geogp/error.hpp"

#include <cmath>

namespace geogp {

namespace {

constexpr double kJitter = 1e-8;
constexpr double kClampFloor = -1e-10;

void check_dim(std::size_t got, std::size_t want) {
  if (got != want) {
    throw Error(ErrorCode::kShape, "shape error: expected dimension " +
                                       std::to_string(want) + ", got " +
                                       std::to_string(got));
  }
}

}  // namespace

KernelParams KernelParams::isotropic(std::size_t dim, double length_scale,
                                     double signal_variance,
                                     double noise_variance) {
  KernelParams p;
  p.signal_variance = signal_variance;
  p.length_scales.assign(dim, length_scale);
  p.noise_variance = noise_variance;
  return p;
}

void KernelParams::validate() const {
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
    throw Error(ErrorCode::kInvalidArgument, "signal variance must be positive");
  }
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
    throw Error(ErrorCode::kInvalidArgument, "noise variance must be non-negative");
  }
  if (length_scales.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "length scales must not be empty");
  }
  for (double l : length_scales) {
    if (!(l > 0.0) || std::isnan(l)) {
      throw Error(ErrorCode::kInvalidArgument, "length scales must be positive");
    }
  }
}

double kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
              const KernelParams& params) {
  const auto d = params.length_scales.size();
  check_dim(static_cast<std::size_t>(x.size()), d);
  check_dim(static_cast<std::size_t>(x2.size()), d);
  double q = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double u = (x[static_cast<Eigen::Index>(i)] - x2[static_cast<Eigen::Index>(i)]) /
                     params.length_scales[i];
    q += u * u;
  }
  return params.signal_variance * std::exp(-0.5 * q);
}

Eigen::VectorXd GramFactor::cross(const Eigen::VectorXd& x_star) const {
  check_dim(static_cast<std::size_t>(x_star.size()), dim());
  if (!x_star.allFinite()) {
    throw Error(ErrorCode::kNumeric, "numeric error: non-finite test input");
  }
  Eigen::VectorXd z(x_star.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    z[i] = x_star[i] / params.length_scales[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd sq =
      (scaled_inputs.rowwise() - z.transpose()).rowwise().squaredNorm();
  return params.signal_variance * (-0.5 * sq.array()).exp().matrix();
}

std::shared_ptr<const GramFactor> factorize(
    const std::vector<Eigen::VectorXd>& inputs, const KernelParams& params) {
  params.validate();
  if (inputs.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "at least one training input required");
  }
  const auto n = static_cast<Eigen::Index>(inputs.size());
  const auto d = static_cast<Eigen::Index>(params.length_scales.size());

  auto f = std::make_shared<GramFactor>();
  f->params = params;
  f->inputs.resize(n, d);
  f->scaled_inputs.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& x = inputs[static_cast<std::size_t>(i)];
    check_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(d));
    if (!x.allFinite()) {
      throw Error(ErrorCode::kNumeric, "numeric error: non-finite training input");
    }
    f->inputs.row(i) = x.transpose();
    for (Eigen::Index j = 0; j < d; ++j) {
      f->scaled_inputs(i, j) = x[j] / params.length_scales[static_cast<std::size_t>(j)];
    }
  }

  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    gram(i, i) = params.signal_variance;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double q = (f->scaled_inputs.row(i) - f->scaled_inputs.row(j)).squaredNorm();
      gram(i, j) = gram(j, i) = params.signal_variance * std::exp(-0.5 * q);
    }
  }

  for (int attempt = 0; attempt < 2; ++attempt) {
    const double noise = params.noise_variance + (attempt == 0 ? 0.0 : kJitter);
    Eigen::MatrixXd a = gram;
    a.diagonal().array() += noise;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      f->lower = llt.matrixL();
      f->noise_used = noise;
      f->jittered = attempt > 0;
      return f;
    }
  }
  throw Error(ErrorCode::kSingularGram,
              "singular Gram matrix; increase noise variance");
}

GPModel::GPModel(std::shared_ptr<const GramFactor> factor, Eigen::VectorXd targets)
    : factor_(std::move(factor)),
      targets_(std::move(targets)),
      clamp_count_(std::make_shared<std::atomic<std::size_t>>(0)) {
  if (!factor_) throw Error(ErrorCode::kInvalidArgument, "missing factorization");
  if (static_cast<std::size_t>(targets_.size()) != factor_->size()) {
    throw Error(ErrorCode::kShape, "shape error: target count " +
                                       std::to_string(targets_.size()) +
                                       " does not match input count " +
                                       std::to_string(factor_->size()));
  }
  if (!targets_.allFinite()) {
    throw Error(ErrorCode::kNumeric, "numeric error: non-finite targets");
  }
  const auto l = factor_->lower.triangularView<Eigen::Lower>();
  alpha_ = l.transpose().solve(l.solve(targets_));
}

Prediction GPModel::finish(const Eigen::VectorXd& k_star, const Eigen::VectorXd& v,
                           double prior) const {
  Prediction out;
  out.mean = k_star.dot(alpha_);
  double var = prior - v.squaredNorm();
  if (!std::isfinite(out.mean) || !std::isfinite(var)) {
    throw Error(ErrorCode::kNumeric, "numeric error: non-finite posterior");
  }
  if (var < 0.0) {
    if (var <= kClampFloor) {
      throw Error(ErrorCode::kNumeric, "numeric error: negative posterior variance " +
                                           std::to_string(var));
    }
    clamp_count_->fetch_add(1, std::memory_order_relaxed);
    var = 0.0;
  }
  out.variance = var;
  return out;
}

Prediction GPModel::predict(const Eigen::VectorXd& x_star) const {
  if (!fitted()) throw Error(ErrorCode::kInvalidState, "model not fitted");
  const Eigen::VectorXd k = factor_->cross(x_star);
  const Eigen::VectorXd v = factor_->lower.triangularView<Eigen::Lower>().solve(k);
  return finish(k, v, factor_->params.signal_variance);
}

GPModel fit(const std::vector<Eigen::VectorXd>& inputs,
            const std::vector<double>& targets, const KernelParams& params) {
  if (inputs.size() != targets.size()) {
    throw Error(ErrorCode::kShape, "shape error: inputs and targets differ in count");
  }
  auto factor = factorize(inputs, params);
  return GPModel(std::move(factor),
                 Eigen::Map<const Eigen::VectorXd>(targets.data(),
                                                   static_cast<Eigen::Index>(targets.size())));
}

GPModel fit(std::shared_ptr<const GramFactor> factor, Eigen::VectorXd targets) {
  return GPModel(std::move(factor), std::move(targets));
}

Prediction predict(const GPModel& model, const Eigen::VectorXd& x_star) {
  return model.predict(x_star);
}

MultiGP::MultiGP(GPModel r, GPModel cos, GPModel sin)
    : heads_{std::move(r), std::move(cos), std::move(sin)} {
  const auto& a = heads_[0].factor().inputs;
  for (int i = 1; i < 3; ++i) {
    if (heads_[i].factor().inputs != a) {
      throw Error(ErrorCode::kShape, "shape error: heads must share training inputs");
    }
  }
}

MultiGP MultiGP::fit(const std::vector<Eigen::VectorXd>& inputs,
                     const std::vector<Vec3>& targets, const KernelParams& params) {
  if (inputs.size() != targets.size()) {
    throw Error(ErrorCode::kShape, "shape error: inputs and targets differ in count");
  }
  auto factor = factorize(inputs, params);
  const auto n = static_cast<Eigen::Index>(targets.size());
  Eigen::VectorXd y[3] = {Eigen::VectorXd(n), Eigen::VectorXd(n), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int h = 0; h < 3; ++h) y[h][i] = targets[static_cast<std::size_t>(i)][h];
  }
  return MultiGP(GPModel(factor, y[0]), GPModel(factor, y[1]), GPModel(factor, y[2]));
}

MultiPrediction MultiGP::predict(const Eigen::VectorXd& x_star) const {
  // Heads share one factorization, so k(x*) and L^{-1}k(x*) are computed once.
  const auto& f = heads_[0].factor();
  const Eigen::VectorXd k = f.cross(x_star);
  const Eigen::VectorXd v = f.lower.triangularView<Eigen::Lower>().solve(k);
  MultiPrediction out;
  for (int h = 0; h < 3; ++h) {
    const auto p = heads_[h].finish(k, v, heads_[h].params().signal_variance);
    out.mu[h] = p.mean;
    out.sigma[h] = std::sqrt(p.variance);
  }
  return out;
}

MultiPrediction predict_multi(const MultiGP& model, const Eigen::VectorXd& x_star) {
  return model.predict(x_star);
}

nlohmann::json model_to_json(const GPModel& model) {
  const auto& f = model.factor();
  nlohmann::json inputs = nlohmann::json::array();
  for (Eigen::Index i = 0; i < f.inputs.rows(); ++i) {
    std::vector<double> row(f.inputs.cols());
    for (Eigen::Index j = 0; j < f.inputs.cols(); ++j) row[static_cast<std::size_t>(j)] = f.inputs(i, j);
    inputs.push_back(std::move(row));
  }
  std::vector<double> y(model.targets().data(),
                        model.targets().data() + model.targets().size());
  return {
      {"version", kModelFormatVersion},
      {"params",
       {{"signal_variance", f.params.signal_variance},
        {"length_scales", f.params.length_scales},
        {"noise_variance", f.params.noise_variance}}},
      {"train_inputs", std::move(inputs)},
      {"targets", std::move(y)},
  };
}

GPModel model_from_json(const nlohmann::json& record) {
  try {
    if (!record.contains("version")) {
      throw Error(ErrorCode::kParse, "parse error: model record has no version");
    }
    if (record.at("version").get<int>() != kModelFormatVersion) {
      throw Error(ErrorCode::kIncompatibleVersion, "incompatible model version");
    }
    KernelParams params;
    const auto& p = record.at("params");
    params.signal_variance = p.at("signal_variance").get<double>();
    params.length_scales = p.at("length_scales").get<std::vector<double>>();
    params.noise_variance = p.at("noise_variance").get<double>();
    std::vector<Eigen::VectorXd> inputs;
    for (const auto& row : record.at("train_inputs")) {
      const auto v = row.get<std::vector<double>>();
      inputs.emplace_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    return fit(inputs, record.at("targets").get<std::vector<double>>(), params);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("parse error: ") + e.what());
  }
}

}  // namespace geogp
