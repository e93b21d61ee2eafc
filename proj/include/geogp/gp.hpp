#pragma once

#include "geogp/geometry.hpp"

#include <json.hpp>

#include <atomic>
#include <memory>
#include <utility>
#include <vector>

namespace geogp {

/// ARD squared-exponential hyperparameters. Fixed, never optimized.
struct KernelParams {
  double signal_variance = 1.0;
  std::vector<double> length_scales;  // one per input dimension
  double noise_variance = 0.01;

  /// Unit length-scales over `dim` inputs with the given variances.
  static KernelParams isotropic(std::size_t dim, double length_scale = 1.0,
                                double signal_variance = 1.0,
                                double noise_variance = 0.01);

  /// Throws kInvalidArgument unless all entries are positive (noise >= 0).
  void validate() const;
};

/// sigma_f^2 * exp(-0.5 * sum_i (x_i - x2_i)^2 / l_i^2)
double kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& x2,
              const KernelParams& params);

/// Cholesky factor of K + noise*I over a fixed training set. Shared by every
/// output head trained on the same inputs.
struct GramFactor {
  KernelParams params;
  Eigen::MatrixXd inputs;         // N x d, raw
  Eigen::MatrixXd scaled_inputs;  // N x d, divided by length-scales
  Eigen::MatrixXd lower;          // L with L L^T = K + noise_used * I
  double noise_used = 0.0;        // noise_variance plus jitter, if any
  bool jittered = false;

  std::size_t size() const { return static_cast<std::size_t>(inputs.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(inputs.cols()); }

  /// Kernel vector k(x*) against the training inputs.
  Eigen::VectorXd cross(const Eigen::VectorXd& x_star) const;
};

std::shared_ptr<const GramFactor> factorize(
    const std::vector<Eigen::VectorXd>& inputs, const KernelParams& params);

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Exact GP regression model for one scalar output. Immutable once fitted.
class GPModel {
 public:
  GPModel() = default;
  GPModel(std::shared_ptr<const GramFactor> factor, Eigen::VectorXd targets);

  Prediction predict(const Eigen::VectorXd& x_star) const;

  const KernelParams& params() const { return factor_->params; }
  const GramFactor& factor() const { return *factor_; }
  const std::shared_ptr<const GramFactor>& shared_factor() const { return factor_; }
  const Eigen::VectorXd& targets() const { return targets_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  bool fitted() const { return static_cast<bool>(factor_); }

  /// Number of predictions whose raw variance fell in (-1e-10, 0) and was
  /// clamped to zero.
  std::size_t clamped_variances() const { return clamp_count_ ? clamp_count_->load() : 0; }

 private:
  friend class MultiGP;
  // Mean and variance from precomputed k(x*) and L^{-1} k(x*).
  Prediction finish(const Eigen::VectorXd& k_star, const Eigen::VectorXd& v,
                    double prior) const;

  std::shared_ptr<const GramFactor> factor_;
  Eigen::VectorXd targets_;
  Eigen::VectorXd alpha_;
  std::shared_ptr<std::atomic<std::size_t>> clamp_count_;
};

GPModel fit(const std::vector<Eigen::VectorXd>& inputs,
            const std::vector<double>& targets, const KernelParams& params);

GPModel fit(std::shared_ptr<const GramFactor> factor, Eigen::VectorXd targets);

Prediction predict(const GPModel& model, const Eigen::VectorXd& x_star);

struct MultiPrediction {
  Vec3 mu = Vec3::Zero();
  Vec3 sigma = Vec3::Zero();  // standard deviations
};

/// Three independent heads (r, cos, sin) over one shared training set.
class MultiGP {
 public:
  MultiGP() = default;
  MultiGP(GPModel r, GPModel cos, GPModel sin);

  static MultiGP fit(const std::vector<Eigen::VectorXd>& inputs,
                     const std::vector<Vec3>& targets, const KernelParams& params);

  MultiPrediction predict(const Eigen::VectorXd& x_star) const;

  const GPModel& head(std::size_t i) const { return heads_[i]; }
  const GPModel& gp_r() const { return heads_[0]; }
  const GPModel& gp_cos() const { return heads_[1]; }
  const GPModel& gp_sin() const { return heads_[2]; }
  std::size_t input_dim() const { return heads_[0].factor().dim(); }
  std::size_t size() const { return heads_[0].factor().size(); }

 private:
  GPModel heads_[3];
};

MultiPrediction predict_multi(const MultiGP& model, const Eigen::VectorXd& x_star);

// Persistence: params plus training data, refit on load.
inline constexpr int kModelFormatVersion = 1;
nlohmann::json model_to_json(const GPModel& model);
GPModel model_from_json(const nlohmann::json& record);

}  // namespace geogp
