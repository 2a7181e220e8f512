#pragma once

#include "zoopose/render.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace zoopose {

struct ScheduleConfig {
  double control_max = 1.0;
  double control_min = 0.2;
  double guidance_max = 100.0;
  double guidance_min = 50.0;
  int max_step = 10000;
  double t_max = 0.98;
  double t_min = 0.4;
};

/// Throws Error{invalid_argument}.
void validate(const ScheduleConfig& cfg);

/// Cosine decay from control_max (step 0) to control_min (step max_step).
/// All three throw Error{step_out_of_range} outside [0, max_step].
double control_scale(int step, const ScheduleConfig& cfg = {});
/// Linear ramp from guidance_min to guidance_max.
double guidance_scale(int step, const ScheduleConfig& cfg = {});
/// t_max - (t_max - t_min) * sqrt(iter / max_step).
double anneal_timestep(int iter, const ScheduleConfig& cfg = {});

struct SchedulePoint {
  int step = 0;
  double control_scale = 0.0;
  double guidance_scale = 0.0;
  double t = 0.0;
};

/// `samples` evenly spaced steps from 0 to max_step inclusive (rounded).
std::vector<SchedulePoint> schedule_preview(int samples, const ScheduleConfig& cfg = {});

/// Discrete DDPM noise schedule with linear betas.
class NoiseSchedule {
 public:
  explicit NoiseSchedule(int steps = 1000, double beta_start = 1e-4, double beta_end = 0.02);

  int steps() const { return static_cast<int>(alpha_bar_.size()); }
  /// Nearest discrete step for a timestep fraction t in (0, 1].
  int index_of(double t) const;
  double alpha_bar(int index) const { return alpha_bar_.at(index); }
  double sigma(int index) const { return sigma_.at(index); }
  double alpha_bar_at(double t) const { return alpha_bar_[index_of(t)]; }
  double sigma_at(double t) const { return sigma_[index_of(t)]; }
  /// w(t) = sigma_t^2.
  double weight(double t) const {
    const double s = sigma_at(t);
    return s * s;
  }

 private:
  std::vector<double> alpha_bar_;
  std::vector<double> sigma_;
};

using Grid = Eigen::ArrayXXd;

/// Noise predictor eps(z_t; t, text, control). Implementations must be
/// deterministic and safe to call concurrently.
class DenoiserOracle {
 public:
  virtual ~DenoiserOracle() = default;
  virtual Grid predict_noise(const Grid& z_t, double t, std::string_view text, const ControlImage& control,
                             double control_scale, double guidance_scale) const = 0;
};

/// Predicts the noise that would turn z_t back into a fixed image. The
/// conditional branch targets target + control_scale * (control_target -
/// target); the unconditional branch targets uncond_target; both are combined
/// with classifier-free guidance.
class TargetPullingOracle : public DenoiserOracle {
 public:
  TargetPullingOracle(NoiseSchedule schedule, Grid target);
  TargetPullingOracle(NoiseSchedule schedule, Grid target, Grid uncond_target, Grid control_target);

  Grid predict_noise(const Grid& z_t, double t, std::string_view text, const ControlImage& control,
                     double control_scale, double guidance_scale) const override;

  const Grid& target() const { return target_; }

 private:
  NoiseSchedule schedule_;
  Grid target_;
  Grid uncond_;
  Grid control_;
};

/// Trainable image grid; the toy renderer, encoder and decoder are identities.
struct ToyAsset {
  Grid eta;
};

struct SdsStep {
  Grid gradient;   // w(t) * (eps_pred - noise)
  Grid z_t;        // sqrt(abar) * eta + sigma * noise
  Grid eps_pred;
  double weight = 0.0;
};

/// Throws Error{shape_mismatch} or Error{invalid_argument} for t outside (0, 1].
SdsStep sds_gradient(const ToyAsset& asset, const DenoiserOracle& oracle, const Grid& noise, double t,
                     const NoiseSchedule& sched, std::string_view prompt, const ControlImage& control,
                     double control_scale = 1.0, double guidance_scale = 1.0);

/// One-step estimate (z_t - sigma * eps) / sqrt(abar).
Grid denoise_estimate(const Grid& z_t, const Grid& eps_pred, double t, const NoiseSchedule& sched);

struct RgbLoss {
  double loss = 0.0;
  Grid gradient;
};

inline constexpr double kDefaultLambdaRgb = 0.01;

/// lambda * w * ||eta - denoised||^2 and its gradient with respect to eta.
RgbLoss rgb_loss(const ToyAsset& asset, const Grid& denoised, double t, const NoiseSchedule& sched,
                 double lambda_rgb = kDefaultLambdaRgb);
RgbLoss rgb_loss(const Grid& eta, const Grid& denoised, double weight, double lambda_rgb);

/// eps_uncond + guidance_scale * (eps_cond - eps_uncond).
Grid cfg_combine(const Grid& eps_cond, const Grid& eps_uncond, double guidance_scale);

enum class Optimizer { gradient_descent, adam };

struct ToyRunOptions {
  int iters = 2000;
  double step_size = 0.1;
  double lambda_rgb = kDefaultLambdaRgb;
  std::uint64_t seed = 0;
  Optimizer optimizer = Optimizer::gradient_descent;
  std::string prompt = "a toy image";
  Grid init;  // empty: drawn from N(0, 0.5^2) with the seed, shaped like the target
};

struct TraceRow {
  int iter = 0;
  double t = 0.0;
  double control_scale = 0.0;
  double guidance_scale = 0.0;
  double sds_norm = 0.0;
  double rgb_loss = 0.0;

  friend bool operator==(const TraceRow&, const TraceRow&) = default;
};

struct ToyRun {
  ToyAsset asset;
  std::vector<TraceRow> trace;
};

inline constexpr double kDivergenceLimit = 1e6;

/// Iteration i uses schedule step floor(i * max_step / iters). Throws
/// Error{invalid_argument} for iters < 1 and Error{divergence_detected}.
ToyRun optimize_toy(const TargetPullingOracle& oracle, const ScheduleConfig& cfg, const NoiseSchedule& sched,
                    const ToyRunOptions& options);

/// CSV with header iter,t,control_scale,guidance_scale,sds_norm,rgb_loss.
std::string trace_csv(const std::vector<TraceRow>& trace);

struct SdsDemoConfig {
  ScheduleConfig schedule;
  ToyRunOptions run;
  int size = 16;
  int noise_steps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;
};

/// Reads a TOML or JSON config (by extension). Top-level tables/objects:
/// [schedule] with ScheduleConfig fields, [demo] with iters, step_size,
/// lambda_rgb, seed, optimizer ("gd" | "adam"), size, prompt, and [noise]
/// with steps, beta_start, beta_end. Throws Error{io_error},
/// Error{parse_error} or Error{schema_error}.
SdsDemoConfig load_demo_config(const std::filesystem::path& path);
SdsDemoConfig parse_demo_config(std::string_view text, bool toml);

/// Target image for the demo: uniform [0, 1] values from the seed.
Grid demo_target(int size, std::uint64_t seed);

}  // namespace zoopose
