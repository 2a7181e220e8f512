#include "zoopose/guidance.hpp"

#include "zoopose/error.hpp"
#include "zoopose/json_io.hpp"
#include "zoopose/text_util.hpp"

#include <toml.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>

namespace zoopose {

void validate(const ScheduleConfig& c) {
  const bool finite = std::isfinite(c.control_max) && std::isfinite(c.control_min) && std::isfinite(c.guidance_max) &&
                      std::isfinite(c.guidance_min) && std::isfinite(c.t_max) && std::isfinite(c.t_min);
  if (!finite) throw Error(Errc::invalid_argument, "schedule values must be finite");
  if (c.max_step < 1) throw Error(Errc::invalid_argument, "max_step must be positive");
  if (c.control_max < c.control_min) throw Error(Errc::invalid_argument, "control_max must be >= control_min");
  if (c.guidance_max < c.guidance_min) throw Error(Errc::invalid_argument, "guidance_max must be >= guidance_min");
  if (!(c.t_min > 0.0 && c.t_max <= 1.0 && c.t_max >= c.t_min)) {
    throw Error(Errc::invalid_argument, "need 0 < t_min <= t_max <= 1");
  }
}

namespace {

void check_step(int step, const ScheduleConfig& cfg) {
  validate(cfg);
  if (step < 0 || step > cfg.max_step) {
    throw Error(Errc::step_out_of_range,
                "step " + std::to_string(step) + " outside [0, " + std::to_string(cfg.max_step) + "]");
  }
}

}  // namespace

double control_scale(int step, const ScheduleConfig& cfg) {
  check_step(step, cfg);
  // cos(pi/2 * s) as sin(pi/2 * (1 - s)).
  const double remaining = static_cast<double>(cfg.max_step - step) / cfg.max_step;
  return std::lerp(cfg.control_min, cfg.control_max, std::sin(0.5 * std::numbers::pi * remaining));
}

double guidance_scale(int step, const ScheduleConfig& cfg) {
  check_step(step, cfg);
  return std::lerp(cfg.guidance_min, cfg.guidance_max, static_cast<double>(step) / cfg.max_step);
}

double anneal_timestep(int iter, const ScheduleConfig& cfg) {
  check_step(iter, cfg);
  return std::lerp(cfg.t_max, cfg.t_min, std::sqrt(static_cast<double>(iter) / cfg.max_step));
}

std::vector<SchedulePoint> schedule_preview(int samples, const ScheduleConfig& cfg) {
  validate(cfg);
  if (samples < 1) throw Error(Errc::invalid_argument, "steps must be >= 1");
  std::vector<SchedulePoint> out;
  out.reserve(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) {
    const int step = samples == 1 ? 0
                                  : static_cast<int>(std::llround(static_cast<double>(k) * cfg.max_step / (samples - 1)));
    out.push_back({step, control_scale(step, cfg), guidance_scale(step, cfg), anneal_timestep(step, cfg)});
  }
  return out;
}

NoiseSchedule::NoiseSchedule(int steps, double beta_start, double beta_end) {
  if (steps < 2) throw Error(Errc::invalid_argument, "noise schedule needs at least 2 steps");
  if (!(beta_start > 0.0 && beta_end < 1.0 && beta_start <= beta_end)) {
    throw Error(Errc::invalid_argument, "need 0 < beta_start <= beta_end < 1");
  }
  alpha_bar_.resize(static_cast<std::size_t>(steps));
  sigma_.resize(static_cast<std::size_t>(steps));
  double prod = 1.0;
  for (int i = 0; i < steps; ++i) {
    const double beta = beta_start + (beta_end - beta_start) * i / (steps - 1);
    prod *= 1.0 - beta;
    alpha_bar_[i] = prod;
    sigma_[i] = std::sqrt(1.0 - prod);
  }
}

int NoiseSchedule::index_of(double t) const {
  if (!(t > 0.0 && t <= 1.0)) throw Error(Errc::invalid_argument, "timestep fraction must lie in (0, 1]");
  return static_cast<int>(std::lround(t * (steps() - 1)));
}

namespace {

void require_same_shape(const Grid& a, const Grid& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream msg;
    msg << what << ": " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x" << b.cols();
    throw Error(Errc::shape_mismatch, msg.str());
  }
}

}  // namespace

TargetPullingOracle::TargetPullingOracle(NoiseSchedule schedule, Grid target)
    : TargetPullingOracle(std::move(schedule), target, target, target) {}

TargetPullingOracle::TargetPullingOracle(NoiseSchedule schedule, Grid target, Grid uncond_target,
                                         Grid control_target)
    : schedule_(std::move(schedule)),
      target_(std::move(target)),
      uncond_(std::move(uncond_target)),
      control_(std::move(control_target)) {
  require_same_shape(target_, uncond_, "unconditional target");
  require_same_shape(target_, control_, "control target");
}

Grid TargetPullingOracle::predict_noise(const Grid& z_t, double t, std::string_view, const ControlImage&,
                                        double control_scale, double guidance_scale) const {
  require_same_shape(z_t, target_, "oracle input");
  const int i = schedule_.index_of(t);
  const double sa = std::sqrt(schedule_.alpha_bar(i));
  const double s = schedule_.sigma(i);
  const Grid cond_target = target_ + control_scale * (control_ - target_);
  const Grid eps_cond = (z_t - sa * cond_target) / s;
  const Grid eps_uncond = (z_t - sa * uncond_) / s;
  return cfg_combine(eps_cond, eps_uncond, guidance_scale);
}

SdsStep sds_gradient(const ToyAsset& asset, const DenoiserOracle& oracle, const Grid& noise, double t,
                     const NoiseSchedule& sched, std::string_view prompt, const ControlImage& control,
                     double control_scale, double guidance_scale) {
  require_same_shape(asset.eta, noise, "noise");
  const int i = sched.index_of(t);
  const double sa = std::sqrt(sched.alpha_bar(i));
  const double s = sched.sigma(i);
  SdsStep out;
  out.weight = s * s;
  out.z_t = sa * asset.eta + s * noise;
  out.eps_pred = oracle.predict_noise(out.z_t, t, prompt, control, control_scale, guidance_scale);
  require_same_shape(out.eps_pred, noise, "oracle output");
  out.gradient = out.weight * (out.eps_pred - noise);
  return out;
}

Grid denoise_estimate(const Grid& z_t, const Grid& eps_pred, double t, const NoiseSchedule& sched) {
  require_same_shape(z_t, eps_pred, "noise estimate");
  const int i = sched.index_of(t);
  return (z_t - sched.sigma(i) * eps_pred) / std::sqrt(sched.alpha_bar(i));
}

RgbLoss rgb_loss(const Grid& eta, const Grid& denoised, double weight, double lambda_rgb) {
  require_same_shape(eta, denoised, "denoised image");
  if (!(lambda_rgb >= 0.0)) throw Error(Errc::invalid_argument, "lambda_rgb must be >= 0");
  const Grid diff = eta - denoised;
  return {lambda_rgb * weight * diff.square().sum(), 2.0 * lambda_rgb * weight * diff};
}

RgbLoss rgb_loss(const ToyAsset& asset, const Grid& denoised, double t, const NoiseSchedule& sched,
                 double lambda_rgb) {
  return rgb_loss(asset.eta, denoised, sched.weight(t), lambda_rgb);
}

Grid cfg_combine(const Grid& eps_cond, const Grid& eps_uncond, double guidance_scale) {
  require_same_shape(eps_cond, eps_uncond, "cfg inputs");
  return eps_uncond + guidance_scale * (eps_cond - eps_uncond);
}

ToyRun optimize_toy(const TargetPullingOracle& oracle, const ScheduleConfig& cfg, const NoiseSchedule& sched,
                    const ToyRunOptions& opt) {
  validate(cfg);
  if (opt.iters < 1) throw Error(Errc::invalid_argument, "iters must be >= 1");
  if (!(opt.step_size > 0.0) || !std::isfinite(opt.step_size)) {
    throw Error(Errc::invalid_argument, "step_size must be positive");
  }
  const Grid& target = oracle.target();
  // Separate streams for init and noise.
  std::mt19937_64 init_rng(opt.seed ^ 0x5eed'1a17'0000'0001ULL);
  std::mt19937_64 noise_rng(opt.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  ToyRun run;
  if (opt.init.size() > 0) {
    require_same_shape(opt.init, target, "initial grid");
    run.asset.eta = opt.init;
  } else {
    run.asset.eta.resize(target.rows(), target.cols());
    for (Eigen::Index k = 0; k < run.asset.eta.size(); ++k) run.asset.eta(k) = 0.5 * normal(init_rng);
  }

  Grid m = Grid::Zero(target.rows(), target.cols());
  Grid v = m;
  const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;
  const ControlImage control;
  Grid noise(target.rows(), target.cols());
  run.trace.reserve(static_cast<std::size_t>(opt.iters));

  for (int it = 0; it < opt.iters; ++it) {
    const int step = static_cast<int>(static_cast<long long>(it) * cfg.max_step / opt.iters);
    TraceRow row;
    row.iter = it;
    row.t = anneal_timestep(step, cfg);
    row.control_scale = control_scale(step, cfg);
    row.guidance_scale = guidance_scale(step, cfg);
    for (Eigen::Index k = 0; k < noise.size(); ++k) noise(k) = normal(noise_rng);

    const auto sds = sds_gradient(run.asset, oracle, noise, row.t, sched, opt.prompt, control, row.control_scale,
                                  row.guidance_scale);
    const Grid denoised = denoise_estimate(sds.z_t, sds.eps_pred, row.t, sched);
    const auto rgb = rgb_loss(run.asset.eta, denoised, sds.weight, opt.lambda_rgb);
    row.sds_norm = sds.gradient.matrix().norm();
    row.rgb_loss = rgb.loss;
    if (!std::isfinite(row.sds_norm) || !std::isfinite(row.rgb_loss) || row.sds_norm > kDivergenceLimit ||
        row.rgb_loss > kDivergenceLimit) {
      throw Error(Errc::divergence_detected, "optimization diverged at iteration " + std::to_string(it));
    }

    const Grid grad = sds.gradient + rgb.gradient;
    if (opt.optimizer == Optimizer::adam) {
      m = beta1 * m + (1.0 - beta1) * grad;
      v = beta2 * v + (1.0 - beta2) * grad.square();
      const double bc1 = 1.0 - std::pow(beta1, it + 1);
      const double bc2 = 1.0 - std::pow(beta2, it + 1);
      run.asset.eta -= opt.step_size * (m / bc1) / ((v / bc2).sqrt() + adam_eps);
    } else {
      run.asset.eta -= opt.step_size * grad;
    }
    if (!run.asset.eta.allFinite()) {
      throw Error(Errc::divergence_detected, "non-finite parameters at iteration " + std::to_string(it));
    }
    run.trace.push_back(row);
  }
  return run;
}

std::string trace_csv(const std::vector<TraceRow>& trace) {
  std::string out = "iter,t,control_scale,guidance_scale,sds_norm,rgb_loss\n";
  for (const auto& r : trace) {
    out += std::to_string(r.iter) + ',' + format_double(r.t) + ',' + format_double(r.control_scale) + ',' +
           format_double(r.guidance_scale) + ',' + format_double(r.sds_norm) + ',' + format_double(r.rgb_loss) +
           '\n';
  }
  return out;
}

Grid demo_target(int size, std::uint64_t seed) {
  if (size < 1) throw Error(Errc::invalid_argument, "grid size must be >= 1");
  std::mt19937_64 rng(seed ^ 0x7a29'e700'0000'0002ULL);
  Grid g(size, size);
  for (Eigen::Index k = 0; k < g.size(); ++k) g(k) = std::generate_canonical<double, 53>(rng);
  return g;
}

namespace {

ojson toml_to_json(const toml::node& node) {
  if (const auto* tbl = node.as_table()) {
    ojson obj = ojson::object();
    for (const auto& [key, value] : *tbl) obj[std::string(key.str())] = toml_to_json(value);
    return obj;
  }
  if (const auto* arr = node.as_array()) {
    ojson a = ojson::array();
    for (const auto& value : *arr) a.push_back(toml_to_json(value));
    return a;
  }
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  if (const auto* v = node.as_string()) return v->get();
  throw Error(Errc::schema_error, "unsupported TOML value type");
}

double get_number(const ojson& obj, const std::string& key, const std::string& path) {
  const auto& v = obj.at(key);
  if (!v.is_number()) throw Error(Errc::schema_error, path + "." + key + ": expected a number");
  return v.get<double>();
}

long long get_integer(const ojson& obj, const std::string& key, const std::string& path) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) throw Error(Errc::schema_error, path + "." + key + ": expected an integer");
  return v.get<long long>();
}

SdsDemoConfig demo_config_from_json(const ojson& doc) {
  if (!doc.is_object()) throw Error(Errc::schema_error, "$: expected an object");
  SdsDemoConfig cfg;
  for (const auto& [section, body] : doc.items()) {
    const std::string path = "$." + section;
    if (!body.is_object()) throw Error(Errc::schema_error, path + ": expected a table");
    if (section != "schedule" && section != "demo" && section != "noise") {
      throw Error(Errc::schema_error, path + ": unknown section");
    }
    for (const auto& [key, value] : body.items()) {
      if (section == "schedule") {
        auto& s = cfg.schedule;
        if (key == "control_max") s.control_max = get_number(body, key, path);
        else if (key == "control_min") s.control_min = get_number(body, key, path);
        else if (key == "guidance_max") s.guidance_max = get_number(body, key, path);
        else if (key == "guidance_min") s.guidance_min = get_number(body, key, path);
        else if (key == "t_max") s.t_max = get_number(body, key, path);
        else if (key == "t_min") s.t_min = get_number(body, key, path);
        else if (key == "max_step") s.max_step = static_cast<int>(get_integer(body, key, path));
        else throw Error(Errc::schema_error, path + "." + key + ": unknown field");
      } else if (section == "demo") {
        auto& r = cfg.run;
        if (key == "iters") r.iters = static_cast<int>(get_integer(body, key, path));
        else if (key == "step_size") r.step_size = get_number(body, key, path);
        else if (key == "lambda_rgb") r.lambda_rgb = get_number(body, key, path);
        else if (key == "seed") r.seed = static_cast<std::uint64_t>(get_integer(body, key, path));
        else if (key == "size") cfg.size = static_cast<int>(get_integer(body, key, path));
        else if (key == "prompt") {
          if (!value.is_string()) throw Error(Errc::schema_error, path + ".prompt: expected a string");
          r.prompt = value.get<std::string>();
        } else if (key == "optimizer") {
          const auto name = value.is_string() ? value.get<std::string>() : std::string();
          if (name == "gd") r.optimizer = Optimizer::gradient_descent;
          else if (name == "adam") r.optimizer = Optimizer::adam;
          else throw Error(Errc::schema_error, path + ".optimizer: expected \"gd\" or \"adam\"");
        } else {
          throw Error(Errc::schema_error, path + "." + key + ": unknown field");
        }
      } else {
        if (key == "steps") cfg.noise_steps = static_cast<int>(get_integer(body, key, path));
        else if (key == "beta_start") cfg.beta_start = get_number(body, key, path);
        else if (key == "beta_end") cfg.beta_end = get_number(body, key, path);
        else throw Error(Errc::schema_error, path + "." + key + ": unknown field");
      }
    }
  }
  try {
    validate(cfg.schedule);
  } catch (const Error& e) {
    throw Error(Errc::schema_error, std::string("$.schedule: ") + e.what());
  }
  return cfg;
}

}  // namespace

SdsDemoConfig parse_demo_config(std::string_view text, bool toml) {
  if (toml) {
    try {
      return demo_config_from_json(toml_to_json(toml::parse(text)));
    } catch (const toml::parse_error& e) {
      throw Error(Errc::parse_error, "line " + std::to_string(e.source().begin.line) + ": " +
                                         std::string(e.description()));
    }
  }
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw Error(Errc::parse_error, e.what());
  }
  return demo_config_from_json(doc);
}

SdsDemoConfig load_demo_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "file not found: " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_demo_config(buf.str(), lower(path.extension().string()) == ".toml");
}

}  // namespace zoopose
