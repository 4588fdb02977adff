#include "georeg/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "json.hpp"

#include "georeg/config.hpp"
#include "georeg/error.hpp"
#include "georeg/geo.hpp"

namespace georeg {

int heading_to_bin(double heading_degrees, int bins) {
  if (bins < 1) fail(ErrorCode::InvalidArgument, "bin count must be positive");
  return wrap_index(std::llround(wrap360(heading_degrees) * bins / 360.0), bins);
}

namespace {

struct BranchLeaves {
  std::vector<ad::Var> leaves;
  std::size_t base = 0;  // offset of the branch in the flat layout
};

ad::Var build_batch(ad::Tape& tape, std::span<const PairSample* const> batch, const TwoBranchModel& model,
                    const LossConfig& loss, std::vector<BranchLeaves>* leaves) {
  if (batch.size() < 2) fail(ErrorCode::BatchTooSmall, "training batch needs at least two pairs");
  const std::size_t ref_base = model.shared ? 0 : model.ground.size();
  std::vector<ad::Var> g, s;
  std::vector<int> gt;
  for (const PairSample* p : batch) {
    BranchLeaves gl{{}, 0}, rl{{}, ref_base};
    g.push_back(ad::normalize_frobenius(tape, build_extractor(tape, p->ground, model.ground, leaves ? &gl.leaves : nullptr)));
    s.push_back(ad::normalize_frobenius(
        tape, build_extractor(tape, p->reference, model.reference_branch(), leaves ? &rl.leaves : nullptr)));
    gt.push_back(p->gt_bin);
    if (leaves) {
      leaves->push_back(std::move(gl));
      leaves->push_back(std::move(rl));
    }
  }
  return ad::batch_loss(tape, g, s, gt, loss);
}

}  // namespace

LossAndGradient forward_backward(std::span<const PairSample* const> batch, const TwoBranchModel& model,
                                 const LossConfig& loss) {
  ad::Tape tape;
  std::vector<BranchLeaves> leaves;
  const ad::Var out = build_batch(tape, batch, model, loss, &leaves);
  tape.backward(out);

  LossAndGradient r;
  r.loss = tape.scalar(out);
  r.gradient.assign(model.parameter_count(), 0.0);
  const auto ground_layout = parameter_layout(model.ground.config);
  const auto ref_layout = parameter_layout(model.reference_branch().config);
  for (std::size_t b = 0; b < leaves.size(); ++b) {
    const auto& layout = b % 2 == 0 ? ground_layout : ref_layout;
    const auto& bl = leaves[b];
    for (std::size_t i = 0; i < layout.size(); ++i) {
      const auto& grad = tape.grad(bl.leaves[i]);
      double* dst = r.gradient.data() + bl.base + layout[i].offset;
      for (std::size_t j = 0; j < grad.size(); ++j) dst[j] += grad[j];
    }
  }
  for (double v : r.gradient)
    if (!std::isfinite(v)) fail(ErrorCode::NonFiniteGradient, "non-finite gradient entry");
  return r;
}

double batch_loss_value(std::span<const PairSample* const> batch, const TwoBranchModel& model, const LossConfig& loss) {
  ad::Tape tape;
  return tape.scalar(build_batch(tape, batch, model, loss, nullptr));
}

void validate(const OptimizerConfig& c) {
  if (!(c.learning_rate >= 0.0)) fail(ErrorCode::InvalidArgument, "learning rate must be non-negative");
  if (!(c.beta1 >= 0.0 && c.beta1 < 1.0) || !(c.beta2 >= 0.0 && c.beta2 < 1.0))
    fail(ErrorCode::InvalidArgument, "Adam betas must lie in [0, 1)");
  if (!(c.epsilon > 0.0)) fail(ErrorCode::InvalidArgument, "Adam epsilon must be positive");
  if (c.epochs < 0) fail(ErrorCode::InvalidArgument, "epochs must be non-negative");
  if (c.batch_size < 2) fail(ErrorCode::BatchTooSmall, "batch size must be at least 2");
}

Adam::Adam(std::size_t size, const OptimizerConfig& config) : config_(config), m_(size, 0.0), v_(size, 0.0) {
  validate(config_);
}

void Adam::step(std::span<double> params, std::span<const double> grad, double lr) {
  if (params.size() != m_.size() || grad.size() != m_.size()) fail(ErrorCode::ShapeMismatch, "Adam: size mismatch");
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = b1 * m_[i] + (1.0 - b1) * grad[i];
    v_[i] = b2 * v_[i] + (1.0 - b2) * grad[i] * grad[i];
    params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + config_.epsilon);
  }
}

double scheduled_learning_rate(const OptimizerConfig& c, std::size_t step, std::size_t total) {
  if (!c.cosine_schedule || total == 0) return c.learning_rate;
  return c.learning_rate * 0.5 * (1.0 + std::cos(kPi * static_cast<double>(step) / static_cast<double>(total)));
}

TrainingReport train(const std::vector<PairSample>& data, TwoBranchModel& model, const LossConfig& loss,
                     const OptimizerConfig& opt, const std::optional<std::filesystem::path>& checkpoint_dir,
                     const std::function<void(int, double)>& on_epoch) {
  validate(opt);
  validate(loss);
  if (data.size() < 2) fail(ErrorCode::BatchTooSmall, "training set needs at least two pairs");
  const std::size_t bs = static_cast<std::size_t>(opt.batch_size);
  std::size_t per_epoch = data.size() / bs;
  if (data.size() % bs >= 2) ++per_epoch;  // a trailing batch of one is dropped
  const std::size_t total = per_epoch * static_cast<std::size_t>(opt.epochs);

  if (checkpoint_dir) std::filesystem::create_directories(*checkpoint_dir);
  std::mt19937_64 rng(opt.seed);
  Adam adam(model.parameter_count(), opt);
  std::vector<double> params = model.flat();
  std::vector<std::size_t> order(data.size());
  TrainingReport report;

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    double sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start + 2 <= order.size(); start += bs) {
      const std::size_t end = std::min(order.size(), start + bs);
      std::vector<const PairSample*> batch;
      for (std::size_t i = start; i < end; ++i) batch.push_back(&data[order[i]]);
      const LossAndGradient lg = forward_backward(batch, model, loss);
      if (!std::isfinite(lg.loss)) fail(ErrorCode::DivergedLoss, "training loss is not finite");
      adam.step(params, lg.gradient, scheduled_learning_rate(opt, report.steps, total));
      model.assign_flat(params);
      report.batch_losses.push_back(lg.loss);
      ++report.steps;
      sum += lg.loss;
      ++batches;
    }
    const double mean = batches ? sum / static_cast<double>(batches) : 0.0;
    report.epoch_losses.push_back(mean);
    if (checkpoint_dir) {
      char name[64];
      std::snprintf(name, sizeof name, "checkpoint_epoch%03d.json", epoch + 1);
      save_checkpoint(*checkpoint_dir / name, model);
    }
    if (on_epoch) on_epoch(epoch + 1, mean);
  }
  return report;
}

namespace {

constexpr const char* kCheckpointFormat = "georeg-checkpoint";
constexpr int kCheckpointVersion = 1;

nlohmann::json branch_json(const ExtractorParams& p) {
  return {{"config", to_json(p.config)}, {"parameter_count", p.size()}, {"weights", p.weights}};
}

ExtractorParams branch_from_json(const nlohmann::json& j) {
  ExtractorParams p;
  p.config = extractor_config_from_json(j.at("config"));
  p.weights = j.at("weights").get<std::vector<double>>();
  const auto layout = parameter_layout(p.config);
  const std::size_t expected = layout.back().offset + layout.back().shape.size();
  if (p.weights.size() != expected || j.at("parameter_count").get<std::size_t>() != expected)
    fail(ErrorCode::ConfigMismatch, "checkpoint weight count does not match its config");
  for (double w : p.weights)
    if (!std::isfinite(w)) fail(ErrorCode::ConfigMismatch, "checkpoint holds non-finite weights");
  return p;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const TwoBranchModel& model) {
  nlohmann::json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["shared"] = model.shared;
  j["ground"] = branch_json(model.ground);
  if (model.shared)
    j["reference"] = {{"config", to_json(model.reference.config)}};
  else
    j["reference"] = branch_json(model.reference);
  std::ofstream out(path);
  if (!out) fail(ErrorCode::Io, "cannot write checkpoint " + path.string());
  out << j.dump() << '\n';
  if (!out) fail(ErrorCode::Io, "failed writing checkpoint " + path.string());
}

TwoBranchModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open checkpoint " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    if (j.at("format").get<std::string>() != kCheckpointFormat || j.at("version").get<int>() != kCheckpointVersion)
      fail(ErrorCode::ConfigMismatch, "unsupported checkpoint format in " + path.string());
    TwoBranchModel m;
    m.shared = j.at("shared").get<bool>();
    m.ground = branch_from_json(j.at("ground"));
    if (m.shared)
      m.reference.config = extractor_config_from_json(j.at("reference").at("config"));
    else
      m.reference = branch_from_json(j.at("reference"));
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Io, "malformed checkpoint " + path.string() + ": " + e.what());
  }
}

TwoBranchModel load_checkpoint(const std::filesystem::path& path, const ExtractorConfig& ground,
                               const ExtractorConfig& reference, bool shared) {
  TwoBranchModel m = load_checkpoint(path);
  if (!(m.ground.config == ground) || !(m.reference.config == reference) || m.shared != shared)
    fail(ErrorCode::ConfigMismatch, "checkpoint " + path.string() + " was trained with a different extractor config");
  return m;
}

}  // namespace georeg
