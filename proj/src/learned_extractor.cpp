#include "georeg/learned_extractor.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "georeg/error.hpp"

namespace georeg {

int ExtractorConfig::upsample_stages() const noexcept {
  int stages = 0;
  for (int r = patch / std::max(downsample, 1); r > 1; r /= 2) ++stages;
  return stages;
}

void validate(const ExtractorConfig& c) {
  auto bad = [](const std::string& what) { fail(ErrorCode::InvalidArgument, "extractor config: " + what); };
  if (c.patch < 1 || c.image_width % c.patch != 0 || c.image_height % c.patch != 0 || c.image_width <= 0 ||
      c.image_height <= 0)
    bad("patch size must tile the image");
  if (c.downsample < 1 || c.patch % c.downsample != 0) bad("downsample must divide the patch size");
  const int ratio = c.patch / c.downsample;
  if ((ratio & (ratio - 1)) != 0) bad("patch / downsample must be a power of two (2x upsampling stages)");
  if (c.embed_dim < 1 || c.heads < 1 || c.embed_dim % c.heads != 0) bad("embed_dim must be divisible by heads");
  if (c.blocks < 0 || c.mlp_dim < 1 || c.feature_channels < 1) bad("non-positive layer size");
}

std::vector<ParamSlot> parameter_layout(const ExtractorConfig& c) {
  validate(c);
  std::vector<ParamSlot> slots;
  std::size_t offset = 0;
  auto add = [&](std::string name, ad::Shape shape, std::size_t fan_in) {
    slots.push_back({std::move(name), offset, shape, fan_in});
    offset += shape.size();
  };
  const int e = c.embed_dim;
  const int p2 = c.patch * c.patch;
  add("patch.w", {e, p2, 1}, p2);
  add("patch.b", {1, e, 1}, p2);
  add("cls", {1, e, 1}, e);
  add("pos", {c.token_count() + 1, e, 1}, e);
  for (int b = 0; b < c.blocks; ++b) {
    const std::string pre = "block" + std::to_string(b) + ".";
    add(pre + "ln1.g", {1, e, 1}, e);
    add(pre + "ln1.b", {1, e, 1}, e);
    add(pre + "qkv.w", {3 * e, e, 1}, e);
    add(pre + "qkv.b", {1, 3 * e, 1}, e);
    add(pre + "out.w", {e, e, 1}, e);
    add(pre + "out.b", {1, e, 1}, e);
    add(pre + "ln2.g", {1, e, 1}, e);
    add(pre + "ln2.b", {1, e, 1}, e);
    add(pre + "fc1.w", {c.mlp_dim, e, 1}, e);
    add(pre + "fc1.b", {1, c.mlp_dim, 1}, e);
    add(pre + "fc2.w", {e, c.mlp_dim, 1}, c.mlp_dim);
    add(pre + "fc2.b", {1, e, 1}, c.mlp_dim);
  }
  add("norm.g", {1, e, 1}, e);
  add("norm.b", {1, e, 1}, e);
  int ch = e;
  for (int s = 0; s < c.upsample_stages(); ++s) {
    const int out = std::max(ch / 2, c.feature_channels);
    const std::string pre = "dec" + std::to_string(s) + ".";
    add(pre + "w", {out, 9 * ch, 1}, 9 * ch);
    add(pre + "b", {1, out, 1}, 9 * ch);
    ch = out;
  }
  add("head.w", {c.feature_channels, 9 * ch, 1}, 9 * ch);
  add("head.b", {1, c.feature_channels, 1}, 9 * ch);
  return slots;
}

ParamSlot ExtractorParams::slot(const std::string& name) const {
  for (const auto& s : parameter_layout(config))
    if (s.name == name) return s;
  fail(ErrorCode::InvalidArgument, "no parameter named " + name);
}

std::span<double> ExtractorParams::slice(const std::string& name) {
  const ParamSlot s = slot(name);
  return {weights.data() + s.offset, s.shape.size()};
}

std::span<const double> ExtractorParams::slice(const std::string& name) const {
  const ParamSlot s = slot(name);
  return {weights.data() + s.offset, s.shape.size()};
}

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

ExtractorParams initialize_params(const ExtractorConfig& config) {
  const auto layout = parameter_layout(config);
  ExtractorParams params;
  params.config = config;
  params.weights.assign(layout.back().offset + layout.back().shape.size(), 0.0);
  std::mt19937_64 rng(config.seed);
  for (const auto& s : layout) {
    double* w = params.weights.data() + s.offset;
    const bool is_norm = s.name.find("ln") != std::string::npos || s.name.rfind("norm.", 0) == 0;
    if (is_norm) {
      std::fill_n(w, s.shape.size(), ends_with(s.name, ".g") ? 1.0 : 0.0);
      continue;
    }
    const double bound = s.name == "pos" ? 0.02 : 1.0 / std::sqrt(static_cast<double>(s.fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::size_t i = 0; i < s.shape.size(); ++i) w[i] = dist(rng);
  }
  return params;
}

ad::Var build_extractor(ad::Tape& tape, const Image& image, const ExtractorParams& params,
                        std::vector<ad::Var>* leaves) {
  const ExtractorConfig& c = params.config;
  if (image.width() != c.image_width || image.height() != c.image_height)
    fail(ErrorCode::ShapeMismatch, "image " + std::to_string(image.width()) + "x" + std::to_string(image.height()) +
                                       " does not match extractor input " + std::to_string(c.image_width) + "x" +
                                       std::to_string(c.image_height));
  const auto layout = parameter_layout(c);
  if (params.weights.size() != layout.back().offset + layout.back().shape.size())
    fail(ErrorCode::ShapeMismatch, "weight vector does not match the extractor config");

  std::vector<ad::Var> p;
  p.reserve(layout.size());
  for (const auto& s : layout) p.push_back(tape.parameter({params.weights.data() + s.offset, s.shape.size()}, s.shape));
  if (leaves) leaves->insert(leaves->end(), p.begin(), p.end());
  std::size_t next = 0;
  auto take = [&]() { return p[next++]; };

  const int P = c.patch;
  const int gw = c.grid_width();
  const int gh = c.grid_height();
  std::vector<double> patches(static_cast<std::size_t>(gw) * gh * P * P);
  for (int py = 0; py < gh; ++py)
    for (int px = 0; px < gw; ++px) {
      double* dst = patches.data() + static_cast<std::size_t>(py * gw + px) * P * P;
      for (int dy = 0; dy < P; ++dy) {
        auto row = image.row(py * P + dy);
        std::copy_n(row.begin() + px * P, P, dst + dy * P);
      }
    }
  ad::Var x = tape.constant(std::move(patches), {gw * gh, P * P, 1});

  const ad::Var patch_w = take(), patch_b = take(), cls = take(), pos = take();
  x = ad::linear(tape, x, patch_w, patch_b);
  x = ad::concat_rows(tape, cls, x);
  x = ad::add(tape, x, pos);

  const int e = c.embed_dim;
  const int dh = e / c.heads;
  const double attn_scale = 1.0 / std::sqrt(static_cast<double>(dh));
  for (int b = 0; b < c.blocks; ++b) {
    const ad::Var ln1_g = take(), ln1_b = take(), qkv_w = take(), qkv_b = take(), out_w = take(), out_b = take();
    const ad::Var ln2_g = take(), ln2_b = take(), fc1_w = take(), fc1_b = take(), fc2_w = take(), fc2_b = take();

    ad::Var h = ad::layer_norm(tape, x, ln1_g, ln1_b);
    ad::Var qkv = ad::linear(tape, h, qkv_w, qkv_b);
    std::vector<ad::Var> heads;
    for (int hd = 0; hd < c.heads; ++hd) {
      ad::Var q = ad::slice_cols(tape, qkv, hd * dh, dh);
      ad::Var k = ad::slice_cols(tape, qkv, e + hd * dh, dh);
      ad::Var v = ad::slice_cols(tape, qkv, 2 * e + hd * dh, dh);
      ad::Var att = ad::softmax_rows(tape, ad::scale(tape, ad::linear(tape, q, k), attn_scale));
      heads.push_back(ad::matmul(tape, att, v));
    }
    ad::Var merged = heads.size() == 1 ? heads[0] : ad::concat_cols(tape, heads);
    x = ad::add(tape, x, ad::linear(tape, merged, out_w, out_b));

    h = ad::layer_norm(tape, x, ln2_g, ln2_b);
    h = ad::gelu(tape, ad::linear(tape, h, fc1_w, fc1_b));
    x = ad::add(tape, x, ad::linear(tape, h, fc2_w, fc2_b));
  }
  const ad::Var norm_g = take(), norm_b = take();
  x = ad::layer_norm(tape, x, norm_g, norm_b);

  // Drop the class token; the spatial path only uses patch tokens.
  x = ad::slice_rows(tape, x, 1, c.token_count());
  x = ad::tokens_to_grid(tape, x, gw, gh);
  for (int s = 0; s < c.upsample_stages(); ++s) {
    const ad::Var w = take(), bias = take();
    x = ad::gelu(tape, ad::conv3x3(tape, x, w, bias, c.circular_width));
    x = ad::upsample2x(tape, x, c.circular_width);
  }
  const ad::Var head_w = take(), head_b = take();
  return ad::conv3x3(tape, x, head_w, head_b, c.circular_width);
}

FeatureMap to_feature_map(const ad::Tape& tape, ad::Var node) {
  const ad::Shape s = tape.shape(node);
  return FeatureMap(s.d0, s.d1, s.d2, tape.value(node));
}

FeatureMap extract_learned(const Image& image, const ExtractorParams& params) {
  ad::Tape tape;
  FeatureMap out = to_feature_map(tape, build_extractor(tape, image, params));
  if (!out.all_finite()) fail(ErrorCode::NonFiniteActivation, "learned extractor produced non-finite activations");
  return out;
}

std::vector<double> TwoBranchModel::flat() const {
  std::vector<double> out(ground.weights);
  if (!shared) out.insert(out.end(), reference.weights.begin(), reference.weights.end());
  return out;
}

void TwoBranchModel::assign_flat(std::span<const double> values) {
  if (values.size() != parameter_count()) fail(ErrorCode::ShapeMismatch, "flat parameter vector has the wrong length");
  std::copy_n(values.begin(), ground.size(), ground.weights.begin());
  if (!shared) std::copy(values.begin() + static_cast<std::ptrdiff_t>(ground.size()), values.end(), reference.weights.begin());
}

TwoBranchModel make_model(const ExtractorConfig& ground, const ExtractorConfig& reference, bool shared) {
  TwoBranchModel m;
  m.shared = shared;
  m.ground = initialize_params(ground);
  if (shared) {
    if (!(ground == reference)) fail(ErrorCode::ConfigMismatch, "shared weights need identical branch configs");
    m.reference.config = reference;
  } else {
    ExtractorConfig r = reference;
    if (r.seed == ground.seed) r.seed = ground.seed + 1;
    m.reference = initialize_params(r);
    m.reference.config = reference;
  }
  return m;
}

}  // namespace georeg
