#include "georeg/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "georeg/error.hpp"
#include "georeg/simd.hpp"

namespace georeg {

void validate(const LossConfig& config) {
  if (!(config.alpha > 0.0)) fail(ErrorCode::InvalidArgument, "loss alpha must be positive");
  if (!(config.beta >= 0.0)) fail(ErrorCode::InvalidArgument, "loss beta must be non-negative");
}

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_gt(int gt_bin, int n) {
  if (gt_bin < 0 || gt_bin >= n)
    fail(ErrorCode::InvalidArgument, "ground-truth bin " + std::to_string(gt_bin) + " outside [0, " + std::to_string(n) + ")");
}

int argmin_index(std::span<const double> v) {
  return static_cast<int>(std::min_element(v.begin(), v.end()) - v.begin());
}

int argmax_index(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

double window_distance(std::span<const double> g, std::span<const double> s, std::size_t column, int ws, int bin) {
  const std::size_t wg = g.size() / column;
  double sum = 0.0;
  for (std::size_t w = 0; w < wg; ++w) {
    const double* sc = s.data() + ((bin + w) % ws) * column;
    const double* gc = g.data() + w * column;
    for (std::size_t j = 0; j < column; ++j) {
      const double d = gc[j] - sc[j];
      sum += d * d;
    }
  }
  return std::sqrt(sum);
}

}  // namespace

double soft_margin_triplet(double d_pos, double d_neg, double alpha) { return softplus(alpha * (d_pos - d_neg)); }

double orientation_weight(const SimilarityVector& s, int gt_bin, double beta) {
  check_gt(gt_bin, s.size());
  const double smax = s.max();
  const double smin = s.min();
  const double sgt = s.scores[gt_bin];
  if (smax == smin || sgt == smax) return 1.0;
  return 1.0 + beta * (smax - sgt) / (smax - smin);
}

double aligned_distance(const FeatureMap& fg, const FeatureMap& fs) {
  const SimilarityVector s = sliding_similarity_fast(fg, fs);
  return window_distance(fg.values(), fs.values(), static_cast<std::size_t>(fs.column_size()), fs.width(), s.argmax());
}

double pair_loss(const FeatureMap& fg, const FeatureMap& fs_pos, const FeatureMap& fs_neg, int gt_bin,
                 const LossConfig& config) {
  validate(config);
  const SimilarityVector s_pos = sliding_similarity_fast(fg, fs_pos);
  const double weight = orientation_weight(s_pos, gt_bin, config.beta);
  const double d_pos = window_distance(fg.values(), fs_pos.values(), static_cast<std::size_t>(fs_pos.column_size()),
                                       fs_pos.width(), s_pos.argmax());
  const double d_neg = aligned_distance(fg, fs_neg);
  return weight * soft_margin_triplet(d_pos, d_neg, config.alpha);
}

double batch_loss(const TripletBatch& batch, const LossConfig& config) {
  validate(config);
  const std::size_t b = batch.ground_features.size();
  if (b < 2) fail(ErrorCode::BatchTooSmall, "triplet batch needs at least two pairs");
  if (batch.reference_features.size() != b || batch.gt_bins.size() != b)
    fail(ErrorCode::ShapeMismatch, "batch lists have different lengths");
  std::vector<double> dist(b * b);
  std::vector<double> weight(b);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < b; ++j) {
      const auto& fg = batch.ground_features[i];
      const auto& fs = batch.reference_features[j];
      const SimilarityVector s = sliding_similarity_fast(fg, fs);
      dist[i * b + j] =
          window_distance(fg.values(), fs.values(), static_cast<std::size_t>(fs.column_size()), fs.width(), s.argmax());
      if (i == j) weight[i] = orientation_weight(s, batch.gt_bins[i], config.beta);
    }
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < b; ++i) {
    if (config.negatives == NegativeStrategy::AllInBatch) {
      for (std::size_t j = 0; j < b; ++j) {
        if (j == i) continue;
        sum += weight[i] * soft_margin_triplet(dist[i * b + i], dist[i * b + j], config.alpha);
        ++count;
      }
    } else {
      std::size_t hardest = i == 0 ? 1 : 0;
      for (std::size_t j = 0; j < b; ++j)
        if (j != i && dist[i * b + j] < dist[i * b + hardest]) hardest = j;
      sum += weight[i] * soft_margin_triplet(dist[i * b + i], dist[i * b + hardest], config.alpha);
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

namespace ad {

Var normalize_frobenius(Tape& t, Var x) {
  const auto& xv = t.value(x);
  double sq = 0.0;
  for (double v : xv) sq += v * v;
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) fail(ErrorCode::ZeroFeature, "cannot normalize a zero feature map");
  std::vector<double> y(xv.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = xv[i] / norm;
  const int xi = x.id;
  return t.push(std::move(y), t.shape(x), [=](Tape& tp, int self) {
    const auto& dy = tp.grad(self);
    const auto& yv = tp.value(self);
    auto& dx = tp.grad(xi);
    double inner = 0.0;
    for (std::size_t i = 0; i < dy.size(); ++i) inner += dy[i] * yv[i];
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += (dy[i] - yv[i] * inner) / norm;
  });
}

Var sliding_similarity(Tape& t, Var ground, Var reference) {
  const Shape sg = t.shape(ground);
  const Shape ss = t.shape(reference);
  if (sg.d1 != ss.d1 || sg.d2 != ss.d2 || sg.d0 < 1 || sg.d0 > ss.d0)
    fail(ErrorCode::ShapeMismatch, "sliding_similarity: incompatible feature shapes");
  const int ws = ss.d0;
  const std::size_t col = static_cast<std::size_t>(ss.d1) * ss.d2;
  const std::size_t window = static_cast<std::size_t>(sg.d0) * col;
  const std::size_t ref_size = static_cast<std::size_t>(ws) * col;
  std::vector<double> ext(ref_size + (sg.d0 - 1) * col);
  const auto& sv = t.value(reference);
  std::copy(sv.begin(), sv.end(), ext.begin());
  std::copy_n(sv.begin(), (sg.d0 - 1) * col, ext.begin() + static_cast<std::ptrdiff_t>(ref_size));
  const auto& kern = simd::active();
  const double* g = t.value(ground).data();
  std::vector<double> y(ws);
  for (int i = 0; i < ws; ++i) y[i] = kern.dot(g, ext.data() + i * col, window);
  const int gi = ground.id, si = reference.id;
  return t.push(std::move(y), {ws, 1, 1}, [=, ext = std::move(ext)](Tape& tp, int self) {
    const auto& k = simd::active();
    const auto& dy = tp.grad(self);
    const double* gv = tp.value(gi).data();
    double* dg = tp.grad(gi).data();
    std::vector<double> dext(ext.size(), 0.0);
    for (int i = 0; i < ws; ++i) {
      if (dy[i] == 0.0) continue;
      k.axpy(dy[i], ext.data() + i * col, dg, window);
      k.axpy(dy[i], gv, dext.data() + i * col, window);
    }
    auto& ds = tp.grad(si);
    for (std::size_t j = 0; j < dext.size(); ++j) ds[j % ref_size] += dext[j];
  });
}

Var orientation_weight(Tape& t, Var similarity, int gt_bin, double beta) {
  const auto& s = t.value(similarity);
  check_gt(gt_bin, static_cast<int>(s.size()));
  const int imax = argmax_index(s);
  const int imin = argmin_index(s);
  const double smax = s[imax];
  const double smin = s[imin];
  const double sgt = s[gt_bin];
  if (smax == smin || sgt == smax) return t.push({1.0}, {}, [](Tape&, int) {});
  const double num = smax - sgt;
  const double den = smax - smin;
  const int si = similarity.id;
  return t.push({1.0 + beta * num / den}, {}, [=](Tape& tp, int self) {
    const double g = tp.grad(self)[0];
    auto& ds = tp.grad(si);
    ds[imax] += g * beta * (sgt - smin) / (den * den);
    ds[gt_bin] += -g * beta / den;
    ds[imin] += g * beta * num / (den * den);
  });
}

Var aligned_distance(Tape& t, Var ground, Var reference, int bin) {
  const Shape sg = t.shape(ground);
  const Shape ss = t.shape(reference);
  if (sg.d1 != ss.d1 || sg.d2 != ss.d2 || sg.d0 > ss.d0 || bin < 0 || bin >= ss.d0)
    fail(ErrorCode::ShapeMismatch, "aligned_distance: incompatible shapes or bin");
  const std::size_t col = static_cast<std::size_t>(ss.d1) * ss.d2;
  const int ws = ss.d0;
  const double d = window_distance(t.value(ground), t.value(reference), col, ws, bin);
  const int gi = ground.id, si = reference.id;
  const int wg = sg.d0;
  return t.push({d}, {}, [=](Tape& tp, int self) {
    if (d == 0.0) return;
    const double g = tp.grad(self)[0] / d;
    const auto& gv = tp.value(gi);
    const auto& sv = tp.value(si);
    auto& dg = tp.grad(gi);
    auto& ds = tp.grad(si);
    for (int w = 0; w < wg; ++w) {
      const std::size_t go = static_cast<std::size_t>(w) * col;
      const std::size_t so = static_cast<std::size_t>((bin + w) % ws) * col;
      for (std::size_t j = 0; j < col; ++j) {
        const double diff = gv[go + j] - sv[so + j];
        dg[go + j] += g * diff;
        ds[so + j] -= g * diff;
      }
    }
  });
}

Var soft_margin_triplet(Tape& t, Var d_pos, Var d_neg, double alpha) {
  const double z = alpha * (t.scalar(d_pos) - t.scalar(d_neg));
  const int pi = d_pos.id, ni = d_neg.id;
  return t.push({softplus(z)}, {}, [=](Tape& tp, int self) {
    const double g = tp.grad(self)[0] * alpha * sigmoid(z);
    tp.grad(pi)[0] += g;
    tp.grad(ni)[0] -= g;
  });
}

Var batch_loss(Tape& t, std::span<const Var> ground, std::span<const Var> reference, std::span<const int> gt_bins,
               const LossConfig& config) {
  validate(config);
  const std::size_t b = ground.size();
  if (b < 2) fail(ErrorCode::BatchTooSmall, "triplet batch needs at least two pairs");
  if (reference.size() != b || gt_bins.size() != b) fail(ErrorCode::ShapeMismatch, "batch lists have different lengths");
  std::vector<Var> dist(b * b);
  std::vector<Var> weight(b);
  for (std::size_t i = 0; i < b; ++i)
    for (std::size_t j = 0; j < b; ++j) {
      const Var s = sliding_similarity(t, ground[i], reference[j]);
      dist[i * b + j] = aligned_distance(t, ground[i], reference[j], argmax_index(t.value(s)));
      if (i == j) weight[i] = orientation_weight(t, s, gt_bins[i], config.beta);
    }
  std::vector<Var> losses;
  for (std::size_t i = 0; i < b; ++i) {
    if (config.negatives == NegativeStrategy::AllInBatch) {
      for (std::size_t j = 0; j < b; ++j) {
        if (j == i) continue;
        losses.push_back(mul_scalars(t, weight[i], soft_margin_triplet(t, dist[i * b + i], dist[i * b + j], config.alpha)));
      }
    } else {
      std::size_t hardest = i == 0 ? 1 : 0;
      for (std::size_t j = 0; j < b; ++j)
        if (j != i && t.scalar(dist[i * b + j]) < t.scalar(dist[i * b + hardest])) hardest = j;
      losses.push_back(
          mul_scalars(t, weight[i], soft_margin_triplet(t, dist[i * b + i], dist[i * b + hardest], config.alpha)));
    }
  }
  return mean_of(t, losses);
}

}  // namespace ad

}  // namespace georeg
