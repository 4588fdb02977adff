#pragma once

#include <span>
#include <vector>

#include "georeg/alignment.hpp"
#include "georeg/autodiff.hpp"
#include "georeg/feature_map.hpp"

namespace georeg {

enum class NegativeStrategy { AllInBatch, Hardest };

struct LossConfig {
  double alpha = 10.0;  // slope of the soft-margin triplet term
  double beta = 5.0;    // orientation-misalignment penalty scale
  NegativeStrategy negatives = NegativeStrategy::AllInBatch;
};

void validate(const LossConfig& config);

/// log(1 + exp(alpha * (d_pos - d_neg))), evaluated without overflow.
double soft_margin_triplet(double d_pos, double d_neg, double alpha);

/// 1 + beta * (S_max - S_gt) / (S_max - S_min), in [1, 1 + beta]. A constant
/// vector, or a ground-truth bin that ties the maximum, gives exactly 1.
double orientation_weight(const SimilarityVector& s, int gt_bin, double beta);

/// Frobenius distance between fg and the reference window at fs's best
/// alignment bin for fg.
double aligned_distance(const FeatureMap& fg, const FeatureMap& fs);

/// Orientation-weighted triplet loss for one (anchor, positive, negative).
double pair_loss(const FeatureMap& fg, const FeatureMap& fs_pos, const FeatureMap& fs_neg, int gt_bin,
                 const LossConfig& config);

/// Matched ground/reference features; pair i is the positive for anchor i
/// and every other reference in the batch is a candidate negative.
struct TripletBatch {
  std::vector<FeatureMap> ground_features;
  std::vector<FeatureMap> reference_features;
  std::vector<int> gt_bins;
};

/// Mean pair loss over all B*(B-1) ordered (anchor, negative) combinations,
/// or over the B hardest negatives (smallest aligned distance, lowest index
/// on ties). Throws BatchTooSmall for B < 2.
double batch_loss(const TripletBatch& batch, const LossConfig& config);

namespace ad {

// Differentiable counterparts. Arg-max choices (best alignment bin, S_max,
// S_min, hardest negative) are taken from forward values and treated as
// constants; gradients flow through the selected entries.

Var normalize_frobenius(Tape& t, Var x);
Var sliding_similarity(Tape& t, Var ground, Var reference);
Var orientation_weight(Tape& t, Var similarity, int gt_bin, double beta);
Var aligned_distance(Tape& t, Var ground, Var reference, int bin);
Var soft_margin_triplet(Tape& t, Var d_pos, Var d_neg, double alpha);

/// Batch objective over already-normalized ground and reference nodes.
Var batch_loss(Tape& t, std::span<const Var> ground, std::span<const Var> reference, std::span<const int> gt_bins,
               const LossConfig& config);

}  // namespace ad

}  // namespace georeg
