#pragma once

// A small token-level encoder/decoder used to exercise the hierarchical
// training objective: sub-formula features are fused into the main
// formula's feature vector, and the loss mixes the main decoding loss with
// the sub-formula decoding losses.
//
//   z    = tanh(W_enc * mean(E[tokens]) + b_enc)
//   Z    = alpha * z_main + (1 - alpha) * mean(z_i)
//   nll  = -sum_t log softmax(W_dec^T [z; E[y_{t-1}]] + b_dec)[y_t]
//   loss = alpha * L_main + (1 - alpha) * mean(L_i)

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hdmer/corpus.hpp"
#include "hdmer/subformula.hpp"

namespace hdmer {

class TokenOutOfVocab : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class EmptyInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonFiniteLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using FeatureVector = std::vector<double>;

/// Lexer-token vocabulary with begin/end sentinels at ids 0 and 1.
class Vocabulary {
 public:
  static constexpr int kBos = 0;
  static constexpr int kEos = 1;

  Vocabulary();
  /// Every significant token of `formulas`, sorted.
  static Vocabulary build(const std::vector<std::string>& formulas);
  static Vocabulary from_tokens(const std::vector<std::string>& tokens);

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  int id(const std::string& token) const;

  /// Token ids of `latex`, without sentinels.
  std::vector<int> encode(std::string_view latex) const;
  /// Decoder target: token ids followed by the end sentinel.
  std::vector<int> target(std::string_view latex) const;

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int> index_;
};

/// All parameters in one flat array so that optimizers, gradient checks
/// and checkpoints can treat them uniformly.
struct ToyModelParams {
  int vocab = 0;
  int dim = 0;
  std::vector<double> values;

  ToyModelParams() = default;
  ToyModelParams(int vocab_size, int dim_size);

  static ToyModelParams random(int vocab_size, int dim_size, std::uint64_t seed);

  // Offsets of each block in `values`.
  std::size_t embeddings_offset() const { return 0; }           // vocab x dim
  std::size_t enc_weights_offset() const;                       // dim x dim
  std::size_t enc_bias_offset() const;                          // dim
  std::size_t dec_weights_offset() const;                       // 2dim x vocab
  std::size_t dec_bias_offset() const;                          // vocab
  std::size_t size() const { return values.size(); }

  double* embedding(int token) { return values.data() + static_cast<std::size_t>(token) * dim; }
  const double* embedding(int token) const {
    return values.data() + static_cast<std::size_t>(token) * dim;
  }
};

struct FusionConfig {
  double alpha = 0.2;
  int n = 4;
  void validate() const;
};

/// tanh(W_enc * mean(E[tokens]) + b_enc). Throws EmptyInput.
FeatureVector encode(const std::vector<int>& tokens, const ToyModelParams& params);

/// Eq. (1). With no sub-features the main vector is returned unchanged.
FeatureVector fuse(const FeatureVector& z_main, const std::vector<FeatureVector>& z_subs,
                   double alpha);

/// Teacher-forced negative log-likelihood of `target` given `z`.
double decode_nll(const FeatureVector& z, const std::vector<int>& target,
                  const ToyModelParams& params);

struct LossBreakdown {
  double l_main = 0.0;
  std::vector<double> l_subs;
  double l_total = 0.0;
};

/// Eq. (2); with no sub-losses the total is the main loss.
LossBreakdown total_loss(double l_main, const std::vector<double>& l_subs, double alpha);

/// Adds weight * d(nll)/d(params) into `grad` and returns weight * d(nll)/dz.
FeatureVector decode_nll_backward(const FeatureVector& z, const std::vector<int>& target,
                                  const ToyModelParams& params, double weight,
                                  std::vector<double>& grad);

// ---------------------------------------------------------------------------
// Instances and batches
// ---------------------------------------------------------------------------

struct EncodedPart {
  std::vector<int> tokens;
  std::vector<int> target;
  bool labeled = false;
};

struct EncodedInstance {
  std::vector<int> tokens;
  std::vector<int> target;
  std::vector<EncodedPart> parts;
};

EncodedInstance encode_instance(const TrainingInstance& instance, const Vocabulary& vocab);

LossBreakdown instance_loss(const EncodedInstance& instance, const ToyModelParams& params,
                            double alpha);

struct BatchGradient {
  double loss = 0.0;       // mean total loss
  double main_loss = 0.0;  // mean main loss
  double sub_loss = 0.0;   // mean over all sub-formula loss terms (0 when none)
  std::size_t sub_terms = 0;
  std::vector<double> grad;  // d(mean total loss)/d(params)
};

/// Mean loss and its gradient; instances run in parallel and are reduced
/// in index order, so the result is bit-identical to the serial version.
BatchGradient batch_gradient(const ToyModelParams& params,
                             const std::vector<EncodedInstance>& batch,
                             const FusionConfig& config);
BatchGradient batch_gradient_serial(const ToyModelParams& params,
                                    const std::vector<EncodedInstance>& batch,
                                    const FusionConfig& config);

double batch_loss(const ToyModelParams& params, const std::vector<EncodedInstance>& batch,
                  const FusionConfig& config);

struct GradientCheck {
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Central differences on every `stride`-th parameter. The relative error
/// is |a - n| / max(|a|, |n|, 1e-5); the floor sits at the round-off level
/// of a double-precision central difference (eps * |loss| / h) so that
/// near-zero entries are not judged on noise.
GradientCheck gradient_check(const ToyModelParams& params,
                             const std::vector<EncodedInstance>& batch,
                             const FusionConfig& config, double h = 1e-5,
                             std::size_t stride = 1);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainConfig {
  int epochs = 50;
  double lr = 0.05;
  int batch_size = 2;
  int dim = 32;
  std::uint64_t seed = 0;
};

struct CurveRow {
  int epoch = 0;  // 1-based
  CropMode mode = CropMode::NoCrop;
  double mean_total_loss = 0.0;
  double mean_main_loss = 0.0;
  double mean_sub_loss = 0.0;
};

struct TrainResult {
  std::vector<CurveRow> curve;
  Vocabulary vocab;
  ToyModelParams params;
};

/// Mini-batch gradient descent. Crops and sub-formula samples are redrawn
/// every epoch from seeds derived from (plan seed, record id, epoch).
/// Throws NonFiniteLoss if a batch loss stops being finite.
TrainResult toy_train(const std::vector<CorpusRecord>& corpus, const SamplePlan& plan,
                      const FusionConfig& fusion, const TrainConfig& train);

/// epoch,mode,mean_total_loss,mean_main_loss,mean_sub_loss
void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& curve);

/// Raw little-endian float64 array at `path` plus `path`.json describing
/// the blocks and the vocabulary.
void save_checkpoint(const std::filesystem::path& path, const ToyModelParams& params,
                     const Vocabulary& vocab);
std::pair<ToyModelParams, Vocabulary> load_checkpoint(const std::filesystem::path& path);

}  // namespace hdmer
