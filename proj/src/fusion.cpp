#include "hdmer/fusion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "hdmer/latex.hpp"
#include "hdmer/rng.hpp"
#include "json.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoints are written as little-endian float64");

namespace hdmer {

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

Vocabulary::Vocabulary() : tokens_{"<bos>", "<eos>"} {
  index_["<bos>"] = kBos;
  index_["<eos>"] = kEos;
}

Vocabulary Vocabulary::from_tokens(const std::vector<std::string>& tokens) {
  Vocabulary v;
  for (const std::string& t : tokens) {
    if (v.index_.emplace(t, v.size()).second) v.tokens_.push_back(t);
  }
  return v;
}

Vocabulary Vocabulary::build(const std::vector<std::string>& formulas) {
  std::vector<std::string> all;
  for (const std::string& f : formulas) {
    for (const Token& t : tokenize_significant(f)) all.push_back(t.text);
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  return from_tokens(all);
}

int Vocabulary::id(const std::string& token) const {
  const auto it = index_.find(token);
  if (it == index_.end()) throw TokenOutOfVocab("token '" + token + "' is not in the vocabulary");
  return it->second;
}

std::vector<int> Vocabulary::encode(std::string_view latex) const {
  std::vector<int> ids;
  for (const Token& t : tokenize_significant(latex)) ids.push_back(id(t.text));
  return ids;
}

std::vector<int> Vocabulary::target(std::string_view latex) const {
  std::vector<int> ids = encode(latex);
  ids.push_back(kEos);
  return ids;
}

// ---------------------------------------------------------------------------
// Parameters
// ---------------------------------------------------------------------------

ToyModelParams::ToyModelParams(int vocab_size, int dim_size) : vocab(vocab_size), dim(dim_size) {
  if (vocab_size < 1 || dim_size < 1) throw std::invalid_argument("model sizes must be positive");
  const auto v = static_cast<std::size_t>(vocab_size), d = static_cast<std::size_t>(dim_size);
  values.assign(v * d + d * d + d + 2 * d * v + v, 0.0);
}

std::size_t ToyModelParams::enc_weights_offset() const {
  return static_cast<std::size_t>(vocab) * static_cast<std::size_t>(dim);
}
std::size_t ToyModelParams::enc_bias_offset() const {
  return enc_weights_offset() + static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim);
}
std::size_t ToyModelParams::dec_weights_offset() const {
  return enc_bias_offset() + static_cast<std::size_t>(dim);
}
std::size_t ToyModelParams::dec_bias_offset() const {
  return dec_weights_offset() + 2 * static_cast<std::size_t>(dim) * static_cast<std::size_t>(vocab);
}

ToyModelParams ToyModelParams::random(int vocab_size, int dim_size, std::uint64_t seed) {
  ToyModelParams p(vocab_size, dim_size);
  Rng rng(seed);
  auto fill = [&](std::size_t from, std::size_t to, double scale) {
    for (std::size_t i = from; i < to; ++i) p.values[i] = scale * (2.0 * uniform01(rng) - 1.0);
  };
  fill(p.embeddings_offset(), p.enc_weights_offset(), 0.5);
  fill(p.enc_weights_offset(), p.enc_bias_offset(), 1.0 / std::sqrt(static_cast<double>(dim_size)));
  fill(p.dec_weights_offset(), p.dec_bias_offset(), 0.1);
  return p;
}

void FusionConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in [0, 1]");
  if (n < 1) throw std::invalid_argument("n must be at least 1");
}

// ---------------------------------------------------------------------------
// Forward pieces
// ---------------------------------------------------------------------------

namespace {

void check_token(int t, const ToyModelParams& p) {
  if (t < 0 || t >= p.vocab) {
    throw TokenOutOfVocab("token id " + std::to_string(t) + " outside vocabulary of " +
                          std::to_string(p.vocab));
  }
}

struct Encoded {
  FeatureVector mean;
  FeatureVector z;
};

Encoded encode_full(const std::vector<int>& tokens, const ToyModelParams& p) {
  if (tokens.empty()) throw EmptyInput("cannot encode an empty token list");
  const auto d = static_cast<std::size_t>(p.dim);
  Encoded e{FeatureVector(d, 0.0), FeatureVector(d, 0.0)};
  for (int t : tokens) {
    check_token(t, p);
    const double* row = p.embedding(t);
    for (std::size_t j = 0; j < d; ++j) e.mean[j] += row[j];
  }
  const double inv = 1.0 / static_cast<double>(tokens.size());
  for (double& m : e.mean) m *= inv;
  const double* w = p.values.data() + p.enc_weights_offset();
  const double* b = p.values.data() + p.enc_bias_offset();
  for (std::size_t i = 0; i < d; ++i) {
    double u = b[i];
    for (std::size_t j = 0; j < d; ++j) u += w[i * d + j] * e.mean[j];
    e.z[i] = std::tanh(u);
  }
  return e;
}

// Adds the encoder's share of the gradient given dL/dz.
void encode_backward(const std::vector<int>& tokens, const Encoded& e, const FeatureVector& dz,
                     const ToyModelParams& p, double* g) {
  const auto d = static_cast<std::size_t>(p.dim);
  const double* w = p.values.data() + p.enc_weights_offset();
  double* gw = g + p.enc_weights_offset();
  double* gb = g + p.enc_bias_offset();
  FeatureVector dmean(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    const double du = dz[i] * (1.0 - e.z[i] * e.z[i]);
    gb[i] += du;
    for (std::size_t j = 0; j < d; ++j) {
      gw[i * d + j] += du * e.mean[j];
      dmean[j] += w[i * d + j] * du;
    }
  }
  const double inv = 1.0 / static_cast<double>(tokens.size());
  for (int t : tokens) {
    double* ge = g + static_cast<std::size_t>(t) * d;
    for (std::size_t j = 0; j < d; ++j) ge[j] += dmean[j] * inv;
  }
}

// One pass over the target; with `g` set, also accumulates weight * gradient
// and returns weight * dL/dz through `dz`.
double decode(const FeatureVector& z, const std::vector<int>& target, const ToyModelParams& p,
              double weight, double* g, FeatureVector* dz) {
  if (target.empty()) throw EmptyInput("decoder target is empty");
  if (z.size() != static_cast<std::size_t>(p.dim)) {
    throw DimensionMismatch("feature vector has the wrong dimension");
  }
  const auto d = static_cast<std::size_t>(p.dim);
  const auto v = static_cast<std::size_t>(p.vocab);
  const double* w = p.values.data() + p.dec_weights_offset();
  const double* b = p.values.data() + p.dec_bias_offset();
  std::vector<double> x(2 * d), logits(v), dx(2 * d);
  double nll = 0.0;
  int prev = Vocabulary::kBos;
  for (int y : target) {
    check_token(y, p);
    std::copy(z.begin(), z.end(), x.begin());
    const double* e = p.embedding(prev);
    std::copy(e, e + d, x.begin() + static_cast<std::ptrdiff_t>(d));
    std::copy(b, b + v, logits.begin());
    for (std::size_t k = 0; k < 2 * d; ++k) {
      const double xk = x[k];
      const double* row = w + k * v;
      for (std::size_t c = 0; c < v; ++c) logits[c] += row[c] * xk;
    }
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double l : logits) sum += std::exp(l - top);
    const double lse = top + std::log(sum);
    nll += lse - logits[static_cast<std::size_t>(y)];

    if (g != nullptr) {
      // logits become weight * (softmax - onehot)
      for (double& l : logits) l = weight * std::exp(l - lse);
      logits[static_cast<std::size_t>(y)] -= weight;
      double* gw = g + p.dec_weights_offset();
      double* gb = g + p.dec_bias_offset();
      for (std::size_t c = 0; c < v; ++c) gb[c] += logits[c];
      for (std::size_t k = 0; k < 2 * d; ++k) {
        const double xk = x[k];
        const double* row = w + k * v;
        double* grow = gw + k * v;
        double acc = 0.0;
        for (std::size_t c = 0; c < v; ++c) {
          grow[c] += xk * logits[c];
          acc += row[c] * logits[c];
        }
        dx[k] = acc;
      }
      for (std::size_t k = 0; k < d; ++k) (*dz)[k] += dx[k];
      double* ge = g + static_cast<std::size_t>(prev) * d;
      for (std::size_t k = 0; k < d; ++k) ge[k] += dx[d + k];
    }
    prev = y;
  }
  return nll;
}

}  // namespace

FeatureVector encode(const std::vector<int>& tokens, const ToyModelParams& params) {
  return encode_full(tokens, params).z;
}

FeatureVector fuse(const FeatureVector& z_main, const std::vector<FeatureVector>& z_subs,
                   double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in [0, 1]");
  for (const auto& z : z_subs) {
    if (z.size() != z_main.size()) throw DimensionMismatch("sub-feature dimension differs");
  }
  if (z_subs.empty()) return z_main;
  const double n = static_cast<double>(z_subs.size());
  FeatureVector out(z_main.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    double sum = 0.0;
    for (const auto& z : z_subs) sum += z[k];
    out[k] = alpha * z_main[k] + (1.0 - alpha) * (sum / n);
  }
  return out;
}

double decode_nll(const FeatureVector& z, const std::vector<int>& target,
                  const ToyModelParams& params) {
  return decode(z, target, params, 0.0, nullptr, nullptr);
}

FeatureVector decode_nll_backward(const FeatureVector& z, const std::vector<int>& target,
                                  const ToyModelParams& params, double weight,
                                  std::vector<double>& grad) {
  if (grad.size() != params.size()) throw DimensionMismatch("gradient buffer has the wrong size");
  FeatureVector dz(z.size(), 0.0);
  decode(z, target, params, weight, grad.data(), &dz);
  return dz;
}

LossBreakdown total_loss(double l_main, const std::vector<double>& l_subs, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("alpha must be in [0, 1]");
  LossBreakdown out{l_main, l_subs, l_main};
  if (l_subs.empty()) return out;
  double sum = 0.0;
  for (double l : l_subs) sum += l;
  out.l_total = alpha * l_main + (1.0 - alpha) * (sum / static_cast<double>(l_subs.size()));
  return out;
}

// ---------------------------------------------------------------------------
// Instances
// ---------------------------------------------------------------------------

EncodedInstance encode_instance(const TrainingInstance& instance, const Vocabulary& vocab) {
  const std::string source =
      instance.main.source.empty() ? serialize(instance.main) : instance.main.source;
  EncodedInstance out{vocab.encode(source), vocab.target(source), {}};
  for (std::size_t i = 0; i < instance.parts.size(); ++i) {
    const std::string& latex = part_latex(instance.parts[i]);
    EncodedPart part{vocab.encode(latex), vocab.target(latex),
                     i < instance.labels_available.size() && instance.labels_available[i]};
    if (!part.tokens.empty()) out.parts.push_back(std::move(part));
  }
  return out;
}

namespace {

// Loss of one instance; with `g` set, adds weight * gradient.
LossBreakdown instance_pass(const EncodedInstance& inst, const ToyModelParams& p, double alpha,
                            double weight, double* g) {
  const Encoded main = encode_full(inst.tokens, p);
  std::vector<Encoded> parts;
  std::vector<FeatureVector> z_parts;
  for (const EncodedPart& part : inst.parts) {
    parts.push_back(encode_full(part.tokens, p));
    z_parts.push_back(parts.back().z);
  }
  const FeatureVector fused = fuse(main.z, z_parts, alpha);

  std::size_t labeled = 0;
  for (const EncodedPart& part : inst.parts) labeled += part.labeled ? 1 : 0;
  const double w_main = labeled > 0 ? alpha : 1.0;
  const double w_sub = labeled > 0 ? (1.0 - alpha) / static_cast<double>(labeled) : 0.0;

  const auto d = static_cast<std::size_t>(p.dim);
  FeatureVector d_fused(d, 0.0);
  const double l_main = decode(fused, inst.target, p, weight * w_main, g, &d_fused);

  std::vector<double> l_subs;
  std::vector<FeatureVector> dz_parts(parts.size(), FeatureVector(d, 0.0));
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!inst.parts[i].labeled) continue;
    l_subs.push_back(decode(parts[i].z, inst.parts[i].target, p, weight * w_sub, g, &dz_parts[i]));
  }

  if (g != nullptr) {
    FeatureVector dz_main = d_fused;
    if (!parts.empty()) {
      const double share = (1.0 - alpha) / static_cast<double>(parts.size());
      for (std::size_t k = 0; k < d; ++k) dz_main[k] = alpha * d_fused[k];
      for (std::size_t i = 0; i < parts.size(); ++i) {
        for (std::size_t k = 0; k < d; ++k) dz_parts[i][k] += share * d_fused[k];
      }
    }
    encode_backward(inst.tokens, main, dz_main, p, g);
    for (std::size_t i = 0; i < parts.size(); ++i) {
      encode_backward(inst.parts[i].tokens, parts[i], dz_parts[i], p, g);
    }
  }
  return total_loss(l_main, l_subs, alpha);
}

BatchGradient reduce(std::vector<LossBreakdown> losses, const std::vector<std::vector<double>>& bufs,
                     std::size_t params, bool parallel) {
  BatchGradient out;
  out.grad.assign(params, 0.0);
  const auto n = static_cast<std::ptrdiff_t>(params);
  // Every parameter sums its per-instance contributions in instance order.
#pragma omp parallel for schedule(static) if (parallel)
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (const auto& b : bufs) acc += b[static_cast<std::size_t>(j)];
    out.grad[static_cast<std::size_t>(j)] = acc;
  }
  double sub_sum = 0.0;
  for (const LossBreakdown& l : losses) {
    out.loss += l.l_total;
    out.main_loss += l.l_main;
    for (double s : l.l_subs) sub_sum += s;
    out.sub_terms += l.l_subs.size();
  }
  const double count = static_cast<double>(losses.size());
  out.loss /= count;
  out.main_loss /= count;
  out.sub_loss = out.sub_terms > 0 ? sub_sum / static_cast<double>(out.sub_terms) : 0.0;
  return out;
}

void check_batch(const ToyModelParams& params, const std::vector<EncodedInstance>& batch,
                 const FusionConfig& config) {
  config.validate();
  if (batch.empty()) throw EmptyInput("empty batch");
  if (params.values.empty()) throw std::invalid_argument("uninitialized parameters");
}

}  // namespace

LossBreakdown instance_loss(const EncodedInstance& instance, const ToyModelParams& params,
                            double alpha) {
  return instance_pass(instance, params, alpha, 0.0, nullptr);
}

BatchGradient batch_gradient(const ToyModelParams& params,
                             const std::vector<EncodedInstance>& batch,
                             const FusionConfig& config) {
  check_batch(params, batch, config);
  const double weight = 1.0 / static_cast<double>(batch.size());
  std::vector<std::vector<double>> bufs(batch.size());
  std::vector<LossBreakdown> losses(batch.size());
  std::exception_ptr error;
  const auto n = static_cast<std::ptrdiff_t>(batch.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto b = static_cast<std::size_t>(i);
    try {
      bufs[b].assign(params.size(), 0.0);
      losses[b] = instance_pass(batch[b], params, config.alpha, weight, bufs[b].data());
    } catch (...) {
#pragma omp critical(hdmer_grad_error)
      if (!error) error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return reduce(std::move(losses), bufs, params.size(), true);
}

BatchGradient batch_gradient_serial(const ToyModelParams& params,
                                    const std::vector<EncodedInstance>& batch,
                                    const FusionConfig& config) {
  check_batch(params, batch, config);
  const double weight = 1.0 / static_cast<double>(batch.size());
  std::vector<std::vector<double>> bufs(batch.size());
  std::vector<LossBreakdown> losses(batch.size());
  for (std::size_t b = 0; b < batch.size(); ++b) {
    bufs[b].assign(params.size(), 0.0);
    losses[b] = instance_pass(batch[b], params, config.alpha, weight, bufs[b].data());
  }
  return reduce(std::move(losses), bufs, params.size(), false);
}

double batch_loss(const ToyModelParams& params, const std::vector<EncodedInstance>& batch,
                  const FusionConfig& config) {
  check_batch(params, batch, config);
  double sum = 0.0;
  for (const auto& inst : batch) sum += instance_loss(inst, params, config.alpha).l_total;
  return sum / static_cast<double>(batch.size());
}

GradientCheck gradient_check(const ToyModelParams& params,
                             const std::vector<EncodedInstance>& batch,
                             const FusionConfig& config, double h, std::size_t stride) {
  const std::vector<double> analytic = batch_gradient_serial(params, batch, config).grad;
  ToyModelParams probe = params;
  GradientCheck out;
  for (std::size_t j = 0; j < params.size(); j += std::max<std::size_t>(stride, 1)) {
    const double keep = probe.values[j];
    probe.values[j] = keep + h;
    const double up = batch_loss(probe, batch, config);
    probe.values[j] = keep - h;
    const double down = batch_loss(probe, batch, config);
    probe.values[j] = keep;
    const double numeric = (up - down) / (2.0 * h);
    const double a = analytic[j];
    const double abs_err = std::abs(a - numeric);
    const double rel = abs_err / std::max({std::abs(a), std::abs(numeric), 1e-5});
    out.max_absolute_error = std::max(out.max_absolute_error, abs_err);
    if (rel > out.max_relative_error || j == 0) {
      out.max_relative_error = rel;
      out.worst_index = j;
      out.analytic = a;
      out.numeric = numeric;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

TrainResult toy_train(const std::vector<CorpusRecord>& corpus, const SamplePlan& plan_in,
                      const FusionConfig& fusion, const TrainConfig& train) {
  fusion.validate();
  if (train.epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (train.batch_size < 1) throw std::invalid_argument("batch size must be at least 1");
  if (!(train.lr > 0.0) || !std::isfinite(train.lr)) {
    throw std::invalid_argument("learning rate must be positive");
  }
  SamplePlan plan = plan_in;
  plan.n = fusion.n;
  plan.validate();

  std::vector<FormulaAst> asts;
  std::vector<const CorpusRecord*> records;
  std::vector<std::string> texts;
  for (const CorpusRecord& r : corpus) {
    FormulaAst ast = parse(r.latex);
    if (tokenize_significant(r.latex).empty()) continue;  // nothing to render or decode
    texts.push_back(r.latex);
    texts.push_back(serialize(ast));
    asts.push_back(std::move(ast));
    records.push_back(&r);
  }
  if (asts.empty()) throw EmptyInput("corpus has no non-empty formulas");

  TrainResult result;
  result.vocab = Vocabulary::build(texts);
  result.params = ToyModelParams::random(result.vocab.size(), train.dim,
                                         derive_seed(train.seed, std::string_view("params")));
  ToyModelParams& params = result.params;

  std::vector<std::size_t> order(asts.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (int epoch = 1; epoch <= train.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(train.seed, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double total = 0.0, main = 0.0, sub = 0.0;
    std::size_t sub_terms = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(train.batch_size)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(train.batch_size));
      std::vector<EncodedInstance> batch;
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t idx = order[k];
        SamplePlan p = plan;
        p.rng_seed = derive_seed(derive_seed(plan.rng_seed, records[idx]->id),
                                 static_cast<std::uint64_t>(epoch));
        batch.push_back(encode_instance(make_training_instance(asts[idx], p), result.vocab));
      }
      const BatchGradient g = batch_gradient(params, batch, fusion);
      if (!std::isfinite(g.loss)) {
        throw NonFiniteLoss("loss became non-finite in epoch " + std::to_string(epoch) +
                            " (batch starting at " + std::to_string(start) + ")");
      }
      const double count = static_cast<double>(end - start);
      total += g.loss * count;
      main += g.main_loss * count;
      sub += g.sub_loss * static_cast<double>(g.sub_terms);
      sub_terms += g.sub_terms;
      for (std::size_t j = 0; j < params.size(); ++j) params.values[j] -= train.lr * g.grad[j];
    }
    const double n = static_cast<double>(order.size());
    result.curve.push_back(CurveRow{epoch, plan.mode, total / n, main / n,
                                    sub_terms > 0 ? sub / static_cast<double>(sub_terms) : 0.0});
  }
  return result;
}

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& curve) {
  out << "epoch,mode,mean_total_loss,mean_main_loss,mean_sub_loss\n";
  char buf[160];
  for (const CurveRow& r : curve) {
    std::snprintf(buf, sizeof buf, "%d,%s,%.6f,%.6f,%.6f\n", r.epoch, to_string(r.mode),
                  r.mean_total_loss, r.mean_main_loss, r.mean_sub_loss);
    out << buf;
  }
}

void save_checkpoint(const std::filesystem::path& path, const ToyModelParams& params,
                     const Vocabulary& vocab) {
  if (vocab.size() != params.vocab) throw DimensionMismatch("vocabulary does not match params");
  std::ofstream bin(path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot write " + path.string());
  bin.write(reinterpret_cast<const char*>(params.values.data()),
            static_cast<std::streamsize>(params.values.size() * sizeof(double)));
  if (!bin) throw std::runtime_error("failed writing " + path.string());

  const auto v = params.vocab, d = params.dim;
  nlohmann::ordered_json j;
  j["format"] = "float64-le";
  j["vocab_size"] = v;
  j["dim"] = d;
  j["count"] = params.size();
  j["blocks"] = nlohmann::ordered_json::array(
      {{{"name", "token_embeddings"}, {"shape", {v, d}}, {"offset", params.embeddings_offset()}},
       {{"name", "encoder_weights"}, {"shape", {d, d}}, {"offset", params.enc_weights_offset()}},
       {{"name", "encoder_bias"}, {"shape", {d}}, {"offset", params.enc_bias_offset()}},
       {{"name", "decoder_weights"}, {"shape", {2 * d, v}}, {"offset", params.dec_weights_offset()}},
       {{"name", "decoder_bias"}, {"shape", {v}}, {"offset", params.dec_bias_offset()}}});
  j["vocabulary"] = vocab.tokens();
  std::ofstream side(path.string() + ".json");
  if (!side) throw std::runtime_error("cannot write " + path.string() + ".json");
  side << j.dump(2) << '\n';
}

std::pair<ToyModelParams, Vocabulary> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream side(path.string() + ".json");
  if (!side) throw std::runtime_error("cannot open " + path.string() + ".json");
  const nlohmann::json j = nlohmann::json::parse(side);
  if (j.at("format") != "float64-le") throw std::runtime_error("unsupported checkpoint format");
  std::vector<std::string> tokens = j.at("vocabulary").get<std::vector<std::string>>();
  if (tokens.size() < 2 || tokens[0] != "<bos>" || tokens[1] != "<eos>") {
    throw std::runtime_error("checkpoint vocabulary lacks sentinels");
  }
  Vocabulary vocab = Vocabulary::from_tokens({tokens.begin() + 2, tokens.end()});
  ToyModelParams params(j.at("vocab_size").get<int>(), j.at("dim").get<int>());
  if (params.vocab != vocab.size() || params.size() != j.at("count").get<std::size_t>()) {
    throw std::runtime_error("checkpoint sidecar is inconsistent");
  }
  std::ifstream bin(path, std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + path.string());
  bin.read(reinterpret_cast<char*>(params.values.data()),
           static_cast<std::streamsize>(params.values.size() * sizeof(double)));
  if (bin.gcount() != static_cast<std::streamsize>(params.values.size() * sizeof(double)) ||
      bin.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error("checkpoint size does not match its sidecar");
  }
  return {std::move(params), std::move(vocab)};
}

}  // namespace hdmer
