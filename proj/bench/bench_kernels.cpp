// Serial reference vs. OpenMP versions of the two corpus-sized kernels:
// fair/non-fair evaluation and the toy model's batch gradient.

#include <benchmark/benchmark.h>

#include "hdmer/corpus.hpp"
#include "hdmer/fair_eval.hpp"
#include "hdmer/fusion.hpp"

namespace {

using namespace hdmer;

std::vector<EvalSample> eval_corpus(std::size_t count) {
  SynthCorpusSpec spec;
  spec.count = count;
  spec.max_level = 4;
  spec.max_lines = 3;
  spec.max_chars = 96;
  spec.rng_seed = 11;
  std::vector<EvalSample> samples;
  for (const CorpusRecord& r : synth_corpus(spec)) {
    // Predict the last label so that fair and non-fair scores differ.
    samples.push_back({r.id, r.labels.back(), r.labels});
  }
  return samples;
}

void BM_EvaluateSerial(benchmark::State& state) {
  const auto samples = eval_corpus(static_cast<std::size_t>(state.range(0)));
  const auto rules = EquivalenceRuleSet::with_builtins();
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_corpus_serial(samples, rules));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_EvaluateParallel(benchmark::State& state) {
  const auto samples = eval_corpus(static_cast<std::size_t>(state.range(0)));
  const auto rules = EquivalenceRuleSet::with_builtins();
  for (auto _ : state) benchmark::DoNotOptimize(evaluate_corpus(samples, rules));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

struct GradientFixture {
  ToyModelParams params;
  std::vector<EncodedInstance> batch;
};

GradientFixture gradient_fixture(std::size_t batch_size) {
  SynthCorpusSpec spec;
  spec.count = batch_size;
  spec.max_level = 3;
  spec.max_chars = 48;
  spec.rng_seed = 5;
  const auto corpus = synth_corpus(spec);
  std::vector<std::string> texts;
  for (const auto& r : corpus) texts.push_back(r.latex);
  const Vocabulary vocab = Vocabulary::build(texts);
  GradientFixture f{ToyModelParams::random(vocab.size(), 32, 1), {}};
  SamplePlan plan;
  for (const auto& r : corpus) {
    plan.rng_seed = std::hash<std::string>{}(r.id);
    f.batch.push_back(encode_instance(make_training_instance(parse(r.latex), plan), vocab));
  }
  return f;
}

void BM_GradientSerial(benchmark::State& state) {
  const auto f = gradient_fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(batch_gradient_serial(f.params, f.batch, {}));
}

void BM_GradientParallel(benchmark::State& state) {
  const auto f = gradient_fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(batch_gradient(f.params, f.batch, {}));
}

BENCHMARK(BM_EvaluateSerial)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EvaluateParallel)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GradientSerial)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GradientParallel)->Arg(16)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
