// Copyright 2026 The las-desk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "las/dataset.h"
#include "las/decoding.h"
#include "las/frontend.h"
#include "las/model.h"
#include "las/ngram.h"
#include "las/ops.h"
#include "las/tape.h"
#include "las/training.h"
#include "las/wordpiece.h"

namespace {

using namespace las;
using autograd::Tape;
using autograd::Tensor;

Tensor RandomTensor(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor t({r, c});
  for (std::size_t i = 0; i < r * c; ++i) t.data()[i] = u(rng);
  return t;
}

void BM_MatMulForwardBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tensor a = RandomTensor(n, n, 1), b = RandomTensor(n, n, 2);
  for (auto _ : state) {
    Tape tape;
    auto x = tape.Leaf(a), y = tape.Leaf(b);
    auto loss = autograd::Sum(autograd::Tanh(autograd::MatMul(x, y)));
    tape.Backward(loss);
    benchmark::DoNotOptimize(tape.grad(x).data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(2 * n * n * n));
}
BENCHMARK(BM_MatMulForwardBackward)->Arg(32)->Arg(64)->Arg(128);

void BM_LogMel(benchmark::State& state) {
  frontend::Waveform wave;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 0.1);
  wave.samples.resize(static_cast<std::size_t>(state.range(0)) * frontend::kSampleRate / 1000);
  for (auto& s : wave.samples) s = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(frontend::ComputeFeatures(wave).frames.data());
  state.SetLabel(std::to_string(state.range(0)) + " ms audio");
}
BENCHMARK(BM_LogMel)->Arg(1000)->Arg(5000);

struct DeskFixture {
  model::ModelConfig cfg = model::DeskConfig(40);
  autograd::ParameterSet params = model::InitParameters(cfg, 7);
  Tensor features = RandomTensor(30, 320, 4);
};

void BM_EncodeDesk(benchmark::State& state) {
  DeskFixture f;
  for (auto _ : state) {
    Tape tape;
    model::BoundModel m(tape, f.cfg, f.params, false);
    benchmark::DoNotOptimize(m.Encode(f.features).h.value().data());
  }
}
BENCHMARK(BM_EncodeDesk);

void BM_TeacherForcedLossAndGradient(benchmark::State& state) {
  DeskFixture f;
  const std::vector<int> target = {5, 9, 13, 7, 22, 30, 11, 1};
  for (auto _ : state) {
    Tape tape;
    model::BoundModel m(tape, f.cfg, f.params);
    const auto enc = m.Encode(f.features);
    auto loss = training::SmoothedCrossEntropy(m.TeacherForcedLogits(enc, target), target, 0.1);
    tape.Backward(loss);
    benchmark::DoNotOptimize(loss.value().item());
  }
}
BENCHMARK(BM_TeacherForcedLossAndGradient);

void BM_BeamSearch(benchmark::State& state) {
  DeskFixture f;
  const decoding::BeamOptions opts{static_cast<std::size_t>(state.range(0)), 1, 20};
  for (auto _ : state) {
    benchmark::DoNotOptimize(decoding::Decode(f.cfg, f.params, f.features, opts).size());
  }
}
BENCHMARK(BM_BeamSearch)->Arg(1)->Arg(4)->Arg(8);

void BM_WordEditDistance(benchmark::State& state) {
  const std::string ref = "one two three four five six seven eight nine zero oh one two three";
  const std::string hyp = "one too three for five six seven eight nine oh one three two";
  for (auto _ : state) benchmark::DoNotOptimize(decoding::WordEditDistance(ref, hyp).errors());
}
BENCHMARK(BM_WordEditDistance);

std::vector<std::string> DigitCorpus(std::size_t n) {
  std::vector<std::string> out;
  for (const auto& spec : frontend::MakeDigitSpecs(n, 11, 1, 8)) {
    std::string s;
    for (const auto& w : spec.words) s += (s.empty() ? "" : " ") + w;
    out.push_back(s);
  }
  return out;
}

void BM_WordpieceTrain(benchmark::State& state) {
  const auto corpus = DigitCorpus(2000);
  for (auto _ : state) {
    benchmark::DoNotOptimize(wordpiece::TrainWordpieces(corpus, static_cast<std::size_t>(state.range(0))).merges);
  }
}
BENCHMARK(BM_WordpieceTrain)->Arg(48)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_WordpieceSegment(benchmark::State& state) {
  const auto corpus = DigitCorpus(2000);
  const auto vocab = wordpiece::TrainWordpieces(corpus, 64).vocab;
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(wordpiece::Segment(corpus[i++ % corpus.size()], vocab).ids.size());
  }
}
BENCHMARK(BM_WordpieceSegment);

void BM_NGramSentenceScore(benchmark::State& state) {
  const auto corpus = DigitCorpus(5000);
  const auto lm = lm::NGramLM::Train(corpus, static_cast<std::size_t>(state.range(0)));
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(lm.SentenceLogProb(corpus[i++ % corpus.size()]));
}
BENCHMARK(BM_NGramSentenceScore)->Arg(3)->Arg(5);

void BM_TrainStepToy(benchmark::State& state) {
  data::ToyTaskOptions toy;
  toy.train = 64;
  toy.dev = toy.test = 1;
  const auto records = data::MakeToyManifests(toy).train;
  const auto vocab = wordpiece::GraphemeVocab(std::string_view("abcdefghijklmnopqrstuvwxyz"));
  const auto examples = data::MakeExamples(records, vocab);
  const auto mcfg = model::DeskConfig(vocab.size());
  training::TrainConfig tcfg;
  tcfg.ce_steps = 1u << 30;
  training::Trainer trainer(mcfg, tcfg, model::InitParameters(mcfg, 1), &vocab);
  for (auto _ : state) benchmark::DoNotOptimize(trainer.TrainStep(examples).loss);
}
BENCHMARK(BM_TrainStepToy)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
