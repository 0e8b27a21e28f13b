#include <benchmark/benchmark.h>

#include "safe_oco/baselines.hpp"
#include "safe_oco/numerics.hpp"
#include "safe_oco/rng.hpp"
#include "safe_oco/safe_sets.hpp"

using namespace safe_oco;

namespace {

SafeSetSpec random_spec(int d, int n, Rng& rng) {
  const Mat L = Mat::NullaryExpr(d, d, [&] { return uniform01(rng) - 0.5; });
  return SafeSetSpec::from_gram(Mat::NullaryExpr(n, d, [&] { return uniform01(rng) - 0.5; }), 0.5,
                                L * L.transpose() + 4.0 * Mat::Identity(d, d),
                                Vec::Constant(n, 0.8), 0.0, ActionSet::ball(d, 1.0));
}

Vec unit_vector(int d, Rng& rng) {
  Vec x = Vec::NullaryExpr(d, [&] { return uniform01(rng) - 0.5; });
  return x / x.norm();
}

}  // namespace

static void BM_Rank1Update(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Rng rng = make_stream(0, 0, StreamPurpose::Test);
  GramState g = init_gram(d, 4, 4.0);
  const Vec x = 0.1 * unit_vector(d, rng);
  const Vec y = Vec::Constant(4, 0.3);
  for (auto _ : state) {
    rank1_update_inplace(g, x, y);
    benchmark::DoNotOptimize(g.logdet_V);
  }
}
BENCHMARK(BM_Rank1Update)->Arg(2)->Arg(8)->Arg(32);

static void BM_SafeScaling(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Rng rng = make_stream(1, 0, StreamPurpose::Test);
  const SafeSetSpec spec = random_spec(d, 4, rng);
  const Vec x = unit_vector(d, rng);
  for (auto _ : state) benchmark::DoNotOptimize(safe_scaling(spec, x));
}
BENCHMARK(BM_SafeScaling)->Arg(2)->Arg(8)->Arg(32);

static void BM_ProjectPiece(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Rng rng = make_stream(2, 0, StreamPurpose::Test);
  const auto pieces = relaxed_pieces(random_spec(d, 4, rng));
  const Vec z = 2.0 * unit_vector(d, rng);
  for (auto _ : state) benchmark::DoNotOptimize(project_piece(pieces[0], z));
}
BENCHMARK(BM_ProjectPiece)->Arg(2)->Arg(8);

static void BM_ProjectPessimistic(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  Rng rng = make_stream(3, 0, StreamPurpose::Test);
  const SafeSetSpec spec = random_spec(d, 1, rng);
  const Vec z = 2.0 * unit_vector(d, rng);
  for (auto _ : state) benchmark::DoNotOptimize(project_pessimistic(spec, z));
}
BENCHMARK(BM_ProjectPessimistic)->Arg(2)->Arg(8);
