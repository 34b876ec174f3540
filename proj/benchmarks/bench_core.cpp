#include "vkctrl/assembly.hpp"
#include "vkctrl/control.hpp"
#include "vkctrl/jet.hpp"
#include "vkctrl/manufactured.hpp"
#include "vkctrl/solvers.hpp"
#include "vkctrl/sparse.hpp"
#include "vkctrl/verify.hpp"

#include <benchmark/benchmark.h>

#include <map>
#include <memory>

using namespace vkctrl;

namespace {

const Discretization& square(int level) {
  static std::map<int, std::unique_ptr<Discretization>> cache;
  auto& d = cache[level];
  if (!d) d = std::make_unique<Discretization>(RectMesh::build(DomainKind::UnitSquare, level));
  return *d;
}

PairField random_pair(const Discretization& disc) {
  return {verify::random_field(disc.n_free(), 1), verify::random_field(disc.n_free(), 2)};
}

void BM_AssembleStiffness(benchmark::State& state) {
  const Discretization& disc = square(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(assemble_a(disc));
  state.counters["n_free"] = disc.n_free();
}
BENCHMARK(BM_AssembleStiffness)->DenseRange(2, 5)->Unit(benchmark::kMillisecond);

void BM_AssembleBracketJacobian(benchmark::State& state) {
  const Discretization& disc = square(static_cast<int>(state.range(0)));
  const PairField psi = random_pair(disc);
  for (auto _ : state) benchmark::DoNotOptimize(assemble_b_jacobian(disc, psi));
  state.counters["n_free"] = disc.n_free();
}
BENCHMARK(BM_AssembleBracketJacobian)->DenseRange(2, 5)->Unit(benchmark::kMillisecond);

void BM_FactorizeTangent(benchmark::State& state) {
  const Discretization& disc = square(static_cast<int>(state.range(0)));
  const VonKarmanSystem sys(disc, Vector::Zero(disc.n_free()), Vector::Zero(disc.n_free()));
  const SparseMatrix j = sys.tangent(random_pair(disc));
  for (auto _ : state) benchmark::DoNotOptimize(Factorization::factorize(j));
  state.counters["unknowns"] = j.rows();
  state.SetLabel(Factorization::backend());
}
BENCHMARK(BM_FactorizeTangent)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

void BM_SolveAdjoint(benchmark::State& state) {
  const Discretization& disc = square(static_cast<int>(state.range(0)));
  const VonKarmanSystem sys(disc, Vector::Zero(disc.n_free()), Vector::Zero(disc.n_free()));
  const PairField psi = random_pair(disc);
  const Factorization f = Factorization::factorize(sys.tangent(psi));
  const Vector rhs = verify::random_field(2 * disc.n_free(), 3);
  for (auto _ : state) benchmark::DoNotOptimize(sys.solve_adjoint(psi, rhs, &f));
}
BENCHMARK(BM_SolveAdjoint)->DenseRange(2, 4)->Unit(benchmark::kMillisecond);

void BM_CaseJets(benchmark::State& state) {
  const CaseSpec spec = make_case(state.range(0) == 1 ? CaseId::Ex1 : CaseId::Ex2);
  const Point p = state.range(0) == 1 ? Point{0.31, 0.67} : Point{-0.4, 0.55};
  for (auto _ : state) benchmark::DoNotOptimize(spec.fields(p));
}
BENCHMARK(BM_CaseJets)->Arg(1)->Arg(2);

void BM_JetProduct(benchmark::State& state) {
  const Jet4 a = sin(Jet4::x(0.3)) * Jet4::y(0.7);
  const Jet4 b = exp(Jet4::y(0.2) * Jet4::x(0.1));
  for (auto _ : state) benchmark::DoNotOptimize(a * b);
}
BENCHMARK(BM_JetProduct);

}  // namespace

BENCHMARK_MAIN();
