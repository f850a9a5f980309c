// Copyright 2026 The eqvfl Authors
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

#include <benchmark/benchmark.h>

#include <vector>

#include "eqvfl/evidence.hpp"
#include "eqvfl/model.hpp"
#include "eqvfl/qsim.hpp"
#include "eqvfl/teleport.hpp"
#include "eqvfl/train.hpp"

namespace {

using namespace eqvfl;

ttn::TTLayerParams mnist_ttn() { return ttn::TTLayerParams({2, 7, 7, 2}, {1, 2, 2, 1}, {1, 2, 2, 2, 1}); }

void BM_ApplyRy(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    RandomStream rng(1);
    auto s = qsim::random_state(n, rng);
    const auto g = qsim::Gate::ry(n / 2, 0.3);
    for (auto _ : state) {
        qsim::apply_gate(s, g);
        benchmark::DoNotOptimize(s[0]);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(s.size()));
}
BENCHMARK(BM_ApplyRy)->Arg(4)->Arg(12)->Arg(20);

void BM_ApplyMcx(benchmark::State &state) {
    const int n = static_cast<int>(state.range(0));
    RandomStream rng(2);
    auto s = qsim::random_state(n, rng);
    std::vector<int> controls;
    for (int q = 0; q < n - 1; q += 2) controls.push_back(q);
    for (auto _ : state) {
        qsim::apply_mcx(s, controls, n - 1);
        benchmark::DoNotOptimize(s[0]);
    }
}
BENCHMARK(BM_ApplyMcx)->Arg(10)->Arg(18);

void BM_TtnForward(benchmark::State &state) {
    RandomStream rng(3);
    auto p = mnist_ttn();
    p.randomize(rng);
    std::vector<double> x(196);
    for (auto &v : x) v = rng.next_uniform();
    for (auto _ : state) benchmark::DoNotOptimize(ttn::ttn_forward(p, x));
}
BENCHMARK(BM_TtnForward);

void BM_PartyForward(benchmark::State &state) {
    RandomStream rng(4);
    auto m = model::PartyModel::create(mnist_ttn(), 2, 2);
    m.initialize(rng);
    std::vector<double> x(196);
    for (auto &v : x) v = rng.next_uniform();
    for (auto _ : state) benchmark::DoNotOptimize(model::party_forward(m, x).state[0]);
}
BENCHMARK(BM_PartyForward);

void BM_SampleGradient(benchmark::State &state) {
    train::Topology t;
    t.party_ttns.assign(4, mnist_ttn());
    auto fed = train::Federation::build(t);
    fed.initialize(5);
    RandomStream rng(6);
    std::vector<std::vector<double>> xs(4, std::vector<double>(196));
    for (auto &x : xs) {
        for (auto &v : x) v = rng.next_uniform();
    }
    train::SampleInputs in(xs.begin(), xs.end());
    const train::TrainConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(train::full_gradient(fed, in, 1, cfg).loss);
}
BENCHMARK(BM_SampleGradient)->Unit(benchmark::kMicrosecond);

void BM_FuseJointCircuit(benchmark::State &state) {
    const int K = static_cast<int>(state.range(0));
    RandomStream rng(7);
    std::vector<qsim::Statevector> states;
    for (int k = 0; k < K; ++k) states.push_back(qsim::random_state(4, rng));
    for (auto _ : state) benchmark::DoNotOptimize(model::fuse_joint_circuit(states, 2));
}
BENCHMARK(BM_FuseJointCircuit)->Arg(2)->Arg(4)->Unit(benchmark::kMicrosecond);

void BM_CcrCombine(benchmark::State &state) {
    const int C = static_cast<int>(state.range(0));
    RandomStream rng(8);
    std::vector<evidence::MassFunction> ms;
    for (int k = 0; k < 4; ++k) ms.push_back(evidence::decode_state(qsim::random_state(C, rng)));
    for (auto _ : state) benchmark::DoNotOptimize(evidence::ccr_combine(ms));
}
BENCHMARK(BM_CcrCombine)->Arg(2)->Arg(6);

void BM_TeleportRegister(benchmark::State &state) {
    RandomStream rng(9);
    const auto s = qsim::random_state(4, rng);
    const int qubits[] = {0, 1};
    for (auto _ : state) benchmark::DoNotOptimize(teleport::teleport_register(s, qubits, rng).state[0]);
}
BENCHMARK(BM_TeleportRegister);

}  // namespace

BENCHMARK_MAIN();
