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

#include "eqvfl/train.hpp"

#include <algorithm>
#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "eqvfl/errors.hpp"
#include "eqvfl/qsim.hpp"
#include "eqvfl/teleport.hpp"
#include "eqvfl/ttn.hpp"

namespace eqvfl::train {

using model::FusionMode;
using model::PartyModel;
using model::Prediction;
using qsim::Statevector;

namespace {

constexpr double kHalfPi = std::numbers::pi / 2.0;

template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn &&fn) {
    const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto &t : pool) t.join();
    for (auto &e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

double ce_from_logits(std::span<const double> logits, int label) {
    const double peak = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double l : logits) z += std::exp(l - peak);
    return std::log(z) - (logits[label] - peak);
}

void check_label(int label, int num_classes) {
    if (label < 0 || label >= num_classes) {
        throw PreconditionError("label " + std::to_string(label) + " outside [0, " + std::to_string(num_classes) +
                                ")");
    }
}

std::vector<double> prob_ones(const Statevector &state, int count) {
    std::vector<double> p(count);
    for (int c = 0; c < count; ++c) p[c] = qsim::prob_one(state, c);
    return p;
}

double dot_shift(std::span<const double> upstream, std::span<const double> plus, std::span<const double> minus) {
    double g = 0.0;
    for (std::size_t c = 0; c < upstream.size(); ++c) g += upstream[c] * 0.5 * (plus[c] - minus[c]);
    return g;
}

/// Parameter-shift derivative of sum_c upstream[c] * prob_one(qubit c) for
/// every slot of `circuit`.
std::vector<double> shift_gradients(const model::AnsatzCircuit &circuit, std::vector<double> params,
                                    std::span<const double> upstream, const Statevector *initial = nullptr) {
    std::vector<double> grads(params.size(), 0.0);
    const int count = static_cast<int>(upstream.size());
    auto run = [&] {
        if (initial == nullptr) return prob_ones(circuit.run(params), count);
        Statevector s = *initial;
        circuit.apply(s, params);
        return prob_ones(s, count);
    };
    for (std::size_t j = 0; j < params.size(); ++j) {
        const double theta = params[j];
        params[j] = theta + kHalfPi;
        const auto plus = run();
        params[j] = theta - kHalfPi;
        const auto minus = run();
        params[j] = theta;
        grads[j] = dot_shift(upstream, plus, minus);
    }
    return grads;
}

struct PartyPass {
    model::PartyOutput out;
    std::vector<double> marginals;
};

PartyPass quantum_party_pass(const PartyModel &m, std::span<const double> x) {
    auto out = model::party_forward(m, x);
    auto marg = model::party_marginals(out.state, m.num_classes);
    return {std::move(out), std::move(marg)};
}

/// Gradient groups (cores..., angles) of a quantum party given dL/dp_c.
ParamGroups quantum_party_backward(const PartyModel &m, std::span<const double> x, const model::PartyCache &cache,
                                   std::span<const double> upstream) {
    const auto circuit = model::party_ansatz(m.num_qubits, m.blocks);
    const auto g = shift_gradients(circuit, model::party_circuit_params(m, cache.encoded), upstream);
    const std::size_t n = cache.encoded.size();
    std::vector<double> dy(n);
    for (std::size_t t = 0; t < n; ++t) dy[t] = 2.0 * g[t] * ttn::squash_derivative(cache.pre_activation[t]);
    auto tg = ttn::ttn_backward(m.ttn, x, dy);
    ParamGroups groups = std::move(tg.cores);
    groups.emplace_back(g.begin() + static_cast<std::ptrdiff_t>(n), g.end());
    return groups;
}

struct HeadPass {
    std::vector<double> y;  // TT output
    std::vector<double> h;  // tanh hidden
    std::vector<double> z;  // logits
};

HeadPass head_forward(const PartyModel &m, const MlpHead &head, std::span<const double> x) {
    HeadPass p;
    p.y = ttn::ttn_forward(m.ttn, x);
    p.h.assign(head.hidden, 0.0);
    for (int i = 0; i < head.hidden; ++i) {
        double a = head.b1[i];
        for (int j = 0; j < head.inputs; ++j) a += head.w1[i * head.inputs + j] * p.y[j];
        p.h[i] = std::tanh(a);
    }
    p.z.assign(head.outputs, 0.0);
    for (int o = 0; o < head.outputs; ++o) {
        double a = head.b2[o];
        for (int i = 0; i < head.hidden; ++i) a += head.w2[o * head.hidden + i] * p.h[i];
        p.z[o] = a;
    }
    return p;
}

ParamGroups head_backward(const PartyModel &m, const MlpHead &head, std::span<const double> x, const HeadPass &p,
                          std::span<const double> gz) {
    std::vector<double> gw1(head.w1.size()), gb1(head.hidden), gw2(head.w2.size()), gb2(gz.begin(), gz.end());
    std::vector<double> ga(head.hidden, 0.0);
    for (int o = 0; o < head.outputs; ++o) {
        for (int i = 0; i < head.hidden; ++i) {
            gw2[o * head.hidden + i] = gz[o] * p.h[i];
            ga[i] += head.w2[o * head.hidden + i] * gz[o];
        }
    }
    std::vector<double> gy(head.inputs, 0.0);
    for (int i = 0; i < head.hidden; ++i) {
        ga[i] *= 1.0 - p.h[i] * p.h[i];
        gb1[i] = ga[i];
        for (int j = 0; j < head.inputs; ++j) {
            gw1[i * head.inputs + j] = ga[i] * p.y[j];
            gy[j] += head.w1[i * head.inputs + j] * ga[i];
        }
    }
    auto tg = ttn::ttn_backward(m.ttn, x, gy);
    ParamGroups groups = std::move(tg.cores);
    groups.emplace_back();
    groups.push_back(std::move(gw1));
    groups.push_back(std::move(gb1));
    groups.push_back(std::move(gw2));
    groups.push_back(std::move(gb2));
    return groups;
}

std::vector<double> server_circuit_params(const Federation &fed, std::span<const std::vector<double>> marginals) {
    std::vector<double> params;
    for (const auto &m : marginals) {
        for (double p : m) params.push_back(std::numbers::pi * p);
    }
    params.insert(params.end(), fed.server.begin(), fed.server.end());
    return params;
}

int server_qubits(const Federation &fed) { return fed.num_parties() * fed.num_classes; }

/// Server logits from party outputs.
std::vector<double> server_logits(const Federation &fed, std::span<const std::vector<double>> outputs,
                                  std::span<const Statevector> states, FusionMode mode) {
    const int C = fed.num_classes;
    const int K = fed.num_parties();
    switch (fed.kind) {
        case ModelKind::EviQVFL:
            if (mode == FusionMode::Joint) return model::fuse_joint_circuit(states, C);
            return model::fuse_factorized(outputs);
        case ModelKind::MeasureThenAverage:
        case ModelKind::ClassicalAverage: {
            std::vector<double> mean(C, 0.0);
            for (const auto &o : outputs) {
                for (int c = 0; c < C; ++c) mean[c] += o[c] / K;
            }
            return mean;
        }
        case ModelKind::ClassicalFuse: {
            std::vector<double> logits(C, 0.0);
            for (int c = 0; c < C; ++c) {
                for (int k = 0; k < K; ++k) {
                    for (int i = 0; i < C; ++i) logits[c] += fed.server[c * K * C + k * C + i] * outputs[k][i];
                }
            }
            return logits;
        }
        case ModelKind::MeasureThenVqc: {
            const auto circuit = server_ansatz(server_qubits(fed), fed.server_blocks);
            return prob_ones(circuit.run(server_circuit_params(fed, outputs)), C);
        }
    }
    throw PreconditionError("unknown model kind");
}

bool is_classical(ModelKind kind) {
    return kind == ModelKind::ClassicalAverage || kind == ModelKind::ClassicalFuse;
}

void check_inputs(const Federation &fed, const SampleInputs &inputs) {
    if (static_cast<int>(inputs.size()) != fed.num_parties()) {
        throw PreconditionError("expected " + std::to_string(fed.num_parties()) + " party inputs, got " +
                                std::to_string(inputs.size()));
    }
}

SampleResult parameter_shift_gradient(const Federation &fed, const SampleInputs &inputs, int label) {
    const int K = fed.num_parties();
    const int C = fed.num_classes;
    SampleResult r;
    r.grads.parties.resize(K);

    if (is_classical(fed.kind)) {
        std::vector<HeadPass> passes;
        for (int k = 0; k < K; ++k) {
            passes.push_back(head_forward(fed.parties[k], fed.heads[k], inputs[k]));
            r.party_outputs.push_back(passes.back().z);
        }
        const auto logits = server_logits(fed, r.party_outputs, {}, FusionMode::Factorized);
        r.prediction = model::predict(logits);
        r.loss = ce_from_logits(logits, label);
        std::vector<double> gl = r.prediction.probabilities;
        gl[label] -= 1.0;
        if (fed.kind == ModelKind::ClassicalFuse) r.grads.server.emplace_back(fed.server.size(), 0.0);
        for (int k = 0; k < K; ++k) {
            std::vector<double> gz(C, 0.0);
            if (fed.kind == ModelKind::ClassicalAverage) {
                for (int c = 0; c < C; ++c) gz[c] = gl[c] / K;
            } else {
                for (int c = 0; c < C; ++c) {
                    for (int i = 0; i < C; ++i) {
                        const std::size_t w = c * K * C + k * C + i;
                        gz[i] += gl[c] * fed.server[w];
                        r.grads.server[0][w] = gl[c] * passes[k].z[i];
                    }
                }
            }
            r.grads.parties[k] = head_backward(fed.parties[k], fed.heads[k], inputs[k], passes[k], gz);
        }
        return r;
    }

    std::vector<PartyPass> passes;
    for (int k = 0; k < K; ++k) {
        passes.push_back(quantum_party_pass(fed.parties[k], inputs[k]));
        r.party_outputs.push_back(passes.back().marginals);
    }
    const auto logits = server_logits(fed, r.party_outputs, {}, FusionMode::Factorized);
    r.prediction = model::predict(logits);
    r.loss = ce_from_logits(logits, label);
    std::vector<double> gl = r.prediction.probabilities;
    gl[label] -= 1.0;

    std::vector<std::vector<double>> gm(K, std::vector<double>(C, 0.0));
    switch (fed.kind) {
        case ModelKind::EviQVFL:
            for (int k = 0; k < K; ++k) {
                for (int c = 0; c < C; ++c) {
                    double others = 1.0;
                    for (int j = 0; j < K; ++j) {
                        if (j != k) others *= r.party_outputs[j][c];
                    }
                    gm[k][c] = gl[c] * others;
                }
            }
            break;
        case ModelKind::MeasureThenAverage:
            for (int k = 0; k < K; ++k) {
                for (int c = 0; c < C; ++c) gm[k][c] = gl[c] / K;
            }
            break;
        case ModelKind::MeasureThenVqc: {
            const auto circuit = server_ansatz(server_qubits(fed), fed.server_blocks);
            const auto g = shift_gradients(circuit, server_circuit_params(fed, r.party_outputs), gl);
            for (int k = 0; k < K; ++k) {
                for (int c = 0; c < C; ++c) gm[k][c] = std::numbers::pi * g[k * C + c];
            }
            r.grads.server.emplace_back(g.begin() + K * C, g.end());
            break;
        }
        default:
            throw PreconditionError("unsupported model kind");
    }
    for (int k = 0; k < K; ++k) {
        r.grads.parties[k] = quantum_party_backward(fed.parties[k], inputs[k], passes[k].out.cache, gm[k]);
    }
    return r;
}

SampleResult finite_difference_gradient(const Federation &fed, const SampleInputs &inputs, int label, double h) {
    SampleResult r = forward(fed, inputs, label);
    Federation work = fed;
    auto loss_at = [&] { return forward(work, inputs, label).loss; };
    const int K = fed.num_parties();
    r.grads.parties.resize(K);
    for (int k = 0; k < K; ++k) {
        ParamGroups params = fed.party_params(k);
        ParamGroups grads;
        for (std::size_t g = 0; g < params.size(); ++g) {
            grads.emplace_back(params[g].size(), 0.0);
            for (std::size_t i = 0; i < params[g].size(); ++i) {
                const double v = params[g][i];
                params[g][i] = v + h;
                work.set_party_params(k, params);
                const double lp = loss_at();
                params[g][i] = v - h;
                work.set_party_params(k, params);
                const double lm = loss_at();
                params[g][i] = v;
                work.set_party_params(k, params);
                grads[g][i] = (lp - lm) / (2.0 * h);
            }
        }
        r.grads.parties[k] = std::move(grads);
    }
    if (!fed.server.empty()) {
        std::vector<double> g(fed.server.size());
        for (std::size_t i = 0; i < fed.server.size(); ++i) {
            const double v = work.server[i];
            work.server[i] = v + h;
            const double lp = loss_at();
            work.server[i] = v - h;
            const double lm = loss_at();
            work.server[i] = v;
            g[i] = (lp - lm) / (2.0 * h);
        }
        r.grads.server.push_back(std::move(g));
    }
    return r;
}

void add_into(ParamGroups &acc, const ParamGroups &g) {
    if (acc.empty()) {
        acc = g;
        return;
    }
    for (std::size_t i = 0; i < g.size(); ++i) {
        for (std::size_t j = 0; j < g[i].size(); ++j) acc[i][j] += g[i][j];
    }
}

void scale(ParamGroups &groups, double s) {
    for (auto &g : groups) {
        for (auto &v : g) v *= s;
    }
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

GradMode parse_grad_mode(const std::string &name) {
    if (name == "parameter_shift") return GradMode::ParameterShift;
    if (name == "finite_difference") return GradMode::FiniteDifference;
    throw PreconditionError("unknown gradient mode '" + name + "'");
}

std::string to_string(GradMode mode) {
    return mode == GradMode::ParameterShift ? "parameter_shift" : "finite_difference";
}

ModelKind parse_model_kind(const std::string &name) {
    if (name == "eviqvfl") return ModelKind::EviQVFL;
    if (name == "classical_average") return ModelKind::ClassicalAverage;
    if (name == "classical_fuse") return ModelKind::ClassicalFuse;
    if (name == "measure_then_average") return ModelKind::MeasureThenAverage;
    if (name == "measure_then_vqc") return ModelKind::MeasureThenVqc;
    throw PreconditionError("unknown model kind '" + name + "'");
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::EviQVFL: return "eviqvfl";
        case ModelKind::ClassicalAverage: return "classical_average";
        case ModelKind::ClassicalFuse: return "classical_fuse";
        case ModelKind::MeasureThenAverage: return "measure_then_average";
        case ModelKind::MeasureThenVqc: return "measure_then_vqc";
    }
    return "unknown";
}

bool has_quantum_output(ModelKind kind) { return !is_classical(kind); }

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError("train.learning_rate", "must be a positive finite number");
    }
    if (batch_size < 1) throw ConfigError("train.batch_size", "must be >= 1");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0)) throw ConfigError("train.adam_betas[0]", "must lie in [0, 1)");
    if (!(adam_beta2 >= 0.0 && adam_beta2 < 1.0)) throw ConfigError("train.adam_betas[1]", "must lie in [0, 1)");
    if (!(adam_epsilon > 0.0)) throw ConfigError("train.adam_epsilon", "must be positive");
    if (!(fd_step > 0.0)) throw ConfigError("train.fd_step", "must be positive");
    if (threads < 1) throw ConfigError("train.threads", "must be >= 1");
}

OptimizerState OptimizerState::zeros_like(const ParamGroups &params) {
    OptimizerState s;
    for (const auto &g : params) {
        s.first_moment.emplace_back(g.size(), 0.0);
        s.second_moment.emplace_back(g.size(), 0.0);
    }
    return s;
}

void adam_step(OptimizerState &state, ParamGroups &params, const ParamGroups &grads, const TrainConfig &config) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
        params.size() != state.second_moment.size()) {
        throw PreconditionError("optimizer group count mismatch");
    }
    for (std::size_t g = 0; g < params.size(); ++g) {
        if (params[g].size() != grads[g].size() || params[g].size() != state.first_moment[g].size() ||
            params[g].size() != state.second_moment[g].size()) {
            throw PreconditionError("optimizer shape mismatch in group " + std::to_string(g));
        }
    }
    ++state.step_count;
    const double b1 = config.adam_beta1;
    const double b2 = config.adam_beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));
    for (std::size_t g = 0; g < params.size(); ++g) {
        auto &m = state.first_moment[g];
        auto &v = state.second_moment[g];
        for (std::size_t i = 0; i < params[g].size(); ++i) {
            const double gi = grads[g][i];
            m[i] = b1 * m[i] + (1.0 - b1) * gi;
            v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
            params[g][i] -= config.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + config.adam_epsilon);
        }
    }
}

double ce_loss(const Prediction &prediction, std::span<const double> label) {
    if (label.size() != prediction.probabilities.size()) throw PreconditionError("label length mismatch");
    int hot = -1;
    for (std::size_t c = 0; c < label.size(); ++c) {
        if (label[c] == 1.0 && hot < 0) {
            hot = static_cast<int>(c);
        } else if (label[c] != 0.0) {
            throw PreconditionError("label is not one-hot");
        }
    }
    if (hot < 0) throw PreconditionError("label is not one-hot");
    return -std::log(prediction.probabilities[hot]);
}

std::size_t MlpHead::param_count(int inputs, int hidden, int outputs) {
    return static_cast<std::size_t>(hidden) * inputs + hidden + static_cast<std::size_t>(outputs) * hidden + outputs;
}

MlpHead MlpHead::create(int inputs, int hidden, int outputs) {
    if (inputs < 1 || hidden < 1 || outputs < 1) throw PreconditionError("MLP dimensions must be positive");
    MlpHead h{inputs, hidden, outputs, {}, {}, {}, {}};
    h.w1.assign(static_cast<std::size_t>(hidden) * inputs, 0.0);
    h.b1.assign(hidden, 0.0);
    h.w2.assign(static_cast<std::size_t>(outputs) * hidden, 0.0);
    h.b2.assign(outputs, 0.0);
    return h;
}

model::AnsatzCircuit server_ansatz(int num_qubits, int blocks) { return model::party_ansatz(num_qubits, blocks); }

Federation Federation::build(const Topology &topology) {
    if (topology.party_ttns.empty()) throw PreconditionError("topology has no parties");
    Federation fed;
    fed.kind = topology.kind;
    fed.num_classes = topology.num_classes;
    const int K = static_cast<int>(topology.party_ttns.size());
    const int C = topology.num_classes;
    for (const auto &t : topology.party_ttns) {
        if (is_classical(fed.kind)) {
            auto party = PartyModel::create(t, C, 0);
            const int n = party.num_qubits;
            const std::size_t budget = ttn::ttn_param_count(t) + static_cast<std::size_t>(topology.vqc_blocks) * n * 3;
            int hidden = topology.mlp_hidden;
            if (hidden <= 0) {
                hidden = 1;
                while (ttn::ttn_param_count(t) + MlpHead::param_count(n, hidden + 1, C) <= budget) ++hidden;
            }
            fed.heads.push_back(MlpHead::create(n, hidden, C));
            fed.parties.push_back(std::move(party));
        } else {
            fed.parties.push_back(PartyModel::create(t, C, topology.vqc_blocks));
        }
    }
    if (fed.kind == ModelKind::ClassicalFuse) fed.server.assign(static_cast<std::size_t>(C) * K * C, 0.0);
    if (fed.kind == ModelKind::MeasureThenVqc) {
        if (K * C > qsim::kDefaultMaxQubits) throw CapacityError("server circuit needs more than 24 qubits");
        fed.server_blocks = topology.server_vqc_blocks;
        fed.server.assign(static_cast<std::size_t>(fed.server_blocks) * K * C * 3, 0.0);
    }
    return fed;
}

void Federation::initialize(std::uint64_t seed) {
    for (int k = 0; k < num_parties(); ++k) {
        RandomStream rng(seed, 0x9A27ULL, static_cast<std::uint64_t>(k));
        parties[k].initialize(rng);
        if (!heads.empty()) {
            auto &h = heads[k];
            const double s1 = 1.0 / std::sqrt(static_cast<double>(h.inputs));
            const double s2 = 1.0 / std::sqrt(static_cast<double>(h.hidden));
            for (auto &w : h.w1) w = rng.uniform(-s1, s1);
            for (auto &w : h.w2) w = rng.uniform(-s2, s2);
            std::fill(h.b1.begin(), h.b1.end(), 0.0);
            std::fill(h.b2.begin(), h.b2.end(), 0.0);
        }
    }
    RandomStream rng(seed, 0x5E4EULL);
    if (kind == ModelKind::ClassicalFuse) {
        const double s = 1.0 / std::sqrt(static_cast<double>(num_parties() * num_classes));
        for (auto &w : server) w = rng.uniform(-s, s);
    } else {
        for (auto &a : server) a = rng.uniform(-std::numbers::pi / 8.0, std::numbers::pi / 8.0);
    }
}

ParamGroups Federation::party_params(int k) const {
    const auto &p = parties.at(k);
    ParamGroups groups = p.ttn.cores();
    groups.push_back(p.vqc_angles);
    if (!heads.empty()) {
        const auto &h = heads[k];
        groups.push_back(h.w1);
        groups.push_back(h.b1);
        groups.push_back(h.w2);
        groups.push_back(h.b2);
    }
    return groups;
}

void Federation::set_party_params(int k, const ParamGroups &groups) {
    const auto shape = party_params(k);
    if (groups.size() != shape.size()) throw PreconditionError("party parameter group count mismatch");
    for (std::size_t g = 0; g < groups.size(); ++g) {
        if (groups[g].size() != shape[g].size()) throw PreconditionError("party parameter group size mismatch");
    }
    auto &p = parties.at(k);
    const int L = p.ttn.num_cores();
    for (int l = 0; l < L; ++l) p.ttn.cores()[l] = groups[l];
    p.vqc_angles = groups[L];
    if (!heads.empty()) {
        auto &h = heads[k];
        h.w1 = groups[L + 1];
        h.b1 = groups[L + 2];
        h.w2 = groups[L + 3];
        h.b2 = groups[L + 4];
    }
}

ParamGroups Federation::server_params() const {
    if (server.empty()) return {};
    return {server};
}

void Federation::set_server_params(const ParamGroups &groups) {
    if (server.empty() && groups.empty()) return;
    if (groups.size() != 1 || groups[0].size() != server.size()) {
        throw PreconditionError("server parameter shape mismatch");
    }
    server = groups[0];
}

std::size_t Federation::party_param_count(int k) const {
    std::size_t n = parties.at(k).param_count();
    if (!heads.empty()) n += heads[k].param_count();
    return n;
}

SampleInputs sample_inputs(const data::VerticalDataset &dataset, std::size_t index) {
    SampleInputs in;
    for (int k = 0; k < dataset.num_parties(); ++k) in.push_back(dataset.party_row(k, index));
    return in;
}

SampleResult forward(const Federation &fed, const SampleInputs &inputs, int label, FusionMode mode) {
    check_inputs(fed, inputs);
    check_label(label, fed.num_classes);
    SampleResult r;
    std::vector<Statevector> states;
    for (int k = 0; k < fed.num_parties(); ++k) {
        if (is_classical(fed.kind)) {
            r.party_outputs.push_back(head_forward(fed.parties[k], fed.heads[k], inputs[k]).z);
        } else {
            auto pass = quantum_party_pass(fed.parties[k], inputs[k]);
            r.party_outputs.push_back(std::move(pass.marginals));
            if (mode == FusionMode::Joint) {
                const std::vector<int> all = [&] {
                    std::vector<int> q(pass.out.state.num_qubits());
                    for (std::size_t i = 0; i < q.size(); ++i) q[i] = static_cast<int>(i);
                    return q;
                }();
                states.push_back(teleport::logical_transfer(pass.out.state, all).state);
            }
        }
    }
    const auto logits = server_logits(fed, r.party_outputs, states, mode);
    r.prediction = model::predict(logits);
    r.loss = ce_from_logits(logits, label);
    assert(!has_quantum_output(fed.kind) || r.loss >= model::loss_lower_bound(fed.num_classes) - 1e-9);
    return r;
}

SampleResult full_gradient(const Federation &fed, const SampleInputs &inputs, int label, const TrainConfig &config) {
    check_inputs(fed, inputs);
    check_label(label, fed.num_classes);
    if (config.grad_mode == GradMode::FiniteDifference) {
        return finite_difference_gradient(fed, inputs, label, config.fd_step);
    }
    return parameter_shift_gradient(fed, inputs, label);
}

ParamGroups party_gradient_given(const Federation &fed, int k, std::span<const double> x, int label,
                                 std::span<const std::vector<double>> others_marginals) {
    if (fed.kind != ModelKind::EviQVFL) throw PreconditionError("party_gradient_given needs the evidential model");
    if (static_cast<int>(others_marginals.size()) != fed.num_parties() - 1) {
        throw PreconditionError("expected marginals for every other party");
    }
    check_label(label, fed.num_classes);
    const int C = fed.num_classes;
    const auto pass = quantum_party_pass(fed.parties.at(k), x);
    std::vector<double> others(C, 1.0);
    for (const auto &m : others_marginals) {
        for (int c = 0; c < C; ++c) others[c] *= m.at(c);
    }
    std::vector<double> pl(C);
    for (int c = 0; c < C; ++c) pl[c] = pass.marginals[c] * others[c];
    const auto pred = model::predict(pl);
    std::vector<double> gm(C);
    for (int c = 0; c < C; ++c) gm[c] = (pred.probabilities[c] - (c == label ? 1.0 : 0.0)) * others[c];
    return quantum_party_backward(fed.parties[k], x, pass.out.cache, gm);
}

Prediction baseline_forward(const Federation &fed, const SampleInputs &inputs) {
    return forward(fed, inputs, 0).prediction;
}

void TrainTrace::write_csv(std::ostream &out) const {
    out << "epoch,loss,train_acc,test_acc,seconds\n";
    for (const auto &e : epochs) {
        out << e.epoch << ',' << format_double(e.loss) << ',' << format_double(e.train_accuracy) << ','
            << format_double(e.test_accuracy) << ',' << format_double(e.seconds) << '\n';
    }
}

TrainTrace TrainTrace::read_csv(std::istream &in) {
    TrainTrace trace;
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty trace", 1, 0);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "epoch,loss,train_acc,test_acc,seconds") throw ParseError("unexpected trace header", 1, 0);
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        std::vector<double> values;
        std::size_t col = 0;
        while (std::getline(ss, cell, ',')) {
            ++col;
            try {
                std::size_t used = 0;
                values.push_back(std::stod(cell, &used));
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception &) {
                throw ParseError("non-numeric trace cell '" + cell + "'", row, col);
            }
        }
        if (values.size() != 5) throw ParseError("trace rows need 5 columns", row, values.size());
        EpochRecord e{static_cast<std::size_t>(values[0]), values[1], values[2], values[3], values[4]};
        if (!std::isfinite(e.loss)) throw ParseError("non-finite loss", row, 2);
        if (e.train_accuracy < 0 || e.train_accuracy > 1 || e.test_accuracy < 0 || e.test_accuracy > 1) {
            throw ParseError("accuracy outside [0, 1]", row, 3);
        }
        trace.epochs.push_back(e);
    }
    return trace;
}

EvalResult evaluate(const Federation &fed, const data::VerticalDataset &dataset, FusionMode mode, int threads) {
    const std::size_t n = dataset.num_samples();
    std::vector<double> losses(n);
    std::vector<int> preds(n);
    parallel_for(n, threads, [&](std::size_t i) {
        const auto r = forward(fed, sample_inputs(dataset, i), dataset.labels[i], mode);
        losses[i] = r.loss;
        preds[i] = r.prediction.predicted_class;
    });
    EvalResult out;
    out.predictions = std::move(preds);
    if (n == 0) return out;
    std::size_t correct = 0;
    out.min_loss = losses[0];
    for (std::size_t i = 0; i < n; ++i) {
        out.mean_loss += losses[i];
        out.min_loss = std::min(out.min_loss, losses[i]);
        if (out.predictions[i] == dataset.labels[i]) ++correct;
    }
    out.mean_loss /= static_cast<double>(n);
    out.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    return out;
}

TrainTrace train_run(Federation &fed, const data::VerticalDataset &train_set, const data::VerticalDataset &test_set,
                     const TrainConfig &config) {
    config.validate();
    train_set.validate();
    if (train_set.num_parties() != fed.num_parties()) throw PreconditionError("dataset and model party counts differ");
    TrainTrace trace;
    if (config.epochs == 0) return trace;

    const int K = fed.num_parties();
    std::vector<OptimizerState> party_opt;
    for (int k = 0; k < K; ++k) party_opt.push_back(OptimizerState::zeros_like(fed.party_params(k)));
    OptimizerState server_opt = OptimizerState::zeros_like(fed.server_params());
    const data::BatchSchedule schedule(train_set.num_samples(), config.batch_size, config.seed);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        const auto start = std::chrono::steady_clock::now();
        double loss_sum = 0.0;
        for (const auto &batch : schedule.epoch(epoch)) {
            std::vector<SampleResult> results(batch.size());
            parallel_for(batch.size(), config.threads, [&](std::size_t i) {
                const std::size_t s = batch[i];
                results[i] = full_gradient(fed, sample_inputs(train_set, s), train_set.labels[s], config);
            });
            SampleGradients total;
            total.parties.resize(K);
            for (auto &r : results) {
                loss_sum += r.loss;
                for (int k = 0; k < K; ++k) add_into(total.parties[k], r.grads.parties[k]);
                add_into(total.server, r.grads.server);
            }
            const double inv = 1.0 / static_cast<double>(batch.size());
            for (int k = 0; k < K; ++k) {
                scale(total.parties[k], inv);
                auto params = fed.party_params(k);
                adam_step(party_opt[k], params, total.parties[k], config);
                fed.set_party_params(k, params);
            }
            if (!fed.server.empty()) {
                scale(total.server, inv);
                auto params = fed.server_params();
                adam_step(server_opt, params, total.server, config);
                fed.set_server_params(params);
            }
        }
        EpochRecord rec;
        rec.epoch = epoch + 1;
        rec.loss = loss_sum / static_cast<double>(train_set.num_samples());
        rec.train_accuracy = evaluate(fed, train_set, config.eval_mode, config.threads).accuracy;
        rec.test_accuracy =
            test_set.num_samples() ? evaluate(fed, test_set, config.eval_mode, config.threads).accuracy : 0.0;
        if (config.record_timing) {
            rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
        trace.epochs.push_back(rec);
    }
    return trace;
}

namespace {

double variance(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    return var / static_cast<double>(v.size());
}

std::vector<double> logits_to_grad(std::span<const double> logits, int label) {
    auto g = model::predict(logits).probabilities;
    g[label] -= 1.0;
    return g;
}

}  // namespace

DiagnosticReport barren_plateau_diagnostic(const DiagnosticConfig &config) {
    const int K = config.num_parties;
    const int n = config.party_qubits;
    const int C = config.num_classes;
    DiagnosticReport report;
    report.total_qubits = K * n;
    if (report.total_qubits > qsim::kDefaultMaxQubits) throw CapacityError("variant register exceeds 24 qubits");
    if (K < 1 || n < C || config.seeds < 2) throw PreconditionError("invalid diagnostic configuration");

    constexpr double kTwoPi = 2.0 * std::numbers::pi;
    const int label = 0;
    std::vector<double> server_grads;
    for (int s = 0; s < config.seeds; ++s) {
        RandomStream rng(config.seed, 0xB9A1ULL, static_cast<std::uint64_t>(s));
        Topology topo;
        topo.kind = ModelKind::EviQVFL;
        topo.num_classes = C;
        topo.vqc_blocks = config.party_blocks;
        for (int k = 0; k < K; ++k) topo.party_ttns.emplace_back(std::vector<int>{config.input_size}, std::vector<int>{n},
                                                                 std::vector<int>{1, 1});
        Federation fed = Federation::build(topo);
        std::vector<std::vector<double>> xs(K, std::vector<double>(config.input_size));
        for (int k = 0; k < K; ++k) {
            fed.parties[k].ttn.randomize(rng);
            for (auto &a : fed.parties[k].vqc_angles) a = rng.uniform(0.0, kTwoPi);
            for (auto &v : xs[k]) v = rng.next_uniform();
        }
        SampleInputs inputs(xs.begin(), xs.end());

        const auto g = parameter_shift_gradient(fed, inputs, label);
        report.eviqvfl_grads.push_back(g.grads.parties[0][fed.parties[0].ttn.num_cores()][0]);

        // Variant: every party register moved to the server, one trainable
        // layered circuit over all of them, class c read from qubit c.
        model::AnsatzCircuit layered(report.total_qubits);
        for (int b = 0; b < config.variant_blocks; ++b) layered.add_layer_block();
        std::vector<double> server_angles(layered.num_params());
        for (auto &a : server_angles) a = rng.uniform(0.0, kTwoPi);

        auto joint_logits = [&](const Federation &f, std::span<const double> angles) {
            Statevector joint = model::party_forward(f.parties[0], inputs[0]).state;
            for (int k = 1; k < K; ++k) {
                joint = qsim::tensor_product(joint, model::party_forward(f.parties[k], inputs[k]).state);
            }
            layered.apply(joint, angles);
            return prob_ones(joint, C);
        };
        const auto base = joint_logits(fed, server_angles);
        const auto upstream = logits_to_grad(base, label);

        Federation shifted = fed;
        const double theta = fed.parties[0].vqc_angles[0];
        shifted.parties[0].vqc_angles[0] = theta + kHalfPi;
        const auto plus = joint_logits(shifted, server_angles);
        shifted.parties[0].vqc_angles[0] = theta - kHalfPi;
        const auto minus = joint_logits(shifted, server_angles);
        report.variant_grads.push_back(dot_shift(upstream, plus, minus));

        auto angles = server_angles;
        angles[0] = server_angles[0] + kHalfPi;
        const auto splus = joint_logits(fed, angles);
        angles[0] = server_angles[0] - kHalfPi;
        const auto sminus = joint_logits(fed, angles);
        server_grads.push_back(dot_shift(upstream, splus, sminus));
    }
    report.eviqvfl_variance = variance(report.eviqvfl_grads);
    report.variant_variance = variance(report.variant_grads);
    report.variant_server_variance = variance(server_grads);
    return report;
}

}  // namespace eqvfl::train
