#include "secagg/config.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace secagg {

namespace {

using nlohmann::json;

template <typename T>
void take(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
    if (n < 1) fail("n: must be >= 1");
    if (t < 0 || t >= n) fail("t: need 0 <= t < n");
    if (e < 0 || s < 0) fail("e/s: must be >= 0");
    if (e + t + s + 1 > n)
        fail("n: threat model requires n >= e+t+s+1 (" + std::to_string(n) + " < " +
             std::to_string(e + t + s + 1) + ")");
    if (q < 2) fail("q: must be >= 2");
    if (epsilon <= 0.0) fail("epsilon: must be > 0");
    if (iterations < 1) fail("iterations: must be >= 1");
    if (root_size < 1) fail("root_size: must be >= 1");
    if (batch < 1) fail("batch: must be >= 1");
    if (local_iters < 1) fail("local_iters: must be >= 1");
    const std::set<std::string> aggs{"fedavg", "fltrust_relu", "fltrust_poly_real",
                                     "lobyitfl_secure"};
    if (!aggs.count(aggregator)) fail("aggregator: unknown value '" + aggregator + "'");
    if (model != "logreg" && model != "mlp") fail("model: unknown value '" + model + "'");
    const std::set<std::string> kinds{"none", "label_flip", "scaling", "directed",
                                      "protocol_corruption"};
    if (!kinds.count(attack.kind)) fail("attack.kind: unknown value '" + attack.kind + "'");
    const std::set<std::string> modes{"value", "tag", "both", "opening"};
    if (!modes.count(attack.corruption_mode)) fail("attack.corruption_mode: unknown value");
    if (dataset.kind != "synthetic" && dataset.kind != "idx") fail("dataset.kind: unknown value");
    if (!byzantine.empty() && static_cast<int>(byzantine.size()) != e)
        fail("byzantine: list size must equal e");
    for (std::uint32_t id : byzantine)
        if (id >= static_cast<std::uint32_t>(n)) fail("byzantine: id out of range");
    for (const DropoutEvent& ev : dropouts) {
        if (ev.client >= static_cast<std::uint32_t>(n)) fail("dropouts: client out of range");
        if (ev.step < 2 || ev.step > 5) fail("dropouts: step must be in [2,5]");
    }
    std::set<std::uint32_t> ds;
    for (const DropoutEvent& ev : dropouts) ds.insert(ev.client);
    if (static_cast<int>(ds.size()) > s) fail("dropouts: more distinct clients than s");
}

std::vector<std::uint32_t> ExperimentConfig::byzantine_ids() const {
    if (!byzantine.empty()) return byzantine;
    std::vector<std::uint32_t> out;
    for (int i = n - e; i < n; ++i) out.push_back(static_cast<std::uint32_t>(i));
    return out;
}

ExperimentConfig parse_config_json(const std::string& text) {
    json j = json::parse(text);
    ExperimentConfig c;
    take(j, "n", c.n);
    take(j, "t", c.t);
    take(j, "e", c.e);
    take(j, "s", c.s);
    take(j, "q", c.q);
    take(j, "epsilon", c.epsilon);
    take(j, "coeff_scale", c.coeff_scale);
    take(j, "gamma", c.gamma);
    take(j, "eta", c.eta);
    take(j, "eta_local", c.eta_local);
    take(j, "local_iters", c.local_iters);
    take(j, "batch", c.batch);
    take(j, "iterations", c.iterations);
    take(j, "root_size", c.root_size);
    take(j, "aggregator", c.aggregator);
    take(j, "model", c.model);
    take(j, "hidden", c.hidden);
    take(j, "seed", c.seed);
    take(j, "out_dir", c.out_dir);
    take(j, "store_transcripts", c.store_transcripts);
    take(j, "byzantine", c.byzantine);
    take(j, "h_coeffs", c.h_coeffs);
    if (j.contains("dataset")) {
        const json& d = j.at("dataset");
        take(d, "kind", c.dataset.kind);
        take(d, "features", c.dataset.features);
        take(d, "classes", c.dataset.classes);
        take(d, "train_samples", c.dataset.train_samples);
        take(d, "test_samples", c.dataset.test_samples);
        take(d, "noise", c.dataset.noise);
        take(d, "dir", c.dataset.dir);
    }
    if (j.contains("attack")) {
        const json& a = j.at("attack");
        take(a, "kind", c.attack.kind);
        take(a, "scale_factor", c.attack.scale_factor);
        take(a, "trigger_size", c.attack.trigger_size);
        take(a, "target_class", c.attack.target_class);
        take(a, "poison_fraction", c.attack.poison_fraction);
        take(a, "corruption_mode", c.attack.corruption_mode);
        take(a, "corruption_step", c.attack.corruption_step);
        take(a, "directed_rule", c.attack.directed_rule);
    }
    if (j.contains("dropouts")) {
        for (const json& ev : j.at("dropouts")) {
            DropoutEvent e;
            e.client = ev.at("client").get<std::uint32_t>();
            take(ev, "iteration", e.iteration);
            take(ev, "step", e.step);
            c.dropouts.push_back(e);
        }
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_json(ss.str());
}

} // namespace secagg
