#include "secagg/flsim/train.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "secagg/adversary.hpp"
#include "secagg/ttp.hpp"

namespace secagg::flsim {

namespace {

constexpr std::uint64_t kData = 0x64617461ULL;
constexpr std::uint64_t kPartition = 0x70617274ULL;
constexpr std::uint64_t kRoot = 0x726f6f74ULL;
constexpr std::uint64_t kLocal = 0x6c6f63ULL;
constexpr std::uint64_t kInit = 0x696e6974ULL;
constexpr std::uint64_t kClient = 0x636c69ULL;

DiscriminatorPoly discriminator_for(const ExperimentConfig& cfg) {
    const int qc = cfg.coeff_scale > 0 ? cfg.coeff_scale : cfg.q;
    if (cfg.h_coeffs.empty()) return default_h(qc);
    return {cfg.h_coeffs, qc};
}

} // namespace

TrainTest resolve_dataset(const ExperimentConfig& cfg, rng::Stream& rs) {
    if (cfg.dataset.kind == "idx") {
        std::string dir = cfg.dataset.dir;
        if (const char* env = std::getenv("SECAGG_DATA_DIR"); env && *env) dir = env;
        if (dir.empty()) throw std::invalid_argument("dataset.dir: required for kind=idx");
        return load_idx_dir(dir, cfg.dataset.train_samples, cfg.dataset.test_samples, rs);
    }
    // One pool, one set of class means; train/test split off the same
    // distribution.
    rng::Stream pool_rs = rs.fork({kData, 1});
    const int total = cfg.dataset.train_samples + cfg.dataset.test_samples;
    Dataset pool = synthetic_dataset(total, cfg.dataset.features, cfg.dataset.classes,
                                     cfg.dataset.noise, pool_rs);
    std::vector<int> train_rows, test_rows;
    for (int i = 0; i < cfg.dataset.train_samples; ++i) train_rows.push_back(i);
    for (int i = cfg.dataset.train_samples; i < total; ++i) test_rows.push_back(i);
    TrainTest tt;
    tt.train = subset(pool, train_rows);
    tt.test = subset(pool, test_rows);
    return tt;
}

TrainingResult run_training(const ExperimentConfig& cfg) {
    cfg.validate();
    rng::Stream master(cfg.seed);

    rng::Stream data_rs = master.fork({kData, 0});
    TrainTest data = resolve_dataset(cfg, data_rs);

    rng::Stream part_rs = master.fork({kPartition});
    std::vector<Dataset> client_data = partition(data.train, cfg.n, cfg.gamma, part_rs);
    rng::Stream root_rs = master.fork({kRoot});
    Dataset root_data = sample_dataset(data.train, cfg.root_size, root_rs);

    const std::vector<std::uint32_t> byz = cfg.byzantine_ids();
    auto is_byzantine = [&](std::uint32_t i) {
        return std::find(byz.begin(), byz.end(), i) != byz.end();
    };

    // ML-layer data poisoning.
    Dataset triggered_test;
    if (cfg.attack.kind == "label_flip") {
        for (std::uint32_t i : byz) client_data[i] = label_flip(client_data[i]);
    } else if (cfg.attack.kind == "scaling") {
        for (std::uint32_t i : byz) {
            Dataset& d = client_data[i];
            rng::Stream sel = master.fork({0x747269ULL, i});
            int poisoned = static_cast<int>(cfg.attack.poison_fraction *
                                            static_cast<double>(d.size()));
            Dataset pick = sample_dataset(d, poisoned, sel);
            Dataset stamped =
                apply_trigger(pick, cfg.attack.trigger_size, cfg.attack.target_class, true);
            Dataset merged;
            merged.num_classes = d.num_classes;
            merged.features.resize(d.size() + stamped.size(), d.dim());
            merged.labels.resize(d.size() + stamped.size());
            merged.features << d.features, stamped.features;
            merged.labels << d.labels, stamped.labels;
            d = std::move(merged);
        }
        triggered_test = apply_trigger(data.test, cfg.attack.trigger_size, cfg.attack.target_class,
                                       /*relabel=*/false);
    }

    ModelSpec spec;
    spec.arch = cfg.model == "mlp" ? Arch::Mlp : Arch::Logreg;
    spec.feature_dim = static_cast<int>(data.train.dim());
    spec.num_classes = data.train.num_classes;
    spec.hidden = cfg.hidden;

    rng::Stream init_rs = master.fork({kInit});
    Model model = init_model(spec, init_rs);
    const DiscriminatorPoly h = discriminator_for(cfg);

    TrainingResult result;
    result.model = model;

    const bool secure = cfg.aggregator == "lobyitfl_secure";
    std::optional<FederatorState> fed;
    std::vector<ClientState> client_states;
    std::map<std::uint32_t, MessageTamper> tampers;
    if (secure) {
        ProtocolDims dims;
        dims.n = cfg.n;
        dims.t = cfg.t;
        dims.d = spec.param_dim();
        dims.k = h.degree();
        dims.q = cfg.q;
        dims.coeff_scale = h.coeff_scale;
        dims.iterations = cfg.iterations;
        ProtocolParams params = make_params(dims, cfg.epsilon, cfg.eta);
        params.h = h;
        params.store_messages = cfg.store_transcripts;
        Ttp ttp(dims, master.fork({0x73656564ULL}));
        TtpOutput out = std::move(ttp).initialize(false, params.modulus);
        client_states.reserve(static_cast<std::size_t>(cfg.n));
        for (int i = 0; i < cfg.n; ++i)
            client_states.emplace_back(i, std::move(out.bundles[static_cast<std::size_t>(i)]),
                                       master.fork({kClient, static_cast<std::uint64_t>(i)}));
        fed.emplace(std::move(params), std::move(out.keys), model.w,
                    master.fork({0x66656475ULL}));
        if (cfg.attack.kind == "protocol_corruption") {
            for (std::uint32_t i : byz)
                tampers[i] = protocol_corruption(cfg.attack.corruption_mode,
                                                 cfg.attack.corruption_step,
                                                 fed->params().modulus, cfg.seed ^ i);
        }
    }

    std::string out_dir = cfg.out_dir;
    std::ofstream metrics_csv;
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        if (cfg.store_transcripts)
            std::filesystem::create_directories(out_dir + "/transcripts");
        metrics_csv.open(out_dir + "/metrics.csv");
        metrics_csv << "iteration,loss,test_accuracy,asr,client_bytes_avg,federator_bytes,aborted,"
                       "excluded_total\n";
    }

    for (int g = 0; g < cfg.iterations; ++g) {
        // Root update and local updates; the protocol message carries the
        // gradient-pointing direction w_old - w_new.
        rng::Stream root_train = master.fork({kRoot, static_cast<std::uint64_t>(g)});
        RealVec u0 = -local_train(model, root_data, cfg.eta_local, cfg.local_iters, cfg.batch,
                                  root_train);
        std::vector<RealVec> updates(static_cast<std::size_t>(cfg.n));
        std::vector<RealVec> honest;
        for (int i = 0; i < cfg.n; ++i) {
            rng::Stream cs = master.fork({kLocal, static_cast<std::uint64_t>(g),
                                          static_cast<std::uint64_t>(i)});
            updates[static_cast<std::size_t>(i)] =
                -local_train(model, client_data[static_cast<std::size_t>(i)], cfg.eta_local,
                             cfg.local_iters, cfg.batch, cs);
            if (!is_byzantine(static_cast<std::uint32_t>(i)))
                honest.push_back(updates[static_cast<std::size_t>(i)]);
        }
        if (cfg.attack.kind == "scaling") {
            for (std::uint32_t i : byz) updates[i] *= cfg.attack.scale_factor;
        } else if (cfg.attack.kind == "directed") {
            RealVec crafted = directed_attack(honest, u0, h, cfg.attack.directed_rule);
            for (std::uint32_t i : byz) updates[i] = crafted;
        }

        RoundMetrics rm;
        rm.iteration = g;
        if (secure) {
            RoundInputs in;
            in.g = g;
            in.root_update = u0;
            in.client_updates = updates;
            RoundOutput out = run_iteration(*fed, client_states, in, tampers, cfg.dropouts);
            rm.aborted = out.aborted;
            rm.excluded_total = static_cast<int>(fed->excluded().size());
            std::uint64_t client_sum = 0;
            for (int i = 0; i < cfg.n; ++i) client_sum += out.transcript.client_bytes(i);
            rm.client_bytes_avg = client_sum / static_cast<std::uint64_t>(cfg.n);
            rm.federator_bytes = out.transcript.federator_bytes();
            if (out.aborted) ++result.aborted_rounds;
            model.w = fed->model();
            result.decoded_ratios.push_back(out.ratios);
            if (!out_dir.empty() && cfg.store_transcripts)
                write_transcript(out.transcript, fed->params().modulus->byte_width(),
                                 out_dir + "/transcripts/round_" + std::to_string(g) + ".bin",
                                 out_dir + "/transcripts/round_" + std::to_string(g) + ".json");
        } else {
            RealVec agg;
            if (cfg.aggregator == "fedavg") {
                agg = fedavg(updates);
            } else if (cfg.aggregator == "fltrust_relu") {
                agg = fltrust_relu(updates, u0);
            } else {
                agg = fltrust_poly_real(updates, u0, h);
            }
            model.w -= cfg.eta * agg;
        }

        rm.loss = loss_and_grad(model, data.test.features, data.test.labels, nullptr);
        rm.test_accuracy = accuracy(model, data.test);
        if (cfg.attack.kind == "scaling")
            rm.asr = attack_success_rate(model, triggered_test, cfg.attack.target_class);
        result.rounds.push_back(rm);
        if (metrics_csv.is_open())
            metrics_csv << rm.iteration << "," << rm.loss << "," << rm.test_accuracy << ","
                        << rm.asr << "," << rm.client_bytes_avg << "," << rm.federator_bytes << ","
                        << (rm.aborted ? 1 : 0) << "," << rm.excluded_total << "\n";
    }

    result.model = model;
    result.final_accuracy = result.rounds.empty() ? 0.0 : result.rounds.back().test_accuracy;
    result.final_asr = result.rounds.empty() ? 0.0 : result.rounds.back().asr;

    if (!out_dir.empty()) {
        nlohmann::json j;
        j["final_accuracy"] = result.final_accuracy;
        j["final_asr"] = result.final_asr;
        j["aborted_rounds"] = result.aborted_rounds;
        j["iterations"] = cfg.iterations;
        j["aggregator"] = cfg.aggregator;
        j["attack"] = cfg.attack.kind;
        j["seed"] = cfg.seed;
        std::ofstream(out_dir + "/summary.json") << j.dump(2) << "\n";
    }
    return result;
}

} // namespace secagg::flsim
